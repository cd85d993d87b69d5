#pragma once

#include <stdexcept>
#include <string>

namespace feamoe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feature-vector length does not match the model or schema.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input data. Carries the 1-based data row when known (0 otherwise).
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t row = 0)
      : Error(row == 0 ? what : what + " (row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

}  // namespace feamoe
