#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "feamoe/loss.hpp"
#include "feamoe/model.hpp"

namespace feamoe::fixtures {

inline MixtureModel randomModel(std::mt19937_64& rng, std::size_t dim, std::size_t experts, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<ExpertParams> ex(experts);
  GateParams gate;
  for (auto& e : ex) {
    for (std::size_t j = 0; j < dim; ++j) e.weights.push_back(n(rng));
    e.bias = n(rng);
    gate.weights.emplace_back();
    for (std::size_t j = 0; j < dim; ++j) gate.weights.back().push_back(n(rng));
    gate.biases.push_back(n(rng));
  }
  return MixtureModel(ex, gate);
}

inline FeatureVector randomVector(std::mt19937_64& rng, std::size_t dim, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  FeatureVector x(dim);
  for (auto& v : x) v = n(rng);
  return x;
}

// Parameters and inputs on a 1/8 grid, so every dot product is exact.
inline double dyadic(std::mt19937_64& rng) { return static_cast<double>(static_cast<int>(rng() % 33) - 16) / 8.0; }

inline MixtureModel dyadicModel(std::mt19937_64& rng, std::size_t dim, std::size_t experts) {
  std::vector<ExpertParams> ex(experts);
  GateParams gate;
  for (auto& e : ex) {
    for (std::size_t j = 0; j < dim; ++j) e.weights.push_back(dyadic(rng));
    e.bias = dyadic(rng);
    gate.weights.emplace_back();
    for (std::size_t j = 0; j < dim; ++j) gate.weights.back().push_back(dyadic(rng));
    gate.biases.push_back(dyadic(rng));
  }
  return MixtureModel(ex, gate);
}

inline FeatureVector dyadicVector(std::mt19937_64& rng, std::size_t dim) {
  FeatureVector x(dim);
  for (auto& v : x) v = dyadic(rng);
  return x;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratchDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("feamoe_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace feamoe::fixtures
