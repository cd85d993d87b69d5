#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "feamoe/loss.hpp"
#include "feamoe/trainer.hpp"

namespace feamoe {

// Column layout of a labeled CSV file.
struct Schema {
  std::vector<std::string> featureColumns;
  std::string labelColumn;
  std::string groupColumn;
  bool groupIncludedAsFeature = false;
  std::string positiveLabelValue = "1";
  std::string privilegedGroupValue = "1";
  // Declared categories per categorical feature column; expanded in
  // lexicographic order.
  std::map<std::string, std::vector<std::string>> categoricalColumns;
  bool standardize = true;

  void validate() const;
  // Model-space feature names after one-hot expansion; the group indicator,
  // when included, comes last.
  std::vector<std::string> expandedFeatureNames() const;
  std::size_t featureDim() const { return expandedFeatureNames().size(); }
  // Index of the group indicator in model space, if included.
  std::optional<std::size_t> groupFeatureIndex() const;
  std::size_t numericCount() const;
};

// Online per-feature mean and variance (Welford). Row t is transformed with
// the statistics of rows 0..t-1 only.
class Standardizer {
 public:
  Standardizer() = default;
  explicit Standardizer(std::size_t features);

  // Transforms in place, then folds the raw values into the statistics
  // unless frozen. Features with variance < 1e-12 pass through unchanged.
  void apply(std::span<double> values);

  std::size_t features() const { return mean_.size(); }
  std::size_t count() const { return count_; }
  double mean(std::size_t j) const { return mean_[j]; }
  double variance(std::size_t j) const;
  // Passthrough flags from the most recent apply().
  const std::vector<bool>& passthrough() const { return passthrough_; }

  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  // Raw accumulator access for serialization.
  const std::vector<double>& means() const { return mean_; }
  const std::vector<double>& sumsOfSquares() const { return m2_; }
  static Standardizer restore(std::size_t count, std::vector<double> mean, std::vector<double> m2);

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
  std::vector<bool> passthrough_;
  bool frozen_ = false;
};

// RFC 4180 record reader.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}
  // Next record, or nullopt at end of input.
  std::optional<std::vector<std::string>> next();

 private:
  std::istream& in_;
  bool first_ = true;
};

// Streams StreamInstances from a CSV file under a schema.
class CsvInstanceSource : public InstanceSource {
 public:
  CsvInstanceSource(const std::string& path, Schema schema, Standardizer& standardizer);
  ~CsvInstanceSource() override;

  std::optional<StreamInstance> next() override;
  std::size_t rowsRead() const { return row_; }
  std::size_t skippedRows() const { return skipped_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Schema schema_;
  Standardizer& standardizer_;
  std::size_t row_ = 0;
  std::size_t skipped_ = 0;
};

struct IngestResult {
  std::vector<StreamInstance> instances;
  std::size_t skippedRows = 0;
};

IngestResult ingestCsv(const std::string& path, const Schema& schema, Standardizer& standardizer);

// Materialized stream with cumulative segment end positions.
struct SegmentedStream {
  std::vector<StreamInstance> instances;
  std::vector<std::size_t> segmentEnds;
  std::vector<std::string> featureNames;
  std::optional<std::size_t> groupFeature;
  std::size_t skippedRows = 0;
};

SegmentedStream segmentReplay(std::span<const std::string> paths, const Schema& schema, Standardizer& standardizer);

enum class DriftKind { ToyTwoSegment, AttributeFlip, SegmentReplay };

struct DriftSpec {
  DriftKind kind = DriftKind::ToyTwoSegment;
  std::vector<std::size_t> segmentSizes{2000, 2000};
  std::uint64_t seed = 0;
  double realismSortFraction = 1.0;

  void validate() const;
};

// Two Gaussian-blob segments in two dimensions. Segment 1 is separated by
// x0 = 0; segment 2 moves the label boundary to x1 = 0 and places group 0's
// positives on the negative side of the old boundary.
SegmentedStream toyTwoSegmentStream(const DriftSpec& spec);

// Hyperplane (w, b) that separates segment 1 of the toy stream.
ExpertParams toySegmentOneSeparator();

// Stream whose labels depend on the protected group; the group indicator is
// the last feature.
struct BiasedStreamSpec {
  std::size_t size = 10000;
  std::size_t numericFeatures = 3;
  double groupEffect = 0.75;
  double noise = 0.5;
  std::uint64_t seed = 0;
};
SegmentedStream biasedStream(const BiasedStreamSpec& spec);

// Copy of an instance with the group bit (and its feature column, if any) flipped.
StreamInstance flipGroup(const StreamInstance& instance, std::optional<std::size_t> groupFeature);

struct KMeansResult {
  std::vector<std::vector<double>> centers;
  std::vector<std::size_t> assignment;
};
KMeansResult kmeans(std::span<const StreamInstance> data, std::size_t k, std::size_t iterations, std::uint64_t seed);

// Base stream followed by its group-flipped copy, the copy ordered by
// distance to the nearest base k-means center and truncated to
// realismSortFraction of its length.
SegmentedStream attributeFlipStream(const SegmentedStream& base, const DriftSpec& spec);

}  // namespace feamoe
