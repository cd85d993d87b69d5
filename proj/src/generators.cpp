#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "feamoe/data.hpp"
#include "feamoe/error.hpp"

namespace feamoe {

void DriftSpec::validate() const {
  if (segmentSizes.empty()) throw ConfigError("drift spec needs at least one segment");
  for (auto s : segmentSizes) {
    if (s == 0) throw ConfigError("segment sizes must be positive");
  }
  if (!(realismSortFraction > 0.0 && realismSortFraction <= 1.0)) {
    throw ConfigError("realism sort fraction must lie in (0, 1]");
  }
}

namespace {

constexpr double kToySpread = 0.5;
constexpr double kToyOffset = 2.0;

StreamInstance blob(std::mt19937_64& rng, double cx, double cy, int label, int group) {
  std::normal_distribution<double> noise(0.0, kToySpread);
  StreamInstance inst;
  inst.x = {cx + noise(rng), cy + noise(rng)};
  inst.label = label;
  inst.group = group;
  return inst;
}

}  // namespace

ExpertParams toySegmentOneSeparator() { return ExpertParams{{1.0, 0.0}, 0.0}; }

SegmentedStream toyTwoSegmentStream(const DriftSpec& spec) {
  spec.validate();
  if (spec.segmentSizes.size() != 2) throw ConfigError("the toy stream has exactly two segments");
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution majority(0.7);
  SegmentedStream out;
  out.featureNames = {"x0", "x1"};

  // Segment 1: label decided by the side of x0 = 0; the positive blob is
  // mostly privileged.
  for (std::size_t i = 0; i < spec.segmentSizes[0]; ++i) {
    const int label = coin(rng) ? 1 : 0;
    const int group = majority(rng) ? label : 1 - label;
    out.instances.push_back(blob(rng, label == 1 ? kToyOffset : -kToyOffset, 0.0, label, group));
  }
  out.segmentEnds.push_back(out.instances.size());

  // Segment 2: label decided by the side of x1 = 0; group 0 sits at x0 < 0,
  // group 1 at x0 > 0, so the old separator accepts all of group 1 and
  // rejects all of group 0.
  for (std::size_t i = 0; i < spec.segmentSizes[1]; ++i) {
    const int label = coin(rng) ? 1 : 0;
    const int group = coin(rng) ? 1 : 0;
    out.instances.push_back(blob(rng, group == 1 ? kToyOffset : -kToyOffset,
                                 label == 1 ? kToyOffset : -kToyOffset, label, group));
  }
  out.segmentEnds.push_back(out.instances.size());
  return out;
}

SegmentedStream biasedStream(const BiasedStreamSpec& spec) {
  if (spec.size == 0 || spec.numericFeatures == 0) throw ConfigError("biased stream needs a size and features");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  SegmentedStream out;
  for (std::size_t j = 0; j < spec.numericFeatures; ++j) out.featureNames.push_back("x" + std::to_string(j));
  out.featureNames.push_back("group");
  out.groupFeature = spec.numericFeatures;

  for (std::size_t i = 0; i < spec.size; ++i) {
    StreamInstance inst;
    inst.group = coin(rng) ? 1 : 0;
    double score = spec.groupEffect * (inst.group - 0.5);
    for (std::size_t j = 0; j < spec.numericFeatures; ++j) {
      const double v = normal(rng);
      inst.x.push_back(v);
      // Alternating-sign unit weights with decaying magnitude.
      score += (j % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(j + 1) * v;
    }
    score += spec.noise * normal(rng);
    inst.label = score > 0.0 ? 1 : 0;
    inst.x.push_back(static_cast<double>(inst.group));
    out.instances.push_back(std::move(inst));
  }
  out.segmentEnds.push_back(out.instances.size());
  return out;
}

StreamInstance flipGroup(const StreamInstance& instance, std::optional<std::size_t> groupFeature) {
  StreamInstance out = instance;
  out.group = 1 - instance.group;
  if (groupFeature) {
    if (*groupFeature >= out.x.size()) throw DimensionError("group feature index out of range");
    out.x[*groupFeature] = 1.0 - out.x[*groupFeature];
  }
  return out;
}

namespace {

double squaredDistance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
  return acc;
}

std::size_t nearest(const std::vector<std::vector<double>>& centers, std::span<const double> x, double* dist) {
  std::size_t best = 0;
  double bestDist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squaredDistance(centers[c], x);
    if (d < bestDist) {
      bestDist = d;
      best = c;
    }
  }
  if (dist) *dist = bestDist;
  return best;
}

}  // namespace

KMeansResult kmeans(std::span<const StreamInstance> data, std::size_t k, std::size_t iterations,
                    std::uint64_t seed) {
  if (data.empty()) throw DataError("k-means needs data");
  const std::size_t dim = data.front().x.size();
  k = std::min(k, data.size());

  // Seed with k distinct points sampled without replacement.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  KMeansResult r;
  for (std::size_t i = 0; i < data.size() && r.centers.size() < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, data.size() - 1);
    std::swap(order[i], order[pick(rng)]);
    const auto& candidate = data[order[i]].x;
    const bool duplicate = std::any_of(r.centers.begin(), r.centers.end(),
                                       [&](const auto& c) { return squaredDistance(c, candidate) == 0.0; });
    if (!duplicate) r.centers.push_back(candidate);
  }

  r.assignment.assign(data.size(), 0);
  for (std::size_t it = 0; it < iterations; ++it) {
    bool changed = it == 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t c = nearest(r.centers, data[i].x, nullptr);
      changed = changed || c != r.assignment[i];
      r.assignment[i] = c;
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(r.centers.size(), std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(r.centers.size(), 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      ++counts[r.assignment[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[r.assignment[i]][j] += data[i].x[j];
    }
    for (std::size_t c = 0; c < r.centers.size(); ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its center
      for (std::size_t j = 0; j < dim; ++j) r.centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
  }
  for (std::size_t i = 0; i < data.size(); ++i) r.assignment[i] = nearest(r.centers, data[i].x, nullptr);
  return r;
}

SegmentedStream attributeFlipStream(const SegmentedStream& base, const DriftSpec& spec) {
  spec.validate();
  if (base.instances.empty()) throw DataError("attribute flip needs a non-empty base stream");
  const KMeansResult clusters = kmeans(base.instances, 10, 50, spec.seed);

  std::vector<StreamInstance> flipped;
  std::vector<double> realism;
  for (const auto& inst : base.instances) {
    flipped.push_back(flipGroup(inst, base.groupFeature));
    double d = 0.0;
    nearest(clusters.centers, flipped.back().x, &d);
    realism.push_back(d);
  }
  std::vector<std::size_t> order(flipped.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return realism[a] < realism[b]; });
  const auto keep = static_cast<std::size_t>(
      std::llround(spec.realismSortFraction * static_cast<double>(flipped.size())));

  SegmentedStream out;
  out.featureNames = base.featureNames;
  out.groupFeature = base.groupFeature;
  out.instances = base.instances;
  out.segmentEnds.push_back(out.instances.size());
  for (std::size_t i = 0; i < std::max<std::size_t>(keep, 1); ++i) out.instances.push_back(flipped[order[i]]);
  out.segmentEnds.push_back(out.instances.size());
  return out;
}

}  // namespace feamoe
