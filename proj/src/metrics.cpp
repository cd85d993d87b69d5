#include "feamoe/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "feamoe/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace feamoe {

void ConfusionCounts::add(const WindowEntry& e) {
  ++cell[e.group][e.label][e.prediction];
  if (e.prediction == 0) {
    negativeDistanceSum[e.group] += e.distance;
    ++negativeCount[e.group];
  }
}

void ConfusionCounts::remove(const WindowEntry& e) {
  --cell[e.group][e.label][e.prediction];
  if (e.prediction == 0) {
    negativeDistanceSum[e.group] -= e.distance;
    --negativeCount[e.group];
  }
}

std::size_t ConfusionCounts::groupTotal(int group) const {
  const auto& g = cell[group];
  return g[0][0] + g[0][1] + g[1][0] + g[1][1];
}

std::size_t ConfusionCounts::total() const { return groupTotal(0) + groupTotal(1); }

namespace {

double ratio(std::size_t num, std::size_t den) { return static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

MetricValue accuracy(const ConfusionCounts& c) {
  const std::size_t n = c.total();
  if (n == 0) return {0.0, true};
  std::size_t correct = 0;
  for (int a = 0; a < 2; ++a) correct += c.cell[a][0][0] + c.cell[a][1][1];
  return {ratio(correct, n), false};
}

MetricValue spd(const ConfusionCounts& c) {
  const std::size_t n0 = c.groupTotal(0);
  const std::size_t n1 = c.groupTotal(1);
  if (n0 == 0 || n1 == 0) return {0.0, true};
  const double r0 = ratio(c.cell[0][0][1] + c.cell[0][1][1], n0);
  const double r1 = ratio(c.cell[1][0][1] + c.cell[1][1][1], n1);
  return {std::abs(r0 - r1), false};
}

MetricValue aodSigned(const ConfusionCounts& c) {
  bool cold = false;
  // Positive-prediction rate among entries with the given group and label.
  auto rate = [&](int a, int d) {
    const std::size_t den = c.cell[a][d][0] + c.cell[a][d][1];
    if (den == 0) {
      cold = true;
      return 0.0;
    }
    return ratio(c.cell[a][d][1], den);
  };
  const double fpr0 = rate(0, 0), fpr1 = rate(1, 0);
  const double tpr0 = rate(0, 1), tpr1 = rate(1, 1);
  return {0.5 * ((fpr0 - fpr1) + (tpr0 - tpr1)), cold};
}

MetricValue aod(const ConfusionCounts& c) {
  MetricValue v = aodSigned(c);
  v.value = std::abs(v.value);
  return v;
}

MetricValue burdenMetric(const ConfusionCounts& c) {
  if (c.negativeCount[0] == 0 || c.negativeCount[1] == 0) return {0.0, true};
  const double m0 = c.negativeDistanceSum[0] / static_cast<double>(c.negativeCount[0]);
  const double m1 = c.negativeDistanceSum[1] / static_cast<double>(c.negativeCount[1]);
  return {std::abs(m0 - m1), false};
}

MetricsWindow::MetricsWindow(std::size_t capacity) : ring_(capacity) {
  if (capacity == 0) throw ConfigError("metrics window capacity must be at least 1");
}

void MetricsWindow::push(const WindowEntry& entry) {
  if (size_ == ring_.size()) {
    counts_.remove(ring_[head_]);
    ring_[head_] = entry;
    head_ = (head_ + 1) % ring_.size();
  } else {
    ring_[(head_ + size_) % ring_.size()] = entry;
    ++size_;
  }
  counts_.add(entry);
}

void MetricsWindow::clear() {
  head_ = 0;
  size_ = 0;
  counts_ = {};
}

std::vector<WindowEntry> MetricsWindow::entries() const {
  std::vector<WindowEntry> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back(ring_[(head_ + i) % ring_.size()]);
  return out;
}

MetricValue spd(const MetricsWindow& w) { return spd(w.counts()); }
MetricValue aod(const MetricsWindow& w) { return aod(w.counts()); }
MetricValue burdenMetric(const MetricsWindow& w) { return burdenMetric(w.counts()); }

MetricsReport makeReport(const ConfusionCounts& c, std::size_t windowStart, std::size_t windowEnd) {
  MetricsReport r;
  r.windowStart = windowStart;
  r.windowEnd = windowEnd;
  r.count = c.total();
  const MetricValue acc = accuracy(c);
  const MetricValue s = spd(c);
  const MetricValue a = aodSigned(c);
  const MetricValue b = burdenMetric(c);
  r.accuracy = acc.value;
  r.spdAbs = s.value;
  r.aodSigned = a.value;
  r.aodAbs = std::abs(a.value);
  r.burdenAbs = b.value;
  r.coldFlags = (acc.cold ? kColdAccuracy : 0u) | (s.cold ? kColdSpd : 0u) | (a.cold ? kColdAod : 0u) |
                (b.cold ? kColdBurden : 0u);
  return r;
}

namespace {

void checkDataset(const MixtureModel& model, std::span<const StreamInstance> instances) {
  if (instances.empty()) throw DataError("cannot evaluate an empty dataset");
  for (const auto& inst : instances) {
    validateInstance(inst);
    checkDimension(model, inst.x);
  }
}

WindowEntry toEntry(const PrequentialRecord& r) { return {r.prediction, r.label, r.group, r.distance}; }

}  // namespace

MetricsReport evaluateDataset(const MixtureModel& model, std::span<const StreamInstance> instances) {
  checkDataset(model, instances);
  const auto n = static_cast<std::ptrdiff_t>(instances.size());
  std::vector<PrequentialRecord> records(instances.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    records[i] = score(model, instances[i], static_cast<std::size_t>(i));
  }
  ConfusionCounts counts;
  for (const auto& r : records) counts.add(toEntry(r));
  return makeReport(counts, 0, instances.size());
}

namespace serial {

MetricsReport evaluateDataset(const MixtureModel& model, std::span<const StreamInstance> instances) {
  checkDataset(model, instances);
  ConfusionCounts counts;
  for (std::size_t i = 0; i < instances.size(); ++i) counts.add(toEntry(score(model, instances[i], i)));
  return makeReport(counts, 0, instances.size());
}

}  // namespace serial

PrequentialTracker::PrequentialTracker(std::size_t window, std::size_t stride, std::vector<std::size_t> segmentEnds)
    : window_(window), stride_(std::max<std::size_t>(1, stride)), segmentEnds_(std::move(segmentEnds)) {}

void PrequentialTracker::observe(const PrequentialRecord& record) {
  window_.push(toEntry(record));
  ++seen_;
  if (seen_ % stride_ == 0) emit();
}

void PrequentialTracker::finish() {
  if (seen_ > 0 && lastEmit_ != seen_) emit();
}

void PrequentialTracker::emit() {
  MetricsReport r = makeReport(window_.counts(), seen_ - window_.size(), seen_);
  r.segmentIndex = segmentOf(seen_ - 1);
  reports_.push_back(r);
  lastEmit_ = seen_;
}

std::size_t PrequentialTracker::segmentOf(std::size_t position) const {
  // segmentEnds_ holds cumulative segment sizes.
  const auto it = std::upper_bound(segmentEnds_.begin(), segmentEnds_.end(), position);
  const auto idx = static_cast<std::size_t>(std::distance(segmentEnds_.begin(), it));
  return segmentEnds_.empty() ? 0 : std::min(idx, segmentEnds_.size() - 1);
}

}  // namespace feamoe
