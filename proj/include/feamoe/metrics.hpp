#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "feamoe/loss.hpp"
#include "feamoe/model.hpp"
#include "feamoe/trainer.hpp"

namespace feamoe {

// Bits of MetricsReport::coldFlags; set when a metric had an empty denominator.
enum ColdFlag : unsigned {
  kColdAccuracy = 1u << 0,
  kColdSpd = 1u << 1,
  kColdAod = 1u << 2,
  kColdBurden = 1u << 3,
};

struct WindowEntry {
  int prediction = 0;
  int label = 0;
  int group = 0;
  double distance = 0.0;

  friend bool operator==(const WindowEntry&, const WindowEntry&) = default;
};

// Sufficient statistics for every metric: confusion cells indexed
// [group][label][prediction] and boundary distances of negatively
// classified entries per group.
struct ConfusionCounts {
  std::array<std::array<std::array<std::size_t, 2>, 2>, 2> cell{};
  std::array<double, 2> negativeDistanceSum{0.0, 0.0};
  std::array<std::size_t, 2> negativeCount{0, 0};

  void add(const WindowEntry& e);
  void remove(const WindowEntry& e);
  std::size_t total() const;
  std::size_t groupTotal(int group) const;
};

struct MetricValue {
  double value = 0.0;
  bool cold = false;
};

MetricValue accuracy(const ConfusionCounts& c);
// |P(yhat=1 | A=0) - P(yhat=1 | A=1)|
MetricValue spd(const ConfusionCounts& c);
// 0.5 [(FPR0 - FPR1) + (TPR0 - TPR1)], signed; missing rates count as 0.
MetricValue aodSigned(const ConfusionCounts& c);
MetricValue aod(const ConfusionCounts& c);
// |mean distance | A=0, yhat=0  -  mean distance | A=1, yhat=0|
MetricValue burdenMetric(const ConfusionCounts& c);

// Fixed-capacity sliding window with counts maintained on push and eviction.
class MetricsWindow {
 public:
  explicit MetricsWindow(std::size_t capacity);

  void push(const WindowEntry& entry);
  void clear();

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return ring_.size(); }
  const ConfusionCounts& counts() const { return counts_; }
  // Entries from oldest to newest.
  std::vector<WindowEntry> entries() const;

 private:
  std::vector<WindowEntry> ring_;
  std::size_t head_ = 0;  // index of the oldest entry
  std::size_t size_ = 0;
  ConfusionCounts counts_;
};

MetricValue spd(const MetricsWindow& w);
MetricValue aod(const MetricsWindow& w);
MetricValue burdenMetric(const MetricsWindow& w);

struct MetricsReport {
  std::size_t windowStart = 0;  // first stream position covered
  std::size_t windowEnd = 0;    // one past the last position covered
  double accuracy = 0.0;
  double spdAbs = 0.0;
  double aodAbs = 0.0;
  double aodSigned = 0.0;
  double burdenAbs = 0.0;
  unsigned coldFlags = 0;
  std::size_t segmentIndex = 0;
  std::size_t count = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport makeReport(const ConfusionCounts& c, std::size_t windowStart, std::size_t windowEnd);

// Full-set metrics. Scores instances in parallel, accumulates in input order.
MetricsReport evaluateDataset(const MixtureModel& model, std::span<const StreamInstance> instances);

namespace serial {
MetricsReport evaluateDataset(const MixtureModel& model, std::span<const StreamInstance> instances);
}  // namespace serial

// Prequential report stream: one report every `stride` positions over the
// last `window` records, plus a closing report at the end of the stream.
class PrequentialTracker {
 public:
  PrequentialTracker(std::size_t window, std::size_t stride, std::vector<std::size_t> segmentEnds = {});

  void observe(const PrequentialRecord& record);
  void finish();

  const std::vector<MetricsReport>& reports() const { return reports_; }
  const MetricsWindow& window() const { return window_; }

 private:
  void emit();
  std::size_t segmentOf(std::size_t position) const;

  MetricsWindow window_;
  std::size_t stride_;
  std::vector<std::size_t> segmentEnds_;
  std::size_t seen_ = 0;
  std::size_t lastEmit_ = 0;
  std::vector<MetricsReport> reports_;
};

}  // namespace feamoe
