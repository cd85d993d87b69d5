#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "feamoe/data.hpp"
#include "feamoe/metrics.hpp"
#include "feamoe/trainer.hpp"

namespace feamoe {

struct PrequentialRun {
  TrainerState state;
  std::vector<MetricsReport> reports;
};

// Test-then-train over the stream, starting from `state`.
void continuePrequential(TrainerState& state, const SegmentedStream& stream, PrequentialTracker& tracker);

// FEAMOE trained online over the whole stream.
PrequentialRun runPrequential(const TrainerConfig& config, const SegmentedStream& stream, std::size_t window,
                              std::size_t stride);

// Single unconstrained linear expert trained on the first segment, then frozen.
PrequentialRun runFrozenBaseline(const TrainerConfig& config, const SegmentedStream& stream, std::size_t window,
                                 std::size_t stride);

// Single unconstrained linear expert trained online over the whole stream.
PrequentialRun runNoGrowth(const TrainerConfig& config, const SegmentedStream& stream, std::size_t window,
                           std::size_t stride);

// Mixture of one expert per segment, each fit on its own segment, then
// trained online over the stream.
PrequentialRun runWarmStart(const TrainerConfig& config, const SegmentedStream& stream, std::size_t window,
                            std::size_t stride);

struct ArmResult {
  std::string arm;
  std::vector<MetricsReport> reports;
};

// Arms: frozen, feamoe, no-growth, and warm-start when the stream has more
// than one segment.
std::vector<ArmResult> runDriftComparison(const TrainerConfig& config, const SegmentedStream& stream,
                                          std::size_t window, std::size_t stride);

struct SweepPoint {
  std::size_t k = 0;
  std::size_t experts = 0;
  MetricsReport finalWindow;
};

std::vector<SweepPoint> kSweep(const TrainerConfig& config, const SegmentedStream& stream,
                               std::span<const std::size_t> ks, std::size_t window);

}  // namespace feamoe
