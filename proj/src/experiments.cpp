#include "feamoe/experiments.hpp"

#include <algorithm>

#include "feamoe/error.hpp"

namespace feamoe {

namespace {

std::size_t dimOf(const SegmentedStream& stream) {
  if (stream.instances.empty()) throw DataError("stream is empty");
  return stream.instances.front().x.size();
}

TrainerConfig unconstrainedSingle(const TrainerConfig& config) {
  TrainerConfig cfg = config;
  cfg.maxExperts = 1;
  cfg.deltaLambda = {0.0, 0.0, 0.0};
  cfg.growthPolicy = GrowthPolicy::FixedInterval;
  return cfg;
}

}  // namespace

void continuePrequential(TrainerState& state, const SegmentedStream& stream, PrequentialTracker& tracker) {
  for (std::size_t pos = 0; pos < stream.instances.size(); ++pos) {
    const StreamInstance& inst = stream.instances[pos];
    tracker.observe(score(state.model, inst, pos));
    stepOne(state, inst);
    maybeGrow(state);
  }
  tracker.finish();
}

PrequentialRun runPrequential(const TrainerConfig& config, const SegmentedStream& stream, std::size_t window,
                              std::size_t stride) {
  PrequentialTracker tracker(window, stride, stream.segmentEnds);
  PrequentialRun run{initTrainer(config, dimOf(stream)), {}};
  continuePrequential(run.state, stream, tracker);
  run.reports = tracker.reports();
  return run;
}

PrequentialRun runFrozenBaseline(const TrainerConfig& config, const SegmentedStream& stream, std::size_t window,
                                 std::size_t stride) {
  const std::size_t trainEnd = stream.segmentEnds.empty() ? stream.instances.size() : stream.segmentEnds.front();
  PrequentialTracker tracker(window, stride, stream.segmentEnds);
  PrequentialRun run{initTrainer(unconstrainedSingle(config), dimOf(stream)), {}};
  for (std::size_t pos = 0; pos < stream.instances.size(); ++pos) {
    tracker.observe(score(run.state.model, stream.instances[pos], pos));
    if (pos < trainEnd) stepOne(run.state, stream.instances[pos]);
  }
  tracker.finish();
  run.reports = tracker.reports();
  return run;
}

PrequentialRun runNoGrowth(const TrainerConfig& config, const SegmentedStream& stream, std::size_t window,
                           std::size_t stride) {
  return runPrequential(unconstrainedSingle(config), stream, window, stride);
}

PrequentialRun runWarmStart(const TrainerConfig& config, const SegmentedStream& stream, std::size_t window,
                            std::size_t stride) {
  const std::size_t dim = dimOf(stream);
  const TrainerConfig single = unconstrainedSingle(config);
  std::vector<MixtureModel> perSegment;
  std::size_t begin = 0;
  for (std::size_t end : stream.segmentEnds) {
    TrainerState s = initTrainer(single, dim);
    for (std::size_t pos = begin; pos < end; ++pos) stepOne(s, stream.instances[pos]);
    perSegment.push_back(s.model);
    begin = end;
  }
  if (perSegment.empty()) perSegment.emplace_back(dim);

  PrequentialTracker tracker(window, stride, stream.segmentEnds);
  PrequentialRun run{warmStartFromModels(config, perSegment), {}};
  continuePrequential(run.state, stream, tracker);
  run.reports = tracker.reports();
  return run;
}

std::vector<ArmResult> runDriftComparison(const TrainerConfig& config, const SegmentedStream& stream,
                                          std::size_t window, std::size_t stride) {
  std::vector<ArmResult> arms;
  arms.push_back({"frozen", runFrozenBaseline(config, stream, window, stride).reports});
  arms.push_back({"feamoe", runPrequential(config, stream, window, stride).reports});
  arms.push_back({"no-growth", runNoGrowth(config, stream, window, stride).reports});
  if (stream.segmentEnds.size() > 1) {
    arms.push_back({"warm-start", runWarmStart(config, stream, window, stride).reports});
  }
  return arms;
}

std::vector<SweepPoint> kSweep(const TrainerConfig& config, const SegmentedStream& stream,
                               std::span<const std::size_t> ks, std::size_t window) {
  std::vector<SweepPoint> out;
  for (std::size_t k : ks) {
    TrainerConfig cfg = config;
    cfg.k = k;
    // Growth is left uncapped so every k sees its full expert count.
    cfg.maxExperts = std::max(cfg.maxExperts, stream.instances.size() / k + 1);
    PrequentialRun run = runPrequential(cfg, stream, window, window / 2);
    out.push_back({k, run.state.model.expertCount(), run.reports.back()});
  }
  return out;
}

}  // namespace feamoe
