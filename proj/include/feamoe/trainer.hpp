#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "feamoe/loss.hpp"
#include "feamoe/model.hpp"

namespace feamoe {

enum class GrowthPolicy { FixedInterval, IndividualFairnessSaturation };

// How a newly added expert is initialized.
//   EpsilonShare: zero expert, gate share at most newExpertShare everywhere.
//   Split: clone of the busiest expert, which hands it half its gate mass.
//   Neutral: zero expert, gate share 1/m at the origin (not output-continuous).
enum class ExpertInit { EpsilonShare, Split, Neutral };

std::string toString(GrowthPolicy policy);
std::string toString(ExpertInit init);
GrowthPolicy parseGrowthPolicy(const std::string& name);
ExpertInit parseExpertInit(const std::string& name);

struct TrainerConfig {
  std::size_t k = 1000;
  double learningRate = 0.05;
  std::array<double, 3> deltaLambda{0.02, 0.02, 0.02};
  GrowthPolicy growthPolicy = GrowthPolicy::FixedInterval;
  std::size_t saturationThreshold = 50;
  double individualFairnessPenalty = 0.4;
  std::size_t maxExperts = 64;
  std::uint64_t seed = 0;
  double burdenDecay = 0.99;
  ExpertInit expertInit = ExpertInit::Split;
  double newExpertShare = 1e-6;
  // Column of the protected attribute inside the feature vector, if present.
  std::optional<std::size_t> groupFeature;

  // Throws ConfigError on invalid settings.
  void validate(std::size_t featureDim) const;
};

struct GrowthEvent {
  std::size_t position = 0;  // instances consumed when the expert was added
  std::size_t expertCount = 0;
  std::array<double, 3> lambda{};
};

struct TrainerState {
  TrainerConfig config;
  MixtureModel model;
  FairnessSchedule schedule;
  BurdenState burden;
  std::size_t instancesSeen = 0;
  std::size_t instancesSinceGrowth = 0;
  std::size_t violationsSinceGrowth = 0;
  std::size_t totalViolations = 0;
  std::size_t anomalies = 0;
  std::vector<GrowthEvent> growthLog;
  // Per-expert sum of gate weights since the last growth event.
  std::vector<double> gateMass;
  // Running sum of consumed feature vectors (default explanation background).
  std::vector<double> featureSum;
  std::mt19937_64 rng;

  std::vector<double> featureMeans() const;
};

// Scored before the instance updates the model.
struct PrequentialRecord {
  std::size_t position = 0;
  int prediction = 0;
  double probability = 0.0;
  int label = 0;
  int group = 0;
  double distance = 0.0;
};

using MetricsSink = std::function<void(const PrequentialRecord&)>;

// Pull-based single-pass source of instances.
class InstanceSource {
 public:
  virtual ~InstanceSource() = default;
  virtual std::optional<StreamInstance> next() = 0;
};

class VectorSource : public InstanceSource {
 public:
  explicit VectorSource(std::span<const StreamInstance> instances) : instances_(instances) {}
  std::optional<StreamInstance> next() override;

 private:
  std::span<const StreamInstance> instances_;
  std::size_t pos_ = 0;
};

TrainerState initTrainer(const TrainerConfig& config, std::size_t featureDim);

// One SGD step on every expert and gate parameter.
LossBreakdown stepOne(TrainerState& state, const StreamInstance& instance);

// Adds an expert when the active growth policy fires. Returns true if it did.
bool maybeGrow(TrainerState& state);

TrainerState trainStream(const TrainerConfig& config, std::size_t featureDim, InstanceSource& source,
                         const MetricsSink& sink = {});
TrainerState trainStream(const TrainerConfig& config, std::size_t featureDim,
                         std::span<const StreamInstance> instances, const MetricsSink& sink = {});

// Mixture whose experts are the experts of the supplied models, under a fresh
// uniform gate.
TrainerState warmStartFromModels(const TrainerConfig& config, std::span<const MixtureModel> models);

PrequentialRecord score(const MixtureModel& model, const StreamInstance& instance, std::size_t position);

}  // namespace feamoe
