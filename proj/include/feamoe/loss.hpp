#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "feamoe/model.hpp"

namespace feamoe {

// One labeled observation. group 0 is underprivileged, 1 privileged.
struct StreamInstance {
  FeatureVector x;
  int label = 0;
  int group = 0;

  friend bool operator==(const StreamInstance&, const StreamInstance&) = default;
};

void validateInstance(const StreamInstance& instance);

// Fairness weights (SPD, AOD, burden). Each lambda is kept as an exact
// multiple of its increment: lambda_i = growthEvents * delta_i.
struct FairnessSchedule {
  std::array<double, 3> delta{0.0, 0.0, 0.0};
  std::size_t growthEvents = 0;

  double lambda(std::size_t i) const { return static_cast<double>(growthEvents) * delta[i]; }
  std::array<double, 3> lambdas() const { return {lambda(0), lambda(1), lambda(2)}; }
  void advance() { ++growthEvents; }
};

// Per-group exponential moving averages of boundary distance over negatively
// classified instances. A group with no observations is cold and has mean 0.
struct BurdenState {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<std::size_t, 2> count{0, 0};
  double decay = 0.99;

  bool cold(int group) const { return count[static_cast<std::size_t>(group)] == 0; }
  double penalty() const;
  // First observation of a group sets its mean directly.
  void observe(int group, double distance);

  friend bool operator==(const BurdenState&, const BurdenState&) = default;
};

struct LossBreakdown {
  double eAcc = 0.0;
  double eSpd = 0.0;
  double eAod = 0.0;
  double eBurden = 0.0;
  // eAcc + l1 eSpd + l2 eAod + l3 eBurden
  double total = 0.0;
  // The quantity the gradient differentiates: total with eBurden replaced by
  // the per-instance surrogate sign(mu_a - mu_other) * d(x).
  double objective = 0.0;
};

// Burden surrogate coefficient, frozen at the parameters a step starts from.
struct BurdenContext {
  bool negative = false;  // instance classified negative
  double sign = 0.0;      // sign(mu_a - mu_other); 0 at equality or when a group is cold
};

struct LossAndGradient {
  LossBreakdown loss;
  // Aligned with MixtureModel::parameters().
  std::vector<double> gradient;
};

double accuracyLoss(const ModelOutput& out, int label);
double accuracyLoss(const MixtureModel& model, const StreamInstance& instance);

double spdPenalty(double mixtureProbability, int group);
double spdPenalty(const MixtureModel& model, const StreamInstance& instance);

double aodPenalty(double mixtureProbability, int group, int label);
double aodPenalty(const MixtureModel& model, const StreamInstance& instance);

// Folds the instance into the burden estimates when it is classified negative,
// then returns |mu0 - mu1|.
std::pair<double, BurdenState> burdenPenalty(const MixtureModel& model, const StreamInstance& instance,
                                             const BurdenState& state);

BurdenContext burdenContext(const MixtureModel& model, const StreamInstance& instance,
                            const BurdenState& state);

// Value of LossBreakdown::objective with the burden coefficient held fixed.
double surrogateObjective(const MixtureModel& model, const StreamInstance& instance,
                          const FairnessSchedule& schedule, const BurdenContext& context);

LossAndGradient totalLossAndGradients(const MixtureModel& model, const StreamInstance& instance,
                                      const FairnessSchedule& schedule, const BurdenState& burden);

}  // namespace feamoe
