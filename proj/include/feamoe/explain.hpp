#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "feamoe/model.hpp"

namespace feamoe {

// Coalition value function used by the exhaustive oracle.
//   FrozenGate: gate weights fixed at the explained input, masked features
//               only enter the expert scores.
//   FullModel:  the gated logit recomputed on the masked input.
enum class ShapGame { FrozenGate, FullModel };

std::string toString(ShapGame game);

// Reference point that replaces features outside a coalition.
struct Background {
  std::vector<double> featureMeans;
};

// Attributions of the gated logit s(x): baseValue + sum(phi) == explainedValue.
struct Attribution {
  std::vector<double> phi;
  double baseValue = 0.0;
  double explainedValue = 0.0;
};

constexpr std::size_t kMaxOracleFeatures = 20;

// phi_j = w_j (x_j - mu_j), base = w . mu + b.
Attribution linearExpertShap(const ExpertParams& expert, std::span<const double> x, const Background& background);

// Gate-weighted combination of per-expert linear attributions, gates taken at x.
Attribution mixtureShap(const MixtureModel& model, std::span<const double> x, const Background& background);

// Value of coalition `mask` (bit j set: feature j taken from x).
double coalitionValue(const MixtureModel& model, std::span<const double> x, const Background& background,
                      std::uint32_t mask, ShapGame game);

// Exact Shapley values by enumerating all 2^D coalitions. Requires D <= 20.
Attribution exactShapOracle(const MixtureModel& model, std::span<const double> x, const Background& background,
                            ShapGame game);

// Kernel-weighted least squares over nSamples coalitions of the FullModel
// game, drawn from the Shapley kernel. Requires nSamples >= D + 2.
Attribution kernelShapEstimate(const MixtureModel& model, std::span<const double> x, const Background& background,
                               std::size_t nSamples, std::uint64_t seed);

// mixtureShap over a batch, parallel across instances.
std::vector<Attribution> explainBatch(const MixtureModel& model, std::span<const FeatureVector> xs,
                                      const Background& background);

namespace serial {
Attribution exactShapOracle(const MixtureModel& model, std::span<const double> x, const Background& background,
                            ShapGame game);
std::vector<Attribution> explainBatch(const MixtureModel& model, std::span<const FeatureVector> xs,
                                      const Background& background);
}  // namespace serial

}  // namespace feamoe
