#include "feamoe/loss.hpp"

#include <cmath>
#include <string>

#include "feamoe/error.hpp"

namespace feamoe {

namespace {

double kernel(double label, double y) {
  const double r = label - y;
  return std::exp(-0.5 * r * r);
}

// dE_SPD/dy_hat and dE_AOD/dy_hat; both penalties are affine in y_hat.
double spdSlope(int group) { return group == 0 ? -1.0 : 1.0; }
double aodSlope(int label) { return label == 1 ? -1.0 : 1.0; }

}  // namespace

void validateInstance(const StreamInstance& instance) {
  if (instance.label != 0 && instance.label != 1) {
    throw DataError("label must be 0 or 1, got " + std::to_string(instance.label));
  }
  if (instance.group != 0 && instance.group != 1) {
    throw DataError("group must be 0 or 1, got " + std::to_string(instance.group));
  }
  for (double v : instance.x) {
    if (!std::isfinite(v)) throw DataError("feature value is not finite");
  }
}

double BurdenState::penalty() const { return std::abs(mean[0] - mean[1]); }

void BurdenState::observe(int group, double distance) {
  const auto g = static_cast<std::size_t>(group);
  mean[g] = count[g] == 0 ? distance : decay * mean[g] + (1.0 - decay) * distance;
  ++count[g];
}

double accuracyLoss(const ModelOutput& out, int label) {
  double acc = 0.0;
  for (std::size_t i = 0; i < out.gateWeights.size(); ++i) {
    acc += out.gateWeights[i] * kernel(label, out.expertProbabilities[i]);
  }
  return -std::log(acc);
}

double accuracyLoss(const MixtureModel& model, const StreamInstance& instance) {
  validateInstance(instance);
  return accuracyLoss(forward(model, instance.x), instance.label);
}

double spdPenalty(double p, int group) { return group == 0 ? 1.0 - p : p; }

double spdPenalty(const MixtureModel& model, const StreamInstance& instance) {
  validateInstance(instance);
  return spdPenalty(forward(model, instance.x).mixtureProbability, instance.group);
}

// D01 and D11 penalize 1 - y_hat, D10 and D00 penalize y_hat.
double aodPenalty(double p, int group, int label) {
  if (group == 0 && label == 1) return 1.0 - p;
  if (group == 1 && label == 1) return 1.0 - p;
  if (group == 1 && label == 0) return p;
  return p;
}

double aodPenalty(const MixtureModel& model, const StreamInstance& instance) {
  validateInstance(instance);
  return aodPenalty(forward(model, instance.x).mixtureProbability, instance.group, instance.label);
}

std::pair<double, BurdenState> burdenPenalty(const MixtureModel& model, const StreamInstance& instance,
                                             const BurdenState& state) {
  validateInstance(instance);
  const ModelOutput out = forward(model, instance.x);
  BurdenState next = state;
  if (predict(out) == 0) next.observe(instance.group, boundaryDistance(model, out).distance);
  return {next.penalty(), next};
}

namespace {

BurdenContext contextFrom(const ModelOutput& out, int group, const BurdenState& state) {
  BurdenContext ctx;
  ctx.negative = predict(out) == 0;
  if (state.cold(0) || state.cold(1)) return ctx;
  const double diff = state.mean[static_cast<std::size_t>(group)] - state.mean[static_cast<std::size_t>(1 - group)];
  ctx.sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  return ctx;
}

}  // namespace

BurdenContext burdenContext(const MixtureModel& model, const StreamInstance& instance,
                            const BurdenState& state) {
  validateInstance(instance);
  return contextFrom(forward(model, instance.x), instance.group, state);
}

double surrogateObjective(const MixtureModel& model, const StreamInstance& instance,
                          const FairnessSchedule& schedule, const BurdenContext& context) {
  validateInstance(instance);
  const ModelOutput out = forward(model, instance.x);
  const double p = out.mixtureProbability;
  double value = accuracyLoss(out, instance.label) + schedule.lambda(0) * spdPenalty(p, instance.group) +
                 schedule.lambda(1) * aodPenalty(p, instance.group, instance.label);
  if (context.negative && context.sign != 0.0) {
    value += schedule.lambda(2) * context.sign * boundaryDistance(model, out).distance;
  }
  return value;
}

LossAndGradient totalLossAndGradients(const MixtureModel& model, const StreamInstance& instance,
                                      const FairnessSchedule& schedule, const BurdenState& burden) {
  validateInstance(instance);
  const std::span<const double> x = instance.x;
  const ModelOutput out = forward(model, x);
  const std::size_t m = model.expertCount();
  const std::size_t dim = model.featureDim();
  const double d = instance.label;
  const double p = out.mixtureProbability;
  const auto lam = schedule.lambdas();

  LossAndGradient result;
  LossBreakdown& loss = result.loss;
  loss.eAcc = accuracyLoss(out, instance.label);
  loss.eSpd = spdPenalty(p, instance.group);
  loss.eAod = aodPenalty(p, instance.group, instance.label);

  BurdenState updated = burden;
  const BurdenContext ctx = contextFrom(out, instance.group, burden);
  const BoundaryDistance dist = boundaryDistance(model, out);
  if (ctx.negative) updated.observe(instance.group, dist.distance);
  loss.eBurden = updated.penalty();
  loss.total = loss.eAcc + lam[0] * loss.eSpd + lam[1] * loss.eAod + lam[2] * loss.eBurden;
  loss.objective = loss.eAcc + lam[0] * loss.eSpd + lam[1] * loss.eAod;

  // Posterior responsibilities h_i = g_i k_i / sum_k g_k k_k.
  std::vector<double> h(m);
  double mix = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    h[i] = out.gateWeights[i] * kernel(d, out.expertProbabilities[i]);
    mix += h[i];
  }
  for (auto& hi : h) hi /= mix;

  // Gradients with respect to each expert logit eta_i and gate logit z_i.
  const double fairSlope = lam[0] * spdSlope(instance.group) + lam[1] * aodSlope(instance.label);
  std::vector<double> gradEta(m), gradZ(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double y = out.expertProbabilities[i];
    const double g = out.gateWeights[i];
    const double dy = y * (1.0 - y);
    gradEta[i] = h[i] * (y - d) * dy + fairSlope * g * dy;
    gradZ[i] = (g - h[i]) + fairSlope * g * (y - p);
  }

  result.gradient.assign(model.parameterCount(), 0.0);
  auto& grad = result.gradient;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t we = model.expertWeightOffset(i);
    const std::size_t wg = model.gateWeightOffset(i);
    for (std::size_t j = 0; j < dim; ++j) {
      grad[we + j] = gradEta[i] * x[j];
      grad[wg + j] = gradZ[i] * x[j];
    }
    grad[model.expertBiasOffset(i)] = gradEta[i];
    grad[model.gateBiasOffset(i)] = gradZ[i];
  }

  if (ctx.negative && ctx.sign != 0.0 && !dist.degenerate) {
    // d = |s| / r with s = sum g_i eta_i and r = ||u||, u = sum g_i w_i.
    const double coef = lam[2] * ctx.sign;
    loss.objective += coef * dist.distance;
    const double s = out.gatedLogit;
    const double sgn = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
    std::vector<double> u(dim, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      auto w = model.expertWeights(i);
      for (std::size_t j = 0; j < dim; ++j) u[j] += out.gateWeights[i] * w[j];
    }
    double r2 = 0.0;
    for (double uj : u) r2 += uj * uj;
    const double r = std::sqrt(r2);
    const double absS = std::abs(s);
    const double r3 = r2 * r;
    for (std::size_t i = 0; i < m; ++i) {
      const double g = out.gateWeights[i];
      auto w = model.expertWeights(i);
      double uDotW = 0.0;
      for (std::size_t j = 0; j < dim; ++j) uDotW += u[j] * w[j];
      // ds/dz_i = g_i (eta_i - s), du/dz_i = g_i (w_i - u).
      const double dDz = sgn * g * (out.expertLogits[i] - s) / r - absS * g * (uDotW - r2) / r3;
      const std::size_t we = model.expertWeightOffset(i);
      const std::size_t wg = model.gateWeightOffset(i);
      for (std::size_t j = 0; j < dim; ++j) {
        grad[we + j] += coef * (sgn * g * x[j] / r - absS * g * u[j] / r3);
        grad[wg + j] += coef * dDz * x[j];
      }
      grad[model.expertBiasOffset(i)] += coef * sgn * g / r;
      grad[model.gateBiasOffset(i)] += coef * dDz;
    }
  }
  return result;
}

}  // namespace feamoe
