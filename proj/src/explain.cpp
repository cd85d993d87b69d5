#include "feamoe/explain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <numeric>
#include <random>
#include <string>

#include "feamoe/error.hpp"

namespace feamoe {

std::string toString(ShapGame game) { return game == ShapGame::FrozenGate ? "frozenGate" : "fullModel"; }

namespace {

void checkBackground(std::size_t dim, std::span<const double> x, const Background& background) {
  if (x.size() != dim) {
    throw DimensionError("input has " + std::to_string(x.size()) + " features, expected " + std::to_string(dim));
  }
  if (background.featureMeans.size() != dim) {
    throw DimensionError("background has " + std::to_string(background.featureMeans.size()) +
                         " features, expected " + std::to_string(dim));
  }
}

std::vector<double> masked(std::span<const double> x, const Background& background, std::uint32_t mask) {
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (mask >> j) & 1u ? x[j] : background.featureMeans[j];
  return z;
}

double frozenValue(const MixtureModel& model, std::span<const double> gates, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t i = 0; i < model.expertCount(); ++i) {
    auto w = model.expertWeights(i);
    double eta = model.expertBias(i);
    for (std::size_t j = 0; j < z.size(); ++j) eta += w[j] * z[j];
    s += gates[i] * eta;
  }
  return s;
}

// s! (D - s - 1)! / D! = 1 / (D * C(D-1, s))
std::vector<double> shapleyWeights(std::size_t dim) {
  std::vector<double> w(dim);
  double binom = 1.0;
  for (std::size_t s = 0; s < dim; ++s) {
    w[s] = 1.0 / (static_cast<double>(dim) * binom);
    binom = binom * static_cast<double>(dim - 1 - s) / static_cast<double>(s + 1);
  }
  return w;
}

void checkOracle(const MixtureModel& model, std::span<const double> x, const Background& background) {
  checkBackground(model.featureDim(), x, background);
  if (model.featureDim() > kMaxOracleFeatures) {
    throw ConfigError("exact Shapley enumeration supports at most " + std::to_string(kMaxOracleFeatures) +
                      " features, model has " + std::to_string(model.featureDim()));
  }
}

}  // namespace

Attribution linearExpertShap(const ExpertParams& expert, std::span<const double> x, const Background& background) {
  checkBackground(expert.weights.size(), x, background);
  Attribution a;
  a.phi.resize(x.size());
  a.baseValue = expert.bias;
  a.explainedValue = expert.bias;
  for (std::size_t j = 0; j < x.size(); ++j) {
    a.phi[j] = expert.weights[j] * (x[j] - background.featureMeans[j]);
    a.baseValue += expert.weights[j] * background.featureMeans[j];
    a.explainedValue += expert.weights[j] * x[j];
  }
  return a;
}

Attribution mixtureShap(const MixtureModel& model, std::span<const double> x, const Background& background) {
  checkBackground(model.featureDim(), x, background);
  const ModelOutput out = forward(model, x);
  Attribution a;
  a.phi.assign(x.size(), 0.0);
  a.explainedValue = out.gatedLogit;
  for (std::size_t i = 0; i < model.expertCount(); ++i) {
    const Attribution e = linearExpertShap(model.expert(i), x, background);
    const double g = out.gateWeights[i];
    for (std::size_t j = 0; j < x.size(); ++j) a.phi[j] += g * e.phi[j];
    a.baseValue += g * e.baseValue;
  }
  return a;
}

double coalitionValue(const MixtureModel& model, std::span<const double> x, const Background& background,
                      std::uint32_t mask, ShapGame game) {
  checkBackground(model.featureDim(), x, background);
  const std::vector<double> z = masked(x, background, mask);
  if (game == ShapGame::FullModel) return forward(model, z).gatedLogit;
  return frozenValue(model, forward(model, x).gateWeights, z);
}

namespace {

enum class Exec { Serial, Parallel };

Attribution enumerate(const MixtureModel& model, std::span<const double> x, const Background& background,
                      ShapGame game, Exec exec) {
  checkOracle(model, x, background);
  const std::size_t dim = model.featureDim();
  const auto coalitions = static_cast<std::int64_t>(std::int64_t{1} << dim);
  const std::vector<double> gates = forward(model, x).gateWeights;

  std::vector<double> value(static_cast<std::size_t>(coalitions));
  auto evaluate = [&](std::int64_t mask) {
    const std::vector<double> z = masked(x, background, static_cast<std::uint32_t>(mask));
    value[static_cast<std::size_t>(mask)] =
        game == ShapGame::FullModel ? forward(model, z).gatedLogit : frozenValue(model, gates, z);
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t mask = 0; mask < coalitions; ++mask) evaluate(mask);
  } else {
    for (std::int64_t mask = 0; mask < coalitions; ++mask) evaluate(mask);
  }

  const std::vector<double> weight = shapleyWeights(dim);
  Attribution a;
  a.phi.assign(dim, 0.0);
  // Terms are summed in sorted order so that interchangeable features, whose
  // terms agree as multisets, get bit-identical values.
  auto accumulate = [&](std::int64_t j) {
    const std::uint32_t bit = 1u << j;
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(coalitions / 2));
    for (std::uint32_t mask = 0; mask < static_cast<std::uint32_t>(coalitions); ++mask) {
      if (mask & bit) continue;
      terms.push_back(weight[static_cast<std::size_t>(std::popcount(mask))] * (value[mask | bit] - value[mask]));
    }
    std::sort(terms.begin(), terms.end());
    a.phi[static_cast<std::size_t>(j)] = std::accumulate(terms.begin(), terms.end(), 0.0);
  };
  const auto features = static_cast<std::int64_t>(dim);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < features; ++j) accumulate(j);
  } else {
    for (std::int64_t j = 0; j < features; ++j) accumulate(j);
  }
  a.baseValue = value.front();
  a.explainedValue = value.back();
  return a;
}

}  // namespace

Attribution exactShapOracle(const MixtureModel& model, std::span<const double> x, const Background& background,
                            ShapGame game) {
  return enumerate(model, x, background, game, Exec::Parallel);
}

Attribution kernelShapEstimate(const MixtureModel& model, std::span<const double> x, const Background& background,
                               std::size_t nSamples, std::uint64_t seed) {
  checkBackground(model.featureDim(), x, background);
  const std::size_t dim = model.featureDim();
  if (nSamples < dim + 2) {
    throw ConfigError("kernel SHAP needs at least D + 2 = " + std::to_string(dim + 2) + " samples, got " +
                      std::to_string(nSamples));
  }
  Attribution a;
  a.baseValue = forward(model, background.featureMeans).gatedLogit;
  a.explainedValue = forward(model, x).gatedLogit;
  const double gap = a.explainedValue - a.baseValue;
  if (dim == 1) {
    a.phi = {gap};
    return a;
  }

  // Coalition sizes 1..D-1 with probability proportional to the Shapley
  // kernel mass (D-1) / (s (D-s)); subsets uniform within a size. Drawing
  // from the kernel makes the regression weights uniform.
  std::vector<double> sizeWeight(dim - 1);
  for (std::size_t s = 1; s < dim; ++s) {
    sizeWeight[s - 1] = static_cast<double>(dim - 1) / static_cast<double>(s * (dim - s));
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> sizeDist(sizeWeight.begin(), sizeWeight.end());

  // phi_D is eliminated through the efficiency constraint.
  const auto free = static_cast<Eigen::Index>(dim - 1);
  Eigen::MatrixXd design(static_cast<Eigen::Index>(nSamples), free);
  Eigen::VectorXd target(static_cast<Eigen::Index>(nSamples));
  std::vector<std::size_t> perm(dim);
  std::vector<double> z(dim);
  for (std::size_t n = 0; n < nSamples; ++n) {
    const std::size_t size = sizeDist(rng) + 1;
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, dim - 1);
      std::swap(perm[i], perm[pick(rng)]);
    }
    std::vector<char> in(dim, 0);
    for (std::size_t i = 0; i < size; ++i) in[perm[i]] = 1;
    for (std::size_t j = 0; j < dim; ++j) z[j] = in[j] ? x[j] : background.featureMeans[j];
    const double last = in[dim - 1];
    const auto row = static_cast<Eigen::Index>(n);
    for (Eigen::Index j = 0; j < free; ++j) design(row, j) = static_cast<double>(in[static_cast<std::size_t>(j)]) - last;
    target(row) = forward(model, z).gatedLogit - a.baseValue - last * gap;
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < free) {
    throw Error("kernel SHAP regression is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                std::to_string(free) + "): sampled coalitions do not separate every feature");
  }
  const Eigen::VectorXd solution = qr.solve(target);
  a.phi.resize(dim);
  double partial = 0.0;
  for (Eigen::Index j = 0; j < free; ++j) {
    a.phi[static_cast<std::size_t>(j)] = solution(j);
    partial += solution(j);
  }
  a.phi[dim - 1] = gap - partial;
  return a;
}

std::vector<Attribution> explainBatch(const MixtureModel& model, std::span<const FeatureVector> xs,
                                      const Background& background) {
  for (const auto& x : xs) checkBackground(model.featureDim(), x, background);
  std::vector<Attribution> out(xs.size());
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = mixtureShap(model, xs[i], background);
  return out;
}

namespace serial {

Attribution exactShapOracle(const MixtureModel& model, std::span<const double> x, const Background& background,
                            ShapGame game) {
  return enumerate(model, x, background, game, Exec::Serial);
}

std::vector<Attribution> explainBatch(const MixtureModel& model, std::span<const FeatureVector> xs,
                                      const Background& background) {
  std::vector<Attribution> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(mixtureShap(model, x, background));
  return out;
}

}  // namespace serial

}  // namespace feamoe
