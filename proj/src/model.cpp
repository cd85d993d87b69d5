#include "feamoe/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "feamoe/error.hpp"

namespace feamoe {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

}  // namespace

MixtureModel::MixtureModel(std::size_t featureDim) : dim_(featureDim), params_(2 * featureDim + 2, 0.0) {
  if (featureDim == 0) throw ConfigError("feature dimension must be at least 1");
}

MixtureModel::MixtureModel(const std::vector<ExpertParams>& experts, const GateParams& gate) : dim_(0) {
  if (experts.empty()) throw ConfigError("a mixture needs at least one expert");
  if (gate.weights.size() != experts.size() || gate.biases.size() != experts.size()) {
    throw ConfigError("gate must have exactly one weight vector and bias per expert");
  }
  dim_ = experts.front().weights.size();
  if (dim_ == 0) throw ConfigError("feature dimension must be at least 1");
  params_.reserve(experts.size() * blockSize());
  for (std::size_t i = 0; i < experts.size(); ++i) {
    if (experts[i].weights.size() != dim_ || gate.weights[i].size() != dim_) {
      throw DimensionError("expert " + std::to_string(i) + " does not match feature dimension " +
                           std::to_string(dim_));
    }
    params_.insert(params_.end(), experts[i].weights.begin(), experts[i].weights.end());
    params_.push_back(experts[i].bias);
    params_.insert(params_.end(), gate.weights[i].begin(), gate.weights[i].end());
    params_.push_back(gate.biases[i]);
  }
}

std::span<const double> MixtureModel::expertWeights(std::size_t i) const {
  return std::span<const double>(params_).subspan(offset(i), dim_);
}
std::span<double> MixtureModel::expertWeights(std::size_t i) {
  return std::span<double>(params_).subspan(offset(i), dim_);
}
std::span<const double> MixtureModel::gateWeights(std::size_t i) const {
  return std::span<const double>(params_).subspan(gateWeightOffset(i), dim_);
}
std::span<double> MixtureModel::gateWeights(std::size_t i) {
  return std::span<double>(params_).subspan(gateWeightOffset(i), dim_);
}

ExpertParams MixtureModel::expert(std::size_t i) const {
  auto w = expertWeights(i);
  return ExpertParams{{w.begin(), w.end()}, expertBias(i)};
}

GateParams MixtureModel::gate() const {
  GateParams g;
  for (std::size_t i = 0; i < expertCount(); ++i) {
    auto v = gateWeights(i);
    g.weights.emplace_back(v.begin(), v.end());
    g.biases.push_back(gateBias(i));
  }
  return g;
}

void MixtureModel::addExpert(const ExpertParams& expert, std::span<const double> gateWeights,
                             double gateBias) {
  if (expert.weights.size() != dim_ || gateWeights.size() != dim_) {
    throw DimensionError("new expert does not match feature dimension " + std::to_string(dim_));
  }
  params_.insert(params_.end(), expert.weights.begin(), expert.weights.end());
  params_.push_back(expert.bias);
  params_.insert(params_.end(), gateWeights.begin(), gateWeights.end());
  params_.push_back(gateBias);
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void checkDimension(const MixtureModel& model, std::span<const double> x) {
  if (x.size() != model.featureDim()) {
    throw DimensionError("input has " + std::to_string(x.size()) + " features, model expects " +
                         std::to_string(model.featureDim()));
  }
}

ModelOutput forward(const MixtureModel& model, std::span<const double> x) {
  checkDimension(model, x);
  const std::size_t m = model.expertCount();
  ModelOutput out;
  out.gateWeights.resize(m);
  out.expertProbabilities.resize(m);
  out.expertLogits.resize(m);

  double maxLogit = -INFINITY;
  for (std::size_t i = 0; i < m; ++i) {
    out.gateWeights[i] = dot(model.gateWeights(i), x) + model.gateBias(i);
    maxLogit = std::max(maxLogit, out.gateWeights[i]);
    out.expertLogits[i] = dot(model.expertWeights(i), x) + model.expertBias(i);
    out.expertProbabilities[i] = sigmoid(out.expertLogits[i]);
  }
  double norm = 0.0;
  for (auto& g : out.gateWeights) {
    g = std::exp(g - maxLogit);
    norm += g;
  }
  for (std::size_t i = 0; i < m; ++i) {
    out.gateWeights[i] /= norm;
    out.mixtureProbability += out.gateWeights[i] * out.expertProbabilities[i];
    out.gatedLogit += out.gateWeights[i] * out.expertLogits[i];
  }
  return out;
}

int predict(const ModelOutput& out) { return out.mixtureProbability >= 0.5 ? 1 : 0; }

int predict(const MixtureModel& model, std::span<const double> x) { return predict(forward(model, x)); }

BoundaryDistance boundaryDistance(const MixtureModel& model, const ModelOutput& out) {
  const std::size_t dim = model.featureDim();
  std::vector<double> normal(dim, 0.0);
  for (std::size_t i = 0; i < model.expertCount(); ++i) {
    auto w = model.expertWeights(i);
    for (std::size_t j = 0; j < dim; ++j) normal[j] += out.gateWeights[i] * w[j];
  }
  const double len = std::sqrt(dot(normal, normal));
  if (len < 1e-12) return {0.0, true};
  return {std::abs(out.gatedLogit) / len, false};
}

BoundaryDistance boundaryDistance(const MixtureModel& model, std::span<const double> x) {
  return boundaryDistance(model, forward(model, x));
}

}  // namespace feamoe
