#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace feamoe {

using FeatureVector = std::vector<double>;

struct ExpertParams {
  std::vector<double> weights;
  double bias = 0.0;
};

// One softmax logit v_i . x + c_i per expert.
struct GateParams {
  std::vector<std::vector<double>> weights;
  std::vector<double> biases;
};

struct ModelOutput {
  double mixtureProbability = 0.0;
  std::vector<double> gateWeights;
  std::vector<double> expertProbabilities;
  std::vector<double> expertLogits;
  // s(x) = sum_i g_i(x) (w_i . x + b_i)
  double gatedLogit = 0.0;
};

struct BoundaryDistance {
  double distance = 0.0;
  // Set when ||sum_i g_i w_i|| < 1e-12; distance is then reported as 0.
  bool degenerate = false;
};

// Mixture of logistic experts with a linear softmax gate.
//
// All parameters live in one flat buffer, one block per expert laid out as
// [expert weights (D), expert bias, gate weights (D), gate bias]. Gradients
// produced by the loss module use the same layout.
class MixtureModel {
 public:
  // A single expert with all parameters zero.
  explicit MixtureModel(std::size_t featureDim);
  MixtureModel(const std::vector<ExpertParams>& experts, const GateParams& gate);

  std::size_t featureDim() const { return dim_; }
  std::size_t expertCount() const { return params_.size() / blockSize(); }
  std::size_t blockSize() const { return 2 * dim_ + 2; }
  std::size_t parameterCount() const { return params_.size(); }

  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }

  std::span<const double> expertWeights(std::size_t i) const;
  std::span<double> expertWeights(std::size_t i);
  double expertBias(std::size_t i) const { return params_[offset(i) + dim_]; }
  double& expertBias(std::size_t i) { return params_[offset(i) + dim_]; }
  std::span<const double> gateWeights(std::size_t i) const;
  std::span<double> gateWeights(std::size_t i);
  double gateBias(std::size_t i) const { return params_[offset(i) + 2 * dim_ + 1]; }
  double& gateBias(std::size_t i) { return params_[offset(i) + 2 * dim_ + 1]; }

  ExpertParams expert(std::size_t i) const;
  GateParams gate() const;

  void addExpert(const ExpertParams& expert, std::span<const double> gateWeights, double gateBias);

  // Flat-buffer offsets of each parameter group for expert i.
  std::size_t expertWeightOffset(std::size_t i) const { return offset(i); }
  std::size_t expertBiasOffset(std::size_t i) const { return offset(i) + dim_; }
  std::size_t gateWeightOffset(std::size_t i) const { return offset(i) + dim_ + 1; }
  std::size_t gateBiasOffset(std::size_t i) const { return offset(i) + 2 * dim_ + 1; }

  friend bool operator==(const MixtureModel&, const MixtureModel&) = default;

 private:
  std::size_t offset(std::size_t i) const { return i * blockSize(); }

  std::size_t dim_;
  std::vector<double> params_;
};

double sigmoid(double t);

// Throws DimensionError unless x.size() == model.featureDim().
void checkDimension(const MixtureModel& model, std::span<const double> x);

ModelOutput forward(const MixtureModel& model, std::span<const double> x);

// 1 iff mixtureProbability >= 0.5.
int predict(const MixtureModel& model, std::span<const double> x);
int predict(const ModelOutput& out);

// First-order distance to the s(x) = 0 surface with the gate frozen at x:
// |s(x)| / ||sum_i g_i(x) w_i||.
BoundaryDistance boundaryDistance(const MixtureModel& model, std::span<const double> x);
BoundaryDistance boundaryDistance(const MixtureModel& model, const ModelOutput& out);

}  // namespace feamoe
