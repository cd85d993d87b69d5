#include "feamoe/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "feamoe/error.hpp"

namespace feamoe {

std::string toString(GrowthPolicy policy) {
  return policy == GrowthPolicy::FixedInterval ? "fixed-interval" : "individual-fairness";
}

std::string toString(ExpertInit init) {
  switch (init) {
    case ExpertInit::EpsilonShare: return "epsilon-share";
    case ExpertInit::Split: return "split";
    case ExpertInit::Neutral: return "neutral";
  }
  return "unknown";
}

GrowthPolicy parseGrowthPolicy(const std::string& name) {
  if (name == "fixed-interval") return GrowthPolicy::FixedInterval;
  if (name == "individual-fairness") return GrowthPolicy::IndividualFairnessSaturation;
  throw ConfigError("unknown growth policy '" + name + "'");
}

ExpertInit parseExpertInit(const std::string& name) {
  if (name == "epsilon-share") return ExpertInit::EpsilonShare;
  if (name == "split") return ExpertInit::Split;
  if (name == "neutral") return ExpertInit::Neutral;
  throw ConfigError("unknown expert init '" + name + "'");
}

void TrainerConfig::validate(std::size_t featureDim) const {
  if (featureDim == 0) throw ConfigError("feature dimension must be at least 1");
  if (k == 0) throw ConfigError("k must be at least 1");
  if (!(learningRate >= 0.0) || !std::isfinite(learningRate)) {
    throw ConfigError("learning rate must be finite and nonnegative");
  }
  if (maxExperts == 0) throw ConfigError("maxExperts must be at least 1");
  for (double d : deltaLambda) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("lambda increments must be finite and nonnegative");
  }
  if (!(burdenDecay > 0.0 && burdenDecay < 1.0)) throw ConfigError("burden decay must lie in (0, 1)");
  if (!(newExpertShare > 0.0 && newExpertShare < 1.0)) throw ConfigError("new expert share must lie in (0, 1)");
  if (individualFairnessPenalty < 0.0) throw ConfigError("individual fairness penalty must be nonnegative");
  if (groupFeature && *groupFeature >= featureDim) throw ConfigError("group feature index out of range");
  if (growthPolicy == GrowthPolicy::IndividualFairnessSaturation) {
    if (!groupFeature) {
      throw ConfigError("individual-fairness growth needs the protected attribute among the features");
    }
    if (saturationThreshold == 0) throw ConfigError("saturation threshold must be at least 1");
  }
}

std::vector<double> TrainerState::featureMeans() const {
  std::vector<double> means(featureSum.size(), 0.0);
  if (instancesSeen == 0) return means;
  for (std::size_t j = 0; j < means.size(); ++j) means[j] = featureSum[j] / static_cast<double>(instancesSeen);
  return means;
}

std::optional<StreamInstance> VectorSource::next() {
  if (pos_ >= instances_.size()) return std::nullopt;
  return instances_[pos_++];
}

TrainerState initTrainer(const TrainerConfig& config, std::size_t featureDim) {
  config.validate(featureDim);
  FairnessSchedule schedule;
  schedule.delta = config.deltaLambda;
  BurdenState burden;
  burden.decay = config.burdenDecay;
  TrainerState state{config,         MixtureModel(featureDim), schedule, burden, 0, 0, 0, 0, 0, {},
                     {0.0},          std::vector<double>(featureDim, 0.0),
                     std::mt19937_64(config.seed)};
  return state;
}

PrequentialRecord score(const MixtureModel& model, const StreamInstance& instance, std::size_t position) {
  const ModelOutput out = forward(model, instance.x);
  return {position, predict(out), out.mixtureProbability, instance.label, instance.group,
          boundaryDistance(model, out).distance};
}

LossBreakdown stepOne(TrainerState& state, const StreamInstance& instance) {
  validateInstance(instance);
  checkDimension(state.model, instance.x);
  const TrainerConfig& cfg = state.config;

  LossAndGradient lg = totalLossAndGradients(state.model, instance, state.schedule, state.burden);

  if (cfg.growthPolicy == GrowthPolicy::IndividualFairnessSaturation) {
    StreamInstance flipped = instance;
    double& a = flipped.x[*cfg.groupFeature];
    a = 1.0 - a;
    if (predict(state.model, flipped.x) != predict(state.model, instance.x)) {
      ++state.violationsSinceGrowth;
      ++state.totalViolations;
      lg.loss.total += cfg.individualFairnessPenalty;
    }
  }

  const bool finite = std::all_of(lg.gradient.begin(), lg.gradient.end(), [](double g) { return std::isfinite(g); });
  if (finite) {
    const ModelOutput out = forward(state.model, instance.x);
    for (std::size_t i = 0; i < out.gateWeights.size(); ++i) state.gateMass[i] += out.gateWeights[i];
    if (predict(out) == 0) state.burden.observe(instance.group, boundaryDistance(state.model, out).distance);
    auto params = state.model.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) params[p] -= cfg.learningRate * lg.gradient[p];
  } else {
    // Burden and gate-mass statistics are left untouched too.
    ++state.anomalies;
  }

  for (std::size_t j = 0; j < instance.x.size(); ++j) state.featureSum[j] += instance.x[j];
  ++state.instancesSeen;
  ++state.instancesSinceGrowth;
  return lg.loss;
}

namespace {

void addExpert(TrainerState& state) {
  MixtureModel& model = state.model;
  const std::size_t dim = model.featureDim();
  const std::size_t m = model.expertCount();
  const ExpertParams zero{std::vector<double>(dim, 0.0), 0.0};

  switch (state.config.expertInit) {
    case ExpertInit::EpsilonShare: {
      // Gate logit z_0 + log(eps / (1 - eps)) bounds the new share by eps.
      const double eps = state.config.newExpertShare;
      const std::vector<double> v(model.gateWeights(0).begin(), model.gateWeights(0).end());
      model.addExpert(zero, v, model.gateBias(0) + std::log(eps / (1.0 - eps)));
      break;
    }
    case ExpertInit::Neutral: {
      double mass = 0.0;
      for (std::size_t i = 0; i < m; ++i) mass += std::exp(model.gateBias(i));
      model.addExpert(zero, std::vector<double>(dim, 0.0), std::log(mass / static_cast<double>(m)));
      break;
    }
    case ExpertInit::Split: {
      const auto busiest = static_cast<std::size_t>(
          std::distance(state.gateMass.begin(), std::max_element(state.gateMass.begin(), state.gateMass.end())));
      ExpertParams clone = model.expert(busiest);
      std::vector<double> v(model.gateWeights(busiest).begin(), model.gateWeights(busiest).end());
      const double c = model.gateBias(busiest) - std::log(2.0);
      model.gateBias(busiest) = c;
      // Antisymmetric jitter breaks the tie between the twins; output moves at second order.
      std::normal_distribution<double> jitter(0.0, 1e-5);
      auto w = model.expertWeights(busiest);
      auto gv = model.gateWeights(busiest);
      for (std::size_t j = 0; j < dim; ++j) {
        const double dw = jitter(state.rng);
        const double dv = jitter(state.rng);
        w[j] += dw;
        clone.weights[j] -= dw;
        gv[j] += dv;
        v[j] -= dv;
      }
      model.addExpert(clone, v, c);
      break;
    }
  }
}

}  // namespace

bool maybeGrow(TrainerState& state) {
  const TrainerConfig& cfg = state.config;
  const bool fire = cfg.growthPolicy == GrowthPolicy::FixedInterval
                        ? state.instancesSinceGrowth >= cfg.k
                        : state.violationsSinceGrowth >= cfg.saturationThreshold;
  if (!fire) return false;
  state.instancesSinceGrowth = 0;
  state.violationsSinceGrowth = 0;
  if (state.model.expertCount() >= cfg.maxExperts) return false;

  addExpert(state);
  state.schedule.advance();
  state.gateMass.assign(state.model.expertCount(), 0.0);
  state.growthLog.push_back({state.instancesSeen, state.model.expertCount(), state.schedule.lambdas()});
  return true;
}

TrainerState trainStream(const TrainerConfig& config, std::size_t featureDim, InstanceSource& source,
                         const MetricsSink& sink) {
  TrainerState state = initTrainer(config, featureDim);
  std::size_t position = 0;
  while (auto instance = source.next()) {
    try {
      if (sink) sink(score(state.model, *instance, position));
      stepOne(state, *instance);
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " at stream position " + std::to_string(position));
    } catch (const DimensionError& e) {
      throw DimensionError(std::string(e.what()) + " at stream position " + std::to_string(position));
    }
    maybeGrow(state);
    ++position;
  }
  return state;
}

TrainerState trainStream(const TrainerConfig& config, std::size_t featureDim,
                         std::span<const StreamInstance> instances, const MetricsSink& sink) {
  VectorSource source(instances);
  return trainStream(config, featureDim, source, sink);
}

TrainerState warmStartFromModels(const TrainerConfig& config, std::span<const MixtureModel> models) {
  if (models.empty()) throw ConfigError("warm start needs at least one model");
  const std::size_t dim = models.front().featureDim();
  std::vector<ExpertParams> experts;
  for (const auto& model : models) {
    if (model.featureDim() != dim) throw DimensionError("warm-start models disagree on feature dimension");
    for (std::size_t i = 0; i < model.expertCount(); ++i) experts.push_back(model.expert(i));
  }
  GateParams gate;
  gate.weights.assign(experts.size(), std::vector<double>(dim, 0.0));
  gate.biases.assign(experts.size(), 0.0);

  TrainerConfig cfg = config;
  cfg.maxExperts = std::max(cfg.maxExperts, experts.size());
  TrainerState state = initTrainer(cfg, dim);
  state.model = MixtureModel(experts, gate);
  state.schedule.growthEvents = experts.size() - 1;
  state.gateMass.assign(experts.size(), 0.0);
  return state;
}

}  // namespace feamoe
