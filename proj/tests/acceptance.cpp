// Acceptance checks. Prints one PASS/FAIL line per criterion; exits nonzero
// if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cli.hpp"
#include "feamoe/data.hpp"
#include "feamoe/experiments.hpp"
#include "feamoe/explain.hpp"
#include "feamoe/io.hpp"
#include "feamoe/loss.hpp"
#include "feamoe/metrics.hpp"
#include "feamoe/trainer.hpp"
#include "support.hpp"

using namespace feamoe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double relErr(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-4}); }

Outcome gradientExactness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.01, 0.5);
  double worst = 0.0;
  const int configs = 200;
  for (int t = 0; t < configs; ++t) {
    const std::size_t dim = 1 + rng() % 4, experts = 1 + rng() % 3;
    const MixtureModel m = fixtures::randomModel(rng, dim, experts);
    const StreamInstance inst{fixtures::randomVector(rng, dim), static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)};
    const FairnessSchedule schedule{{u(rng), u(rng), u(rng)}, 1 + rng() % 5};
    BurdenState burden;
    burden.observe(0, 4 * u(rng));
    burden.observe(1, 4 * u(rng));
    const LossAndGradient lg = totalLossAndGradients(m, inst, schedule, burden);
    const BurdenContext ctx = burdenContext(m, inst, burden);
    for (std::size_t p = 0; p < m.parameterCount(); ++p) {
      MixtureModel plus = m, minus = m;
      plus.parameters()[p] += 1e-6;
      minus.parameters()[p] -= 1e-6;
      const double fd =
          (surrogateObjective(plus, inst, schedule, ctx) - surrogateObjective(minus, inst, schedule, ctx)) / 2e-6;
      worst = std::max(worst, relErr(lg.gradient[p], fd));
    }
  }
  const double t = seconds(start);
  return {worst < 1e-5 && t < 10.0, fmt("%.0f configs, max relative error %.2e, %.2f s", configs, worst, t)};
}

Outcome attributionExactness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(202);
  double worstPhi = 0.0, worstEff = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t dim = 1 + rng() % 10, experts = 1 + rng() % 4;
    const MixtureModel m = fixtures::randomModel(rng, dim, experts);
    const Background bg{fixtures::randomVector(rng, dim)};
    const FeatureVector x = fixtures::randomVector(rng, dim);
    const Attribution a = mixtureShap(m, x, bg);
    const Attribution o = exactShapOracle(m, x, bg, ShapGame::FrozenGate);
    for (std::size_t j = 0; j < dim; ++j) worstPhi = std::max(worstPhi, std::abs(a.phi[j] - o.phi[j]));
    const double total = std::accumulate(a.phi.begin(), a.phi.end(), a.baseValue);
    worstEff = std::max(worstEff, std::abs(total - forward(m, x).gatedLogit));
  }
  const double t = seconds(start);
  return {worstPhi < 1e-9 && worstEff < 1e-9 && t < 60.0,
          fmt("max |phi gap| %.2e, max efficiency gap %.2e, %.2f s", worstPhi, worstEff, t)};
}

Outcome shapleyAxioms() {
  std::mt19937_64 rng(303);
  int checks = 0, failures = 0;
  for (ShapGame game : {ShapGame::FrozenGate, ShapGame::FullModel}) {
    for (int t = 0; t < 50; ++t) {
      MixtureModel m = fixtures::dyadicModel(rng, 5, 1 + rng() % 4);
      for (std::size_t i = 0; i < m.expertCount(); ++i) {
        m.expertWeights(i)[2] = m.expertWeights(i)[1];
        m.gateWeights(i)[2] = m.gateWeights(i)[1];
        m.expertWeights(i)[4] = 0.0;
        m.gateWeights(i)[4] = 0.0;
      }
      FeatureVector x = fixtures::dyadicVector(rng, 5);
      Background bg{fixtures::dyadicVector(rng, 5)};
      x[2] = x[1];
      bg.featureMeans[2] = bg.featureMeans[1];
      const Attribution o = exactShapOracle(m, x, bg, game);
      checks += 2;
      failures += o.phi[1] != o.phi[2];
      failures += o.phi[4] != 0.0;
    }
  }
  return {failures == 0, fmt("%.0f exact checks over both games, %.0f failures", checks, failures)};
}

Outcome timingClaim() {
#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  std::mt19937_64 rng(404);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ExpertParams> experts(8);
  GateParams gate;
  for (auto& e : experts) {
    for (int j = 0; j < 12; ++j) e.weights.push_back(n(rng));
    e.bias = n(rng);
    gate.weights.emplace_back();
    for (int j = 0; j < 12; ++j) gate.weights.back().push_back(0.5 * n(rng));
    gate.biases.push_back(0.5 * n(rng));
  }
  const MixtureModel m(experts, gate);
  const Background bg{FeatureVector(12, 0.0)};
  std::vector<FeatureVector> xs;
  for (int i = 0; i < 100; ++i) xs.push_back(fixtures::randomVector(rng, 12));

  auto timed = [](const std::function<void()>& f) {
    f();
    const auto s = Clock::now();
    f();
    return seconds(s);
  };
  std::vector<Attribution> sink;
  const double mix = timed([&] { sink = serial::explainBatch(m, xs, bg); });
  auto kernel = [&](std::size_t samples) {
    return timed([&] {
      for (std::size_t i = 0; i < xs.size(); ++i) sink[i] = kernelShapEstimate(m, xs[i], bg, samples, i);
    });
  };
  const double k500 = kernel(500), k2000 = kernel(2000);
#ifdef _OPENMP
  omp_set_num_threads(omp_get_num_procs());
#endif
  const double s500 = k500 / mix, s2000 = k2000 / mix;
  return {s500 >= 10.0 && s2000 >= 20.0,
          fmt("mixture %.4f s; speedup %.0fx vs kernel n=500, %.0fx vs n=2000", mix, s500, s2000)};
}

Outcome toyDriftRecovery() {
  const auto start = Clock::now();
  double frozenAcc = 0, frozenAod = 0, acc = 0, aod = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DriftSpec spec;
    spec.seed = seed;
    const SegmentedStream stream = toyTwoSegmentStream(spec);
    TrainerConfig cfg;
    cfg.k = stream.instances.size() / 10;
    cfg.seed = seed;
    const PrequentialRun frozen = runFrozenBaseline(cfg, stream, 1000, 500);
    const MetricsReport seg2 =
        evaluateDataset(frozen.state.model, std::span<const StreamInstance>(stream.instances).subspan(2000));
    frozenAcc += seg2.accuracy / 5;
    frozenAod += seg2.aodAbs / 5;
    const PrequentialRun online = runPrequential(cfg, stream, 1000, 500);
    acc += online.reports.back().accuracy / 5;
    aod += online.reports.back().aodAbs / 5;
  }
  const double t = seconds(start);
  return {frozenAcc <= 0.6 && frozenAod >= 0.2 && acc >= 0.9 && aod <= 0.1 && t < 120.0,
          fmt("frozen on segment 2: accuracy %.3f, AOD %.3f; online final window: accuracy %.3f, AOD %.3f", frozenAcc,
              frozenAod, acc, aod) +
              fmt(" (%.1f s)", t)};
}

SegmentedStream accBiasedStream(std::uint64_t seed) {
  BiasedStreamSpec spec;
  spec.size = 10000;
  spec.seed = seed;
  return biasedStream(spec);
}

Outcome fairnessPenaltyEffect() {
  const auto start = Clock::now();
  double spdOff = 0, spdOn = 0, accOff = 0, accOn = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SegmentedStream stream = accBiasedStream(seed);
    TrainerConfig cfg;
    cfg.k = 1000;
    cfg.seed = seed;
    cfg.groupFeature = stream.groupFeature;
    cfg.deltaLambda = {0.0, 0.0, 0.0};
    const MetricsReport off = runPrequential(cfg, stream, 1000, 500).reports.back();
    cfg.deltaLambda = {0.02, 0.02, 0.02};
    const MetricsReport on = runPrequential(cfg, stream, 1000, 500).reports.back();
    spdOff += off.spdAbs / 5;
    spdOn += on.spdAbs / 5;
    accOff += off.accuracy / 5;
    accOn += on.accuracy / 5;
  }
  const double reduction = 1.0 - spdOn / spdOff, drop = accOff - accOn, t = seconds(start);
  return {reduction >= 0.5 && drop <= 0.05 && t < 120.0,
          fmt("|SPD| %.3f -> %.3f (%.0f%% lower), accuracy change %+.1f pp", spdOff, spdOn, 100 * reduction,
              -100 * drop) +
              fmt(" (%.1f s)", t)};
}

Outcome kSweepTrend() {
  const auto start = Clock::now();
  const std::vector<std::size_t> ks{100, 1000, 10000};
  std::vector<double> acc(3, 0.0), spdAbs(3, 0.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SegmentedStream stream = accBiasedStream(seed);
    TrainerConfig cfg;
    cfg.seed = seed;
    cfg.groupFeature = stream.groupFeature;
    const auto points = kSweep(cfg, stream, ks, 1000);
    for (std::size_t i = 0; i < 3; ++i) {
      acc[i] += points[i].finalWindow.accuracy / 5;
      spdAbs[i] += points[i].finalWindow.spdAbs / 5;
    }
  }
  return {acc[0] < acc[1] && spdAbs[2] > spdAbs[1],
          fmt("accuracy N/100 %.3f < N/10 %.3f; ", acc[0], acc[1]) +
              fmt("|SPD| N %.3f > N/10 %.3f (%.1f s)", spdAbs[2], spdAbs[1], seconds(start))};
}

Outcome metricOracle() {
  std::mt19937_64 rng(808);
  double worst = 0.0;
  int mismatchedCold = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t cap = 1 + rng() % 64;
    MetricsWindow w(cap);
    std::vector<WindowEntry> pushed;
    const std::size_t pushes = rng() % (3 * cap + 1);
    for (std::size_t i = 0; i < pushes; ++i) {
      const WindowEntry e{static_cast<int>(rng() % 2), static_cast<int>(rng() % 2), static_cast<int>(rng() % 2),
                          static_cast<double>(rng() % 4096) / 256.0};
      w.push(e);
      pushed.push_back(e);
    }
    const std::size_t keep = std::min(cap, pushed.size());
    const std::vector<WindowEntry> live(pushed.end() - static_cast<std::ptrdiff_t>(keep), pushed.end());

    // Brute-force recount.
    long n[2] = {0, 0}, pos[2] = {0, 0}, lab[2][2] = {{0, 0}, {0, 0}}, hit[2][2] = {{0, 0}, {0, 0}}, neg[2] = {0, 0};
    double dsum[2] = {0, 0};
    for (const auto& e : live) {
      ++n[e.group];
      pos[e.group] += e.prediction;
      ++lab[e.group][e.label];
      hit[e.group][e.label] += e.prediction;
      if (e.prediction == 0) {
        ++neg[e.group];
        dsum[e.group] += e.distance;
      }
    }
    auto ratio = [](long a, long b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
    const double spdRef = (n[0] && n[1]) ? std::abs(ratio(pos[0], n[0]) - ratio(pos[1], n[1])) : 0.0;
    const double aodRef = std::abs(0.5 * ((ratio(hit[0][0], lab[0][0]) - ratio(hit[1][0], lab[1][0])) +
                                          (ratio(hit[0][1], lab[0][1]) - ratio(hit[1][1], lab[1][1]))));
    const double burdenRef = (neg[0] && neg[1]) ? std::abs(dsum[0] / neg[0] - dsum[1] / neg[1]) : 0.0;
    const bool aodCold = !(lab[0][0] && lab[1][0] && lab[0][1] && lab[1][1]);

    worst = std::max({worst, std::abs(spd(w).value - spdRef), std::abs(aod(w).value - aodRef),
                      std::abs(burdenMetric(w).value - burdenRef)});
    mismatchedCold += spd(w).cold != !(n[0] && n[1]);
    mismatchedCold += aod(w).cold != aodCold;
    mismatchedCold += burdenMetric(w).cold != !(neg[0] && neg[1]);
  }
  return {worst <= 1e-12 && mismatchedCold == 0,
          fmt("1000 windows, max deviation %.2e, cold-flag mismatches %.0f", worst, mismatchedCold)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cliDeterminism() {
  const fs::path root = fs::temp_directory_path() / "feamoe_acceptance_det";
  fs::remove_all(root);
  std::ostringstream sink;
  auto run = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "feamoe");
    return cli::run(args, sink, sink);
  };
  struct Command {
    std::string name;
    std::vector<std::string> args;
    std::vector<std::string> outputs;
  };
  const std::string train = (root / "train_seed").string();
  if (run({"train", "--synthetic", "toy", "--segment-size", "800", "--seed", "7", "--output", train}) != 0) {
    return {false, "seed training run failed"};
  }
  const std::string model = train + "/model.json", data = train + "/data.csv", schema = train + "/schema.json";
  const std::vector<Command> commands{
      {"train", {"train", "--synthetic", "biased", "--size", "3000", "--seed", "7", "--k-sweep"},
       {"model.json", "metrics.csv", "metrics.jsonl", "run.json", "config.json", "data.csv", "schema.json", "ksweep.csv"}},
      {"eval", {"eval", "--model", model, "--input", data, "--schema", schema}, {"eval.json", "eval.csv", "config.json"}},
      {"explain", {"explain", "--model", model, "--input", data, "--schema", schema, "--oracle"},
       {"attributions.jsonl", "config.json"}},
      {"bench-shap", {"bench-shap", "--instances", "10", "--seed", "7"}, {"config.json"}},
      {"drift-sim", {"drift-sim", "--synthetic", "flip", "--size", "2000", "--flip-fraction", "0.5", "--seed", "7"},
       {"comparison.csv", "config.json"}},
  };
  std::string detail;
  bool pass = true;
  for (const auto& c : commands) {
    std::string first[2];
    bool ok = true;
    // Identical args, output directory included; cleared between runs.
    const fs::path out = root / c.name;
    for (int rep = 0; rep < 2; ++rep) {
      fs::remove_all(out);
      auto args = c.args;
      args.insert(args.end(), {"--output", out.string()});
      ok = ok && run(args) == 0;
      for (const auto& f : c.outputs) {
        ok = ok && fs::exists(out / f);
        first[rep] += slurp(out / f);
      }
    }
    ok = ok && first[0] == first[1];
    pass = pass && ok;
    detail += c.name + (ok ? " identical; " : " DIFFERS; ");
  }
  fs::remove_all(root);
  return {pass, detail.substr(0, detail.size() - 2)};
}

Outcome expertAdditionContinuity() {
  std::mt19937_64 rng(1010);
  std::vector<FeatureVector> probes;
  for (int i = 0; i < 100; ++i) probes.push_back(fixtures::randomVector(rng, 2, 2.0));
  double worst = 0.0;
  std::size_t events = 0;
  for (ExpertInit init : {ExpertInit::Split, ExpertInit::EpsilonShare}) {
    DriftSpec spec;
    const SegmentedStream stream = toyTwoSegmentStream(spec);
    TrainerConfig cfg;
    cfg.k = 400;
    cfg.expertInit = init;
    TrainerState s = initTrainer(cfg, 2);
    for (const auto& inst : stream.instances) {
      stepOne(s, inst);
      std::vector<double> before;
      for (const auto& x : probes) before.push_back(forward(s.model, x).mixtureProbability);
      if (!maybeGrow(s)) continue;
      ++events;
      for (std::size_t i = 0; i < probes.size(); ++i) {
        worst = std::max(worst, std::abs(forward(s.model, probes[i]).mixtureProbability - before[i]));
      }
    }
  }
  return {events > 0 && worst < 1e-6,
          fmt("%.0f growth events (split and epsilon-share), max probe shift %.2e", static_cast<double>(events), worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient exactness", gradientExactness},
      {"mixture attribution exactness", attributionExactness},
      {"Shapley axioms on the oracle", shapleyAxioms},
      {"attribution timing", timingClaim},
      {"toy drift recovery", toyDriftRecovery},
      {"fairness penalty effect", fairnessPenaltyEffect},
      {"k-sweep trend", kSweepTrend},
      {"metric oracle equivalence", metricOracle},
      {"CLI determinism", cliDeterminism},
      {"expert-addition continuity", expertAdditionContinuity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
