#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "feamoe/data.hpp"
#include "feamoe/error.hpp"
#include "feamoe/experiments.hpp"
#include "feamoe/explain.hpp"
#include "feamoe/io.hpp"
#include "feamoe/metrics.hpp"
#include "feamoe/trainer.hpp"

namespace feamoe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TrainerFlags {
  std::size_t k = 0;  // 0: one tenth of the stream
  double lr = 0.05;
  double dlam1 = 0.02, dlam2 = 0.02, dlam3 = 0.02;
  std::string growthPolicy = "fixed-interval";
  std::size_t saturationN = 50;
  double ifPenalty = 0.4;
  std::size_t maxExperts = 64;
  std::string expertInit = "split";
  double burdenDecay = 0.99;
};

struct StreamFlags {
  std::string schema;
  std::vector<std::string> inputs;
  std::string synthetic;
  std::size_t segmentSize = 2000;
  std::size_t size = 10000;
  double groupEffect = 0.75;
  double flipFraction = 1.0;
};

struct CommonFlags {
  std::string output;
  std::uint64_t seed = 0;
  std::size_t window = 1000;
};

void addTrainerFlags(CLI::App* cmd, TrainerFlags& f) {
  cmd->add_option("--k", f.k, "Instances per growth interval (default: stream size / 10)");
  cmd->add_option("--lr", f.lr, "SGD learning rate")->capture_default_str();
  cmd->add_option("--dlam1", f.dlam1, "SPD weight increment per added expert")->capture_default_str();
  cmd->add_option("--dlam2", f.dlam2, "AOD weight increment per added expert")->capture_default_str();
  cmd->add_option("--dlam3", f.dlam3, "Burden weight increment per added expert")->capture_default_str();
  cmd->add_option("--growth-policy", f.growthPolicy, "fixed-interval | individual-fairness")
      ->check(CLI::IsMember({"fixed-interval", "individual-fairness"}))
      ->capture_default_str();
  cmd->add_option("--saturation-n", f.saturationN, "Violations per expert under individual-fairness growth")
      ->capture_default_str();
  cmd->add_option("--if-penalty", f.ifPenalty, "Logged penalty per individual-fairness violation")
      ->capture_default_str();
  cmd->add_option("--max-experts", f.maxExperts, "Expert cap")->capture_default_str();
  cmd->add_option("--expert-init", f.expertInit, "split | epsilon-share | neutral")
      ->check(CLI::IsMember({"split", "epsilon-share", "neutral"}))
      ->capture_default_str();
  cmd->add_option("--burden-decay", f.burdenDecay, "EMA decay of the burden estimates")->capture_default_str();
}

void addStreamFlags(CLI::App* cmd, StreamFlags& f, bool allowCsv) {
  if (allowCsv) {
    cmd->add_option("--schema", f.schema, "Schema JSON for --input");
    cmd->add_option("--input", f.inputs, "CSV file(s); several files replay as consecutive segments");
  }
  cmd->add_option("--synthetic", f.synthetic, "toy | biased | flip")->check(CLI::IsMember({"toy", "biased", "flip"}));
  cmd->add_option("--segment-size", f.segmentSize, "Toy stream instances per segment")->capture_default_str();
  cmd->add_option("--size", f.size, "Biased stream size")->capture_default_str();
  cmd->add_option("--group-effect", f.groupEffect, "Label shift between groups in the biased stream")
      ->capture_default_str();
  cmd->add_option("--flip-fraction", f.flipFraction, "Fraction of the flipped copy kept (flip stream)")
      ->capture_default_str();
}

void addCommonFlags(CLI::App* cmd, CommonFlags& f, bool needsOutput) {
  auto* opt = cmd->add_option("--output", f.output, "Output directory");
  if (needsOutput) opt->required();
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  cmd->add_option("--window", f.window, "Prequential window size")->capture_default_str();
}

struct LoadedStream {
  SegmentedStream stream;
  std::optional<Schema> schema;
  std::optional<Standardizer> standardizer;
  std::size_t skippedRows = 0;
  bool synthetic = false;
};

LoadedStream loadStream(const StreamFlags& f, std::uint64_t seed) {
  LoadedStream out;
  if (!f.synthetic.empty()) {
    if (!f.inputs.empty()) throw ConfigError("--synthetic and --input are mutually exclusive");
    out.synthetic = true;
    if (f.synthetic == "toy") {
      DriftSpec spec;
      spec.segmentSizes = {f.segmentSize, f.segmentSize};
      spec.seed = seed;
      out.stream = toyTwoSegmentStream(spec);
    } else {
      BiasedStreamSpec spec;
      spec.size = f.size;
      spec.groupEffect = f.groupEffect;
      spec.seed = seed;
      out.stream = biasedStream(spec);
      if (f.synthetic == "flip") {
        DriftSpec drift;
        drift.kind = DriftKind::AttributeFlip;
        drift.seed = seed;
        drift.realismSortFraction = f.flipFraction;
        out.stream = attributeFlipStream(out.stream, drift);
      }
    }
    return out;
  }
  if (f.inputs.empty()) throw ConfigError("one of --input or --synthetic is required");
  if (f.schema.empty()) throw ConfigError("--input requires --schema");
  out.schema = loadSchema(f.schema);
  Standardizer standardizer;
  out.stream = segmentReplay(f.inputs, *out.schema, standardizer);
  out.skippedRows = out.stream.skippedRows;
  if (out.schema->standardize) {
    standardizer.freeze();
    out.standardizer = standardizer;
  }
  if (out.stream.instances.empty()) throw DataError("input stream is empty");
  return out;
}

TrainerConfig makeConfig(const TrainerFlags& f, std::uint64_t seed, std::size_t streamSize,
                         std::optional<std::size_t> groupFeature) {
  TrainerConfig cfg;
  cfg.k = f.k != 0 ? f.k : std::max<std::size_t>(1, streamSize / 10);
  cfg.learningRate = f.lr;
  cfg.deltaLambda = {f.dlam1, f.dlam2, f.dlam3};
  cfg.growthPolicy = parseGrowthPolicy(f.growthPolicy);
  cfg.saturationThreshold = f.saturationN;
  cfg.individualFairnessPenalty = f.ifPenalty;
  cfg.maxExperts = f.maxExperts;
  cfg.expertInit = parseExpertInit(f.expertInit);
  cfg.burdenDecay = f.burdenDecay;
  cfg.seed = seed;
  cfg.groupFeature = groupFeature;
  return cfg;
}

json configJson(const TrainerConfig& c) {
  return {{"k", c.k},
          {"learningRate", c.learningRate},
          {"deltaLambda", c.deltaLambda},
          {"growthPolicy", toString(c.growthPolicy)},
          {"saturationThreshold", c.saturationThreshold},
          {"individualFairnessPenalty", c.individualFairnessPenalty},
          {"maxExperts", c.maxExperts},
          {"seed", c.seed},
          {"burdenDecay", c.burdenDecay},
          {"expertInit", toString(c.expertInit)},
          {"newExpertShare", c.newExpertShare},
          {"groupFeature", c.groupFeature ? json(*c.groupFeature) : json(nullptr)}};
}

json argsJson(const std::vector<std::string>& args) { return json(std::vector<std::string>(args.begin() + 1, args.end())); }

void prepareOutput(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
}

std::string path(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

std::string reportsCsv(std::span<const MetricsReport> reports) {
  std::ostringstream os;
  writeReportsCsv(os, reports);
  return os.str();
}

std::string reportsJsonl(std::span<const MetricsReport> reports) {
  std::ostringstream os;
  writeReportsJsonl(os, reports);
  return os.str();
}

void writeSyntheticData(const std::string& dir, const SegmentedStream& stream) {
  std::ostringstream data;
  writeInstancesCsv(data, stream.instances, stream.featureNames, stream.groupFeature);
  writeFile(path(dir, "data.csv"), data.str());
  writeFile(path(dir, "schema.json"), toJson(syntheticSchema(stream.featureNames, stream.groupFeature)).dump(2) + "\n");
}

// ---------------------------------------------------------------- train

int cmdTrain(const CommonFlags& common, const StreamFlags& sf, const TrainerFlags& tf, bool sweep,
             const std::vector<std::string>& args, std::ostream& out) {
  LoadedStream loaded = loadStream(sf, common.seed);
  const SegmentedStream& stream = loaded.stream;
  const TrainerConfig cfg = makeConfig(tf, common.seed, stream.instances.size(), stream.groupFeature);
  cfg.validate(stream.instances.front().x.size());
  const std::size_t stride = std::max<std::size_t>(1, common.window / 2);

  PrequentialRun run = runPrequential(cfg, stream, common.window, stride);

  std::vector<SweepPoint> sweepPoints;
  if (sweep) {
    const std::size_t n = stream.instances.size();
    const std::vector<std::size_t> ks{std::max<std::size_t>(1, n / 100), std::max<std::size_t>(1, n / 10), n};
    sweepPoints = kSweep(cfg, stream, ks, common.window);
  }

  ModelBundle bundle;
  bundle.model = run.state.model;
  bundle.schedule = run.state.schedule;
  bundle.featureNames = stream.featureNames;
  bundle.groupFeature = stream.groupFeature;
  bundle.standardizer = loaded.standardizer;
  bundle.background = run.state.featureMeans();

  json runMeta;
  runMeta["config"] = configJson(cfg);
  runMeta["instancesSeen"] = run.state.instancesSeen;
  runMeta["skippedRows"] = loaded.skippedRows;
  runMeta["segmentEnds"] = stream.segmentEnds;
  runMeta["expertCount"] = run.state.model.expertCount();
  runMeta["anomalies"] = run.state.anomalies;
  runMeta["individualFairnessViolations"] = run.state.totalViolations;
  runMeta["gateSeesProtectedAttribute"] = stream.groupFeature.has_value();
  runMeta["burdenEstimator"] = {{"kind", "ema"}, {"decay", cfg.burdenDecay}, {"coldStart", "first observation"}};
  runMeta["growthEvents"] = json::array();
  json trajectory = json::array({json::array({0.0, 0.0, 0.0})});
  for (const auto& e : run.state.growthLog) {
    runMeta["growthEvents"].push_back({{"position", e.position}, {"experts", e.expertCount}, {"lambda", e.lambda}});
    trajectory.push_back(e.lambda);
  }
  runMeta["lambdaTrajectory"] = trajectory;

  prepareOutput(common.output);
  writeFile(path(common.output, "config.json"), json({{"command", "train"}, {"args", argsJson(args)}, {"trainer", configJson(cfg)}}).dump(2) + "\n");
  saveModel(path(common.output, "model.json"), bundle);
  writeFile(path(common.output, "metrics.csv"), reportsCsv(run.reports));
  writeFile(path(common.output, "metrics.jsonl"), reportsJsonl(run.reports));
  writeFile(path(common.output, "run.json"), runMeta.dump(2) + "\n");
  if (loaded.synthetic) writeSyntheticData(common.output, stream);
  if (sweep) {
    std::ostringstream os;
    os << "k,experts,accuracy,spd,aod,burden\n";
    for (const auto& p : sweepPoints) {
      os << p.k << ',' << p.experts << ',' << formatDouble(p.finalWindow.accuracy) << ','
         << formatDouble(p.finalWindow.spdAbs) << ',' << formatDouble(p.finalWindow.aodAbs) << ','
         << formatDouble(p.finalWindow.burdenAbs) << '\n';
    }
    writeFile(path(common.output, "ksweep.csv"), os.str());
  }
  const MetricsReport& last = run.reports.back();
  out << "trained " << stream.instances.size() << " instances, " << run.state.model.expertCount()
      << " experts; final window accuracy " << last.accuracy << " spd " << last.spdAbs << " aod " << last.aodAbs
      << " burden " << last.burdenAbs << "\n";
  return 0;
}

// ---------------------------------------------------------------- shared model + data loading

struct ModelAndData {
  ModelBundle bundle;
  std::vector<StreamInstance> instances;
  Schema schema;
};

ModelAndData loadModelAndData(const std::string& modelPath, const std::string& inputPath,
                              const std::string& schemaPath) {
  if (modelPath.empty()) throw ConfigError("--model is required");
  if (inputPath.empty()) throw ConfigError("--input is required");
  if (schemaPath.empty()) throw ConfigError("--schema is required");
  ModelAndData md{loadModel(modelPath), {}, loadSchema(schemaPath)};
  Standardizer standardizer = md.bundle.standardizer.value_or(Standardizer());
  if (md.schema.standardize && !md.bundle.standardizer) {
    throw ConfigError("schema standardizes features but the model carries no standardizer state");
  }
  md.instances = ingestCsv(inputPath, md.schema, standardizer).instances;
  if (md.schema.featureDim() != md.bundle.model.featureDim()) {
    throw DimensionError("schema yields " + std::to_string(md.schema.featureDim()) + " features, model expects " +
                         std::to_string(md.bundle.model.featureDim()));
  }
  return md;
}

// ---------------------------------------------------------------- eval

int cmdEval(const std::string& output, const std::string& modelPath, const std::string& inputPath,
            const std::string& schemaPath, const std::vector<std::string>& args, std::ostream& out) {
  ModelAndData md = loadModelAndData(modelPath, inputPath, schemaPath);
  const MetricsReport report = evaluateDataset(md.bundle.model, md.instances);
  out << "instances " << report.count << "\naccuracy " << report.accuracy << "\nspd " << report.spdAbs << "\naod "
      << report.aodAbs << "\nburden " << report.burdenAbs << "\ncoldFlags " << report.coldFlags << "\n";
  if (!output.empty()) {
    prepareOutput(output);
    writeFile(path(output, "config.json"), json({{"command", "eval"}, {"args", argsJson(args)}}).dump(2) + "\n");
    writeFile(path(output, "eval.json"), toJson(report).dump(2) + "\n");
    writeFile(path(output, "eval.csv"), reportsCsv(std::span<const MetricsReport>(&report, 1)));
  }
  return 0;
}

// ---------------------------------------------------------------- explain

Background resolveBackground(const ModelAndData& md, const std::string& backgroundPath) {
  if (!backgroundPath.empty()) {
    Standardizer standardizer = md.bundle.standardizer.value_or(Standardizer());
    const auto ref = ingestCsv(backgroundPath, md.schema, standardizer).instances;
    if (ref.empty()) throw DataError("background file has no rows");
    Background bg{std::vector<double>(md.bundle.model.featureDim(), 0.0)};
    for (const auto& inst : ref) {
      for (std::size_t j = 0; j < inst.x.size(); ++j) bg.featureMeans[j] += inst.x[j];
    }
    for (auto& v : bg.featureMeans) v /= static_cast<double>(ref.size());
    return bg;
  }
  if (!md.bundle.background) throw ConfigError("model carries no background; pass --background");
  return Background{*md.bundle.background};
}

double maxGap(const std::vector<double>& a, const std::vector<double>& b) {
  double gap = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) gap = std::max(gap, std::abs(a[j] - b[j]));
  return gap;
}

int cmdExplain(const std::string& output, const std::string& modelPath, const std::string& inputPath,
               const std::string& schemaPath, const std::string& backgroundPath, bool oracle,
               const std::vector<std::string>& args, std::ostream& out) {
  ModelAndData md = loadModelAndData(modelPath, inputPath, schemaPath);
  if (oracle && md.bundle.model.featureDim() > kMaxOracleFeatures) {
    throw ConfigError("--oracle supports at most " + std::to_string(kMaxOracleFeatures) + " features, model has " +
                      std::to_string(md.bundle.model.featureDim()));
  }
  const Background background = resolveBackground(md, backgroundPath);
  std::vector<FeatureVector> xs;
  for (const auto& inst : md.instances) xs.push_back(inst.x);
  const std::vector<Attribution> attributions = explainBatch(md.bundle.model, xs, background);

  std::ostringstream lines;
  double worstFrozen = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    json row = toJson(attributions[i], md.bundle.featureNames, ShapGame::FrozenGate);
    if (oracle) {
      const Attribution frozen = exactShapOracle(md.bundle.model, xs[i], background, ShapGame::FrozenGate);
      const Attribution full = exactShapOracle(md.bundle.model, xs[i], background, ShapGame::FullModel);
      const double frozenGap = maxGap(attributions[i].phi, frozen.phi);
      worstFrozen = std::max(worstFrozen, frozenGap);
      row["oracle"] = {{"frozenGate", {{"phi", frozen.phi}, {"baseValue", frozen.baseValue}, {"maxAbsGap", frozenGap}}},
                       {"fullModel",
                        {{"phi", full.phi}, {"baseValue", full.baseValue}, {"maxAbsGap", maxGap(attributions[i].phi, full.phi)}}}};
    }
    lines << row.dump() << '\n';
  }
  prepareOutput(output);
  writeFile(path(output, "config.json"), json({{"command", "explain"}, {"args", argsJson(args)}}).dump(2) + "\n");
  writeFile(path(output, "attributions.jsonl"), lines.str());
  out << "explained " << xs.size() << " instances";
  if (oracle) out << "; max frozen-gate oracle gap " << worstFrozen;
  out << "\n";
  return 0;
}

// ---------------------------------------------------------------- bench-shap

MixtureModel randomModel(std::size_t dim, std::size_t experts, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ExpertParams> ex(experts);
  GateParams gate;
  for (auto& e : ex) {
    for (std::size_t j = 0; j < dim; ++j) e.weights.push_back(n(rng));
    e.bias = n(rng);
    gate.weights.emplace_back();
    for (std::size_t j = 0; j < dim; ++j) gate.weights.back().push_back(0.5 * n(rng));
    gate.biases.push_back(0.5 * n(rng));
  }
  return MixtureModel(ex, gate);
}

template <typename F>
double timeBatch(F&& f) {
  for (int i = 0; i < 3; ++i) f();  // warmup, excluded
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmdBenchShap(const CommonFlags& common, const std::string& modelPath, const std::string& inputPath,
                 const std::string& schemaPath, std::size_t instances, std::size_t fixtureDim,
                 std::size_t fixtureExperts, std::vector<std::size_t> samples, const std::vector<std::string>& args,
                 std::ostream& out) {
#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  MixtureModel model(1);
  Background background;
  std::vector<FeatureVector> xs;
  if (!modelPath.empty()) {
    ModelAndData md = loadModelAndData(modelPath, inputPath, schemaPath);
    model = md.bundle.model;
    background = resolveBackground(md, "");
    for (std::size_t i = 0; i < std::min(instances, md.instances.size()); ++i) xs.push_back(md.instances[i].x);
  } else {
    std::mt19937_64 rng(common.seed);
    model = randomModel(fixtureDim, fixtureExperts, rng);
    background.featureMeans.assign(fixtureDim, 0.0);
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t i = 0; i < instances; ++i) {
      xs.emplace_back();
      for (std::size_t j = 0; j < fixtureDim; ++j) xs.back().push_back(n(rng));
    }
  }
  if (xs.empty()) throw DataError("no instances to explain");

  std::vector<Attribution> sink;
  const double mixtureTime = timeBatch([&] { sink = serial::explainBatch(model, xs, background); });
  std::ostringstream csv;
  csv << "method,samples,instances,seconds,speedup\n";
  csv << "mixture-linear,0," << xs.size() << ',' << formatDouble(mixtureTime) << ",1\n";
  out << "mixture-linear: " << mixtureTime << " s\n";
  for (std::size_t n : samples) {
    const double t = timeBatch([&] {
      for (std::size_t i = 0; i < xs.size(); ++i) sink[i] = kernelShapEstimate(model, xs[i], background, n, common.seed + i);
    });
    const double speedup = t / std::max(mixtureTime, 1e-12);
    csv << "kernel," << n << ',' << xs.size() << ',' << formatDouble(t) << ',' << formatDouble(speedup) << '\n';
    out << "kernel n=" << n << ": " << t << " s (" << speedup << "x)\n";
  }
  prepareOutput(common.output);
  writeFile(path(common.output, "config.json"), json({{"command", "bench-shap"}, {"args", argsJson(args)}}).dump(2) + "\n");
  writeFile(path(common.output, "timing.csv"), csv.str());
  return 0;
}

// ---------------------------------------------------------------- drift-sim

int cmdDriftSim(const CommonFlags& common, const StreamFlags& sf, const TrainerFlags& tf,
                const std::vector<std::string>& args, std::ostream& out) {
  StreamFlags flags = sf;
  if (flags.synthetic.empty() && flags.inputs.empty()) flags.synthetic = "toy";
  LoadedStream loaded = loadStream(flags, common.seed);
  const SegmentedStream& stream = loaded.stream;
  const TrainerConfig cfg = makeConfig(tf, common.seed, stream.instances.size(), stream.groupFeature);
  cfg.validate(stream.instances.front().x.size());
  const std::size_t stride = std::max<std::size_t>(1, common.window / 2);
  const std::vector<ArmResult> arms = runDriftComparison(cfg, stream, common.window, stride);

  std::ostringstream csv;
  csv << "arm," << kReportCsvHeader << '\n';
  for (const auto& arm : arms) {
    for (const auto& r : arm.reports) csv << arm.arm << ',' << reportCsvRow(r) << '\n';
  }
  prepareOutput(common.output);
  writeFile(path(common.output, "config.json"),
            json({{"command", "drift-sim"}, {"args", argsJson(args)}, {"trainer", configJson(cfg)}}).dump(2) + "\n");
  writeFile(path(common.output, "comparison.csv"), csv.str());
  for (const auto& arm : arms) {
    const MetricsReport& last = arm.reports.back();
    out << arm.arm << ": final window accuracy " << last.accuracy << " spd " << last.spdAbs << " aod " << last.aodAbs
        << " burden " << last.burdenAbs << "\n";
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fair mixture-of-experts streaming classifier"};
  app.require_subcommand(1);

  CommonFlags trainCommon, driftCommon, benchCommon;
  StreamFlags trainStreamFlags, driftStreamFlags;
  TrainerFlags trainFlags, driftFlags;
  bool sweep = false;

  auto* train = app.add_subcommand("train", "Train online with prequential metrics");
  addCommonFlags(train, trainCommon, true);
  addStreamFlags(train, trainStreamFlags, true);
  addTrainerFlags(train, trainFlags);
  train->add_flag("--k-sweep", sweep, "Also run k in {N/100, N/10, N} and write ksweep.csv");

  std::string evalOutput, evalModel, evalInput, evalSchema;
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model on a dataset");
  eval->add_option("--model", evalModel, "Model JSON")->required();
  eval->add_option("--input", evalInput, "CSV dataset")->required();
  eval->add_option("--schema", evalSchema, "Schema JSON")->required();
  eval->add_option("--output", evalOutput, "Output directory");

  std::string exOutput, exModel, exInput, exSchema, exBackground;
  bool exOracle = false;
  auto* explain = app.add_subcommand("explain", "Shapley attributions of the gated logit");
  explain->add_option("--model", exModel, "Model JSON")->required();
  explain->add_option("--input", exInput, "CSV instances")->required();
  explain->add_option("--schema", exSchema, "Schema JSON")->required();
  explain->add_option("--background", exBackground, "CSV reference set (default: training means)");
  explain->add_option("--output", exOutput, "Output directory")->required();
  explain->add_flag("--oracle", exOracle, "Add exhaustive-enumeration values and gaps");

  std::string benchModel, benchInput, benchSchema;
  std::size_t benchInstances = 100, fixtureDim = 12, fixtureExperts = 8;
  std::vector<std::size_t> kernelSamples{500, 2000};
  auto* bench = app.add_subcommand("bench-shap", "Time mixture attributions against kernel SHAP");
  addCommonFlags(bench, benchCommon, true);
  bench->add_option("--model", benchModel, "Model JSON (default: random fixture)");
  bench->add_option("--input", benchInput, "CSV instances for --model");
  bench->add_option("--schema", benchSchema, "Schema JSON for --model");
  bench->add_option("--instances", benchInstances, "Batch size")->capture_default_str();
  bench->add_option("--fixture-dim", fixtureDim, "Fixture feature count")->capture_default_str();
  bench->add_option("--fixture-experts", fixtureExperts, "Fixture expert count")->capture_default_str();
  bench->add_option("--kernel-samples", kernelSamples, "Kernel SHAP sample counts")->capture_default_str();

  auto* drift = app.add_subcommand("drift-sim", "Compare frozen, online and warm-started models on a drifting stream");
  addCommonFlags(drift, driftCommon, true);
  addStreamFlags(drift, driftStreamFlags, true);
  addTrainerFlags(drift, driftFlags);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train) return cmdTrain(trainCommon, trainStreamFlags, trainFlags, sweep, args, out);
    if (*eval) return cmdEval(evalOutput, evalModel, evalInput, evalSchema, args, out);
    if (*explain) return cmdExplain(exOutput, exModel, exInput, exSchema, exBackground, exOracle, args, out);
    if (*bench) {
      return cmdBenchShap(benchCommon, benchModel, benchInput, benchSchema, benchInstances, fixtureDim,
                          fixtureExperts, kernelSamples, args, out);
    }
    if (*drift) return cmdDriftSim(driftCommon, driftStreamFlags, driftFlags, args, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace feamoe::cli
