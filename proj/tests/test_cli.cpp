#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "feamoe/explain.hpp"
#include "feamoe/io.hpp"
#include "support.hpp"

using namespace feamoe;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status;
  std::string out, err;
};

Result runCli(std::vector<std::string> args) {
  args.insert(args.begin(), "feamoe");
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Trains once on the toy stream; shared by the tests below.
const fs::path& toyRun() {
  static const fs::path dir = [] {
    const auto d = fixtures::scratchDir("cli_toy");
    const Result r = runCli({"train", "--synthetic", "toy", "--segment-size", "600", "--window", "200", "--seed", "3",
                             "--output", (d / "run").string()});
    if (r.status != 0) throw std::runtime_error(r.err);
    return d;
  }();
  return dir;
}

}  // namespace

TEST(Cli, TrainWritesOutputsCoveringBothSegments) {
  const fs::path run = toyRun() / "run";
  for (const char* f : {"model.json", "metrics.csv", "metrics.jsonl", "run.json", "config.json", "data.csv", "schema.json"}) {
    EXPECT_TRUE(fs::exists(run / f)) << f;
  }
  const auto rows = lines(slurp(run / "metrics.csv"));
  EXPECT_EQ(rows.front(), kReportCsvHeader);
  EXPECT_NE(rows[1].substr(rows[1].rfind(',')), rows.back().substr(rows.back().rfind(',')));
  EXPECT_EQ(rows.back().substr(rows.back().rfind(',') + 1), "1");
  const auto meta = nlohmann::json::parse(slurp(run / "run.json"));
  EXPECT_EQ(meta["segmentEnds"], nlohmann::json({600, 1200}));
  EXPECT_EQ(meta["config"]["k"], 120);
}

TEST(Cli, TrainIsByteDeterministic) {
  const auto d = fixtures::scratchDir("cli_det");
  for (const char* out : {"a", "b"}) {
    ASSERT_EQ(runCli({"train", "--synthetic", "toy", "--segment-size", "600", "--window", "200", "--seed", "3",
                      "--output", (d / out).string()})
                  .status,
              0);
  }
  for (const char* f : {"model.json", "metrics.csv", "metrics.jsonl", "run.json", "data.csv"}) {
    EXPECT_EQ(slurp(d / "a" / f), slurp(toyRun() / "run" / f)) << f;
  }
  EXPECT_EQ(slurp(d / "a" / "model.json"), slurp(d / "b" / "model.json"));
}

TEST(Cli, EvalOnTrainingData) {
  const fs::path run = toyRun() / "run";
  const auto out = fixtures::scratchDir("cli_eval");
  const Result r = runCli({"eval", "--model", (run / "model.json").string(), "--input", (run / "data.csv").string(),
                           "--schema", (run / "schema.json").string(), "--output", out.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(out / "eval.json"));
  EXPECT_EQ(report["count"], 1200);
  EXPECT_GT(report["accuracy"].get<double>(), 0.9);
  EXPECT_NE(r.out.find("accuracy"), std::string::npos);
}

TEST(Cli, EvalMissingModelLeavesNoOutput) {
  const fs::path run = toyRun() / "run";
  const auto out = fixtures::scratchDir("cli_eval_missing") / "out";
  const Result r = runCli({"eval", "--model", (run / "absent.json").string(), "--input", (run / "data.csv").string(),
                           "--schema", (run / "schema.json").string(), "--output", out.string()});
  EXPECT_NE(r.status, 0);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, EvalPerfectClassifier) {
  const auto d = fixtures::scratchDir("cli_perfect");
  ModelBundle b;
  b.model = MixtureModel({{{10.0}, 0.0}}, GateParams{{{0.0}}, {0.0}});
  b.featureNames = {"x"};
  saveModel((d / "m.json").string(), b);
  writeFile((d / "d.csv").string(), "x,label,group\n1,1,0\n-1,0,1\n2,1,1\n-3,0,0\n");
  writeFile((d / "s.json").string(), toJson(syntheticSchema(b.featureNames, std::nullopt)).dump());
  const Result r = runCli({"eval", "--model", (d / "m.json").string(), "--input", (d / "d.csv").string(), "--schema",
                           (d / "s.json").string(), "--output", (d / "out").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(d / "out" / "eval.json"))["accuracy"], 1.0);
}

TEST(Cli, ExplainOracleOnEightFeatures) {
  const auto d = fixtures::scratchDir("cli_explain");
  std::mt19937_64 rng(4);
  ModelBundle b;
  b.model = fixtures::randomModel(rng, 8, 3);
  for (int j = 0; j < 8; ++j) b.featureNames.push_back("f" + std::to_string(j));
  b.background = std::vector<double>(8, 0.0);
  saveModel((d / "m.json").string(), b);
  std::string csv = "f0,f1,f2,f3,f4,f5,f6,f7,label,group\n";
  for (int i = 0; i < 25; ++i) {
    for (double v : fixtures::randomVector(rng, 8)) csv += formatDouble(v) + ",";
    csv += "1,0\n";
  }
  writeFile((d / "x.csv").string(), csv);
  writeFile((d / "s.json").string(), toJson(syntheticSchema(b.featureNames, std::nullopt)).dump());
  const std::vector<std::string> args{"explain", "--model", (d / "m.json").string(), "--input", (d / "x.csv").string(),
                                      "--schema", (d / "s.json").string(), "--oracle"};
  auto withOut = [&](const char* name) {
    auto a = args;
    a.insert(a.end(), {"--output", (d / name).string()});
    return a;
  };
  ASSERT_EQ(runCli(withOut("a")).status, 0);
  const auto rows = lines(slurp(d / "a" / "attributions.jsonl"));
  ASSERT_EQ(rows.size(), 25u);
  for (const auto& row : rows) {
    const auto j = nlohmann::json::parse(row);
    EXPECT_LE(j["oracle"]["frozenGate"]["maxAbsGap"].get<double>(), 1e-9);
    EXPECT_TRUE(j["oracle"]["fullModel"].contains("maxAbsGap"));
  }
  ASSERT_EQ(runCli(withOut("b")).status, 0);
  EXPECT_EQ(slurp(d / "a" / "attributions.jsonl"), slurp(d / "b" / "attributions.jsonl"));
}

TEST(Cli, ExplainSingleExpertIsClosedForm) {
  const fs::path d = fixtures::scratchDir("cli_explain_linear");
  ModelBundle b;
  b.model = MixtureModel({{{2.0, -1.0}, 0.5}}, GateParams{{{0.0, 0.0}}, {0.0}});
  b.featureNames = {"a", "b"};
  saveModel((d / "m.json").string(), b);
  writeFile((d / "x.csv").string(), "a,b,label,group\n1,3,1,0\n");
  writeFile((d / "bg.csv").string(), "a,b,label,group\n0,1,1,0\n2,1,0,1\n");
  writeFile((d / "s.json").string(), toJson(syntheticSchema(b.featureNames, std::nullopt)).dump());
  ASSERT_EQ(runCli({"explain", "--model", (d / "m.json").string(), "--input", (d / "x.csv").string(), "--schema",
                    (d / "s.json").string(), "--background", (d / "bg.csv").string(), "--output", (d / "o").string()})
                .status,
            0);
  const auto j = nlohmann::json::parse(lines(slurp(d / "o" / "attributions.jsonl")).at(0));
  EXPECT_EQ(j["phi"], nlohmann::json({0.0, -2.0}));
  EXPECT_EQ(j["baseValue"], 1.5);
}

TEST(Cli, ExplainOracleRejectsWideModels) {
  const fs::path d = fixtures::scratchDir("cli_explain_wide");
  ModelBundle b;
  b.model = MixtureModel(21);
  std::string header;
  for (int j = 0; j < 21; ++j) {
    b.featureNames.push_back("f" + std::to_string(j));
    header += "f" + std::to_string(j) + ",";
  }
  b.background = std::vector<double>(21, 0.0);
  saveModel((d / "m.json").string(), b);
  std::string row;
  for (int j = 0; j < 21; ++j) row += "0,";
  writeFile((d / "x.csv").string(), header + "label,group\n" + row + "1,0\n");
  writeFile((d / "s.json").string(), toJson(syntheticSchema(b.featureNames, std::nullopt)).dump());
  const Result r = runCli({"explain", "--model", (d / "m.json").string(), "--input", (d / "x.csv").string(), "--schema",
                           (d / "s.json").string(), "--oracle", "--output", (d / "o").string()});
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("20"), std::string::npos);
}

TEST(Cli, BenchShapSingleInstance) {
  const auto d = fixtures::scratchDir("cli_bench");
  const Result r = runCli({"bench-shap", "--instances", "1", "--output", d.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = lines(slurp(d / "timing.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "method,samples,instances,seconds,speedup");
  EXPECT_EQ(rows[1].rfind("mixture-linear,0,1,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("kernel,500,1,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("kernel,2000,1,", 0), 0u);
}

TEST(Cli, DriftSimComparisonIsDeterministic) {
  const auto d = fixtures::scratchDir("cli_drift");
  for (const char* out : {"a", "b"}) {
    ASSERT_EQ(runCli({"drift-sim", "--synthetic", "toy", "--segment-size", "400", "--window", "200", "--output",
                      (d / out).string()})
                  .status,
              0);
  }
  const std::string csv = slurp(d / "a" / "comparison.csv");
  EXPECT_EQ(csv, slurp(d / "b" / "comparison.csv"));
  for (const char* arm : {"\nfrozen,", "\nfeamoe,", "\nno-growth,", "\nwarm-start,"}) {
    EXPECT_NE(csv.find(arm), std::string::npos) << arm;
  }
}

TEST(Cli, KSweepWritesOneRowPerK) {
  const auto d = fixtures::scratchDir("cli_sweep");
  ASSERT_EQ(runCli({"train", "--synthetic", "biased", "--size", "1000", "--window", "200", "--k-sweep", "--output",
                    d.string()})
                .status,
            0);
  const auto rows = lines(slurp(d / "ksweep.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1].rfind("10,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("100,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("1000,", 0), 0u);
}

TEST(Cli, CsvInputTrainsAndStandardizes) {
  const fs::path run = toyRun() / "run";
  const auto d = fixtures::scratchDir("cli_csv");
  auto schema = nlohmann::json::parse(slurp(run / "schema.json"));
  schema["standardize"] = true;
  writeFile((d / "s.json").string(), schema.dump());
  const Result r = runCli({"train", "--schema", (d / "s.json").string(), "--input", (run / "data.csv").string(),
                           "--output", (d / "o").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto model = nlohmann::json::parse(slurp(d / "o" / "model.json"));
  EXPECT_FALSE(model["standardizer"].is_null());
  EXPECT_FALSE(fs::exists(d / "o" / "data.csv"));
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(runCli({}).status, 0);
  EXPECT_NE(runCli({"train", "--output", "/tmp/feamoe_never"}).status, 0);
  EXPECT_NE(runCli({"train", "--synthetic", "nope", "--output", "/tmp/feamoe_never"}).status, 0);
  EXPECT_NE(runCli({"train", "--synthetic", "toy", "--growth-policy", "individual-fairness", "--output",
                    "/tmp/feamoe_never"})
                .status,
            0);
}

TEST(Cli, AttributeFlipOnlineGapsBelowFrozen) {
  const auto d = fixtures::scratchDir("cli_flip");
  ASSERT_EQ(runCli({"drift-sim", "--synthetic", "flip", "--flip-fraction", "0.9", "--output", d.string()}).status, 0);
  std::map<std::string, std::vector<std::string>> last;
  for (const auto& row : lines(slurp(d / "comparison.csv"))) {
    std::vector<std::string> cells;
    std::istringstream in(row);
    for (std::string c; std::getline(in, c, ',');) cells.push_back(c);
    last[cells[0]] = cells;
  }
  // Columns: arm, windowStart, windowEnd, accuracy, spd, aod, burden, ...
  for (int col : {4, 5}) EXPECT_LE(std::stod(last["feamoe"][col]), std::stod(last["frozen"][col])) << col;
}
