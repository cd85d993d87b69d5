#include "feamoe/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "feamoe/error.hpp"

namespace feamoe {

using nlohmann::json;

std::string formatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("cannot format floating-point value");
  return std::string(buf, ptr);
}

namespace {

template <typename T>
T field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("field '") + key + "': " + e.what());
  }
}

json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

json toJson(const ModelBundle& bundle) {
  const MixtureModel& m = bundle.model;
  json doc;
  doc["featureDim"] = m.featureDim();
  doc["experts"] = json::array();
  doc["gate"] = json::array();
  for (std::size_t i = 0; i < m.expertCount(); ++i) {
    const auto w = m.expertWeights(i);
    const auto v = m.gateWeights(i);
    doc["experts"].push_back({{"weights", std::vector<double>(w.begin(), w.end())}, {"bias", m.expertBias(i)}});
    doc["gate"].push_back({{"weights", std::vector<double>(v.begin(), v.end())}, {"bias", m.gateBias(i)}});
  }
  doc["schedule"] = {{"lambda", bundle.schedule.lambdas()},
                     {"deltaLambda", bundle.schedule.delta},
                     {"growthEvents", bundle.schedule.growthEvents}};
  doc["featureNames"] = bundle.featureNames;
  doc["groupFeature"] = bundle.groupFeature ? json(*bundle.groupFeature) : json(nullptr);
  if (bundle.standardizer) {
    const Standardizer& s = *bundle.standardizer;
    doc["standardizer"] = {{"count", s.count()}, {"mean", s.means()}, {"m2", s.sumsOfSquares()}};
  }
  if (bundle.background) doc["background"] = *bundle.background;
  return doc;
}

ModelBundle modelFromJson(const json& doc) {
  const auto dim = field<std::size_t>(doc, "featureDim");
  const json& experts = doc.at("experts");
  const json& gate = doc.at("gate");
  if (!experts.is_array() || !gate.is_array() || experts.size() != gate.size() || experts.empty()) {
    throw DataError("model needs matching non-empty expert and gate arrays");
  }
  std::vector<ExpertParams> ex;
  GateParams g;
  for (std::size_t i = 0; i < experts.size(); ++i) {
    ex.push_back({field<std::vector<double>>(experts[i], "weights"), field<double>(experts[i], "bias")});
    g.weights.push_back(field<std::vector<double>>(gate[i], "weights"));
    g.biases.push_back(field<double>(gate[i], "bias"));
    if (ex.back().weights.size() != dim || g.weights.back().size() != dim) {
      throw DimensionError("expert " + std::to_string(i) + " does not match featureDim " + std::to_string(dim));
    }
  }
  ModelBundle b;
  b.model = MixtureModel(ex, g);
  if (doc.contains("schedule")) {
    const json& s = doc["schedule"];
    b.schedule.delta = field<std::array<double, 3>>(s, "deltaLambda");
    b.schedule.growthEvents = field<std::size_t>(s, "growthEvents");
  }
  if (doc.contains("featureNames")) b.featureNames = doc["featureNames"].get<std::vector<std::string>>();
  if (b.featureNames.empty()) {
    for (std::size_t j = 0; j < dim; ++j) b.featureNames.push_back("x" + std::to_string(j));
  }
  if (b.featureNames.size() != dim) throw DimensionError("featureNames does not match featureDim");
  if (doc.contains("groupFeature") && !doc["groupFeature"].is_null()) {
    b.groupFeature = doc["groupFeature"].get<std::size_t>();
  }
  if (doc.contains("standardizer")) {
    const json& s = doc["standardizer"];
    b.standardizer = Standardizer::restore(field<std::size_t>(s, "count"), field<std::vector<double>>(s, "mean"),
                                           field<std::vector<double>>(s, "m2"));
    b.standardizer->freeze();
  }
  if (doc.contains("background")) {
    b.background = doc["background"].get<std::vector<double>>();
    if (b.background->size() != dim) throw DimensionError("background does not match featureDim");
  }
  return b;
}

void saveModel(const std::string& path, const ModelBundle& bundle) { writeFile(path, toJson(bundle).dump(2) + "\n"); }

ModelBundle loadModel(const std::string& path) {
  try {
    return modelFromJson(readJsonFile(path));
  } catch (const json::exception& e) {
    throw DataError("'" + path + "': " + e.what());
  }
}

json toJson(const Schema& schema) {
  json doc;
  doc["features"] = schema.featureColumns;
  doc["label"] = schema.labelColumn;
  doc["group"] = schema.groupColumn;
  doc["groupIncludedAsFeature"] = schema.groupIncludedAsFeature;
  doc["positiveLabel"] = schema.positiveLabelValue;
  doc["privilegedGroup"] = schema.privilegedGroupValue;
  doc["categorical"] = schema.categoricalColumns;
  doc["standardize"] = schema.standardize;
  return doc;
}

Schema schemaFromJson(const json& doc) {
  Schema s;
  s.featureColumns = field<std::vector<std::string>>(doc, "features");
  s.labelColumn = field<std::string>(doc, "label");
  s.groupColumn = field<std::string>(doc, "group");
  s.groupIncludedAsFeature = doc.value("groupIncludedAsFeature", false);
  s.positiveLabelValue = doc.value("positiveLabel", std::string("1"));
  s.privilegedGroupValue = doc.value("privilegedGroup", std::string("1"));
  if (doc.contains("categorical")) {
    s.categoricalColumns = doc["categorical"].get<std::map<std::string, std::vector<std::string>>>();
  }
  s.standardize = doc.value("standardize", true);
  s.validate();
  return s;
}

Schema loadSchema(const std::string& path) {
  try {
    return schemaFromJson(readJsonFile(path));
  } catch (const json::exception& e) {
    throw DataError("'" + path + "': " + e.what());
  }
}

std::string reportCsvRow(const MetricsReport& r) {
  std::ostringstream os;
  os << r.windowStart << ',' << r.windowEnd << ',' << formatDouble(r.accuracy) << ',' << formatDouble(r.spdAbs)
     << ',' << formatDouble(r.aodAbs) << ',' << formatDouble(r.burdenAbs) << ',' << r.coldFlags << ','
     << r.segmentIndex;
  return os.str();
}

json toJson(const MetricsReport& r) {
  return {{"windowStart", r.windowStart}, {"windowEnd", r.windowEnd}, {"accuracy", r.accuracy},
          {"spd", r.spdAbs},              {"aod", r.aodAbs},          {"aodSigned", r.aodSigned},
          {"burden", r.burdenAbs},        {"coldFlags", r.coldFlags}, {"segmentIndex", r.segmentIndex},
          {"count", r.count}};
}

void writeReportsCsv(std::ostream& out, std::span<const MetricsReport> reports) {
  out << kReportCsvHeader << '\n';
  for (const auto& r : reports) out << reportCsvRow(r) << '\n';
}

void writeReportsJsonl(std::ostream& out, std::span<const MetricsReport> reports) {
  for (const auto& r : reports) out << toJson(r).dump() << '\n';
}

json toJson(const Attribution& a, std::span<const std::string> featureNames, ShapGame game) {
  return {{"featureNames", std::vector<std::string>(featureNames.begin(), featureNames.end())},
          {"phi", a.phi},
          {"baseValue", a.baseValue},
          {"explainedValue", a.explainedValue},
          {"game", toString(game)}};
}

void writeInstancesCsv(std::ostream& out, std::span<const StreamInstance> instances,
                       std::span<const std::string> featureNames, std::optional<std::size_t> groupFeature) {
  if (groupFeature && *groupFeature + 1 != featureNames.size()) {
    throw ConfigError("the group indicator must be the last model feature");
  }
  const std::size_t plain = groupFeature ? featureNames.size() - 1 : featureNames.size();
  for (std::size_t j = 0; j < plain; ++j) out << featureNames[j] << ',';
  out << "label,group\n";
  for (const auto& inst : instances) {
    for (std::size_t j = 0; j < plain; ++j) out << formatDouble(inst.x[j]) << ',';
    out << inst.label << ',' << inst.group << '\n';
  }
}

Schema syntheticSchema(std::span<const std::string> featureNames, std::optional<std::size_t> groupFeature) {
  Schema s;
  for (std::size_t j = 0; j < featureNames.size(); ++j) {
    if (!(groupFeature && j == *groupFeature)) s.featureColumns.push_back(featureNames[j]);
  }
  s.labelColumn = "label";
  s.groupColumn = "group";
  s.groupIncludedAsFeature = groupFeature.has_value();
  s.standardize = false;
  return s;
}

void writeFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << contents;
  out.close();
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace feamoe
