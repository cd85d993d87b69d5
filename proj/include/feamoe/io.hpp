#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "feamoe/data.hpp"
#include "feamoe/explain.hpp"
#include "feamoe/loss.hpp"
#include "feamoe/metrics.hpp"
#include "feamoe/model.hpp"
#include "feamoe/trainer.hpp"

namespace feamoe {

// Everything needed to score and explain with a trained model.
struct ModelBundle {
  MixtureModel model{1};
  FairnessSchedule schedule;
  std::vector<std::string> featureNames;
  std::optional<std::size_t> groupFeature;
  // Frozen input transform, present when training used standardization.
  std::optional<Standardizer> standardizer;
  // Mean of the training inputs in model space.
  std::optional<std::vector<double>> background;
};

// Shortest decimal string that parses back to the same double.
std::string formatDouble(double value);

nlohmann::json toJson(const ModelBundle& bundle);
ModelBundle modelFromJson(const nlohmann::json& doc);
void saveModel(const std::string& path, const ModelBundle& bundle);
ModelBundle loadModel(const std::string& path);

nlohmann::json toJson(const Schema& schema);
Schema schemaFromJson(const nlohmann::json& doc);
Schema loadSchema(const std::string& path);

// Column order: windowStart,windowEnd,accuracy,spd,aod,burden,coldFlags,segmentIndex
inline constexpr const char* kReportCsvHeader = "windowStart,windowEnd,accuracy,spd,aod,burden,coldFlags,segmentIndex";
std::string reportCsvRow(const MetricsReport& r);
nlohmann::json toJson(const MetricsReport& r);
void writeReportsCsv(std::ostream& out, std::span<const MetricsReport> reports);
void writeReportsJsonl(std::ostream& out, std::span<const MetricsReport> reports);

// {featureNames, phi, baseValue, explainedValue, game}
nlohmann::json toJson(const Attribution& a, std::span<const std::string> featureNames, ShapGame game);

// Writes instances as CSV (features..., label, group) readable with the
// schema returned by syntheticSchema(). A group indicator feature must be the
// last model feature; it is written once, as the group column.
void writeInstancesCsv(std::ostream& out, std::span<const StreamInstance> instances,
                       std::span<const std::string> featureNames, std::optional<std::size_t> groupFeature);
Schema syntheticSchema(std::span<const std::string> featureNames, std::optional<std::size_t> groupFeature);

// Writes the whole string to `path` or throws.
void writeFile(const std::string& path, const std::string& contents);

}  // namespace feamoe
