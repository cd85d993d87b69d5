#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <unordered_map>

#include "feamoe/data.hpp"
#include "feamoe/error.hpp"

namespace feamoe {

void Schema::validate() const {
  if (featureColumns.empty() && !groupIncludedAsFeature) throw ConfigError("schema declares no feature columns");
  if (labelColumn.empty()) throw ConfigError("schema needs a label column");
  if (groupColumn.empty()) throw ConfigError("schema needs a group column");
  std::set<std::string> seen;
  for (const auto& c : featureColumns) {
    if (!seen.insert(c).second) throw ConfigError("duplicate feature column '" + c + "'");
    if (c == labelColumn) throw ConfigError("label column '" + c + "' listed as a feature");
    if (c == groupColumn) {
      throw ConfigError("group column '" + c + "' listed as a feature; set groupIncludedAsFeature instead");
    }
  }
  if (labelColumn == groupColumn) throw ConfigError("label and group columns must differ");
  for (const auto& [name, cats] : categoricalColumns) {
    if (std::find(featureColumns.begin(), featureColumns.end(), name) == featureColumns.end()) {
      throw ConfigError("categorical column '" + name + "' is not a feature column");
    }
    if (cats.empty()) throw ConfigError("categorical column '" + name + "' declares no categories");
    if (std::set<std::string>(cats.begin(), cats.end()).size() != cats.size()) {
      throw ConfigError("categorical column '" + name + "' declares duplicate categories");
    }
  }
}

namespace {

std::vector<std::string> sortedCategories(const std::vector<std::string>& cats) {
  std::vector<std::string> out = cats;
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::string> Schema::expandedFeatureNames() const {
  std::vector<std::string> names;
  for (const auto& c : featureColumns) {
    auto it = categoricalColumns.find(c);
    if (it == categoricalColumns.end()) {
      names.push_back(c);
    } else {
      for (const auto& cat : sortedCategories(it->second)) names.push_back(c + "=" + cat);
    }
  }
  if (groupIncludedAsFeature) names.push_back(groupColumn);
  return names;
}

std::optional<std::size_t> Schema::groupFeatureIndex() const {
  if (!groupIncludedAsFeature) return std::nullopt;
  return featureDim() - 1;
}

std::size_t Schema::numericCount() const {
  return static_cast<std::size_t>(std::count_if(featureColumns.begin(), featureColumns.end(), [&](const auto& c) {
    return !categoricalColumns.contains(c);
  }));
}

Standardizer::Standardizer(std::size_t features)
    : mean_(features, 0.0), m2_(features, 0.0), passthrough_(features, true) {}

double Standardizer::variance(std::size_t j) const {
  return count_ == 0 ? 0.0 : m2_[j] / static_cast<double>(count_);
}

void Standardizer::apply(std::span<double> values) {
  if (values.size() != mean_.size()) {
    throw DimensionError("standardizer expects " + std::to_string(mean_.size()) + " values, got " +
                         std::to_string(values.size()));
  }
  std::vector<double> raw(values.begin(), values.end());
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double var = variance(j);
    passthrough_[j] = var < 1e-12;
    if (!passthrough_[j]) values[j] = (values[j] - mean_[j]) / std::sqrt(var);
  }
  if (frozen_) return;
  ++count_;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double delta = raw[j] - mean_[j];
    mean_[j] += delta / static_cast<double>(count_);
    m2_[j] += delta * (raw[j] - mean_[j]);
  }
}

Standardizer Standardizer::restore(std::size_t count, std::vector<double> mean, std::vector<double> m2) {
  if (mean.size() != m2.size()) throw DataError("standardizer state has mismatched lengths");
  Standardizer s(mean.size());
  s.count_ = count;
  s.mean_ = std::move(mean);
  s.m2_ = std::move(m2);
  return s;
}

std::optional<std::vector<std::string>> CsvReader::next() {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  int ch;
  if (first_) {
    first_ = false;
    // UTF-8 byte order mark.
    if (in_.peek() == 0xEF) {
      char bom[3];
      in_.read(bom, 3);
      if (!(static_cast<unsigned char>(bom[1]) == 0xBB && static_cast<unsigned char>(bom[2]) == 0xBF)) {
        for (int i = 2; i >= 0; --i) in_.putback(bom[i]);
      }
    }
  }
  while ((ch = in_.get()) != std::char_traits<char>::eof()) {
    any = true;
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && in_.peek() == '\n') in_.get();
      fields.push_back(std::move(field));
      return fields;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw DataError("unterminated quoted field at end of input");
  if (!any) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

struct CsvInstanceSource::Impl {
  std::ifstream file;
  CsvReader reader{file};
  std::unordered_map<std::string, std::size_t> columnIndex;
  std::vector<std::size_t> featureIdx;
  std::size_t labelIdx = 0;
  std::size_t groupIdx = 0;
  std::vector<std::vector<std::string>> categories;  // sorted, empty for numeric
};

CsvInstanceSource::CsvInstanceSource(const std::string& path, Schema schema, Standardizer& standardizer)
    : impl_(std::make_unique<Impl>()), schema_(std::move(schema)), standardizer_(standardizer) {
  schema_.validate();
  impl_->file.open(path, std::ios::binary);
  if (!impl_->file) throw DataError("cannot open '" + path + "'");
  auto header = impl_->reader.next();
  if (!header) throw DataError("'" + path + "' has no header row");
  for (std::size_t i = 0; i < header->size(); ++i) impl_->columnIndex.emplace((*header)[i], i);
  auto column = [&](const std::string& name) {
    auto it = impl_->columnIndex.find(name);
    if (it == impl_->columnIndex.end()) throw DataError("'" + path + "' is missing column '" + name + "'");
    return it->second;
  };
  for (const auto& c : schema_.featureColumns) {
    impl_->featureIdx.push_back(column(c));
    auto it = schema_.categoricalColumns.find(c);
    impl_->categories.push_back(it == schema_.categoricalColumns.end() ? std::vector<std::string>{}
                                                                       : sortedCategories(it->second));
  }
  impl_->labelIdx = column(schema_.labelColumn);
  impl_->groupIdx = column(schema_.groupColumn);
  const std::size_t numeric = schema_.standardize ? schema_.numericCount() : 0;
  if (standardizer_.features() != numeric) {
    if (standardizer_.count() == 0 && !standardizer_.frozen()) {
      standardizer_ = Standardizer(numeric);
    } else {
      throw DimensionError("standardizer tracks " + std::to_string(standardizer_.features()) +
                           " features, schema has " + std::to_string(numeric));
    }
  }
}

CsvInstanceSource::~CsvInstanceSource() = default;

namespace {

double parseNumber(const std::string& text, std::size_t row, const std::string& column) {
  std::size_t begin = text.find_first_not_of(" \t");
  std::size_t end = text.find_last_not_of(" \t");
  const std::string trimmed = begin == std::string::npos ? "" : text.substr(begin, end - begin + 1);
  double value = 0.0;
  const char* first = trimmed.data();
  const char* last = first + trimmed.size();
  if (!trimmed.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw DataError("column '" + column + "' has unparseable number '" + text + "'", row);
  }
  return value;
}

}  // namespace

std::optional<StreamInstance> CsvInstanceSource::next() {
  Impl& im = *impl_;
  while (auto record = im.reader.next()) {
    ++row_;
    if (record->size() == 1 && (*record)[0].empty()) {
      ++skipped_;
      continue;
    }
    if (record->size() != im.columnIndex.size()) {
      throw DataError("expected " + std::to_string(im.columnIndex.size()) + " fields, got " +
                          std::to_string(record->size()),
                      row_);
    }
    const auto& rec = *record;
    auto missing = [&](std::size_t idx) { return rec[idx].empty(); };
    bool skip = missing(im.labelIdx) || missing(im.groupIdx);
    for (std::size_t idx : im.featureIdx) skip = skip || missing(idx);
    if (skip) {
      ++skipped_;
      continue;
    }

    StreamInstance inst;
    std::vector<double> numeric;
    std::vector<std::size_t> numericSlots;
    for (std::size_t f = 0; f < im.featureIdx.size(); ++f) {
      const std::string& value = rec[im.featureIdx[f]];
      const auto& cats = im.categories[f];
      if (cats.empty()) {
        numericSlots.push_back(inst.x.size());
        inst.x.push_back(parseNumber(value, row_, schema_.featureColumns[f]));
      } else {
        auto it = std::find(cats.begin(), cats.end(), value);
        if (it == cats.end()) {
          throw DataError("column '" + schema_.featureColumns[f] + "' has unknown category '" + value + "'", row_);
        }
        const auto hot = static_cast<std::size_t>(std::distance(cats.begin(), it));
        for (std::size_t c = 0; c < cats.size(); ++c) inst.x.push_back(c == hot ? 1.0 : 0.0);
      }
    }
    inst.label = rec[im.labelIdx] == schema_.positiveLabelValue ? 1 : 0;
    inst.group = rec[im.groupIdx] == schema_.privilegedGroupValue ? 1 : 0;
    if (schema_.groupIncludedAsFeature) inst.x.push_back(static_cast<double>(inst.group));

    if (schema_.standardize) {
      for (std::size_t s : numericSlots) numeric.push_back(inst.x[s]);
      standardizer_.apply(numeric);
      for (std::size_t s = 0; s < numericSlots.size(); ++s) inst.x[numericSlots[s]] = numeric[s];
    }
    return inst;
  }
  return std::nullopt;
}

IngestResult ingestCsv(const std::string& path, const Schema& schema, Standardizer& standardizer) {
  CsvInstanceSource source(path, schema, standardizer);
  IngestResult result;
  while (auto inst = source.next()) result.instances.push_back(std::move(*inst));
  result.skippedRows = source.skippedRows();
  return result;
}

SegmentedStream segmentReplay(std::span<const std::string> paths, const Schema& schema,
                              Standardizer& standardizer) {
  SegmentedStream out;
  out.featureNames = schema.expandedFeatureNames();
  out.groupFeature = schema.groupFeatureIndex();
  for (const auto& path : paths) {
    try {
      IngestResult part = ingestCsv(path, schema, standardizer);
      for (auto& inst : part.instances) out.instances.push_back(std::move(inst));
      out.skippedRows += part.skippedRows;
    } catch (const Error& e) {
      throw DataError(path + ": " + e.what());
    }
    out.segmentEnds.push_back(out.instances.size());
  }
  return out;
}

}  // namespace feamoe
