#include "lsaga/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <string_view>
#include <vector>

namespace lsaga {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view cell, std::size_t row) {
  cell = trim(cell);
  double value = 0.0;
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError(row, "row " + std::to_string(row) + ": non-numeric cell '" +
                              std::string(cell) + "'");
  }
  return value;
}

double binarize(double raw, LabelRule rule, std::size_t row) {
  const auto reject = [&] {
    return ParseError(row, "row " + std::to_string(row) + ": label " +
                               std::to_string(raw) + " outside the domain of rule " +
                               to_string(rule));
  };
  switch (rule) {
    case LabelRule::Binary:
      if (raw == 0.0 || raw == 1.0) return raw;
      throw reject();
    case LabelRule::DigitSplit:
      if (raw != std::floor(raw) || raw < 0.0 || raw > 9.0) throw reject();
      return raw >= 5.0 ? 1.0 : 0.0;
    case LabelRule::PlusMinusOne:
      if (raw == -1.0) return 0.0;
      if (raw == 1.0) return 1.0;
      throw reject();
  }
  throw reject();
}

struct RawRows {
  std::vector<std::vector<double>> features;
  std::vector<double> labels;
};

RawRows read_dense_csv(std::ifstream& in, LabelRule rule, const DatasetOptions& opt) {
  RawRows rows;
  std::string line;
  std::size_t row = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 && opt.skip_header) continue;
    if (trim(line).empty()) continue;
    if (opt.max_rows && rows.labels.size() >= *opt.max_rows) break;

    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto pos = rest.find(opt.delimiter);
      cells.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (width == 0) {
      width = cells.size();
      if (width < 2) {
        throw ParseError(row, "row " + std::to_string(row) +
                                  ": need a label column and at least one feature");
      }
      if (opt.label_column >= width) {
        throw ParseError(row, "label column " + std::to_string(opt.label_column) +
                                  " out of range for " + std::to_string(width) +
                                  " columns");
      }
    } else if (cells.size() != width) {
      throw ParseError(row, "row " + std::to_string(row) + " has " +
                                std::to_string(cells.size() - 1) + " features, expected " +
                                std::to_string(width - 1));
    }
    std::vector<double> features;
    features.reserve(width - 1);
    double label = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_number(cells[c], row);
      if (c == opt.label_column) {
        label = binarize(v, rule, row);
      } else {
        features.push_back(v);
      }
    }
    rows.features.push_back(std::move(features));
    rows.labels.push_back(label);
  }
  return rows;
}

RawRows read_svmlight(std::ifstream& in, LabelRule rule, const DatasetOptions& opt) {
  RawRows rows;
  std::vector<std::map<std::size_t, double>> sparse;
  std::size_t max_index = 0;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string_view text = trim(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = trim(text.substr(0, hash));
    }
    if (text.empty()) continue;
    if (opt.max_rows && rows.labels.size() >= *opt.max_rows) break;

    std::vector<std::string_view> tokens;
    while (!text.empty()) {
      const auto pos = text.find_first_of(" \t");
      tokens.push_back(text.substr(0, pos));
      if (pos == std::string_view::npos) break;
      text = trim(text.substr(pos + 1));
    }
    const double label = binarize(parse_number(tokens.front(), row), rule, row);
    std::map<std::size_t, double> entries;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto colon = tokens[t].find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(row, "row " + std::to_string(row) + ": malformed entry '" +
                                  std::string(tokens[t]) + "'");
      }
      const double idx = parse_number(tokens[t].substr(0, colon), row);
      if (idx < 1.0 || idx != std::floor(idx)) {
        throw ParseError(row, "row " + std::to_string(row) +
                                  ": feature indices are 1-based integers");
      }
      const auto index = static_cast<std::size_t>(idx);
      entries[index] = parse_number(tokens[t].substr(colon + 1), row);
      max_index = std::max(max_index, index);
      if (opt.dim && index > *opt.dim) {
        throw ParseError(row, "row " + std::to_string(row) + ": index " +
                                  std::to_string(index) + " exceeds d = " +
                                  std::to_string(*opt.dim));
      }
    }
    sparse.push_back(std::move(entries));
    rows.labels.push_back(label);
  }
  const std::size_t d = opt.dim.value_or(max_index);
  if (!sparse.empty() && d == 0) throw ParseError(0, "no features in any row");
  for (const auto& entries : sparse) {
    std::vector<double> dense(d, 0.0);
    for (const auto& [index, value] : entries) dense[index - 1] = value;
    rows.features.push_back(std::move(dense));
  }
  return rows;
}

}  // namespace

DatasetFormat parse_dataset_format(const std::string& name) {
  if (name == "dense-csv" || name == "csv") return DatasetFormat::DenseCsv;
  if (name == "svmlight" || name == "svmlight-style") return DatasetFormat::Svmlight;
  throw std::invalid_argument("unknown dataset format '" + name + "'");
}

LabelRule parse_label_rule(const std::string& name) {
  if (name == "binary") return LabelRule::Binary;
  if (name == "digit-split" || name == "mnist") return LabelRule::DigitSplit;
  if (name == "plus-minus-one") return LabelRule::PlusMinusOne;
  throw std::invalid_argument("unknown label rule '" + name + "'");
}

std::string to_string(DatasetFormat format) {
  return format == DatasetFormat::DenseCsv ? "dense-csv" : "svmlight";
}

std::string to_string(LabelRule rule) {
  switch (rule) {
    case LabelRule::Binary:
      return "binary";
    case LabelRule::DigitSplit:
      return "digit-split";
    case LabelRule::PlusMinusOne:
      return "plus-minus-one";
  }
  return "unknown";
}

LogisticProblem load_dataset(const std::filesystem::path& path, DatasetFormat format,
                             LabelRule label_rule, const DatasetOptions& options) {
  if (!std::filesystem::exists(path)) {
    throw ParseError(0, "file not found: " + path.string());
  }
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());

  RawRows rows = format == DatasetFormat::DenseCsv
                     ? read_dense_csv(in, label_rule, options)
                     : read_svmlight(in, label_rule, options);
  if (rows.labels.empty()) throw ParseError(0, "no rows in " + path.string());

  const std::size_t n = rows.labels.size();
  const std::size_t d = rows.features.front().size();
  Matrix features(n, d);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < d; ++j)
      features(k, j) = options.feature_scale * rows.features[k][j];

  DatasetMetadata meta;
  meta.source = path.string();
  meta.format = to_string(format);
  meta.label_rule = to_string(label_rule);
  meta.feature_scale = options.feature_scale;
  return LogisticProblem(std::move(features), std::move(rows.labels), std::move(meta));
}

}  // namespace lsaga
