#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "lsaga/problems.hpp"

namespace lsaga {

enum class DatasetFormat { DenseCsv, Svmlight };

/// How raw class labels map to {0, 1}.
enum class LabelRule {
  Binary,       // labels already 0 or 1
  DigitSplit,   // digits 0-4 -> 0, 5-9 -> 1; anything else is rejected
  PlusMinusOne, // -1 -> 0, +1 -> 1
};

DatasetFormat parse_dataset_format(const std::string& name);
LabelRule parse_label_rule(const std::string& name);
std::string to_string(DatasetFormat format);
std::string to_string(LabelRule rule);

struct DatasetOptions {
  char delimiter = ',';
  std::size_t label_column = 0;        // dense-csv only
  bool skip_header = false;            // dense-csv only
  double feature_scale = 1.0;          // multiplies every feature
  std::optional<std::size_t> dim;      // svmlight: force d instead of max index
  std::optional<std::size_t> max_rows; // keep only the first rows
};

/// Parse failure; `row()` is the 1-based line number, 0 for file-level errors.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : std::runtime_error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// Reads a labelled dataset into a logistic problem. Values are parsed as
/// doubles; scaling happens only when requested and is recorded in the
/// problem metadata.
LogisticProblem load_dataset(const std::filesystem::path& path, DatasetFormat format,
                             LabelRule label_rule, const DatasetOptions& options = {});

}  // namespace lsaga
