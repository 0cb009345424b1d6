#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "lsaga/dataset.hpp"

using namespace lsaga;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / "lsaga_dataset_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << text;
  return path;
}

std::string parse_message(const std::filesystem::path& path, DatasetFormat format,
                          LabelRule rule, std::size_t* row = nullptr) {
  try {
    load_dataset(path, format, rule);
  } catch (const ParseError& e) {
    if (row) *row = e.row();
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("digit labels are split at five") {
  const auto path = write_file("digits.csv", "0,1,2\n7,3,4\n3,5,6\n");
  const auto problem = load_dataset(path, DatasetFormat::DenseCsv, LabelRule::DigitSplit);
  CHECK(problem.size() == 3);
  CHECK(problem.dim() == 2);
  CHECK(problem.label(0) == 0.0);
  CHECK(problem.label(1) == 1.0);
  CHECK(problem.label(2) == 0.0);
  CHECK(problem.feature(1)[0] == 3.0);
  CHECK(problem.feature(1)[1] == 4.0);
  CHECK(problem.metadata().label_rule == "digit-split");
  CHECK(problem.metadata().format == "dense-csv");
}

TEST_CASE("label column, header, delimiter and scaling") {
  const auto path = write_file("semi.csv", "a;b;label\n255;0;1\n51;102;0\n");
  DatasetOptions options;
  options.delimiter = ';';
  options.label_column = 2;
  options.skip_header = true;
  options.feature_scale = 1.0 / 255.0;
  const auto problem = load_dataset(path, DatasetFormat::DenseCsv, LabelRule::Binary, options);
  CHECK(problem.size() == 2);
  CHECK(problem.feature(0)[0] == doctest::Approx(1.0));
  CHECK(problem.feature(1)[1] == doctest::Approx(0.4));
  CHECK(problem.label(0) == 1.0);
  CHECK(problem.metadata().feature_scale == doctest::Approx(1.0 / 255.0));

  options.max_rows = 1;
  CHECK(load_dataset(path, DatasetFormat::DenseCsv, LabelRule::Binary, options).size() == 1);
}

TEST_CASE("svmlight rows are materialised densely") {
  const auto path = write_file("data.svm", "+1 1:0.5 3:2\n-1 2:1.5  # comment\n\n");
  const auto problem = load_dataset(path, DatasetFormat::Svmlight, LabelRule::PlusMinusOne);
  CHECK(problem.size() == 2);
  CHECK(problem.dim() == 3);
  CHECK(problem.label(0) == 1.0);
  CHECK(problem.label(1) == 0.0);
  CHECK(problem.feature(0)[0] == 0.5);
  CHECK(problem.feature(0)[1] == 0.0);
  CHECK(problem.feature(0)[2] == 2.0);
  CHECK(problem.feature(1)[1] == 1.5);

  DatasetOptions options;
  options.dim = 5;
  CHECK(load_dataset(path, DatasetFormat::Svmlight, LabelRule::PlusMinusOne, options).dim() == 5);
}

TEST_CASE("parse errors name the problem") {
  CHECK(parse_message(write_file("empty.csv", ""), DatasetFormat::DenseCsv, LabelRule::Binary)
            .find("no rows") != std::string::npos);

  std::size_t row = 0;
  const auto ragged = parse_message(write_file("ragged.csv", "1,1,2,3,4,5\n0,1,2,3,4\n1,1,2,3,4,5\n"),
                                    DatasetFormat::DenseCsv, LabelRule::Binary, &row);
  CHECK(row == 2);
  CHECK(ragged.find("row 2") != std::string::npos);
  CHECK(ragged.find("4 features") != std::string::npos);

  const auto text = parse_message(write_file("text.csv", "1,2\n0,abc\n"), DatasetFormat::DenseCsv,
                                  LabelRule::Binary, &row);
  CHECK(row == 2);
  CHECK(text.find("non-numeric") != std::string::npos);

  const auto label = parse_message(write_file("label.csv", "0,1\n2,1\n"), DatasetFormat::DenseCsv,
                                   LabelRule::Binary, &row);
  CHECK(row == 2);
  CHECK(label.find("outside the domain") != std::string::npos);

  CHECK(parse_message(write_file("digit.csv", "10,1\n"), DatasetFormat::DenseCsv,
                      LabelRule::DigitSplit)
            .find("outside the domain") != std::string::npos);
  CHECK(parse_message(write_file("pm.svm", "0 1:1\n"), DatasetFormat::Svmlight,
                      LabelRule::PlusMinusOne)
            .find("outside the domain") != std::string::npos);
  CHECK(parse_message(write_file("bad.svm", "1 x:1\n"), DatasetFormat::Svmlight,
                      LabelRule::PlusMinusOne)
            .find("non-numeric") != std::string::npos);

  const auto missing = parse_message("/nonexistent/file.csv", DatasetFormat::DenseCsv,
                                     LabelRule::Binary);
  CHECK(missing.find("file not found") != std::string::npos);
}

TEST_CASE("format and rule names") {
  CHECK(parse_dataset_format("csv") == DatasetFormat::DenseCsv);
  CHECK(parse_dataset_format("svmlight") == DatasetFormat::Svmlight);
  CHECK(parse_label_rule("mnist") == LabelRule::DigitSplit);
  CHECK_THROWS_AS(parse_dataset_format("parquet"), std::invalid_argument);
  CHECK_THROWS_AS(parse_label_rule("odd-even"), std::invalid_argument);
  CHECK(to_string(LabelRule::PlusMinusOne) == "plus-minus-one");
}
