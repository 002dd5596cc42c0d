#pragma once

// Reference argument F1 matrix: Flan-T5 TI and QA on every (source, target)
// pair, then zero-shot GPT rows. Values are percentages.

#include <string>
#include <tuple>
#include <vector>

#include "eae/runner.hpp"

namespace eae::test {

inline const std::vector<std::string> kTableColumns{"ACE", "ERE-L", "ERE-R", "FAMuS", "RAMS", "WikiEvents"};

inline ResultMatrix reference_matrix() {
  using Row = std::tuple<std::string, std::string, std::string, std::vector<double>>;
  std::vector<Row> rows{
      {"Flan-T5", "TI", "ACE", {65.95, 46.31, 37.47, 16.37, 26.50, 13.32}},
      {"Flan-T5", "TI", "ERE-L", {32.88, 66.71, 51.57, 14.35, 23.94, 23.05}},
      {"Flan-T5", "TI", "ERE-R", {48.14, 62.07, 66.78, 23.03, 30.18, 28.21}},
      {"Flan-T5", "TI", "FAMuS", {32.34, 28.89, 24.87, 43.81, 24.50, 8.75}},
      {"Flan-T5", "TI", "RAMS", {32.20, 34.40, 26.97, 17.71, 48.47, 25.37}},
      {"Flan-T5", "TI", "WikiEvents", {25.66, 31.72, 32.25, 8.04, 29.29, 64.20}},
      {"Flan-T5", "QA", "ACE", {60.35, 48.52, 48.50, 27.34, 30.25, 18.87}},
      {"Flan-T5", "QA", "ERE-L", {31.47, 63.96, 44.59, 22.25, 29.96, 24.81}},
      {"Flan-T5", "QA", "ERE-R", {43.89, 62.34, 66.00, 28.47, 35.28, 32.43}},
      {"Flan-T5", "QA", "FAMuS", {34.83, 33.24, 28.17, 46.46, 28.21, 10.91}},
      {"Flan-T5", "QA", "RAMS", {30.34, 38.03, 38.01, 23.76, 53.07, 36.47}},
      {"Flan-T5", "QA", "WikiEvents", {20.64, 26.42, 29.50, 10.44, 28.24, 61.35}},
      {"GPT-3.5", "QA", "", {27.56, 25.60, 18.54, 26.69, 22.54, 10.36}},
      {"GPT-4", "QA", "", {35.36, 30.94, 20.94, 36.29, 24.10, 7.09}},
  };
  for (auto& row : rows)
    for (auto& v : std::get<3>(row)) v /= 100.0;
  return matrix_from_values(kTableColumns, rows);
}

// (row, column) of every bold and underlined cell in the reference table.
inline const std::vector<std::pair<int, int>> kReferenceBold{{0, 0}, {1, 1}, {2, 2}, {9, 3}, {10, 4}, {5, 5}};
inline const std::vector<std::pair<int, int>> kReferenceUnderline{{2, 0}, {8, 1}, {1, 2}, {13, 3}, {8, 4}, {10, 5}};

}  // namespace eae::test
