#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "eae/error.hpp"
#include "eae/runner.hpp"

namespace eae {
namespace {

std::string two_decimals(double f1) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", f1 * 100.0);
  return buf;
}

std::string cell_dir_name(const ExperimentConfig& c) {
  std::string name = c.model + "_" + std::string(method_name(c.method)) + "_" +
                     (c.source_id.empty() ? "none" : c.source_id) + "__" + c.target_id;
  for (char& ch : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' ||
                    ch == '.';
    if (!ok) ch = '-';
  }
  return name;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

nlohmann::json to_json(const ResultMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : m.rows) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
      if (!c.present) {
        cells.push_back({{"present", false}, {"error", c.error}});
      } else {
        cells.push_back({{"present", true}, {"f1", c.f1}, {"runs", c.run_f1}});
      }
    }
    rows.push_back({{"model", r.model}, {"method", r.method}, {"source", r.source_id},
                    {"cells", cells}});
  }
  return {{"columns", m.columns}, {"rows", rows}};
}

std::string matrix_csv(const ResultMatrix& m) {
  std::string out = "model,method,source";
  for (const auto& c : m.columns) out += "," + c;
  out += '\n';
  for (const auto& r : m.rows) {
    out += r.model + "," + r.method + "," + (r.source_id.empty() ? "-" : r.source_id);
    for (const auto& c : r.cells) {
      out += ',';
      if (c.present) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", c.f1);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

GridConfig grid_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  GridConfig grid;
  if (j.contains("output_dir")) {
    std::filesystem::path out(j.at("output_dir").get<std::string>());
    grid.output_dir = out.is_absolute() || base_dir.empty() ? out : base_dir / out;
  }
  const nlohmann::json defaults = j.value("defaults", nlohmann::json::object());
  if (!j.contains("cells") || !j.at("cells").is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "grid config needs a \"cells\" list");
  }
  for (const auto& cell : j.at("cells")) {
    nlohmann::json merged = defaults;
    merged.merge_patch(cell);
    merged.erase("output_dir");
    grid.cells.push_back(experiment_config_from_json(merged, base_dir));
  }
  return grid;
}

ResultMatrix run_matrix(const GridConfig& grid, const BackendFactory& factory) {
  ResultMatrix matrix;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> row_index;
  std::vector<std::pair<std::size_t, std::size_t>> position;
  for (const auto& c : grid.cells) {
    auto col = std::find(matrix.columns.begin(), matrix.columns.end(), c.target_id);
    if (col == matrix.columns.end()) {
      matrix.columns.push_back(c.target_id);
      col = matrix.columns.end() - 1;
    }
    const auto key = std::make_tuple(c.model, std::string(method_name(c.method)), c.source_id);
    auto [it, inserted] = row_index.emplace(key, matrix.rows.size());
    if (inserted) {
      matrix.rows.push_back({c.model, std::string(method_name(c.method)), c.source_id, {}});
    }
    position.emplace_back(it->second, static_cast<std::size_t>(col - matrix.columns.begin()));
  }
  for (auto& r : matrix.rows) {
    r.cells.assign(matrix.columns.size(), MatrixCell{false, 0.0, {}, "not configured"});
  }

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < grid.cells.size(); i = next++) {
      ExperimentConfig config = grid.cells[i];
      if (!grid.output_dir.empty()) {
        config.output_dir = grid.output_dir / "cells" / cell_dir_name(config);
      }
      MatrixCell cell;
      try {
        const auto result = run_cell(config, factory);
        cell.present = true;
        cell.f1 = result.report.f1;
        for (const auto& r : result.report.runs) cell.run_f1.push_back(r.f1);
      } catch (const std::exception& e) {
        cell.present = false;
        cell.error = e.what();
      }
      const auto [row, col] = position[i];
      matrix.rows[row].cells[col] = std::move(cell);
    }
  };
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(grid.cells.size(), std::max(1u, std::thread::hardware_concurrency())));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  if (!grid.output_dir.empty()) {
    std::filesystem::create_directories(grid.output_dir);
    const auto table = format_matrix(matrix);
    std::ofstream(grid.output_dir / "matrix.csv", std::ios::binary) << matrix_csv(matrix);
    std::ofstream(grid.output_dir / "matrix.json", std::ios::binary)
        << to_json(matrix).dump(2) << '\n';
    std::ofstream(grid.output_dir / "table.txt", std::ios::binary)
        << table.plain << '\n'
        << table.latex;
  }
  return matrix;
}

FormattedTable format_matrix(const ResultMatrix& m) {
  FormattedTable out;
  out.marks.assign(m.rows.size(), std::vector<CellMark>(m.columns.size(), CellMark::kNone));
  for (std::size_t c = 0; c < m.columns.size(); ++c) {
    std::optional<std::size_t> best_in, best_zero;
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      const auto& cell = m.rows[r].cells[c];
      if (!cell.present) continue;
      auto& best = m.in_domain(r, c) ? best_in : best_zero;
      if (!best || cell.f1 > m.rows[*best].cells[c].f1) best = r;
    }
    if (best_in) out.marks[*best_in][c] = CellMark::kBold;
    if (best_zero) out.marks[*best_zero][c] = CellMark::kUnderline;
  }

  // Plain text.
  std::vector<std::string> header{"Model", "Method", "Source"};
  header.insert(header.end(), m.columns.begin(), m.columns.end());
  std::vector<std::vector<std::string>> body;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const auto& row = m.rows[r];
    std::vector<std::string> line{row.model, row.method, row.source_id.empty() ? "-" : row.source_id};
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
      const auto& cell = row.cells[c];
      std::string v = cell.present ? two_decimals(cell.f1) : "--";
      if (out.marks[r][c] == CellMark::kBold) v = "**" + v + "**";
      if (out.marks[r][c] == CellMark::kUnderline) v = "__" + v + "__";
      line.push_back(std::move(v));
    }
    body.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t k = 0; k < header.size(); ++k) {
    width[k] = header[k].size();
    for (const auto& line : body) width[k] = std::max(width[k], line[k].size());
  }
  const auto emit = [&](const std::vector<std::string>& line) {
    std::string s;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (k > 0) s += " | ";
      s += pad(line[k], width[k]);
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  out.plain = emit(header);
  std::string rule;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k > 0) rule += "-+-";
    rule.append(width[k], '-');
  }
  out.plain += rule + "\n";
  for (const auto& line : body) out.plain += emit(line);

  // LaTeX-like.
  out.latex = "\\begin{tabular}{lll|" + std::string(m.columns.size(), 'c') + "}\n";
  out.latex += "Model & Method & Source";
  for (const auto& c : m.columns) out.latex += " & " + c;
  out.latex += " \\\\\n\\midrule\n";
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const auto& row = m.rows[r];
    out.latex += row.model + " & " + row.method + " & " + (row.source_id.empty() ? "-" : row.source_id);
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
      const auto& cell = row.cells[c];
      std::string v = cell.present ? two_decimals(cell.f1) : "--";
      if (out.marks[r][c] == CellMark::kBold) v = "\\textbf{" + v + "}";
      if (out.marks[r][c] == CellMark::kUnderline) v = "\\underline{" + v + "}";
      out.latex += " & " + v;
    }
    out.latex += " \\\\\n";
  }
  out.latex += "\\end{tabular}\n";
  return out;
}

ResultMatrix matrix_from_values(
    std::vector<std::string> columns,
    const std::vector<std::tuple<std::string, std::string, std::string, std::vector<double>>>& rows) {
  ResultMatrix m;
  m.columns = std::move(columns);
  for (const auto& [model, method, source, values] : rows) {
    if (values.size() != m.columns.size()) {
      throw Error(ErrorCode::kLengthMismatch, "matrix row has " + std::to_string(values.size()) +
                                                  " values for " +
                                                  std::to_string(m.columns.size()) + " columns");
    }
    MatrixRow row{model, method, source, {}};
    for (double v : values) row.cells.push_back({true, v, {v}, ""});
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace eae
