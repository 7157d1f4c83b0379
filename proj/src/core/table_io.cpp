#include "core/table_io.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "core/errors.hpp"

namespace genrel {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, long row, const std::string& col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    raise(ErrorCode::non_numeric_cell, "row " + std::to_string(row) + ", column " + col +
                                           ": cannot parse '" + cell + "'");
  }
  return value;
}

struct Layout {
  long p = 0;
  long col_y = -1, col_z = -1, col_ty = -1, col_tz = -1;
  std::size_t width = 0;
};

Layout parse_header(const std::string& line) {
  const std::vector<std::string> names = split_csv(line);
  Layout layout;
  layout.width = names.size();
  std::size_t i = 0;
  while (i < names.size() && names[i] == "x" + std::to_string(i + 1)) ++i;
  layout.p = static_cast<long>(i);
  if (layout.p == 0) {
    raise(ErrorCode::header_mismatch, "header must start with x1, x2, ... in order");
  }
  for (; i < names.size(); ++i) {
    const std::string& name = names[i];
    long* slot = nullptr;
    if (name == "y") slot = &layout.col_y;
    else if (name == "z") slot = &layout.col_z;
    else if (name == "t_y") slot = &layout.col_ty;
    else if (name == "t_z") slot = &layout.col_tz;
    if (!slot) raise(ErrorCode::header_mismatch, "unexpected column '" + name + "'");
    if (*slot >= 0) raise(ErrorCode::header_mismatch, "duplicate column '" + name + "'");
    *slot = static_cast<long>(i);
  }
  if (layout.col_ty >= 0 && layout.col_y < 0) {
    raise(ErrorCode::header_mismatch, "t_y given without a y column");
  }
  if (layout.col_tz >= 0 && layout.col_z < 0) {
    raise(ErrorCode::header_mismatch, "t_z given without a z column");
  }
  if (layout.col_y < 0 && layout.col_z < 0) {
    raise(ErrorCode::header_mismatch, "table has neither a y nor a z column");
  }
  return layout;
}

std::optional<double> read_trait(const std::vector<std::string>& cells, long value_col,
                                 long indicator_col, long row, const char* trait) {
  const std::string empty;
  const std::string& value_cell = value_col >= 0 ? cells[static_cast<std::size_t>(value_col)]
                                                 : empty;
  bool observed = value_col >= 0 && !value_cell.empty();
  if (indicator_col >= 0) {
    const std::string& flag = cells[static_cast<std::size_t>(indicator_col)];
    if (flag != "0" && flag != "1") {
      raise(ErrorCode::non_numeric_cell, "row " + std::to_string(row) + ": indicator t_" +
                                             trait + " must be 0 or 1, got '" + flag + "'");
    }
    if (flag == "1" && value_cell.empty()) {
      raise(ErrorCode::inconsistent_indicator,
            "row " + std::to_string(row) + ": t_" + trait + "=1 but the " + trait +
                " cell is empty");
    }
    observed = flag == "1";
  }
  if (!observed) return std::nullopt;
  return parse_cell(value_cell, row, trait);
}

}  // namespace

Dataset read_table_stream(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) {
    raise(ErrorCode::header_mismatch, origin + ": missing header line");
  }
  const Layout layout = parse_header(line);

  std::vector<RowSpec> rows;
  long row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != layout.width) {
      raise(ErrorCode::ragged_rows, origin + ": row " + std::to_string(row_number) +
                                        " has " + std::to_string(cells.size()) +
                                        " cells, expected " + std::to_string(layout.width));
    }
    RowSpec row;
    row.x.resize(static_cast<std::size_t>(layout.p));
    for (long j = 0; j < layout.p; ++j) {
      const std::string& cell = cells[static_cast<std::size_t>(j)];
      if (cell.empty()) {
        raise(ErrorCode::non_numeric_cell, "row " + std::to_string(row_number) +
                                               ": predictor x" + std::to_string(j + 1) +
                                               " is empty");
      }
      row.x[static_cast<std::size_t>(j)] = parse_cell(cell, row_number, "x" + std::to_string(j + 1));
    }
    row.y = read_trait(cells, layout.col_y, layout.col_ty, row_number, "y");
    row.z = read_trait(cells, layout.col_z, layout.col_tz, row_number, "z");
    if (!row.y && !row.z) {
      raise(ErrorCode::no_trait_observed,
            origin + ": row " + std::to_string(row_number) + " observes neither trait");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) raise(ErrorCode::empty_dataset, origin + ": no data rows");
  return Dataset::from_rows(rows);
}

Dataset read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "'");
  return read_table_stream(in, path);
}

}  // namespace genrel
