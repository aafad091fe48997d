#include "core/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/error.hpp"

namespace ppursuit {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

CsvTable read_csv(std::istream& in, const CsvOptions& options) {
  if (!options.columns.empty() && !options.column_names.empty())
    fail(ErrorCode::kParam, "select columns by index or by name, not both");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<int> selected = options.columns;
  std::size_t width = 0;

  if (options.header) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!blank(line)) break;
    }
    if (line_no == 0 || blank(line)) fail(ErrorCode::kEmptyData, "file is empty");
    table.names = split(line, options.delimiter);
    width = table.names.size();
    for (const auto& name : options.column_names) {
      const auto it = std::find(table.names.begin(), table.names.end(), name);
      if (it == table.names.end()) fail(ErrorCode::kParam, "no column named '" + name + "'");
      selected.push_back(static_cast<int>(it - table.names.begin()));
    }
  } else if (!options.column_names.empty()) {
    fail(ErrorCode::kParam, "column names need a header row");
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto cells = split(line, options.delimiter);
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw ParseError(line_no, std::min(cells.size(), width) + 1,
                       "row " + std::to_string(line_no) + ": expected " + std::to_string(width) + " cells, found " +
                           std::to_string(cells.size()));
    if (selected.empty())
      for (std::size_t j = 0; j < width; ++j) selected.push_back(static_cast<int>(j));
    std::vector<double> row;
    row.reserve(selected.size());
    for (int j : selected) {
      if (j < 0 || static_cast<std::size_t>(j) >= width)
        fail(ErrorCode::kParam, "column index " + std::to_string(j) + " out of range");
      const std::string& cell = cells[static_cast<std::size_t>(j)];
      const auto col = static_cast<std::size_t>(j) + 1;
      if (cell.empty())
        throw ParseError(line_no, col, "row " + std::to_string(line_no) + ", column " + std::to_string(col) + ": missing value");
      double v = 0.0;
      const char* end = cell.data() + cell.size();
      const char* begin = cell.data() + (cell.front() == '+' ? 1 : 0);
      const auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ParseError(line_no, col, "row " + std::to_string(line_no) + ", column " + std::to_string(col) +
                                           ": not a finite number: '" + cell + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::kEmptyData, "no data rows");

  table.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(selected.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < selected.size(); ++j)
      table.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  if (!table.names.empty()) {
    std::vector<std::string> kept;
    for (int j : selected) kept.push_back(table.names[static_cast<std::size_t>(j)]);
    table.names = std::move(kept);
  }
  return table;
}

CsvTable read_csv_file(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return read_csv(in, options);
}

void write_csv(std::ostream& out, const Matrix& data, const std::vector<std::string>& names, char delimiter) {
  if (!names.empty()) {
    if (static_cast<Eigen::Index>(names.size()) != data.cols())
      fail(ErrorCode::kDimensionMismatch, "header width does not match the data");
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? std::string(1, delimiter) : "") << names[j];
    out << '\n';
  }
  char buf[32];
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data(i, j));
      if (j) out << delimiter;
      out << buf;
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const Matrix& data, const std::vector<std::string>& names,
                    char delimiter) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  write_csv(out, data, names, delimiter);
  if (!out.flush()) fail(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace ppursuit
