#pragma once

#include <istream>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace ppursuit {

struct CsvOptions {
  char delimiter = ',';
  bool header = true;
  // Selected columns, by 0-based index or by header name; empty keeps all.
  std::vector<int> columns;
  std::vector<std::string> column_names;
};

struct CsvTable {
  Matrix data;
  std::vector<std::string> names;  // empty without a header
};

// Rows and columns in ParseError are 1-based file coordinates.
CsvTable read_csv(std::istream& in, const CsvOptions& options = {});
CsvTable read_csv_file(const std::string& path, const CsvOptions& options = {});

// %.17g, so read_csv recovers every value exactly.
void write_csv(std::ostream& out, const Matrix& data, const std::vector<std::string>& names = {},
               char delimiter = ',');
void write_csv_file(const std::string& path, const Matrix& data, const std::vector<std::string>& names = {},
                    char delimiter = ',');

}  // namespace ppursuit
