#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace volfeed {

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  // Index of a named column; throws InputError naming the file when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

double parse_double(const std::string& text, const std::string& where);

// %.17g round-trips a double exactly; lower precision is for display only.
std::string format_double(double v, int precision = 17);

}  // namespace volfeed
