#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpca/types.hpp"

namespace cpca {

struct CsvTable {
  std::vector<std::string> header;  // empty when the file had none
  Matrix values;
};

// Comma-separated numeric matrix. A non-numeric first row is treated as a
// header. Throws std::invalid_argument naming the 1-based row/column of the
// first offending cell.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

// 17 significant digits: doubles round-trip exactly through the printed form.
std::string format_double(double v);

std::string matrix_to_csv(const Matrix& m, const std::vector<std::string>& header = {});
void write_text_file(const std::string& path, const std::string& content);

// Flat "key = value" config. '#' starts a comment; keys are validated by the
// caller against its known set.
std::map<std::string, std::string> parse_config_file(const std::string& path);

}  // namespace cpca
