#include "cpca/csv.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cpca {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  {
    std::string line;
    std::stringstream ss(text);
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty()) continue;
      rows.push_back(split_fields(line));
    }
  }
  if (rows.empty()) throw std::invalid_argument("csv has no data rows");

  CsvTable table;
  std::size_t first_data = 0;
  {
    // Header detection: the first row counts as a header when any cell in it
    // fails to parse as a number.
    bool numeric = true;
    for (const auto& cell : rows[0]) {
      double v;
      if (!parse_number(cell, v)) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      table.header = rows[0];
      first_data = 1;
    }
  }
  if (first_data >= rows.size()) throw std::invalid_argument("csv has no data rows");

  const std::size_t cols = rows[first_data].size();
  const std::size_t n = rows.size() - first_data;
  table.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  for (std::size_t i = first_data; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw std::invalid_argument("row " + std::to_string(i + 1) + " has " +
                                  std::to_string(rows[i].size()) + " fields, expected " +
                                  std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      double v;
      if (!parse_number(rows[i][j], v)) {
        throw std::invalid_argument("malformed cell \"" + rows[i][j] + "\" at row " +
                                    std::to_string(i + 1) + ", column " +
                                    std::to_string(j + 1));
      }
      table.values(static_cast<Eigen::Index>(i - first_data),
                   static_cast<Eigen::Index>(j)) = v;
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string matrix_to_csv(const Matrix& m, const std::vector<std::string>& header) {
  std::ostringstream out;
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j) out << ',';
      out << header[j];
    }
    out << '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << content;
  if (!out) throw std::invalid_argument("failed writing file: " + path);
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::map<std::string, std::string> out;
  std::string text = read_file(path);
  std::string line;
  std::stringstream ss(text);
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    }
    out[key] = value;
  }
  return out;
}

}  // namespace cpca
