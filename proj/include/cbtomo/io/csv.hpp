#pragma once

// Comma-separated output: header row, '.' decimal point, doubles in scientific
// notation with 17 significant digits.

#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace cbtomo::io {

using CsvCell = std::variant<double, long long, std::string>;

std::string format_double(double value);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> header);

  void row(const std::vector<CsvCell>& cells);
  void close();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::size_t columns_;
  std::ofstream out_;
};

// Whole-file reader used by tests; cells are kept as text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace cbtomo::io
