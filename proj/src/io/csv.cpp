#include "cbtomo/io/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace cbtomo::io {

std::string format_double(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  // Fixed "C" formatting, independent of the process locale.
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.16e", value);
  return buffer;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : path_(path), columns_(header.size()), out_(path, std::ios::binary) {
  if (!out_) {
    throw std::runtime_error("cannot write " + path);
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    out_ << (i ? "," : "") << header[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != columns_) {
    throw std::logic_error("CsvWriter: row width does not match header in " + path_);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) {
      out_ << ',';
    }
    if (const auto* d = std::get_if<double>(&cells[i])) {
      out_ << format_double(*d);
    } else if (const auto* n = std::get_if<long long>(&cells[i])) {
      out_ << *n;
    } else {
      out_ << std::get<std::string>(cells[i]);
    }
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (!out_) {
    throw std::runtime_error("error while writing " + path_);
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  throw std::out_of_range("no column " + name);
}

namespace {
std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    cells.push_back(cell);
  }
  return cells;
}
}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) {
    table.header = split(line);
  }
  while (std::getline(in, line)) {
    if (!line.empty()) {
      table.rows.push_back(split(line));
    }
  }
  return table;
}

}  // namespace cbtomo::io
