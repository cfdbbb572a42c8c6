// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_LOGGING_HPP_
#define METASTYLE_LOGGING_HPP_

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "metastyle/common.hpp"

namespace metastyle {

// Minimal CSV writer: fixed header written on open, one row per call.
// Numeric cells are printed with enough digits to round-trip doubles.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : path_(path), columns_(header.size()) {
    out_.open(path, std::ios::trunc);
    if (!out_) {
      throw DataError("CsvWriter: cannot open '" + path + "' for writing");
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) {
      throw ValueError("CsvWriter: row width " + std::to_string(cells.size()) +
                       " does not match header width " +
                       std::to_string(columns_) + " in '" + path_ + "'");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    out_.flush();
    if (!out_.good()) {
      throw DataError("CsvWriter: write failed on '" + path_ + "'");
    }
  }

  static std::string num(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
  }
  static std::string num(int v) { return std::to_string(v); }
  static std::string num(long v) { return std::to_string(v); }
  static std::string num(std::size_t v) { return std::to_string(v); }

 private:
  std::string path_;
  std::size_t columns_;
  std::ofstream out_;
};

/// Minimal CSV reader for the report path: returns header + rows, raising
// parse errors with file/line positions. Cells are plain (no quoting; the
// writers above never emit commas inside cells).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_csv: cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (line_no == 1) {
      table.header = std::move(cells);
    } else {
      if (cells.size() != table.header.size()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(table.header.size()) +
                         " cells, found " + std::to_string(cells.size()));
      }
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty()) {
    throw ParseError(path + ":1: empty CSV file");
  }
  return table;
}

inline double csv_to_double(const CsvTable& table, std::size_t row, int col,
                            const std::string& path) {
  const std::string& cell = table.rows[row][col];
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path + ": row " + std::to_string(row + 2) +
                     ": cannot parse '" + cell + "' as a number");
  }
}

}  // namespace metastyle

#endif  // METASTYLE_LOGGING_HPP_
