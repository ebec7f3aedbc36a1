#pragma once

// Minimal RFC-4180-ish CSV helpers shared by the manifest and metrics readers.

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "flairkit/volume.hpp"

namespace flairkit::csv {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(std::move(cell));
  return out;
}

inline std::string escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Rows keyed by header name. Blank lines are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

inline Table read(std::istream& in, const std::vector<std::string>& required) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      for (const auto& r : required) {
        bool found = false;
        for (const auto& h : t.header) found = found || h == r;
        if (!found) throw Error("CSV header is missing column '" + r + "'");
      }
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw Error("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                  " fields, got " + std::to_string(cells.size()));
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < cells.size(); ++i) row[t.header[i]] = cells[i];
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw Error("CSV input is empty");
  return t;
}

}  // namespace flairkit::csv
