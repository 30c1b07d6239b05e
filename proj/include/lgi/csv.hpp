#pragma once

#include <istream>
#include <string>
#include <vector>

namespace lgi {

// Minimal CSV support for the file formats the tool reads and writes:
// comma-separated, UTF-8, one header row, no quoting or embedded commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

// Throws std::runtime_error with a 1-based line number on malformed rows
// (wrong field count, empty line in the middle of the file).
CsvTable read_csv(std::istream& in, const std::string& source_name);
CsvTable read_csv_file(const std::string& path);

std::string format_double(double v);

}  // namespace lgi
