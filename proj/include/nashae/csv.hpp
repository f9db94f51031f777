#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "nashae/matrix.hpp"

namespace nashae::csv {

/// Numeric CSV with a single header row.
struct Table {
  std::vector<std::string> header;
  RealMatrix values;

  /// Index of `name` in the header, or npos.
  std::size_t find(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

/// Shortest decimal form that round-trips exactly.
std::string format(double v);

void write_row(std::ostream& os, const std::vector<std::string>& cells);
void write_row(std::ostream& os, const std::vector<double>& cells);

Table read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Table& table);

}  // namespace nashae::csv
