#include "nashae/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nashae/errors.hpp"

namespace nashae::csv {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

}  // namespace

std::size_t Table::find(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::string::npos;
}

std::vector<double> Table::column(const std::string& name) const {
  const auto i = find(name);
  if (i == std::string::npos) throw DataError("csv: missing column '" + name + "'");
  return values.column(i);
}

std::string format(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw DataError("csv: cannot format value");
  return std::string(buf, ptr);
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << cells[i];
  }
  os << '\n';
}

void write_row(std::ostream& os, const std::vector<double>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << format(cells[i]);
  }
  os << '\n';
}

Table read(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw DataError(path.string() + ": empty CSV file");
  Table t;
  for (auto& h : split(trim(line))) t.header.push_back(trim(h));
  const std::size_t cols = t.header.size();
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != cols) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(cols) + " fields, got " + std::to_string(cells.size()));
    }
    for (const auto& raw : cells) {
      const std::string c = trim(raw);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size()) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + c +
                        "'");
      }
      data.push_back(v);
    }
    ++rows;
  }
  t.values = RealMatrix(rows, cols, std::move(data));
  return t;
}

void write(const std::filesystem::path& path, const Table& table) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  write_row(os, table.header);
  for (std::size_t r = 0; r < table.values.rows(); ++r) {
    auto row = table.values.row(r);
    write_row(os, std::vector<double>(row.begin(), row.end()));
  }
  if (!os) throw DataError("write failed: " + path.string());
}

}  // namespace nashae::csv
