#include "nashae/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "nashae/binary_io.hpp"
#include "nashae/csv.hpp"
#include "nashae/errors.hpp"

namespace nashae {
namespace {

constexpr char kMagic[9] = "NASHAEDS";
constexpr std::uint32_t kVersion = 1;

void save_csv(const std::filesystem::path& path, const BeamDataset& ds) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  std::vector<std::string> header;
  for (std::size_t c = 0; c < ds.samples.cols(); ++c) header.push_back("x" + std::to_string(c));
  header.emplace_back("freq_label");
  header.emplace_back("dc_label");
  csv::write_row(os, header);
  std::vector<double> row(ds.samples.cols() + 2);
  for (std::size_t r = 0; r < ds.samples.rows(); ++r) {
    auto src = ds.samples.row(r);
    std::copy(src.begin(), src.end(), row.begin());
    row[src.size()] = static_cast<double>(ds.freq_label[r]);
    row[src.size() + 1] = ds.dc_label[r];
    csv::write_row(os, row);
  }
  if (!os) throw DataError("write failed: " + path.string());
}

BeamDataset load_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const auto fcol = t.find("freq_label");
  const auto dcol = t.find("dc_label");
  if (fcol == std::string::npos || dcol == std::string::npos) {
    throw DataError(path.string() + ": dataset CSV needs freq_label and dc_label columns");
  }
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (c != fcol && c != dcol) feature_cols.push_back(c);

  BeamDataset ds;
  const std::size_t rows = t.values.rows();
  ds.samples = RealMatrix(rows, feature_cols.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < feature_cols.size(); ++c) ds.samples(r, c) = t.values(r, feature_cols[c]);
    const double f = t.values(r, fcol);
    if (f < 0.0 || f != static_cast<double>(static_cast<std::size_t>(f))) {
      throw DataError(path.string() + ": freq_label must be a non-negative integer");
    }
    ds.freq_label.push_back(static_cast<std::size_t>(f));
    ds.dc_label.push_back(t.values(r, dcol));
  }
  std::vector<double> levels = ds.dc_label;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (double dc : ds.dc_label) {
    ds.dc_index.push_back(static_cast<std::size_t>(
        std::lower_bound(levels.begin(), levels.end(), dc) - levels.begin()));
  }
  return ds;
}

void save_binary(const std::filesystem::path& path, const BeamDataset& ds) {
  using namespace binary;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  write_magic(os, kMagic);
  write_u32(os, kVersion);
  write_u64(os, ds.samples.rows());
  write_u64(os, ds.samples.cols());
  write_u32(os, ds.normalized ? 1U : 0U);
  write_u64(os, ds.frequencies.size());
  for (auto f : ds.frequencies) write_u64(os, f);
  write_f64s(os, ds.samples.flat());
  for (auto f : ds.freq_label) write_u64(os, f);
  for (auto j : ds.dc_index) write_u64(os, j);
  write_f64s(os, ds.dc_label);
  if (ds.normalized) {
    write_f64s(os, ds.norm_mean);
    write_f64s(os, ds.norm_std);
  }
  if (!os) throw DataError("write failed: " + path.string());
}

BeamDataset load_binary(std::istream& is) {
  using namespace binary;
  expect_magic(is, kMagic, "dataset");
  if (read_u32(is) != kVersion) throw DataError("dataset: unsupported version");
  const std::uint64_t rows = read_u64(is);
  const std::uint64_t cols = read_u64(is);
  if (rows > (1ULL << 32) || cols > (1ULL << 24)) throw DataError("dataset: implausible shape");
  BeamDataset ds;
  ds.normalized = read_u32(is) != 0;
  const std::uint64_t nf = read_u64(is);
  if (nf > (1ULL << 20)) throw DataError("dataset: implausible frequency count");
  for (std::uint64_t i = 0; i < nf; ++i) ds.frequencies.push_back(read_u64(is));
  ds.samples = RealMatrix(rows, cols);
  read_f64s(is, ds.samples.flat());
  for (std::uint64_t r = 0; r < rows; ++r) ds.freq_label.push_back(read_u64(is));
  for (std::uint64_t r = 0; r < rows; ++r) ds.dc_index.push_back(read_u64(is));
  ds.dc_label.resize(rows);
  read_f64s(is, ds.dc_label);
  if (ds.normalized) {
    ds.norm_mean.resize(cols);
    ds.norm_std.resize(cols);
    read_f64s(is, ds.norm_mean);
    read_f64s(is, ds.norm_std);
  }
  return ds;
}

}  // namespace

DatasetFormat dataset_format_from_string(std::string_view s) {
  if (s == "csv") return DatasetFormat::Csv;
  if (s == "bin") return DatasetFormat::Binary;
  throw ConfigError("format: expected csv or bin, got '" + std::string(s) + "'");
}

void save_dataset(const std::filesystem::path& path, const BeamDataset& ds, DatasetFormat fmt) {
  if (ds.freq_label.size() != ds.samples.rows() || ds.dc_label.size() != ds.samples.rows()) {
    throw DataError("save_dataset: label count does not match row count");
  }
  if (fmt == DatasetFormat::Csv) {
    save_csv(path, ds);
  } else {
    save_binary(path, ds);
  }
}

BeamDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open dataset " + path.string());
  char head[8] = {};
  is.read(head, 8);
  if (is.gcount() == 8 && std::string(head, 8) == std::string(kMagic, 8)) {
    is.seekg(0);
    try {
      return load_binary(is);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  is.close();
  return load_csv(path);
}

}  // namespace nashae
