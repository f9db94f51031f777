#pragma once

#include <filesystem>
#include <string_view>

#include "nashae/beam.hpp"

namespace nashae {

enum class DatasetFormat { Csv, Binary };

DatasetFormat dataset_format_from_string(std::string_view s);

// CSV: header x0..x{n-1},freq_label,dc_label then one waveform per row.
//
// Binary, little-endian:
//   char[8] "NASHAEDS", u32 version (1), u64 rows, u64 cols, u32 normalized flag,
//   u64 frequency count F, u64[F] frequencies,
//   f64[rows*cols] samples (row-major), u64[rows] freq_label, u64[rows] dc_index,
//   f64[rows] dc_label, f64[cols] norm_mean, f64[cols] norm_std
// (norm arrays are empty when the normalized flag is 0).
void save_dataset(const std::filesystem::path& path, const BeamDataset& ds, DatasetFormat fmt);

/// Detects the format from the file's leading bytes.
BeamDataset load_dataset(const std::filesystem::path& path);

}  // namespace nashae
