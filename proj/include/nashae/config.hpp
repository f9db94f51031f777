#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nashae/beam.hpp"
#include "nashae/model.hpp"

namespace nashae {

inline constexpr int kSpecSchemaVersion = 1;

/// Everything needed to reproduce a run. Serialized as a flat JSON object
/// whose keys are dotted paths ("train.lambda", "beam.noise_sigma", ...);
/// see docs/formats.md for the full key list.
struct ExperimentSpec {
  BeamConfig beam;
  /// Load samples from here instead of generating them.
  std::optional<std::filesystem::path> data_path;
  ModelConfig model;  ///< input_dim is taken from the data; lambda and k from train
  TrainConfig train;  ///< seed is taken per trial from `seeds`
  std::vector<std::string> metrics = {"tad", "bvae", "r2", "count"};
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = "runs";

  /// Throws ConfigError naming the offending key.
  void validate() const;

  /// Model config with the training-time lambda and k copied in.
  ModelConfig model_config(std::size_t input_dim) const;
  /// Train config for one trial seed.
  TrainConfig train_config(std::uint64_t seed) const;
};

/// Unknown keys, wrong types and out-of-range values all throw ConfigError.
/// Missing keys keep their defaults.
ExperimentSpec parse_spec(std::string_view json_text);
/// Every key, always, so the output is a complete record.
std::string serialize_spec(const ExperimentSpec& spec);

ExperimentSpec load_spec(const std::filesystem::path& path);
void save_spec(const std::filesystem::path& path, const ExperimentSpec& spec);

inline const std::vector<std::string> kKnownMetrics = {"tad", "bvae", "r2", "count"};

/// Splits "a,b,c"; throws ConfigError on an unknown metric name.
std::vector<std::string> parse_metric_list(std::string_view list);

}  // namespace nashae
