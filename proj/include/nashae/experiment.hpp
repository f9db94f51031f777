#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nashae/beam.hpp"
#include "nashae/config.hpp"
#include "nashae/metrics.hpp"
#include "nashae/model.hpp"

namespace nashae {

/// The spec's dataset: loaded from data.path when set, generated otherwise.
BeamDataset dataset_for(const ExperimentSpec& spec);

struct TrainRun {
  NashAeModel model;
  TrainTrace trace;
  RealMatrix latents;      ///< encoder output on every sample
  RealMatrix predictions;  ///< predictor estimates of `latents`
  LatentRange range;       ///< over the full dataset after training
  std::size_t learned_latents = 0;
};

TrainRun train_run(const ExperimentSpec& spec, const BeamDataset& data, std::uint64_t seed);

/// Writes into `dir` (created if needed):
///   config.json, model.json, encoder.bin, decoder.bin, predictor_<i>.bin,
///   trace.csv, latents.csv, summary.json
void write_run(const std::filesystem::path& dir, const ExperimentSpec& spec, const BeamDataset& data,
               const TrainRun& run, std::uint64_t seed);

/// Encoder, decoder and predictors restored from a run directory.
NashAeModel load_run_model(const std::filesystem::path& dir);

struct MetricsReport {
  std::optional<TadReport> tad;
  std::optional<double> bvae_score;
  std::optional<std::vector<double>> r2;
  std::optional<std::size_t> learned_latents;
  std::optional<std::vector<double>> latent_ranges;
};

std::string report_to_json(const MetricsReport& report);

/// Metrics of a trained model on a labelled dataset.
MetricsReport evaluate_model(const NashAeModel& model, const BeamDataset& data,
                             const std::vector<std::string>& metrics, std::uint64_t seed);

/// A latent dump: z<i> columns, optional zp<i> prediction columns, optional
/// attr_<name> 0/1 columns and optional freq_label / dc_label factor columns.
struct LatentDump {
  RealMatrix z;
  std::optional<RealMatrix> z_pred;
  std::vector<std::string> attr_names;
  std::vector<std::vector<std::uint8_t>> attrs;
  std::vector<std::string> factor_names;
  std::vector<std::vector<double>> factors;  ///< raw values, one column per factor
};

LatentDump read_latent_dump(const std::filesystem::path& path);
void write_latent_dump(const std::filesystem::path& path, const LatentDump& dump);

/// Metrics computable from a dump alone. TAD uses the attr_ columns when
/// present, else diagnostic attributes derived from the beam labels.
MetricsReport evaluate_dump(const LatentDump& dump, const std::vector<std::string>& metrics,
                            std::uint64_t seed);

struct SweepRow {
  double lambda = 0.0;
  std::size_t latent_dim = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t learned = 0;
  double abs_diff = 0.0;
};

struct SweepCell {
  double lambda = 0.0;
  std::size_t latent_dim = 0;
  std::size_t trials = 0;
  double mean_abs_diff = 0.0;
  double mean_learned = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepCell> cells;  ///< one per (lambda, m), in sweep order
};

struct SweepOptions {
  std::vector<double> lambdas;
  std::vector<std::size_t> latent_sizes;
  std::size_t trials = 1;
  std::size_t true_factors = 2;
  /// Worker threads; trials are independent so results do not depend on it.
  std::size_t jobs = 1;
};

using TrialCallback = std::function<void(const SweepRow&)>;

/// Trains every (lambda, m, trial) combination. Trial t uses spec.seeds[t]
/// when the list is long enough, otherwise seed t + 1. Each trial is
/// written to `dir`/lambda_<l>_m_<m>/trial_<t> and the tables to
/// `dir`/rows.csv and `dir`/table.csv.
SweepResult run_sweep(const ExperimentSpec& spec, const SweepOptions& opts,
                      const std::filesystem::path& dir, const TrialCallback& on_trial = {});

/// Per-cell means recomputed from rows, in first-appearance order.
std::vector<SweepCell> aggregate(const std::vector<SweepRow>& rows);

std::uint64_t trial_seed(const ExperimentSpec& spec, std::size_t trial);

/// Name used in sweep directory names: 0.2 -> "0.2".
std::string lambda_tag(double lambda);

}  // namespace nashae
