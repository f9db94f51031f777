#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nashae/config.hpp"
#include "nashae/csv.hpp"
#include "nashae/dataset_io.hpp"
#include "nashae/errors.hpp"
#include "nashae/experiment.hpp"

namespace fs = std::filesystem;
using namespace nashae;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

template <class T>
std::vector<T> split_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

struct BeamOptions {
  std::string frequencies;
  std::optional<std::size_t> duty_cycles;
  std::optional<double> dc_min;
  std::optional<double> dc_max;
  std::optional<std::size_t> length;
  std::optional<double> ramp_tau;
  std::optional<double> noise_sigma;

  void add(CLI::App* app) {
    app->add_option("--frequencies", frequencies, "Comma-separated pulse counts (default 10,15,20)");
    app->add_option("--duty-cycles", duty_cycles, "Number of duty-cycle steps (default 120)");
    app->add_option("--dc-min", dc_min, "Smallest duty cycle (default 0.2)");
    app->add_option("--dc-max", dc_max, "Exclusive upper duty cycle (default 0.8)");
    app->add_option("--length", length, "Samples per waveform (default 1000)");
    app->add_option("--ramp-tau", ramp_tau, "Ramp time constant as a window fraction (default 0.05)");
    app->add_option("--noise-sigma", noise_sigma, "White-noise standard deviation (default 0.01)");
  }

  void apply(BeamConfig& cfg) const {
    if (!frequencies.empty()) cfg.frequencies = split_list<std::size_t>(frequencies, "--frequencies");
    if (duty_cycles) cfg.duty_cycle_count = *duty_cycles;
    if (dc_min) cfg.duty_cycle_min = *dc_min;
    if (dc_max) cfg.duty_cycle_max = *dc_max;
    if (length) cfg.waveform_len = *length;
    if (ramp_tau) cfg.ramp_tau = *ramp_tau;
    if (noise_sigma) cfg.noise_sigma = *noise_sigma;
    cfg.validate();
  }
};

void write_sidecar(const fs::path& path, const BeamConfig& cfg, const BeamDataset& ds, DatasetFormat fmt) {
  nlohmann::json doc = {{"format", fmt == DatasetFormat::Csv ? "csv" : "bin"},
                        {"rows", ds.samples.rows()},
                        {"cols", ds.samples.cols()},
                        {"beam.frequencies", cfg.frequencies},
                        {"beam.duty_cycle_count", cfg.duty_cycle_count},
                        {"beam.duty_cycle_min", cfg.duty_cycle_min},
                        {"beam.duty_cycle_max", cfg.duty_cycle_max},
                        {"beam.waveform_len", cfg.waveform_len},
                        {"beam.ramp_tau", cfg.ramp_tau},
                        {"beam.noise_sigma", cfg.noise_sigma},
                        {"beam.seed", cfg.seed},
                        {"norm_mean", ds.norm_mean},
                        {"norm_std", ds.norm_std}};
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os << doc.dump(2) << "\n";
  if (!os) throw DataError("write failed: " + path.string());
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw DataError("write failed: " + path.string());
}

ExperimentSpec spec_or_default(const std::string& config) {
  return config.empty() ? ExperimentSpec{} : load_spec(config);
}

int run(int argc, char** argv) {
  CLI::App app{"NashAE: adversarially disentangled autoencoders"};
  app.require_subcommand(1);

  // generate-data
  auto* gen = app.add_subcommand("generate-data", "Write the pulse-train dataset");
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  std::string gen_format = "csv";
  BeamOptions beam_opts;
  gen->add_option("--out", gen_out, "Output path")->required();
  gen->add_option("--seed", gen_seed, "Noise seed");
  gen->add_option("--format", gen_format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));
  beam_opts.add(gen);

  // train
  auto* train = app.add_subcommand("train", "Train one model");
  std::string train_config;
  std::string train_out;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::size_t> train_epochs;
  std::optional<double> train_lambda;
  std::optional<std::size_t> train_m;
  train->add_option("--config", train_config, "Experiment config (JSON); defaults when omitted");
  train->add_option("--out", train_out, "Run directory")->required();
  train->add_option("--seed", train_seed, "Override the first trial seed");
  train->add_option("--epochs", train_epochs, "Override train.epochs");
  train->add_option("--lambda", train_lambda, "Override train.lambda");
  train->add_option("--latent-dim", train_m, "Override model.latent_dim");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a trained model or a latent dump");
  std::string eval_model;
  std::string eval_data;
  std::string eval_latents;
  std::string eval_metrics = "tad,bvae,r2,count";
  std::string eval_out;
  std::uint64_t eval_seed = 0;
  auto* model_opt = eval->add_option("--model", eval_model, "Run directory written by train");
  auto* data_opt = eval->add_option("--data", eval_data, "Dataset file (csv or bin)");
  auto* latents_opt = eval->add_option("--latents", eval_latents, "Latent CSV instead of a model");
  eval->add_option("--metrics", eval_metrics, "Comma-separated subset of tad,bvae,r2,count");
  eval->add_option("--out", eval_out, "Report path (stdout when omitted)");
  eval->add_option("--seed", eval_seed, "Seed for the beta-VAE metric batches");
  model_opt->needs(data_opt);
  data_opt->needs(model_opt);
  latents_opt->excludes(model_opt);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Latent-count sweep over lambda and m");
  std::string sweep_lambdas = "0,0.2";
  std::string sweep_sizes = "4,8";
  std::size_t sweep_trials = 8;
  std::string sweep_out;
  std::string sweep_config;
  std::optional<std::size_t> sweep_epochs;
  std::size_t sweep_jobs = 1;
  std::size_t sweep_truth = 2;
  sweep->add_option("--lambdas", sweep_lambdas, "Comma-separated lambda values");
  sweep->add_option("--latent-sizes", sweep_sizes, "Comma-separated latent sizes");
  sweep->add_option("--trials", sweep_trials, "Trials per cell");
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--config", sweep_config, "Base experiment config");
  sweep->add_option("--epochs", sweep_epochs, "Override train.epochs");
  sweep->add_option("--jobs", sweep_jobs, "Parallel trials (results do not depend on it)");
  sweep->add_option("--truth", sweep_truth, "Ground-truth factor count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*gen) {
    BeamConfig cfg;
    cfg.seed = gen_seed;
    beam_opts.apply(cfg);
    const auto fmt = dataset_format_from_string(gen_format);
    const BeamDataset ds = generate_dataset(cfg);
    const fs::path out(gen_out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_dataset(out, ds, fmt);
    write_sidecar(fs::path(gen_out + ".json"), cfg, ds, fmt);
    std::cout << "wrote " << ds.samples.rows() << " x " << ds.samples.cols() << " samples to " << gen_out
              << "\n";
    return 0;
  }

  if (*train) {
    ExperimentSpec spec = spec_or_default(train_config);
    if (train_seed) spec.seeds.front() = *train_seed;
    if (train_epochs) spec.train.epochs = *train_epochs;
    if (train_lambda) spec.train.lambda = *train_lambda;
    if (train_m) spec.model.latent_dim = *train_m;
    spec.validate();
    const BeamDataset data = dataset_for(spec);
    const std::uint64_t seed = spec.seeds.front();
    const TrainRun result = train_run(spec, data, seed);
    write_run(train_out, spec, data, result, seed);
    std::cout << "learned latents: " << result.learned_latents << " of " << result.model.latent_dim() << "\n";
    return 0;
  }

  if (*eval) {
    const auto metrics = parse_metric_list(eval_metrics);
    MetricsReport report;
    if (!eval_latents.empty()) {
      report = evaluate_dump(read_latent_dump(eval_latents), metrics, eval_seed);
    } else if (!eval_model.empty()) {
      report = evaluate_model(load_run_model(eval_model), load_dataset(eval_data), metrics, eval_seed);
    } else {
      throw ConfigError("eval needs --model with --data, or --latents");
    }
    const std::string text = report_to_json(report);
    if (eval_out.empty()) {
      std::cout << text;
    } else {
      write_file(eval_out, text);
    }
    return 0;
  }

  if (*sweep) {
    ExperimentSpec spec = spec_or_default(sweep_config);
    if (sweep_epochs) spec.train.epochs = *sweep_epochs;
    SweepOptions opts;
    opts.lambdas = split_list<double>(sweep_lambdas, "--lambdas");
    opts.latent_sizes = split_list<std::size_t>(sweep_sizes, "--latent-sizes");
    opts.trials = sweep_trials;
    opts.jobs = sweep_jobs;
    opts.true_factors = sweep_truth;
    const SweepResult result = run_sweep(spec, opts, sweep_out, [](const SweepRow& r) {
      std::cout << "lambda=" << csv::format(r.lambda) << " m=" << r.latent_dim << " trial=" << r.trial
                << " learned=" << r.learned << "\n"
                << std::flush;
    });
    for (const auto& c : result.cells) {
      std::cout << "lambda=" << csv::format(c.lambda) << " m=" << c.latent_dim
                << " mean_abs_diff=" << csv::format(c.mean_abs_diff) << "\n";
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
