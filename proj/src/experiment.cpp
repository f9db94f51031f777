#include "nashae/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "nashae/checkpoint.hpp"
#include "nashae/csv.hpp"
#include "nashae/dataset_io.hpp"
#include "nashae/errors.hpp"

namespace nashae {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw DataError("write failed: " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> ranges_of(const LatentRange& r) {
  std::vector<double> out(r.min.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r.max[i] - r.min[i];
  return out;
}

LatentRange column_range(const RealMatrix& z) {
  LatentRange r;
  r.min.assign(z.cols(), 0.0);
  r.max.assign(z.cols(), 0.0);
  for (std::size_t c = 0; c < z.cols(); ++c) {
    const auto col = z.column(c);
    if (col.empty()) continue;
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    r.min[c] = *lo;
    r.max[c] = *hi;
  }
  return r;
}

std::vector<std::size_t> level_codes(const std::vector<double>& values) {
  std::vector<double> levels = values;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<std::size_t> codes;
  codes.reserve(values.size());
  for (double v : values) {
    codes.push_back(static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), v) -
                                             levels.begin()));
  }
  return codes;
}

bool wants(const std::vector<std::string>& metrics, const char* name) {
  return std::find(metrics.begin(), metrics.end(), name) != metrics.end();
}

json tad_json(const TadReport& r) {
  json attrs = json::array();
  for (const auto& a : r.attributes) {
    attrs.push_back({{"attribute", a.name},
                     {"best_latent", a.best_latent},
                     {"a1", a.a1},
                     {"a2", a.a2},
                     {"diff", a.diff},
                     {"captured", a.captured},
                     {"aurocs", a.aurocs}});
  }
  return attrs;
}

}  // namespace

BeamDataset dataset_for(const ExperimentSpec& spec) {
  if (spec.data_path) return load_dataset(*spec.data_path);
  return generate_dataset(spec.beam);
}

TrainRun train_run(const ExperimentSpec& spec, const BeamDataset& data, std::uint64_t seed) {
  spec.validate();
  if (data.size() == 0) throw DataError("training data is empty");
  TrainRun run;
  run.model = make_model(spec.model_config(data.samples.cols()), seed);
  run.trace = fit(run.model, data.samples, spec.train_config(seed));
  run.latents = mlp_predict(run.model.encoder, data.samples);
  run.predictions = predict_latents(run.model, run.latents);
  run.range = column_range(run.latents);
  run.learned_latents = count_learned_latents(run.range.min, run.range.max);
  return run;
}

void write_run(const std::filesystem::path& dir, const ExperimentSpec& spec, const BeamDataset& data,
               const TrainRun& run, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  save_spec(dir / "config.json", spec);

  const auto& m = run.model;
  json model_doc = {{"input_dim", m.input_dim()},
                    {"latent_dim", m.latent_dim()},
                    {"lambda", m.lambda},
                    {"k", m.k},
                    {"ae_lr", m.ae_adam.learning_rate},
                    {"predictor_lr", m.pred_adam.learning_rate},
                    {"adam_beta1", m.ae_adam.beta1},
                    {"adam_beta2", m.ae_adam.beta2},
                    {"adam_epsilon", m.ae_adam.epsilon},
                    {"seed", seed}};
  write_text(dir / "model.json", model_doc.dump(2) + "\n");
  save_checkpoint(dir / "encoder.bin", m.encoder);
  save_checkpoint(dir / "decoder.bin", m.decoder);
  for (std::size_t i = 0; i < m.predictors.size(); ++i) {
    save_checkpoint(dir / ("predictor_" + std::to_string(i) + ".bin"), m.predictors[i]);
  }

  {
    std::ofstream os(dir / "trace.csv", std::ios::trunc);
    if (!os) throw DataError("cannot open " + (dir / "trace.csv").string());
    csv::write_row(os, std::vector<std::string>{"step", "epoch", "recon_loss", "adversarial_loss",
                                                "combined_loss", "mean_predictor_loss"});
    for (const auto& s : run.trace.steps) {
      csv::write_row(os, std::vector<double>{static_cast<double>(s.step), static_cast<double>(s.epoch),
                                             s.recon_loss, s.adversarial_loss, s.combined_loss,
                                             s.mean_predictor_loss()});
    }
  }

  LatentDump dump;
  dump.z = run.latents;
  dump.z_pred = run.predictions;
  dump.factor_names = {"freq_label", "dc_label"};
  dump.factors = {std::vector<double>(data.freq_label.begin(), data.freq_label.end()), data.dc_label};
  write_latent_dump(dir / "latents.csv", dump);

  const auto r2 = r_squared_per_latent(run.latents, run.predictions);
  const auto& last = run.trace.steps.empty() ? StepRecord{} : run.trace.steps.back();
  json summary = {{"seed", seed},
                  {"steps", run.trace.steps.size()},
                  {"epochs", spec.train.epochs},
                  {"lambda", m.lambda},
                  {"latent_dim", m.latent_dim()},
                  {"learned_latents", run.learned_latents},
                  {"latent_ranges", ranges_of(run.range)},
                  {"latent_min", run.range.min},
                  {"latent_max", run.range.max},
                  {"r2", r2},
                  {"mean_r2", mean_of(r2)},
                  {"final_recon_loss", last.recon_loss},
                  {"final_adversarial_loss", last.adversarial_loss},
                  {"final_combined_loss", last.combined_loss}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

NashAeModel load_run_model(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("model directory not found: " + dir.string());
  const json doc = read_json(dir / "model.json");
  NashAeModel m;
  try {
    m.encoder = load_checkpoint(dir / "encoder.bin");
    m.decoder = load_checkpoint(dir / "decoder.bin");
    const auto latent = doc.at("latent_dim").get<std::size_t>();
    for (std::size_t i = 0; i < latent; ++i) {
      m.predictors.push_back(load_checkpoint(dir / ("predictor_" + std::to_string(i) + ".bin")));
    }
    m.lambda = doc.at("lambda").get<double>();
    m.k = doc.at("k").get<std::size_t>();
    m.ae_adam.learning_rate = doc.at("ae_lr").get<double>();
    m.pred_adam.learning_rate = doc.at("predictor_lr").get<double>();
    m.ae_adam.beta1 = m.pred_adam.beta1 = doc.at("adam_beta1").get<double>();
    m.ae_adam.beta2 = m.pred_adam.beta2 = doc.at("adam_beta2").get<double>();
    m.ae_adam.epsilon = m.pred_adam.epsilon = doc.at("adam_epsilon").get<double>();
  } catch (const json::exception& e) {
    throw DataError((dir / "model.json").string() + ": " + e.what());
  }
  try {
    m.validate();
  } catch (const ShapeError& e) {
    throw DataError(dir.string() + ": inconsistent model: " + e.what());
  }
  return m;
}

std::string report_to_json(const MetricsReport& r) {
  json doc = json::object();
  if (r.tad) {
    doc["tad"] = r.tad->tad;
    doc["captured"] = r.tad->captured_count;
    doc["per_attribute"] = tad_json(*r.tad);
    doc["disqualified"] = r.tad->disqualified;
  }
  if (r.bvae_score) doc["bvae_score"] = *r.bvae_score;
  if (r.r2) {
    doc["r2"] = *r.r2;
    doc["mean_r2"] = mean_of(*r.r2);
  }
  if (r.learned_latents) doc["learned_latents"] = *r.learned_latents;
  if (r.latent_ranges) doc["latent_ranges"] = *r.latent_ranges;
  return doc.dump(2) + "\n";
}

MetricsReport evaluate_model(const NashAeModel& model, const BeamDataset& data,
                             const std::vector<std::string>& metrics, std::uint64_t seed) {
  if (data.samples.cols() != model.input_dim()) {
    throw ShapeError("data has " + std::to_string(data.samples.cols()) + " features but the model expects " +
                     std::to_string(model.input_dim()));
  }
  LatentDump dump;
  dump.z = mlp_predict(model.encoder, data.samples);
  dump.z_pred = predict_latents(model, dump.z);
  dump.factor_names = {"freq_label", "dc_label"};
  dump.factors = {std::vector<double>(data.freq_label.begin(), data.freq_label.end()), data.dc_label};
  return evaluate_dump(dump, metrics, seed);
}

LatentDump read_latent_dump(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const std::size_t rows = t.values.rows();
  std::vector<std::size_t> zc;
  std::vector<std::size_t> zpc;
  for (std::size_t m = 0;; ++m) {
    const auto c = t.find("z" + std::to_string(m));
    if (c == std::string::npos) break;
    zc.push_back(c);
  }
  for (std::size_t m = 0;; ++m) {
    const auto c = t.find("zp" + std::to_string(m));
    if (c == std::string::npos) break;
    zpc.push_back(c);
  }
  if (zc.empty()) throw DataError(path.string() + ": latent CSV needs columns z0, z1, ...");
  if (!zpc.empty() && zpc.size() != zc.size()) {
    throw DataError(path.string() + ": zp columns must match z columns one to one");
  }

  LatentDump d;
  d.z = RealMatrix(rows, zc.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < zc.size(); ++c) d.z(r, c) = t.values(r, zc[c]);
  if (!zpc.empty()) {
    d.z_pred = RealMatrix(rows, zpc.size());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < zpc.size(); ++c) (*d.z_pred)(r, c) = t.values(r, zpc[c]);
  }
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const auto& h = t.header[c];
    if (h.rfind("attr_", 0) == 0) {
      std::vector<std::uint8_t> col(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const double v = t.values(r, c);
        if (v != 0.0 && v != 1.0) throw DataError(path.string() + ": column " + h + " must hold 0 or 1");
        col[r] = v == 1.0 ? 1 : 0;
      }
      d.attr_names.push_back(h.substr(5));
      d.attrs.push_back(std::move(col));
    }
  }
  for (const char* name : {"freq_label", "dc_label"}) {
    const auto c = t.find(name);
    if (c == std::string::npos) continue;
    d.factor_names.emplace_back(name);
    d.factors.push_back(t.values.column(c));
  }
  return d;
}

void write_latent_dump(const std::filesystem::path& path, const LatentDump& d) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  const std::size_t m = d.z.cols();
  std::vector<std::string> header;
  for (std::size_t i = 0; i < m; ++i) header.push_back("z" + std::to_string(i));
  if (d.z_pred)
    for (std::size_t i = 0; i < m; ++i) header.push_back("zp" + std::to_string(i));
  for (const auto& a : d.attr_names) header.push_back("attr_" + a);
  for (const auto& f : d.factor_names) header.push_back(f);
  csv::write_row(os, header);
  std::vector<double> row;
  for (std::size_t r = 0; r < d.z.rows(); ++r) {
    row.clear();
    for (double v : d.z.row(r)) row.push_back(v);
    if (d.z_pred)
      for (double v : d.z_pred->row(r)) row.push_back(v);
    for (const auto& a : d.attrs) row.push_back(a[r]);
    for (std::size_t f = 0; f < d.factor_names.size(); ++f) {
      row.push_back(d.factors.at(f).at(r));
    }
    csv::write_row(os, row);
  }
  if (!os) throw DataError("write failed: " + path.string());
}

MetricsReport evaluate_dump(const LatentDump& d, const std::vector<std::string>& metrics,
                            std::uint64_t seed) {
  MetricsReport report;
  if (wants(metrics, "tad")) {
    LatentTable table;
    table.latents = d.z;
    table.attr_names = d.attr_names;
    table.binary_attrs = d.attrs;
    if (table.binary_attrs.empty()) {
      const auto f = std::find(d.factor_names.begin(), d.factor_names.end(), "freq_label");
      const auto g = std::find(d.factor_names.begin(), d.factor_names.end(), "dc_label");
      if (f == d.factor_names.end() || g == d.factor_names.end()) {
        throw DataError("tad needs attr_ columns or freq_label and dc_label columns");
      }
      const auto& freq = d.factors[static_cast<std::size_t>(f - d.factor_names.begin())];
      const auto& dc = d.factors[static_cast<std::size_t>(g - d.factor_names.begin())];
      add_beam_attributes(table, level_codes(freq), dc);
    }
    report.tad = tad(table);
  }
  if (wants(metrics, "bvae")) {
    if (d.factors.size() < 2) throw DataError("bvae needs at least two factor columns");
    BetaVaeConfig cfg;
    cfg.seed = seed;
    std::vector<std::vector<std::size_t>> codes;
    for (const auto& f : d.factors) codes.push_back(level_codes(f));
    report.bvae_score = beta_vae_score(d.z, codes, cfg);
  }
  if (wants(metrics, "r2")) {
    if (!d.z_pred) throw DataError("r2 needs zp prediction columns");
    report.r2 = r_squared_per_latent(d.z, *d.z_pred);
  }
  if (wants(metrics, "count")) {
    const LatentRange r = column_range(d.z);
    report.learned_latents = count_learned_latents(r.min, r.max);
    report.latent_ranges = ranges_of(r);
  }
  return report;
}

std::uint64_t trial_seed(const ExperimentSpec& spec, std::size_t trial) {
  return trial < spec.seeds.size() ? spec.seeds[trial] : static_cast<std::uint64_t>(trial) + 1;
}

std::string lambda_tag(double lambda) { return csv::format(lambda); }

std::vector<SweepCell> aggregate(const std::vector<SweepRow>& rows) {
  std::vector<SweepCell> cells;
  for (const auto& r : rows) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const SweepCell& c) {
      return c.lambda == r.lambda && c.latent_dim == r.latent_dim;
    });
    if (it == cells.end()) {
      cells.push_back({.lambda = r.lambda, .latent_dim = r.latent_dim});
      it = cells.end() - 1;
    }
    ++it->trials;
    it->mean_abs_diff += r.abs_diff;
    it->mean_learned += static_cast<double>(r.learned);
  }
  for (auto& c : cells) {
    c.mean_abs_diff /= static_cast<double>(c.trials);
    c.mean_learned /= static_cast<double>(c.trials);
  }
  return cells;
}

SweepResult run_sweep(const ExperimentSpec& base, const SweepOptions& opts,
                      const std::filesystem::path& dir, const TrialCallback& on_trial) {
  if (opts.trials < 1) throw ConfigError("sweep: trials must be >= 1");
  if (opts.lambdas.empty()) throw ConfigError("sweep: need at least one lambda");
  if (opts.latent_sizes.empty()) throw ConfigError("sweep: need at least one latent size");
  for (double l : opts.lambdas)
    if (!(l >= 0.0 && l < 1.0)) throw ConfigError("sweep: lambda must lie in [0, 1)");
  for (auto m : opts.latent_sizes)
    if (m == 0) throw ConfigError("sweep: latent sizes must be >= 1");
  base.validate();

  const BeamDataset data = dataset_for(base);
  struct Job {
    double lambda;
    std::size_t m;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (double l : opts.lambdas)
    for (auto m : opts.latent_sizes)
      for (std::size_t t = 0; t < opts.trials; ++t) jobs.push_back({l, m, t});

  SweepResult result;
  result.rows.resize(jobs.size());
  std::filesystem::create_directories(dir);
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      try {
        const Job& j = jobs[i];
        ExperimentSpec spec = base;
        spec.train.lambda = j.lambda;
        spec.model.latent_dim = j.m;
        const std::uint64_t seed = trial_seed(base, j.trial);
        const TrainRun run = train_run(spec, data, seed);
        const auto trial_dir = dir / ("lambda_" + lambda_tag(j.lambda) + "_m_" + std::to_string(j.m)) /
                               ("trial_" + std::to_string(j.trial));
        write_run(trial_dir, spec, data, run, seed);
        SweepRow row{.lambda = j.lambda,
                     .latent_dim = j.m,
                     .trial = j.trial,
                     .seed = seed,
                     .learned = run.learned_latents};
        row.abs_diff = std::abs(static_cast<double>(row.learned) - static_cast<double>(opts.true_factors));
        std::lock_guard lock(mu);
        result.rows[i] = row;
        if (on_trial) on_trial(row);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(opts.jobs, jobs.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.cells = aggregate(result.rows);

  std::ofstream rows_os(dir / "rows.csv", std::ios::trunc);
  if (!rows_os) throw DataError("cannot open " + (dir / "rows.csv").string());
  csv::write_row(rows_os, std::vector<std::string>{"lambda", "m", "trial", "seed", "learned", "abs_diff"});
  for (const auto& r : result.rows) {
    csv::write_row(rows_os, std::vector<std::string>{csv::format(r.lambda), std::to_string(r.latent_dim),
                                                     std::to_string(r.trial), std::to_string(r.seed),
                                                     std::to_string(r.learned), csv::format(r.abs_diff)});
  }

  // One row per lambda, one column per latent size, like the published table.
  std::ofstream table_os(dir / "table.csv", std::ios::trunc);
  if (!table_os) throw DataError("cannot open " + (dir / "table.csv").string());
  std::vector<std::string> header{"method"};
  for (auto m : opts.latent_sizes) header.push_back("m=" + std::to_string(m));
  csv::write_row(table_os, header);
  for (double l : opts.lambdas) {
    std::vector<std::string> line{"NashAE lambda=" + lambda_tag(l)};
    for (auto m : opts.latent_sizes) {
      const auto it = std::find_if(result.cells.begin(), result.cells.end(), [&](const SweepCell& c) {
        return c.lambda == l && c.latent_dim == m;
      });
      line.push_back(csv::format(it->mean_abs_diff));
    }
    csv::write_row(table_os, line);
  }
  return result;
}

}  // namespace nashae
