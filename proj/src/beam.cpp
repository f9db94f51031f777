#include "nashae/beam.hpp"

#include <cmath>
#include <random>
#include <string>

#include "nashae/errors.hpp"

namespace nashae {
namespace {

constexpr double kMinStd = 1e-12;

bool pulse_on(std::size_t freq, std::size_t j, std::size_t len, double duty_cycle) {
  // frac(freq * j / len) computed exactly in integers.
  const double phase = static_cast<double>((freq * j) % len) / static_cast<double>(len);
  return phase < duty_cycle;
}

}  // namespace

void BeamConfig::validate() const {
  if (frequencies.empty()) throw ConfigError("beam.frequencies must not be empty");
  for (auto f : frequencies)
    if (f == 0) throw ConfigError("beam.frequencies entries must be >= 1");
  if (duty_cycle_count == 0) throw ConfigError("beam.duty_cycle_count must be >= 1");
  if (!(duty_cycle_min > 0.0 && duty_cycle_max <= 1.0 && duty_cycle_min < duty_cycle_max)) {
    throw ConfigError("beam.duty_cycle range must satisfy 0 < min < max <= 1");
  }
  if (waveform_len < 2) throw ConfigError("beam.waveform_len must be >= 2");
  if (!(ramp_tau > 0.0)) throw ConfigError("beam.ramp_tau must be > 0");
  if (!(noise_sigma >= 0.0)) throw ConfigError("beam.noise_sigma must be >= 0");
}

double BeamConfig::duty_cycle(std::size_t j) const {
  return duty_cycle_min + (duty_cycle_max - duty_cycle_min) * static_cast<double>(j) /
                              static_cast<double>(duty_cycle_count);
}

std::vector<double> synthesize_waveform(std::size_t freq, double duty_cycle, const BeamConfig& cfg,
                                        NoiseStream& noise) {
  if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) {
    throw std::invalid_argument("synthesize_waveform: duty cycle " + std::to_string(duty_cycle) +
                                " outside (0, 1]");
  }
  if (freq == 0) throw std::invalid_argument("synthesize_waveform: frequency must be >= 1");
  const std::size_t len = cfg.waveform_len;
  std::vector<double> w(len);
  std::normal_distribution<double> gauss(0.0, cfg.noise_sigma);
  for (std::size_t j = 0; j < len; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(len);
    const double envelope = -std::expm1(-t / cfg.ramp_tau);
    w[j] = pulse_on(freq, j, len, duty_cycle) ? envelope : 0.0;
    if (cfg.noise_sigma > 0.0) w[j] += gauss(noise);
  }
  return w;
}

BeamDataset generate_dataset(const BeamConfig& cfg) {
  cfg.validate();
  BeamDataset ds;
  ds.frequencies = cfg.frequencies;
  const std::size_t rows = cfg.sample_count();
  ds.samples = RealMatrix(rows, cfg.waveform_len);
  ds.freq_label.reserve(rows);
  ds.dc_label.reserve(rows);
  ds.dc_index.reserve(rows);
  std::size_t r = 0;
  for (std::size_t f = 0; f < cfg.frequencies.size(); ++f) {
    for (std::size_t j = 0; j < cfg.duty_cycle_count; ++j, ++r) {
      // Per-row noise stream: rows are reproducible independently of order.
      NoiseStream noise = make_rng(cfg.seed, Stream::DatasetNoise, r);
      const double dc = cfg.duty_cycle(j);
      const auto w = synthesize_waveform(cfg.frequencies[f], dc, cfg, noise);
      std::copy(w.begin(), w.end(), ds.samples.row(r).begin());
      ds.freq_label.push_back(f);
      ds.dc_label.push_back(dc);
      ds.dc_index.push_back(j);
    }
  }
  normalize(ds);
  return ds;
}

void normalize(BeamDataset& ds) {
  if (ds.normalized) return;
  const std::size_t n = ds.samples.rows();
  const std::size_t d = ds.samples.cols();
  if (n == 0) throw DataError("normalize: empty dataset");
  ds.norm_mean = column_means(ds.samples);
  ds.norm_std.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = ds.samples.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = row[c] - ds.norm_mean[c];
      ds.norm_std[c] += dev * dev;
    }
  }
  for (double& s : ds.norm_std) {
    s = std::sqrt(s / static_cast<double>(n));
    if (s < kMinStd) s = 1.0;
  }
  for (std::size_t r = 0; r < n; ++r) {
    auto row = ds.samples.row(r);
    for (std::size_t c = 0; c < d; ++c) row[c] = (row[c] - ds.norm_mean[c]) / ds.norm_std[c];
  }
  ds.normalized = true;
}

void denormalize(BeamDataset& ds) {
  if (!ds.normalized) return;
  const std::size_t d = ds.samples.cols();
  if (ds.norm_mean.size() != d || ds.norm_std.size() != d) {
    throw DataError("denormalize: statistics do not match feature count");
  }
  for (std::size_t r = 0; r < ds.samples.rows(); ++r) {
    auto row = ds.samples.row(r);
    for (std::size_t c = 0; c < d; ++c) row[c] = row[c] * ds.norm_std[c] + ds.norm_mean[c];
  }
  ds.normalized = false;
}

std::size_t single_pulse_width(std::size_t freq, double duty_cycle, std::size_t waveform_len) {
  std::size_t width = 0;
  for (std::size_t j = 0; j < waveform_len; ++j) {
    if ((freq * j) / waveform_len == 1 && pulse_on(freq, j, waveform_len, duty_cycle)) ++width;
  }
  return width;
}

}  // namespace nashae
