#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "nashae/beam.hpp"
#include "nashae/errors.hpp"

using namespace nashae;

namespace {

BeamConfig quiet() {
  BeamConfig c;
  c.noise_sigma = 0.0;
  return c;
}

// Maximal runs of "on" samples (value > 0 in a noiseless waveform).
std::vector<std::size_t> on_runs(const std::vector<double>& w) {
  std::vector<std::size_t> runs;
  std::size_t cur = 0;
  for (double v : w) {
    if (v > 0.0) {
      ++cur;
    } else if (cur > 0) {
      runs.push_back(cur);
      cur = 0;
    }
  }
  if (cur > 0) runs.push_back(cur);
  return runs;
}

}  // namespace

TEST_CASE("full duty cycle gives the bare envelope") {
  const BeamConfig cfg = quiet();
  Rng rng(1);
  const auto w = synthesize_waveform(10, 1.0, cfg, rng);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double t = static_cast<double>(j) / 1000.0;
    CHECK(w[j] == doctest::Approx(1.0 - std::exp(-t / 0.05)).epsilon(1e-14));
  }
}

TEST_CASE("freq 10, dc 0.5: ten on-regions of about 50 samples") {
  const BeamConfig cfg = quiet();
  Rng rng(1);
  const auto w = synthesize_waveform(10, 0.5, cfg, rng);
  auto runs = on_runs(w);
  // sample 0 is on but has zero envelope, so the first run starts at sample 1
  REQUIRE(runs.size() == 10);
  for (std::size_t i = 1; i < runs.size(); ++i) CHECK(std::abs(static_cast<long>(runs[i]) - 50) <= 1);
  CHECK(std::abs(static_cast<long>(runs[0]) - 50) <= 1);
}

TEST_CASE("on-fraction tracks the duty cycle") {
  const BeamConfig cfg = quiet();
  for (std::size_t f : {10, 15, 20}) {
    for (double dc : {0.2, 0.35, 0.5, 0.795}) {
      Rng rng(1);
      const auto w = synthesize_waveform(f, dc, cfg, rng);
      std::size_t on = 0;
      for (std::size_t j = 1; j < w.size(); ++j) {
        const double env = 1.0 - std::exp(-static_cast<double>(j) / 1000.0 / 0.05);
        if (w[j] / env > 0.5) ++on;
      }
      const double frac = static_cast<double>(on + 1) / 1000.0;  // sample 0 is on
      CHECK(std::abs(frac - dc) <= 2.0 * static_cast<double>(f) / 1000.0);
    }
  }
}

TEST_CASE("same per-pulse width for (10, 0.4) and (20, 0.8)") {
  CHECK(single_pulse_width(10, 0.4, 1000) == single_pulse_width(20, 0.8, 1000));
  CHECK(single_pulse_width(10, 0.4, 1000) == 40);
  CHECK(single_pulse_width(15, 0.3, 1000) == single_pulse_width(10, 0.2, 1000));
}

TEST_CASE("invalid waveform arguments") {
  const BeamConfig cfg = quiet();
  Rng rng(1);
  CHECK_THROWS_AS(synthesize_waveform(10, 0.0, cfg, rng), std::invalid_argument);
  CHECK_THROWS_AS(synthesize_waveform(10, 1.2, cfg, rng), std::invalid_argument);
  CHECK_THROWS_AS(synthesize_waveform(0, 0.5, cfg, rng), std::invalid_argument);
}

TEST_CASE("default dataset shape, order and labels") {
  const BeamDataset ds = generate_dataset(BeamConfig{});
  CHECK(ds.samples.rows() == 360);
  CHECK(ds.samples.cols() == 1000);
  for (std::size_t r = 0; r < 360; ++r) {
    CHECK(ds.freq_label[r] == r / 120);
    CHECK(ds.dc_index[r] == r % 120);
    CHECK(ds.dc_label[r] == doctest::Approx(0.2 + 0.6 * static_cast<double>(r % 120) / 120.0).epsilon(1e-15));
  }
  std::set<std::pair<std::size_t, double>> pairs;
  for (std::size_t r = 0; r < 360; ++r) pairs.insert({ds.freq_label[r], ds.dc_label[r]});
  CHECK(pairs.size() == 360);
  CHECK(ds.frequencies == std::vector<std::size_t>{10, 15, 20});
  CHECK(ds.dc_label.back() < 0.8);
}

TEST_CASE("generation is deterministic per seed") {
  BeamConfig c;
  c.seed = 4;
  const BeamDataset a = generate_dataset(c);
  const BeamDataset b = generate_dataset(c);
  CHECK(a.samples == b.samples);
  c.seed = 5;
  CHECK_FALSE(generate_dataset(c).samples == a.samples);
}

TEST_CASE("normalized features have zero mean and unit std") {
  const BeamDataset ds = generate_dataset(BeamConfig{});
  CHECK(ds.normalized);
  const auto means = column_means(ds.samples);
  for (std::size_t c = 0; c < ds.samples.cols(); ++c) {
    CHECK(std::abs(means[c]) < 1e-9);
    if (ds.norm_std[c] == 1.0) continue;  // constant feature, centred only
    double s2 = 0.0;
    for (std::size_t r = 0; r < ds.samples.rows(); ++r) s2 += ds.samples(r, c) * ds.samples(r, c);
    CHECK(std::abs(std::sqrt(s2 / 360.0) - 1.0) < 1e-9);
  }
}

TEST_CASE("constant features are centred, not scaled") {
  BeamDataset ds;
  ds.samples = RealMatrix{{2.0, 1.0}, {2.0, 3.0}};
  normalize(ds);
  CHECK(ds.samples(0, 0) == 0.0);
  CHECK(ds.samples(1, 0) == 0.0);
  CHECK(ds.norm_std[0] == 1.0);
  CHECK(ds.samples(0, 1) == doctest::Approx(-1.0));
}

TEST_CASE("denormalize inverts normalize") {
  BeamConfig c = quiet();
  c.noise_sigma = 0.01;
  BeamDataset ds = generate_dataset(c);
  BeamDataset raw = ds;
  denormalize(raw);
  CHECK_FALSE(raw.normalized);
  BeamDataset again = raw;
  normalize(again);
  double worst = 0.0;
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    worst = std::max(worst, std::abs(again.samples.flat()[i] - ds.samples.flat()[i]));
  CHECK(worst < 1e-9);
  // and the raw values are waveforms in roughly [0, 1]
  for (double v : raw.samples.flat()) {
    CHECK(v > -0.1);
    CHECK(v < 1.1);
  }
}

TEST_CASE("invalid beam configs") {
  BeamConfig c;
  c.frequencies.clear();
  CHECK_THROWS_AS(generate_dataset(c), ConfigError);
  c = BeamConfig{};
  c.duty_cycle_min = 0.0;
  CHECK_THROWS_AS(generate_dataset(c), ConfigError);
  c = BeamConfig{};
  c.noise_sigma = -1.0;
  CHECK_THROWS_AS(generate_dataset(c), ConfigError);
  c = BeamConfig{};
  c.ramp_tau = 0.0;
  CHECK_THROWS_AS(generate_dataset(c), ConfigError);
}
