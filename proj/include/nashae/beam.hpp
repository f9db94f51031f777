#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nashae/matrix.hpp"
#include "nashae/rng.hpp"

namespace nashae {

/// Pulse-train generator parameters. The two factors of variation are the
/// pulse count per window (categorical) and the duty cycle (continuous,
/// uniform sweep). Everything else is held fixed.
struct BeamConfig {
  std::vector<std::size_t> frequencies = {10, 15, 20};
  std::size_t duty_cycle_count = 120;
  double duty_cycle_min = 0.2;
  double duty_cycle_max = 0.8;  ///< exclusive
  std::size_t waveform_len = 1000;
  double ramp_tau = 0.05;  ///< injection ramp time constant, as a fraction of the window
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
  double duty_cycle(std::size_t j) const;
  std::size_t sample_count() const { return frequencies.size() * duty_cycle_count; }
};

struct BeamDataset {
  RealMatrix samples;                  ///< normalized, one waveform per row
  std::vector<std::size_t> freq_label;  ///< index into frequencies
  std::vector<double> dc_label;
  std::vector<std::size_t> dc_index;
  std::vector<std::size_t> frequencies;
  std::vector<double> norm_mean;
  std::vector<double> norm_std;  ///< 1.0 recorded for constant features
  bool normalized = false;

  std::size_t size() const { return samples.rows(); }
};

/// Source of Gaussian noise for one waveform.
using NoiseStream = Rng;

/// Ramp envelope times a rectangular pulse train, plus white noise:
///   w(t) = (1 - exp(-t / ramp_tau)) * [frac(freq * t) < duty_cycle] + N(0, noise_sigma)
/// sampled at t = j / waveform_len.
std::vector<double> synthesize_waveform(std::size_t freq, double duty_cycle, const BeamConfig& cfg,
                                        NoiseStream& noise);

/// freq-major, duty-cycle-minor grid of waveforms, normalized per feature.
BeamDataset generate_dataset(const BeamConfig& cfg);

/// Per-feature z-scoring; features whose std is below 1e-12 are only centred.
void normalize(BeamDataset& ds);
void denormalize(BeamDataset& ds);

/// Number of samples in the "on" part of a single pulse of the noiseless
/// train, counted from the first full period.
std::size_t single_pulse_width(std::size_t freq, double duty_cycle, std::size_t waveform_len);

}  // namespace nashae
