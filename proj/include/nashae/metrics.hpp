#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nashae/beam.hpp"
#include "nashae/matrix.hpp"

namespace nashae {

/// Latent codes for L samples together with whatever ground truth is known
/// about those samples.
struct LatentTable {
  RealMatrix latents;  ///< L x m
  std::vector<std::string> attr_names;
  std::vector<std::vector<std::uint8_t>> binary_attrs;  ///< A columns of L 0/1 values
  std::vector<std::string> factor_names;
  std::vector<std::vector<std::size_t>> factor_labels;  ///< per factor, L integer codes

  std::size_t size() const { return latents.rows(); }
  /// Throws DataError when the row counts disagree.
  void validate() const;
};

inline constexpr std::size_t kAurocThresholds = 100;

/// ROC area from a sweep of 100 evenly spaced thresholds between the
/// smallest and largest score, with (0,0) and (1,1) appended and the curve
/// integrated by trapezoids. Both orientations are scored and the larger
/// area returned, so the result is always >= 0.5.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct EntropyScreen {
  std::vector<std::size_t> qualified;
  std::vector<std::size_t> disqualified;
  std::vector<double> max_reduction;  ///< per attribute, max_b I(a;b) / H(a)
};

/// Drops attributes that another single attribute explains too well:
/// a is disqualified when max over b != a of (H(a) - H(a|b)) / H(a) exceeds
/// `threshold`, or when H(a) = 0. Entropies in bits.
EntropyScreen entropy_disqualify(const std::vector<std::vector<std::uint8_t>>& attrs,
                                 double threshold = 0.2);

struct AttributeScore {
  std::size_t attribute = 0;
  std::string name;
  std::size_t best_latent = 0;
  double a1 = 0.5;  ///< best latent AUROC
  double a2 = 0.5;  ///< runner-up latent AUROC (0.5 when there is only one latent)
  double diff = 0.0;
  bool captured = false;
  std::vector<double> aurocs;
};

struct TadReport {
  std::vector<AttributeScore> attributes;  ///< qualified attributes only
  std::vector<std::size_t> disqualified;
  double tad = 0.0;
  std::size_t captured_count = 0;
};

/// Total AUROC difference: sum over qualified attributes of the gap between
/// the best and second-best latent AUROC. captured_count counts attributes
/// whose best AUROC reaches `capture_threshold`.
TadReport tad(const LatentTable& table, double entropy_threshold = 0.2,
              double capture_threshold = 0.75);

struct BetaVaeConfig {
  std::size_t pairs_per_point = 100;
  std::size_t train_points = 1000;
  std::size_t eval_points = 1000;
  std::size_t iterations = 1000;
  double learning_rate = 1.0;
  double final_learning_rate = 0.05;
  double final_fraction = 0.05;
  std::uint64_t seed = 0;
};

/// Accuracy in [0, 1] of a linear softmax classifier that recovers which
/// factor was held fixed from the mean |z1 - z2| over a batch of pairs.
/// `latents` has one row per sample; `factors` holds per-factor value codes.
double beta_vae_score(const RealMatrix& latents, const std::vector<std::vector<std::size_t>>& factors,
                      const BetaVaeConfig& cfg);

using Encoder = std::function<RealMatrix(const RealMatrix&)>;

/// Encodes every sample once, then scores with frequency and duty cycle as
/// the two factors.
double beta_vae_score(const Encoder& encoder, const BeamDataset& ds, const BetaVaeConfig& cfg);

/// Coefficient of determination 1 - SS_res / SS_tot per column. Columns
/// with SS_tot < 1e-12 report 0.
std::vector<double> r_squared_per_latent(const RealMatrix& z, const RealMatrix& z_pred);

/// Latents whose range (max - min) is at least `threshold`.
std::size_t count_learned_latents(std::span<const double> mins, std::span<const double> maxs,
                                  double threshold = 0.2);
std::size_t count_learned_latents(std::span<const double> ranges, double threshold = 0.2);

/// Diagnostic binary attributes for the pulse-train data: duty cycle >= 0.5
/// and "lowest frequency". They are independent by construction.
void add_beam_attributes(LatentTable& table, const std::vector<std::size_t>& freq_label,
                         const std::vector<double>& dc_label);

}  // namespace nashae
