#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nashae/matrix.hpp"

namespace nashae {

/// Copy of `z` with column `i` set to zero. Predictor i sees this so it
/// cannot read the latent it is asked to recover.
RealMatrix mask_latent(const RealMatrix& z, std::size_t i);

/// L_R = 1/(2n) * mean over rows of ||x_rec - x||^2, n = column count.
double reconstruction_loss(const RealMatrix& x, const RealMatrix& x_rec);
/// dL_R / dx_rec = (x_rec - x) / (n * K).
RealMatrix reconstruction_loss_grad(const RealMatrix& x, const RealMatrix& x_rec);

/// 0.5 * mean((pred - target)^2).
double predictor_loss(std::span<const double> target, std::span<const double> pred);

/// Population covariance (1/K) sum (a - mean a)(b - mean b). Needs K >= 2.
double batch_covariance(std::span<const double> a, std::span<const double> b);
/// d batch_covariance(a, b) / d b_q = (a_q - mean a) / K, for every q.
std::vector<double> covariance_grad_wrt_second(std::span<const double> a,
                                               std::span<const double> b);

/// L_A = sum_i Cov(z_pred[:, i], z[:, i]).
double adversarial_loss(const RealMatrix& z, const RealMatrix& z_pred);

struct AdversarialGrads {
  RealMatrix wrt_pred;    ///< dL_A / dz_pred
  RealMatrix wrt_latent;  ///< dL_A / dz through the covariance's own z argument
};
AdversarialGrads adversarial_loss_grads(const RealMatrix& z, const RealMatrix& z_pred);

/// (1 - lambda) * L_R + lambda * L_A, lambda in [0, 1).
double combined_ae_loss(double recon_loss, double adversarial_loss, double lambda);

/// Throws ConfigError unless lambda lies in [0, 1).
void require_valid_lambda(double lambda);

}  // namespace nashae
