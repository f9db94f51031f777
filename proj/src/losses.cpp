#include "nashae/losses.hpp"

#include <numeric>
#include <string>

#include "nashae/errors.hpp"

namespace nashae {
namespace {

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_batch(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": length mismatch " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  }
}

}  // namespace

RealMatrix mask_latent(const RealMatrix& z, std::size_t i) {
  if (i >= z.cols()) {
    throw std::out_of_range("mask_latent: index " + std::to_string(i) + " out of range for " +
                            std::to_string(z.cols()) + " latents");
  }
  RealMatrix out = z;
  for (std::size_t r = 0; r < out.rows(); ++r) out(r, i) = 0.0;
  return out;
}

double reconstruction_loss(const RealMatrix& x, const RealMatrix& x_rec) {
  require_same_shape(x, x_rec, "reconstruction_loss");
  if (x.empty()) throw ShapeError("reconstruction_loss: empty batch");
  auto a = x.flat();
  auto b = x_rec.flat();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    sum += d * d;
  }
  return sum / (2.0 * static_cast<double>(x.cols()) * static_cast<double>(x.rows()));
}

RealMatrix reconstruction_loss_grad(const RealMatrix& x, const RealMatrix& x_rec) {
  require_same_shape(x, x_rec, "reconstruction_loss_grad");
  const double scale = 1.0 / (static_cast<double>(x.cols()) * static_cast<double>(x.rows()));
  RealMatrix g(x.rows(), x.cols());
  auto a = x.flat();
  auto b = x_rec.flat();
  auto out = g.flat();
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (b[i] - a[i]) * scale;
  return g;
}

double predictor_loss(std::span<const double> target, std::span<const double> pred) {
  require_batch(target, pred, "predictor_loss");
  if (target.empty()) throw ShapeError("predictor_loss: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return 0.5 * sum / static_cast<double>(target.size());
}

double batch_covariance(std::span<const double> a, std::span<const double> b) {
  require_batch(a, b, "batch_covariance");
  if (a.size() < 2) throw DataError("batch_covariance: need at least 2 samples");
  const double ma = mean(a);
  const double mb = mean(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - ma) * (b[i] - mb);
  return sum / static_cast<double>(a.size());
}

std::vector<double> covariance_grad_wrt_second(std::span<const double> a,
                                               std::span<const double> b) {
  require_batch(a, b, "covariance_grad");
  if (a.size() < 2) throw DataError("covariance_grad: need at least 2 samples");
  const double ma = mean(a);
  const double k = static_cast<double>(a.size());
  std::vector<double> g(a.size());
  for (std::size_t q = 0; q < a.size(); ++q) g[q] = (a[q] - ma) / k;
  return g;
}

double adversarial_loss(const RealMatrix& z, const RealMatrix& z_pred) {
  require_same_shape(z, z_pred, "adversarial_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < z.cols(); ++i) total += batch_covariance(z_pred.column(i), z.column(i));
  return total;
}

AdversarialGrads adversarial_loss_grads(const RealMatrix& z, const RealMatrix& z_pred) {
  require_same_shape(z, z_pred, "adversarial_loss_grads");
  AdversarialGrads g{RealMatrix(z.rows(), z.cols()), RealMatrix(z.rows(), z.cols())};
  for (std::size_t i = 0; i < z.cols(); ++i) {
    const auto zi = z.column(i);
    const auto pi = z_pred.column(i);
    g.wrt_pred.set_column(i, covariance_grad_wrt_second(zi, pi));
    g.wrt_latent.set_column(i, covariance_grad_wrt_second(pi, zi));
  }
  return g;
}

void require_valid_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw ConfigError("lambda must lie in [0, 1), got " + std::to_string(lambda));
  }
}

double combined_ae_loss(double recon_loss, double adversarial, double lambda) {
  require_valid_lambda(lambda);
  return (1.0 - lambda) * recon_loss + lambda * adversarial;
}

}  // namespace nashae
