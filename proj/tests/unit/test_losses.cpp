#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "nashae/errors.hpp"
#include "nashae/losses.hpp"
#include "oracles.hpp"

using namespace nashae;

TEST_CASE("mask_latent zeroes exactly one column") {
  const RealMatrix z{{0.2, 0.4, 0.6}};
  CHECK(mask_latent(z, 1) == RealMatrix{{0.2, 0.0, 0.6}});
  const auto big = oracle::random_matrix(5, 4, 1);
  const auto once = mask_latent(big, 2);
  CHECK(mask_latent(once, 2) == once);
  const RealMatrix single{{0.3}, {0.7}};
  CHECK(mask_latent(single, 0) == RealMatrix{{0.0}, {0.0}});
  CHECK_THROWS_AS(mask_latent(z, 3), std::out_of_range);
}

TEST_CASE("reconstruction loss") {
  const auto x = oracle::random_matrix(6, 5, 2);
  CHECK(reconstruction_loss(x, x) == 0.0);
  CHECK(reconstruction_loss(RealMatrix{{0, 0}}, RealMatrix{{1, 1}}) == doctest::Approx(0.5));
  const auto y = oracle::random_matrix(6, 5, 3);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x.flat()[i] - y.flat()[i]) * (x.flat()[i] - y.flat()[i]);
  CHECK(reconstruction_loss(x, y) == doctest::Approx(s / (2.0 * 5 * 6)).epsilon(1e-14));
  CHECK_THROWS_AS(reconstruction_loss(RealMatrix(2, 2), RealMatrix(2, 3)), ShapeError);
}

TEST_CASE("reconstruction gradient matches finite differences") {
  const auto x = oracle::random_matrix(3, 4, 4);
  auto y = oracle::random_matrix(3, 4, 5);
  const auto g = reconstruction_loss_grad(x, y);
  const double h = 1e-6;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double keep = y.flat()[i];
    y.flat()[i] = keep + h;
    const double up = reconstruction_loss(x, y);
    y.flat()[i] = keep - h;
    const double down = reconstruction_loss(x, y);
    y.flat()[i] = keep;
    CHECK(g.flat()[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("predictor loss") {
  const std::vector<double> z{0, 1};
  CHECK(predictor_loss(z, z) == 0.0);
  CHECK(predictor_loss(z, std::vector<double>{0.5, 0.5}) == doctest::Approx(0.125));
  CHECK_THROWS_AS(predictor_loss(z, std::vector<double>{0.5}), ShapeError);
}

TEST_CASE("constant prediction minimizing predictor loss is the mean") {
  const std::vector<double> z{0.1, 0.5, 0.3, 0.9};
  const double mean = 0.45;
  const double at_mean = predictor_loss(z, std::vector<double>(4, mean));
  for (double c : {0.0, 0.2, 0.44, 0.46, 0.7, 1.0}) CHECK(predictor_loss(z, std::vector<double>(4, c)) > at_mean);
}

TEST_CASE("batch covariance") {
  const std::vector<double> a{0.3, -1.0, 2.0};
  CHECK(batch_covariance(a, std::vector<double>(3, 4.0)) == 0.0);
  const std::vector<double> b{0, 1};
  CHECK(batch_covariance(b, b) == doctest::Approx(0.25));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = oracle::random_matrix(2, 17, seed);
    const auto ra = m.row(0), rb = m.row(1);
    const std::vector<double> va(ra.begin(), ra.end()), vb(rb.begin(), rb.end());
    CHECK(batch_covariance(va, vb) == doctest::Approx(oracle::two_pass_covariance(va, vb)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(batch_covariance(std::vector<double>{1}, std::vector<double>{2}), DataError);
  CHECK_THROWS_AS(batch_covariance(std::vector<double>{1, 2}, std::vector<double>{2}), ShapeError);
}

TEST_CASE("covariance gradient is (a_q - mean a) / K") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = oracle::random_matrix(2, 9, seed);
    const std::vector<double> a(m.row(0).begin(), m.row(0).end());
    std::vector<double> b(m.row(1).begin(), m.row(1).end());
    const auto g = covariance_grad_wrt_second(a, b);
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= 9.0;
    const double h = 1e-6;
    for (std::size_t q = 0; q < 9; ++q) {
      CHECK(std::abs(g[q] - (a[q] - mean) / 9.0) < 1e-12);
      const double keep = b[q];
      b[q] = keep + h;
      const double up = batch_covariance(a, b);
      b[q] = keep - h;
      const double down = batch_covariance(a, b);
      b[q] = keep;
      CHECK(g[q] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("adversarial loss") {
  const auto z = oracle::random_matrix(8, 3, 1, 0, 1);
  RealMatrix flat(8, 3);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 3; ++c) flat(r, c) = 0.1 * static_cast<double>(c);
  CHECK(adversarial_loss(z, flat) == doctest::Approx(0.0).epsilon(1e-15));
  double var_sum = 0.0;
  for (std::size_t c = 0; c < 3; ++c) var_sum += oracle::two_pass_covariance(z.column(c), z.column(c));
  CHECK(adversarial_loss(z, z) == doctest::Approx(var_sum).epsilon(1e-13));
  CHECK_THROWS_AS(adversarial_loss(z, RealMatrix(8, 2)), ShapeError);
}

TEST_CASE("adversarial gradients: analytic form and finite differences") {
  auto z = oracle::random_matrix(7, 3, 11, 0, 1);
  auto p = oracle::random_matrix(7, 3, 12, 0, 1);
  const auto g = adversarial_loss_grads(z, p);
  const auto zm = column_means(z);
  const auto pm = column_means(p);
  const double h = 1e-6;
  for (std::size_t q = 0; q < 7; ++q) {
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(g.wrt_pred(q, i) - (z(q, i) - zm[i]) / 7.0) < 1e-12);
      CHECK(std::abs(g.wrt_latent(q, i) - (p(q, i) - pm[i]) / 7.0) < 1e-12);
      const double keep = p(q, i);
      p(q, i) = keep + h;
      const double up = adversarial_loss(z, p);
      p(q, i) = keep - h;
      const double down = adversarial_loss(z, p);
      p(q, i) = keep;
      CHECK(g.wrt_pred(q, i) == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("combined loss and lambda domain") {
  CHECK(combined_ae_loss(0.37, 5.0, 0.0) == 0.37);
  CHECK(combined_ae_loss(0.2, 0.1, 0.5) == doctest::Approx(0.15));
  CHECK(combined_ae_loss(0.0, 0.0, 0.3) == 0.0);
  CHECK_THROWS_AS(combined_ae_loss(0.1, 0.1, 1.0), ConfigError);
  CHECK_THROWS_AS(combined_ae_loss(0.1, 0.1, -0.1), ConfigError);
  CHECK_THROWS_AS(require_valid_lambda(std::nan("")), ConfigError);
}

TEST_CASE("at the uninformed fixed point the covariance gradient equals the squared-error gradient") {
  // With z' held at the batch means, d/dz' of -(1/2) mean ||z' - z||^2 is
  // (z - z') / K = (z - mean z) / K, the covariance gradient.
  const auto z = oracle::random_matrix(10, 4, 3, 0, 1);
  const auto means = column_means(z);
  RealMatrix zp(10, 4);
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 4; ++c) zp(r, c) = means[c];
  const auto g = adversarial_loss_grads(z, zp);
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      const double mse_grad = -(zp(r, c) - z(r, c)) / 10.0;
      CHECK(std::abs(g.wrt_pred(r, c) - mse_grad) < 1e-12);
    }
}
