#include "nashae/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nashae/errors.hpp"
#include "nashae/losses.hpp"
#include "nashae/rng.hpp"

namespace nashae {

void ModelConfig::validate() const {
  if (input_dim == 0) throw ConfigError("model.input_dim must be > 0");
  if (latent_dim == 0) throw ConfigError("model.latent_dim must be > 0");
  for (auto h : hidden)
    if (h == 0) throw ConfigError("model.hidden sizes must be > 0");
  for (auto h : predictor_hidden)
    if (h == 0) throw ConfigError("model.predictor_hidden sizes must be > 0");
  require_valid_lambda(lambda);
  ae_adam.validate();
  pred_adam.validate();
}

void NashAeModel::validate() const {
  const std::size_t m = latent_dim();
  if (decoder.input_size() != m) throw ShapeError("decoder input width differs from latent size");
  if (decoder.output_size() != encoder.input_size()) {
    throw ShapeError("decoder output width differs from encoder input width");
  }
  if (encoder.layers().back().activation != Activation::Sigmoid) {
    throw ShapeError("encoder output layer must be sigmoid");
  }
  if (predictors.size() != m) throw ShapeError("need exactly one predictor per latent");
  for (const auto& p : predictors) {
    if (p.input_size() != m || p.output_size() != 1) {
      throw ShapeError("predictor must map " + std::to_string(m) + " inputs to 1 output");
    }
  }
  require_valid_lambda(lambda);
}

NashAeModel make_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto act = cfg.hidden_activation;

  std::vector<LayerSpec> enc;
  std::size_t width = cfg.input_dim;
  for (auto h : cfg.hidden) {
    enc.push_back({width, h, act});
    width = h;
  }
  enc.push_back({width, cfg.latent_dim, Activation::Sigmoid});

  std::vector<LayerSpec> dec;
  width = cfg.latent_dim;
  for (auto it = cfg.hidden.rbegin(); it != cfg.hidden.rend(); ++it) {
    dec.push_back({width, *it, act});
    width = *it;
  }
  dec.push_back({width, cfg.input_dim, Activation::Identity});

  std::vector<LayerSpec> pred;
  width = cfg.latent_dim;
  for (auto h : cfg.predictor_hidden) {
    pred.push_back({width, h, Activation::Selu});
    width = h;
  }
  pred.push_back({width, 1, Activation::Identity});

  const auto init_seed = [&](std::uint64_t index) {
    return derive_seed(seed, static_cast<std::uint64_t>(Stream::Init), index);
  };

  NashAeModel model;
  model.encoder = MlpNetwork(std::span<const LayerSpec>(enc));
  model.decoder = MlpNetwork(std::span<const LayerSpec>(dec));
  kaiming_init(model.encoder, init_seed(0));
  kaiming_init(model.decoder, init_seed(1));
  for (std::size_t i = 0; i < cfg.latent_dim; ++i) {
    model.predictors.emplace_back(std::span<const LayerSpec>(pred));
    kaiming_init(model.predictors.back(), init_seed(2 + i));
  }
  model.lambda = cfg.lambda;
  model.k = cfg.k;
  model.ae_adam = cfg.ae_adam;
  model.pred_adam = cfg.pred_adam;
  return model;
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("train.batch_size must be >= 2");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (range_interval < 1) throw ConfigError("train.range_interval must be >= 1");
  require_valid_lambda(lambda);
}

double StepRecord::mean_predictor_loss() const {
  if (predictor_losses.empty()) return 0.0;
  return std::accumulate(predictor_losses.begin(), predictor_losses.end(), 0.0) /
         static_cast<double>(predictor_losses.size());
}

RealMatrix predict_latents(const NashAeModel& model, const RealMatrix& z) {
  RealMatrix out(z.rows(), model.predictors.size());
  for (std::size_t i = 0; i < model.predictors.size(); ++i) {
    out.set_column(i, mlp_predict(model.predictors[i], mask_latent(z, i)).flat());
  }
  return out;
}

PredictorOutput train_predictors(NashAeModel& model, const RealMatrix& z) {
  const std::size_t m = model.predictors.size();
  if (z.cols() != m) throw ShapeError("train_predictors: latent batch " + z.shape_string());
  PredictorOutput out{RealMatrix(z.rows(), m), std::vector<double>(m, 0.0)};
  // Predictors touch disjoint parameters and read the same frozen z, so
  // their order does not matter.
  for (std::size_t i = 0; i < m; ++i) {
    auto& net = model.predictors[i];
    const RealMatrix input = mask_latent(z, i);
    const RealMatrix target(z.rows(), 1, z.column(i));
    const double inv_k = 1.0 / static_cast<double>(z.rows());
    for (std::size_t it = 0; it < model.k; ++it) {
      RealMatrix grad = mlp_forward(net, input);
      for (std::size_t r = 0; r < grad.rows(); ++r) grad(r, 0) = (grad(r, 0) - target(r, 0)) * inv_k;
      mlp_backward(net, grad, BackwardMode::ParamsOnly);
      adam_step(net, model.pred_adam);
    }
    const RealMatrix pred = mlp_predict(net, input);
    out.predictions.set_column(i, pred.flat());
    out.losses[i] = predictor_loss(target.flat(), pred.flat());
  }
  return out;
}

namespace {

void check_lambda_and_width(const NashAeModel& model, const RealMatrix& x) {
  require_valid_lambda(model.lambda);
  if (x.cols() != model.input_dim()) {
    throw ShapeError("model expects " + std::to_string(model.input_dim()) +
                     " input columns, got " + x.shape_string());
  }
}

// `z` must be the encoder output for `x`; when accumulating it must come
// from mlp_forward so the encoder cache is intact.
AeObjective objective_from_latents(NashAeModel& model, const RealMatrix& x, RealMatrix z,
                                   bool accumulate) {
  const std::size_t m = model.latent_dim();
  const double lambda = model.lambda;
  AeObjective obj;
  obj.predictions = RealMatrix(z.rows(), m);
  for (std::size_t i = 0; i < m; ++i) {
    const RealMatrix masked = mask_latent(z, i);
    const RealMatrix p = accumulate ? mlp_forward(model.predictors[i], masked)
                                    : mlp_predict(model.predictors[i], masked);
    obj.predictions.set_column(i, p.flat());
  }
  const RealMatrix x_rec = accumulate ? mlp_forward(model.decoder, z) : mlp_predict(model.decoder, z);

  obj.recon_loss = reconstruction_loss(x, x_rec);
  obj.adversarial_loss = adversarial_loss(z, obj.predictions);
  obj.combined_loss = combined_ae_loss(obj.recon_loss, obj.adversarial_loss, lambda);

  if (accumulate) {
    RealMatrix recon_grad = reconstruction_loss_grad(x, x_rec);
    for (double& g : recon_grad.flat()) g *= (1.0 - lambda);
    RealMatrix dz = mlp_backward(model.decoder, recon_grad, BackwardMode::Full);

    // Adversarial path: through each frozen predictor (the masked slot has
    // zero derivative) plus the covariance's direct dependence on z.
    AdversarialGrads adv = adversarial_loss_grads(z, obj.predictions);
    RealMatrix dz_adv = std::move(adv.wrt_latent);
    for (std::size_t i = 0; i < m; ++i) {
      const RealMatrix upstream(z.rows(), 1, adv.wrt_pred.column(i));
      const RealMatrix g = mlp_backward(model.predictors[i], upstream, BackwardMode::InputOnly);
      for (std::size_t r = 0; r < z.rows(); ++r) {
        auto dst = dz_adv.row(r);
        auto src = g.row(r);
        for (std::size_t c = 0; c < m; ++c)
          if (c != i) dst[c] += src[c];
      }
    }
    auto d = dz.flat();
    auto a = dz_adv.flat();
    for (std::size_t j = 0; j < d.size(); ++j) d[j] += lambda * a[j];
    mlp_backward(model.encoder, dz, BackwardMode::ParamsOnly);
  }
  obj.latents = std::move(z);
  return obj;
}

}  // namespace

AeObjective ae_objective(NashAeModel& model, const RealMatrix& x, bool accumulate) {
  check_lambda_and_width(model, x);
  RealMatrix z = accumulate ? mlp_forward(model.encoder, x) : mlp_predict(model.encoder, x);
  return objective_from_latents(model, x, std::move(z), accumulate);
}

AeObjective evaluate_ae_objective(const NashAeModel& model, const RealMatrix& x) {
  check_lambda_and_width(model, x);
  // Without accumulation nothing is written, so the const_cast is only a
  // way to share the evaluation path.
  auto& m = const_cast<NashAeModel&>(model);
  return objective_from_latents(m, x, mlp_predict(model.encoder, x), false);
}

StepRecord ae_train_step(NashAeModel& model, const RealMatrix& x) {
  check_lambda_and_width(model, x);
  if (x.rows() < 2) throw DataError("ae_train_step: batch needs at least 2 samples");

  RealMatrix z = mlp_forward(model.encoder, x);
  const PredictorOutput pred = train_predictors(model, z);

  zero_grad(model.encoder);
  zero_grad(model.decoder);
  const AeObjective obj = objective_from_latents(model, x, std::move(z), true);
  adam_step(model.encoder, model.ae_adam);
  adam_step(model.decoder, model.ae_adam);

  StepRecord rec;
  rec.recon_loss = obj.recon_loss;
  rec.adversarial_loss = obj.adversarial_loss;
  rec.combined_loss = obj.combined_loss;
  rec.predictor_losses = pred.losses;
  return rec;
}

LatentRange latent_range(const NashAeModel& model, const RealMatrix& data) {
  const RealMatrix z = mlp_predict(model.encoder, data);
  LatentRange range;
  range.min.assign(z.cols(), std::numeric_limits<double>::infinity());
  range.max.assign(z.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t c = 0; c < z.cols(); ++c) {
      range.min[c] = std::min(range.min[c], z(r, c));
      range.max[c] = std::max(range.max[c], z(r, c));
    }
  }
  return range;
}

namespace {

bool finite_record(const StepRecord& rec) {
  if (!std::isfinite(rec.combined_loss) || !std::isfinite(rec.recon_loss) ||
      !std::isfinite(rec.adversarial_loss)) {
    return false;
  }
  return std::all_of(rec.predictor_losses.begin(), rec.predictor_losses.end(),
                     [](double v) { return std::isfinite(v); });
}

// Batch boundaries over n samples. A trailing single-sample batch is
// merged into the previous one because covariance needs K >= 2.
std::vector<std::size_t> batch_starts(std::size_t n, std::size_t batch) {
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s < n; s += batch) starts.push_back(s);
  if (starts.size() > 1 && n - starts.back() < 2) starts.pop_back();
  starts.push_back(n);
  return starts;
}

}  // namespace

TrainTrace fit(NashAeModel& model, const RealMatrix& data, const TrainConfig& cfg,
               const StepCallback& on_step) {
  cfg.validate();
  model.lambda = cfg.lambda;
  model.k = cfg.k;
  model.validate();
  if (data.rows() == 0) throw DataError("fit: empty dataset");
  if (data.rows() < 2) throw DataError("fit: need at least 2 samples");
  if (data.cols() != model.input_dim()) {
    throw ShapeError("fit: dataset has " + std::to_string(data.cols()) +
                     " features, encoder expects " + std::to_string(model.input_dim()));
  }

  Rng shuffle_rng = make_rng(cfg.seed, Stream::Shuffle);
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto starts = batch_starts(data.rows(), cfg.batch_size);

  TrainTrace trace;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t b = 0; b + 1 < starts.size(); ++b) {
      if (cfg.max_steps && step >= *cfg.max_steps) {
        trace.ranges.push_back(latent_range(model, data));
        trace.ranges.back().epoch = epoch;
        return trace;
      }
      const std::span<const std::size_t> idx(order.data() + starts[b], starts[b + 1] - starts[b]);
      StepRecord rec = ae_train_step(model, gather_rows(data, idx));
      rec.step = step++;
      rec.epoch = epoch;
      if (!finite_record(rec)) {
        throw NumericError("non-finite loss at step " + std::to_string(rec.step) + " (epoch " +
                           std::to_string(epoch) + ")");
      }
      if (on_step) on_step(rec);
      trace.steps.push_back(std::move(rec));
    }
    if ((epoch + 1) % cfg.range_interval == 0 || epoch + 1 == cfg.epochs) {
      trace.ranges.push_back(latent_range(model, data));
      trace.ranges.back().epoch = epoch;
    }
  }
  return trace;
}

}  // namespace nashae
