#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nashae/matrix.hpp"
#include "nashae/mlp.hpp"

namespace nashae {

struct ModelConfig {
  std::size_t input_dim = 1000;
  std::vector<std::size_t> hidden = {200, 80, 40};
  std::size_t latent_dim = 4;
  std::vector<std::size_t> predictor_hidden = {40, 40};
  Activation hidden_activation = Activation::Selu;
  double lambda = 0.2;
  std::size_t k = 5;
  AdamConfig ae_adam{.learning_rate = 0.001};
  AdamConfig pred_adam{.learning_rate = 0.01};

  void validate() const;
};

/// Autoencoder plus the predictor ensemble that plays against it.
///
/// encoder: input_dim -> hidden... -> latent_dim with a sigmoid output, so
/// every latent lies in (0, 1). decoder mirrors it with an identity output.
/// Predictor i maps the full latent vector (slot i zeroed) to a scalar
/// estimate of latent i.
struct NashAeModel {
  MlpNetwork encoder;
  MlpNetwork decoder;
  std::vector<MlpNetwork> predictors;
  double lambda = 0.2;
  std::size_t k = 5;
  AdamConfig ae_adam{.learning_rate = 0.001};
  AdamConfig pred_adam{.learning_rate = 0.01};

  std::size_t latent_dim() const { return encoder.output_size(); }
  std::size_t input_dim() const { return encoder.input_size(); }
  void validate() const;
};

/// Builds and initializes a model; each network draws from its own
/// stream derived from `seed`.
NashAeModel make_model(const ModelConfig& cfg, std::uint64_t seed);

struct TrainConfig {
  std::size_t batch_size = 100;
  std::size_t epochs = 2000;
  std::uint64_t seed = 0;
  double lambda = 0.2;
  std::size_t k = 5;
  bool shuffle = true;
  /// Stop after this many AE steps (for tests and smoke runs).
  std::optional<std::size_t> max_steps;
  /// Record per-latent ranges every this many epochs (the last epoch is always recorded).
  std::size_t range_interval = 1;

  void validate() const;
};

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double recon_loss = 0.0;
  double adversarial_loss = 0.0;
  double combined_loss = 0.0;
  std::vector<double> predictor_losses;

  double mean_predictor_loss() const;
};

struct LatentRange {
  std::size_t epoch = 0;
  std::vector<double> min;
  std::vector<double> max;
};

struct TrainTrace {
  std::vector<StepRecord> steps;
  std::vector<LatentRange> ranges;
};

struct PredictorOutput {
  RealMatrix predictions;             ///< K x m, column i from predictor i
  std::vector<double> losses;         ///< L_rho_i of those predictions
};

/// Column-wise concatenation of every predictor's estimate on `z`.
RealMatrix predict_latents(const NashAeModel& model, const RealMatrix& z);

/// Trains each predictor `model.k` Adam steps on its masked copy of `z`.
/// `z` is a plain value here, so nothing flows back into the encoder.
PredictorOutput train_predictors(NashAeModel& model, const RealMatrix& z);

struct AeObjective {
  double recon_loss = 0.0;
  double adversarial_loss = 0.0;
  double combined_loss = 0.0;
  RealMatrix latents;
  RealMatrix predictions;
};

/// Evaluates (1 - lambda) L_R + lambda L_A on `x` with the predictors held
/// fixed and, when `accumulate` is set, adds its gradient to the encoder
/// and decoder parameter gradients. Predictor gradients are never touched.
AeObjective ae_objective(NashAeModel& model, const RealMatrix& x, bool accumulate);

/// Same objective value, computed without caches or gradients.
AeObjective evaluate_ae_objective(const NashAeModel& model, const RealMatrix& x);

/// One iteration of the adversarial loop: encode, train predictors on the
/// detached latents, then one Adam step of the autoencoder on the combined
/// loss with gradients flowing through the frozen predictors.
StepRecord ae_train_step(NashAeModel& model, const RealMatrix& x);

using StepCallback = std::function<void(const StepRecord&)>;

/// Runs `cfg.epochs` passes of minibatch training over `data` (one row per
/// sample). Throws NumericError if a loss becomes non-finite.
TrainTrace fit(NashAeModel& model, const RealMatrix& data, const TrainConfig& cfg,
               const StepCallback& on_step = {});

/// Per-latent min and max of the encoder output over every row of `data`.
LatentRange latent_range(const NashAeModel& model, const RealMatrix& data);

}  // namespace nashae
