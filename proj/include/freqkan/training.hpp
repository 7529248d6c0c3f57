#pragma once

// Loss, Adam with bias correction, global-norm gradient clipping, and the
// epoch loop: shuffled train batches, per-epoch validation, early stopping
// on validation MSE, and test metrics from the best epoch's checkpoint.

#include <cstdint>
#include <vector>

#include "freqkan/data.hpp"
#include "freqkan/model.hpp"
#include "freqkan/tensor.hpp"
#include "json.hpp"

namespace freqkan {

struct TrainConfig {
  double lr = 1e-3;
  std::int64_t batch_size = 32;
  std::int64_t max_epochs = 50;
  std::int64_t patience = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // global-norm threshold; 0 disables
  std::uint64_t seed = 2024;

  void validate() const;  // throws ConfigError
};

// Mean over all elements of squared / absolute error; shapes must match.
double mse(const Tensor& pred, const Tensor& target);
double mae(const Tensor& pred, const Tensor& target);

// One optimizer step over every parameter (step_index is 1-based).
void adam_step(Model& model, const TrainConfig& cfg, std::int64_t step_index);

double global_grad_norm(Model& model);
// Scales every gradient so the global norm is at most max_norm; no-op when
// max_norm <= 0 or the norm is already within bounds.
void clip_gradients(Model& model, double max_norm);

struct FitReport {
  std::vector<double> train_loss;  // per epoch, element-weighted mean
  std::vector<double> val_mse;     // per epoch
  std::int64_t best_epoch = -1;    // 0-based index into the vectors above
  double best_val_mse = 0.0;
  double test_mse = 0.0;           // from the best epoch's f32 checkpoint
  double test_mae = 0.0;
  double wall_seconds = 0.0;
  std::int64_t param_count = 0;
};

nlohmann::json fit_report_to_json(const FitReport& report);

struct EvalMetrics {
  double mse = 0.0;
  double mae = 0.0;
};

// Every window of the part, ascending, in batches of `batch_size`.
EvalMetrics evaluate(Model& model, const DatasetSplit& split, SplitPart part,
                     std::int64_t batch_size);

// Trains in place.  On return the model holds the best-validation
// parameters (full precision); the reported test metrics are computed
// under their f32 checkpoint image, so saving and re-evaluating the
// checkpoint reproduces them exactly.
FitReport fit(Model& model, const DatasetSplit& split, const TrainConfig& cfg);

}  // namespace freqkan
