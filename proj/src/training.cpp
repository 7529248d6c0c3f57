#include "freqkan/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "freqkan/checkpoint.hpp"
#include "freqkan/errors.hpp"
#include "freqkan/kernels/kernels.hpp"
#include "freqkan/rng.hpp"

namespace freqkan {

void TrainConfig::validate() const {
  if (lr < 0.0 || !std::isfinite(lr)) {
    throw ConfigError("train: lr must be finite and >= 0, got " + std::to_string(lr));
  }
  if (batch_size < 1) {
    throw ConfigError("train: batch_size must be >= 1, got " +
                      std::to_string(batch_size));
  }
  if (max_epochs < 1) {
    throw ConfigError("train: max_epochs must be >= 1, got " +
                      std::to_string(max_epochs));
  }
  if (patience < 1 || patience > max_epochs) {
    throw ConfigError("train: patience must be in [1, max_epochs]; got patience=" +
                      std::to_string(patience) + ", max_epochs=" +
                      std::to_string(max_epochs));
  }
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ConfigError("train: adam betas must lie in [0, 1)");
  }
  if (eps <= 0.0) {
    throw ConfigError("train: adam eps must be > 0, got " + std::to_string(eps));
  }
  if (clip_norm < 0.0) {
    throw ConfigError("train: clip_norm must be >= 0 (0 disables), got " +
                      std::to_string(clip_norm));
  }
}

namespace {

void check_same_shape(const Tensor& pred, const Tensor& target,
                      const char* op) {
  if (!pred.same_shape(target)) {
    throw ShapeError(std::string(op) + ": prediction " + pred.shape_str() +
                     " vs target " + target.shape_str());
  }
}

}  // namespace

double mse(const Tensor& pred, const Tensor& target) {
  check_same_shape(pred, target, "mse");
  if (pred.numel() == 0) return 0.0;
  return kernels::ops().sumsq_diff(pred.data(), target.data(),
                                   static_cast<std::size_t>(pred.numel())) /
         static_cast<double>(pred.numel());
}

double mae(const Tensor& pred, const Tensor& target) {
  check_same_shape(pred, target, "mae");
  if (pred.numel() == 0) return 0.0;
  return kernels::ops().sumabs_diff(pred.data(), target.data(),
                                    static_cast<std::size_t>(pred.numel())) /
         static_cast<double>(pred.numel());
}

void adam_step(Model& model, const TrainConfig& cfg, std::int64_t step_index) {
  if (step_index < 1) {
    throw ConfigError("adam step index is 1-based, got " +
                      std::to_string(step_index));
  }
  const double t = static_cast<double>(step_index);
  const double c1 = 1.0 / (1.0 - std::pow(cfg.beta1, t));
  const double c2 = 1.0 / (1.0 - std::pow(cfg.beta2, t));
  const auto& krn = kernels::ops();
  model.visit_params([&](Parameter& p) {
    krn.adam_step(p.value.data(), p.grad.data(), p.m.data(), p.v.data(),
                  static_cast<std::size_t>(p.numel()), cfg.lr, cfg.beta1,
                  cfg.beta2, cfg.eps, c1, c2);
  });
}

double global_grad_norm(Model& model) {
  const auto& krn = kernels::ops();
  double sq = 0.0;
  model.visit_params([&](Parameter& p) {
    sq += krn.sumsq(p.grad.data(), static_cast<std::size_t>(p.numel()));
  });
  return std::sqrt(sq);
}

void clip_gradients(Model& model, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = global_grad_norm(model);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  const auto& krn = kernels::ops();
  model.visit_params([&](Parameter& p) {
    krn.scal(scale, p.grad.data(), static_cast<std::size_t>(p.numel()));
  });
}

nlohmann::json fit_report_to_json(const FitReport& report) {
  return nlohmann::json{{"train_loss", report.train_loss},
                        {"val_mse", report.val_mse},
                        {"epochs_run", report.train_loss.size()},
                        {"best_epoch", report.best_epoch},
                        {"best_val_mse", report.best_val_mse},
                        {"test_mse", report.test_mse},
                        {"test_mae", report.test_mae},
                        {"wall_seconds", report.wall_seconds},
                        {"param_count", report.param_count}};
}

EvalMetrics evaluate(Model& model, const DatasetSplit& split, SplitPart part,
                     std::int64_t batch_size) {
  if (batch_size < 1) {
    throw ConfigError("evaluate: batch_size must be >= 1");
  }
  const ModelConfig& mc = model.config();
  WindowStream stream(split, part, mc.T, mc.F);
  const auto& krn = kernels::ops();
  double sq = 0.0, ab = 0.0;
  std::int64_t count = 0;
  for (std::int64_t begin = 0; begin < stream.sample_count();
       begin += batch_size) {
    WindowBatch wb = stream.batch(begin, batch_size);
    Tensor pred = model.forward(wb.inputs, nullptr);
    const auto n = static_cast<std::size_t>(pred.numel());
    sq += krn.sumsq_diff(pred.data(), wb.targets.data(), n);
    ab += krn.sumabs_diff(pred.data(), wb.targets.data(), n);
    count += pred.numel();
  }
  return {sq / static_cast<double>(count), ab / static_cast<double>(count)};
}

FitReport fit(Model& model, const DatasetSplit& split, const TrainConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const ModelConfig& mc = model.config();

  WindowStream train_stream(split, SplitPart::train, mc.T, mc.F);
  Rng shuffle_rng(cfg.seed);
  const auto& krn = kernels::ops();

  FitReport report;
  report.param_count = model.count_params();

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<float> best_image;     // checkpoint-precision snapshot
  std::vector<double> best_values;   // full-precision snapshot
  std::int64_t since_improvement = 0;
  std::int64_t step = 0;

  for (std::int64_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    train_stream.shuffle(shuffle_rng);
    double sq_sum = 0.0;
    std::int64_t elems = 0;
    for (std::int64_t begin = 0; begin < train_stream.sample_count();
         begin += cfg.batch_size) {
      WindowBatch wb = train_stream.batch(begin, cfg.batch_size);
      ForwardCache cache;
      Tensor pred = model.forward(wb.inputs, &cache);

      const auto n = static_cast<std::size_t>(pred.numel());
      const double batch_sq = krn.sumsq_diff(pred.data(), wb.targets.data(), n);
      if (!std::isfinite(batch_sq)) {
        throw NumericError("training loss became non-finite at epoch " +
                           std::to_string(epoch) + ", batch starting at sample " +
                           std::to_string(begin));
      }
      sq_sum += batch_sq;
      elems += pred.numel();

      // d mean((p-t)^2) / dp = 2 (p - t) / numel
      Tensor upstream(pred.shape());
      const double inv = 2.0 / static_cast<double>(pred.numel());
      for (std::int64_t i = 0; i < pred.numel(); ++i) {
        upstream(i) = inv * (pred(i) - wb.targets(i));
      }

      model.zero_grad();
      model.backward(cache, upstream);
      clip_gradients(model, cfg.clip_norm);
      adam_step(model, cfg, ++step);
    }
    report.train_loss.push_back(sq_sum / static_cast<double>(elems));

    const double val = evaluate(model, split, SplitPart::val, cfg.batch_size).mse;
    report.val_mse.push_back(val);

    if (val < best_val) {
      best_val = val;
      report.best_epoch = epoch;
      best_image = snapshot_params(model);
      best_values.clear();
      model.visit_params([&](Parameter& p) {
        for (std::int64_t i = 0; i < p.numel(); ++i) {
          best_values.push_back(p.value(i));
        }
      });
      since_improvement = 0;
    } else if (++since_improvement >= cfg.patience) {
      break;
    }
  }

  report.best_val_mse = best_val;

  // Test metrics under the f32 checkpoint image, so a saved checkpoint
  // reproduces them exactly; then hand back the full-precision winner.
  restore_params(model, best_image);
  const EvalMetrics test = evaluate(model, split, SplitPart::test, cfg.batch_size);
  report.test_mse = test.mse;
  report.test_mae = test.mae;

  std::size_t at = 0;
  model.visit_params([&](Parameter& p) {
    for (std::int64_t i = 0; i < p.numel(); ++i) p.value(i) = best_values[at++];
  });

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace freqkan
