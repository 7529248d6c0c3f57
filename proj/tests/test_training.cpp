#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "freqkan/checkpoint.hpp"
#include "freqkan/data.hpp"
#include "freqkan/errors.hpp"
#include "freqkan/kernels/kernels.hpp"
#include "freqkan/model.hpp"
#include "freqkan/rng.hpp"
#include "freqkan/training.hpp"

using namespace freqkan;

namespace {

RawDataset sine_dataset(std::int64_t rows, double noise_std, std::uint64_t seed) {
  RawDataset raw;
  raw.rows = rows;
  raw.cols = 1;
  raw.column_names = {"y"};
  Rng rng(seed);
  for (std::int64_t t = 0; t < rows; ++t) {
    const double x = static_cast<double>(t);
    double v = std::sin(2.0 * M_PI * x / 16.0);
    if (noise_std > 0.0) v += noise_std * fixtures::gaussian(rng);
    raw.values.push_back(v);
  }
  return raw;
}

ModelConfig toy_model_config(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.T = 16;
  cfg.F = 8;
  cfg.D = 8;
  cfg.k = 2;
  cfg.seed = seed;
  return cfg;
}

std::vector<double> all_values(Model& model) {
  std::vector<double> out;
  model.visit_params([&](Parameter& p) {
    for (std::int64_t i = 0; i < p.numel(); ++i) out.push_back(p.value(i));
  });
  return out;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lr = 0.0;  // explicitly legal: freeze-everything runs
  CHECK_NOTHROW(cfg.validate());

  auto reject = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  reject([](TrainConfig& c) { c.lr = -1e-3; });
  reject([](TrainConfig& c) { c.batch_size = 0; });
  reject([](TrainConfig& c) { c.max_epochs = 0; });
  reject([](TrainConfig& c) { c.patience = 0; });
  reject([](TrainConfig& c) { c.patience = c.max_epochs + 1; });
  reject([](TrainConfig& c) { c.beta1 = 1.0; });
  reject([](TrainConfig& c) { c.beta2 = -0.1; });
  reject([](TrainConfig& c) { c.eps = 0.0; });
  reject([](TrainConfig& c) { c.clip_norm = -1.0; });
}

TEST_CASE("mse and mae match their closed forms") {
  Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
  CHECK(mse(a, a) == 0.0);
  CHECK(mae(a, a) == 0.0);

  Tensor p1 = Tensor::from({2}, {1.0, 0.0});
  Tensor t1 = Tensor::from({2}, {0.0, 1.0});
  CHECK(mse(p1, t1) == doctest::Approx(1.0));
  CHECK(mae(p1, t1) == doctest::Approx(1.0));

  Tensor p2 = Tensor::from({4}, {3.0, 0.0, 0.0, 0.0});
  Tensor t2 = Tensor::from({4}, {0.0, 0.0, 0.0, 0.0});
  CHECK(mse(p2, t2) == doctest::Approx(2.25));
  CHECK(mae(p2, t2) == doctest::Approx(0.75));

  // Duplicating a sample leaves the mean unchanged.
  Tensor p4 = Tensor::from({4, 1}, {3.0, 3.0, 3.0, 3.0});
  Tensor t4 = Tensor::from({4, 1}, {1.0, 1.0, 1.0, 1.0});
  Tensor ps = Tensor::from({1, 1}, {3.0});
  Tensor ts = Tensor::from({1, 1}, {1.0});
  CHECK(mse(p4, t4) == mse(ps, ts));
  CHECK(mae(p4, t4) == mae(ps, ts));

  CHECK_THROWS_AS(mse(p1, p2), ShapeError);
  CHECK_THROWS_AS(mae(p1, p2), ShapeError);
}

TEST_CASE("adam leaves parameters alone on zero gradients") {
  Model model{toy_model_config(5)};
  const std::vector<double> before = all_values(model);
  model.zero_grad();
  TrainConfig cfg;
  adam_step(model, cfg, 1);
  CHECK(all_values(model) == before);
}

TEST_CASE("the first adam step moves by roughly lr in the gradient sign") {
  Model model{toy_model_config(6)};
  const std::vector<double> before = all_values(model);
  model.visit_params([](Parameter& p) {
    for (std::int64_t i = 0; i < p.numel(); ++i) {
      p.grad(i) = (i % 2 == 0) ? 41.5 : -0.003;
    }
  });
  TrainConfig cfg;
  cfg.lr = 0.01;
  adam_step(model, cfg, 1);
  const std::vector<double> after = all_values(model);
  for (std::size_t i = 0; i < after.size(); ++i) {
    const double step = after[i] - before[i];
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    CHECK(std::abs(step + sign * cfg.lr) <= cfg.lr * 1e-4);
  }
}

TEST_CASE("adam drives a quadratic to its optimum") {
  // min (w - 3)^2 via the fused kernel, 1-based bias corrections.
  double w = 0.0, g = 0.0, m = 0.0, v = 0.0;
  const TrainConfig cfg;  // lr 1e-3
  const auto& krn = kernels::ops();
  for (int t = 1; t <= 2000; ++t) {
    g = 2.0 * (w - 3.0);
    const double c1 = 1.0 / (1.0 - std::pow(cfg.beta1, t));
    const double c2 = 1.0 / (1.0 - std::pow(cfg.beta2, t));
    krn.adam_step(&w, &g, &m, &v, 1, 0.01, cfg.beta1, cfg.beta2, cfg.eps, c1, c2);
  }
  CHECK(std::abs(w - 3.0) <= 1e-6);
}

TEST_CASE("gradient clipping rescales only oversized global norms") {
  Model model{toy_model_config(7)};
  const std::int64_t n = model.count_params();
  model.visit_params([](Parameter& p) { p.grad.fill(2.0); });
  const double norm = global_grad_norm(model);
  CHECK(norm == doctest::Approx(2.0 * std::sqrt(static_cast<double>(n))));

  clip_gradients(model, norm + 1.0);  // already within bounds: untouched
  model.visit_params([](Parameter& p) {
    for (std::int64_t i = 0; i < p.numel(); ++i) CHECK(p.grad(i) == 2.0);
  });

  clip_gradients(model, 0.0);  // disabled: untouched
  model.visit_params([](Parameter& p) {
    for (std::int64_t i = 0; i < p.numel(); ++i) CHECK(p.grad(i) == 2.0);
  });

  clip_gradients(model, 5.0);
  CHECK(global_grad_norm(model) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("evaluate matches a single-batch mse over all windows") {
  RawDataset raw = sine_dataset(240, 0.05, 9);
  DatasetSplit split = split_and_standardize(raw, DatasetFamily::ett, 16, 8);
  Model model{toy_model_config(10)};

  WindowStream stream(split, SplitPart::test, 16, 8);
  WindowBatch all = stream.batch(0, stream.sample_count());
  Tensor pred = model.forward(all.inputs, nullptr);
  const double want_mse = mse(pred, all.targets);
  const double want_mae = mae(pred, all.targets);

  EvalMetrics one = evaluate(model, split, SplitPart::test, 1 << 20);
  CHECK(one.mse == doctest::Approx(want_mse).epsilon(1e-12));
  CHECK(one.mae == doctest::Approx(want_mae).epsilon(1e-12));

  EvalMetrics batched = evaluate(model, split, SplitPart::test, 7);
  CHECK(batched.mse == doctest::Approx(want_mse).epsilon(1e-12));
  CHECK(batched.mae == doctest::Approx(want_mae).epsilon(1e-12));
}

TEST_CASE("fit learns a noiseless sinusoid nearly monotonically") {
  RawDataset raw = sine_dataset(260, 0.0, 0);
  DatasetSplit split = split_and_standardize(raw, DatasetFamily::ett, 16, 8);
  Model model{toy_model_config(11)};

  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.patience = 5;
  cfg.seed = 11;
  FitReport report = fit(model, split, cfg);

  REQUIRE(report.train_loss.size() == 5);
  int nonmono = 0;
  for (std::size_t e = 1; e < report.train_loss.size(); ++e) {
    if (report.train_loss[e] >= report.train_loss[e - 1]) ++nonmono;
  }
  CHECK(nonmono <= 1);
  CHECK(report.train_loss.back() < report.train_loss.front());
  CHECK(report.param_count == model.count_params());
  CHECK(report.wall_seconds > 0.0);
}

TEST_CASE("early stopping halts after patience epochs without improvement") {
  RawDataset raw = sine_dataset(240, 0.05, 13);
  DatasetSplit split = split_and_standardize(raw, DatasetFamily::ett, 16, 8);
  Model model{toy_model_config(12)};

  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.patience = 1;
  cfg.max_epochs = 50;
  FitReport report = fit(model, split, cfg);
  CHECK(report.train_loss.size() == 2);
  CHECK(report.best_epoch == 0);
  CHECK(report.val_mse[0] == report.val_mse[1]);  // frozen model
}

TEST_CASE("with lr zero parameters are bit-identical after fit") {
  RawDataset raw = sine_dataset(240, 0.05, 14);
  DatasetSplit split = split_and_standardize(raw, DatasetFamily::ett, 16, 8);
  Model model{toy_model_config(13)};
  const std::vector<double> before = all_values(model);

  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.patience = 2;
  cfg.max_epochs = 4;
  fit(model, split, cfg);
  CHECK(all_values(model) == before);
}

TEST_CASE("fit is deterministic for a fixed seed") {
  RawDataset raw = sine_dataset(240, 0.1, 15);
  DatasetSplit split = split_and_standardize(raw, DatasetFamily::ett, 16, 8);

  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.patience = 3;
  cfg.seed = 99;

  Model m1{toy_model_config(20)};
  Model m2{toy_model_config(20)};
  FitReport r1 = fit(m1, split, cfg);
  FitReport r2 = fit(m2, split, cfg);
  CHECK(r1.train_loss == r2.train_loss);
  CHECK(r1.val_mse == r2.val_mse);
  CHECK(r1.test_mse == r2.test_mse);
  CHECK(r1.test_mae == r2.test_mae);
  CHECK(r1.best_epoch == r2.best_epoch);
  CHECK(all_values(m1) == all_values(m2));
}

TEST_CASE("reported metrics come from the best epoch's checkpoint") {
  RawDataset raw = sine_dataset(300, 0.1, 16);
  DatasetSplit split = split_and_standardize(raw, DatasetFamily::ett, 16, 8);
  Model model{toy_model_config(21)};

  TrainConfig cfg;
  cfg.max_epochs = 6;
  cfg.patience = 6;
  FitReport report = fit(model, split, cfg);

  const auto best_it =
      std::min_element(report.val_mse.begin(), report.val_mse.end());
  CHECK(report.best_epoch ==
        static_cast<std::int64_t>(best_it - report.val_mse.begin()));
  CHECK(report.best_val_mse == *best_it);

  // The model now holds the full-precision best parameters; rounding them
  // through the checkpoint image reproduces the reported test metrics.
  restore_params(model, snapshot_params(model));
  EvalMetrics again = evaluate(model, split, SplitPart::test, cfg.batch_size);
  CHECK(again.mse == report.test_mse);
  CHECK(again.mae == report.test_mae);
}

TEST_CASE("diverging runs abort with a numeric error") {
  RawDataset raw = sine_dataset(240, 0.05, 17);
  DatasetSplit split = split_and_standardize(raw, DatasetFamily::ett, 16, 8);
  Model model{toy_model_config(22)};

  TrainConfig cfg;
  cfg.lr = 1e200;
  cfg.clip_norm = 0.0;
  cfg.max_epochs = 3;
  cfg.patience = 3;
  CHECK_THROWS_AS(fit(model, split, cfg), NumericError);
}

TEST_CASE("fit report serializes every field") {
  FitReport r;
  r.train_loss = {1.0, 0.5};
  r.val_mse = {0.9, 0.6};
  r.best_epoch = 1;
  r.best_val_mse = 0.6;
  r.test_mse = 0.7;
  r.test_mae = 0.55;
  r.wall_seconds = 12.5;
  r.param_count = 14321;
  nlohmann::json j = fit_report_to_json(r);
  CHECK(j.at("train_loss").size() == 2);
  CHECK(j.at("epochs_run") == 2);
  CHECK(j.at("best_epoch") == 1);
  CHECK(j.at("test_mse") == 0.7);
  CHECK(j.at("test_mae") == 0.55);
  CHECK(j.at("wall_seconds") == 12.5);
  CHECK(j.at("param_count") == 14321);
}

}  // TEST_SUITE
