#include "freqkan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "freqkan/layers.hpp"
#include "freqkan/model.hpp"
#include "freqkan/rng.hpp"

namespace freqkan {

Tensor finite_difference_grad(const std::function<double(const Tensor&)>& f,
                              const Tensor& x, double eps) {
  Tensor grad(x.shape());
  Tensor probe = x;
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + eps;
    const double hi = f(probe);
    probe.data()[i] = orig - eps;
    const double lo = f(probe);
    probe.data()[i] = orig;
    grad.data()[i] = (hi - lo) / (2.0 * eps);
  }
  return grad;
}

Tensor finite_difference_grad_inplace(Tensor& x, const std::function<double()>& f,
                                      double eps) {
  Tensor grad(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const double orig = x.data()[i];
    x.data()[i] = orig + eps;
    const double hi = f();
    x.data()[i] = orig - eps;
    const double lo = f();
    x.data()[i] = orig;
    grad.data()[i] = (hi - lo) / (2.0 * eps);
  }
  return grad;
}

double bounded_rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

double max_rel_err(const Tensor& analytic, const Tensor& numeric) {
  double worst = 0.0;
  for (std::int64_t i = 0; i < analytic.numel(); ++i)
    worst = std::max(worst, bounded_rel_err(analytic.data()[i], numeric.data()[i]));
  return worst;
}

namespace {

Tensor random_tensor(const std::vector<std::int64_t>& shape, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.vec()) v = rng.uniform(-1.0, 1.0);
  return t;
}

double weighted_sum(const Tensor& y, const Tensor& w) {
  double s = 0.0;
  for (std::int64_t i = 0; i < y.numel(); ++i) s += y.data()[i] * w.data()[i];
  return s;
}

// Collects analytic-vs-finite-difference comparisons for one check.  The
// first analytic element seen absorbs `poison`, which is how the
// corrupt_check hook turns a healthy backward pass into a detectably
// broken one.
struct ErrAccum {
  double poison = 0.0;
  bool first = true;
  double worst = 0.0;

  void compare(const Tensor& analytic, const Tensor& fd) {
    Tensor a = analytic;
    if (first) {
      a.data()[0] += poison;
      first = false;
    }
    worst = std::max(worst, max_rel_err(a, fd));
  }
};

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suite(const GradCheckOptions& opts) {
  std::vector<GradCheckResult> results;
  int index = 0;

  auto run = [&](const std::string& name,
                 const std::function<void(ErrAccum&, Rng&)>& body) {
    ErrAccum acc{index == opts.corrupt_check ? 1.0 : 0.0};
    Rng rng(opts.seed + 17 * static_cast<std::uint64_t>(index) + 1);
    body(acc, rng);
    results.push_back({name, acc.worst, acc.worst <= opts.tol});
    ++index;
  };

  // Layer checks use a random weighted-sum loss so every output element
  // (and therefore every Jacobian entry) contributes; upstream == weights.
  // Both parameter gradients and the returned input gradient are probed.

  auto linear_check = [&](const std::string& name, LinearMap::Axis axis) {
    run(name, [&, axis](ErrAccum& acc, Rng& rng) {
      LinearMap lin("lin", axis, 3, 4);
      lin.init(rng);
      Tensor x = axis == LinearMap::Axis::channel
                     ? random_tensor({2, 5, 3}, rng)
                     : random_tensor({2, 3, 5}, rng);
      Tensor y = lin.forward(x);
      Tensor w = random_tensor(y.shape(), rng);
      lin.visit([](Parameter& p) { p.zero_grad(); });
      Tensor gx = lin.backward(x, w);
      auto loss = [&]() { return weighted_sum(lin.forward(x), w); };
      lin.visit([&](Parameter& p) {
        acc.compare(p.grad,
                    finite_difference_grad_inplace(p.value, loss, opts.eps));
      });
      acc.compare(gx, finite_difference_grad(
                          [&](const Tensor& probe) {
                            return weighted_sum(lin.forward(probe), w);
                          },
                          x, opts.eps));
    });
  };
  linear_check("linear.channel", LinearMap::Axis::channel);
  linear_check("linear.time", LinearMap::Axis::time);

  run("depthwise_conv", [&](ErrAccum& acc, Rng& rng) {
    DepthwiseConv1d conv("conv", 3, 3);
    conv.init(rng);
    Tensor x = random_tensor({2, 6, 3}, rng);
    Tensor w = random_tensor({2, 6, 3}, rng);
    conv.visit([](Parameter& p) { p.zero_grad(); });
    Tensor gx = conv.backward(x, w);
    auto loss = [&]() { return weighted_sum(conv.forward(x), w); };
    conv.visit([&](Parameter& p) {
      acc.compare(p.grad,
                  finite_difference_grad_inplace(p.value, loss, opts.eps));
    });
    acc.compare(gx, finite_difference_grad(
                        [&](const Tensor& probe) {
                          return weighted_sum(conv.forward(probe), w);
                        },
                        x, opts.eps));
  });

  auto kan_check = [&](const std::string& name, int order) {
    run(name, [&, order](ErrAccum& acc, Rng& rng) {
      ChebyKanLayer kan("kan", 3, 2, order);
      kan.init(rng);
      Tensor x = random_tensor({2, 4, 3}, rng);
      Tensor w = random_tensor({2, 4, 2}, rng);
      kan.visit([](Parameter& p) { p.zero_grad(); });
      ChebyKanLayer::Cache cache;
      kan.forward(x, &cache);
      Tensor gx = kan.backward(cache, w);
      auto loss = [&]() { return weighted_sum(kan.forward(x), w); };
      kan.visit([&](Parameter& p) {
        acc.compare(p.grad,
                    finite_difference_grad_inplace(p.value, loss, opts.eps));
      });
      acc.compare(gx, finite_difference_grad(
                          [&](const Tensor& probe) {
                            return weighted_sum(kan.forward(probe), w);
                          },
                          x, opts.eps));
    });
  };
  kan_check("cheby_kan.order2", 2);
  kan_check("cheby_kan.order5", 5);

  run("mlp_block", [&](ErrAccum& acc, Rng& rng) {
    MlpBlock mlp("mlp", 3);
    mlp.init(rng);
    Tensor x = random_tensor({2, 4, 3}, rng);
    Tensor w = random_tensor({2, 4, 3}, rng);
    mlp.visit([](Parameter& p) { p.zero_grad(); });
    MlpBlock::Cache cache;
    mlp.forward(x, &cache);
    Tensor gx = mlp.backward(x, cache, w);
    auto loss = [&]() { return weighted_sum(mlp.forward(x), w); };
    mlp.visit([&](Parameter& p) {
      acc.compare(p.grad,
                  finite_difference_grad_inplace(p.value, loss, opts.eps));
    });
    acc.compare(gx, finite_difference_grad(
                        [&](const Tensor& probe) {
                          return weighted_sum(mlp.forward(probe), w);
                        },
                        x, opts.eps));
  });

  // Whole-model checks: mean squared error against a random target, probing
  // every parameter through forward -> backward on small configurations
  // that together exercise instance norm on/off, k in {2, 3}, multiple
  // blocks, and all three order policies plus both upsamplers.
  auto model_check = [&](const std::string& name, const ModelConfig& cfg) {
    run(name, [&, cfg](ErrAccum& acc, Rng& rng) {
      Model model{cfg};
      Tensor x = random_tensor({2, cfg.T}, rng);
      Tensor target = random_tensor({2, cfg.F}, rng);

      ForwardCache cache;
      Tensor pred = model.forward(x, &cache);
      Tensor upstream(pred.shape());
      const double inv = 2.0 / static_cast<double>(pred.numel());
      for (std::int64_t i = 0; i < pred.numel(); ++i)
        upstream.data()[i] = inv * (pred.data()[i] - target.data()[i]);
      model.zero_grad();
      model.backward(cache, upstream);

      auto loss = [&]() {
        Tensor p = model.forward(x, nullptr);
        double s = 0.0;
        for (std::int64_t i = 0; i < p.numel(); ++i) {
          const double d = p.data()[i] - target.data()[i];
          s += d * d;
        }
        return s / static_cast<double>(p.numel());
      };
      model.visit_params([&](Parameter& p) {
        acc.compare(p.grad,
                    finite_difference_grad_inplace(p.value, loss, opts.eps));
      });
    });
  };

  {
    ModelConfig c;
    c.T = 8;
    c.F = 4;
    c.D = 2;
    c.k = 2;
    c.seed = 11;
    model_check("model.k2_instance_norm", c);
  }
  {
    ModelConfig c;
    c.T = 16;
    c.F = 5;
    c.D = 4;
    c.k = 3;
    c.instance_norm = false;
    c.seed = 12;
    model_check("model.k3_plain", c);
  }
  {
    ModelConfig c;
    c.T = 8;
    c.F = 3;
    c.D = 2;
    c.k = 2;
    c.order_policy = OrderPolicy::mlp;
    c.upsampler = Upsampler::linear_interp;
    c.seed = 13;
    model_check("model.k2_mlp_interp", c);
  }
  {
    ModelConfig c;
    c.T = 16;
    c.F = 4;
    c.D = 2;
    c.k = 3;
    c.blocks = 2;
    c.order_policy = OrderPolicy::fixed;
    c.fixed_order = 3;
    c.seed = 14;
    model_check("model.k3_two_blocks_fixed", c);
  }

  return results;
}

}  // namespace freqkan
