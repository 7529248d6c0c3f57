#pragma once

// Finite-difference gradient verification.  Central differences with
// eps = 1e-6 against analytic backward passes, compared with the bounded
// relative error |a-b| / max(1, |a|, |b|).  The named check suite covers
// every learnable operation and whole-model configurations; it backs both
// the `gradcheck` CLI command and the test gate.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "freqkan/tensor.hpp"

namespace freqkan {

inline constexpr double kGradcheckEps = 1e-6;
inline constexpr double kGradcheckTol = 1e-5;

// Central-difference gradient of a scalar function of one tensor.
Tensor finite_difference_grad(const std::function<double(const Tensor&)>& f,
                              const Tensor& x, double eps = kGradcheckEps);

// Same, but perturbs `x` in place (restoring it) so the probed tensor can
// live inside a layer or model; `f` re-evaluates the loss at the current
// values of `x`.
Tensor finite_difference_grad_inplace(Tensor& x, const std::function<double()>& f,
                                      double eps = kGradcheckEps);

double bounded_rel_err(double a, double b);
double max_rel_err(const Tensor& analytic, const Tensor& numeric);

struct GradCheckResult {
  std::string name;
  double max_err = 0.0;
  bool pass = false;
};

struct GradCheckOptions {
  double eps = kGradcheckEps;
  double tol = kGradcheckTol;
  std::uint64_t seed = 2024;
  // Test hook: poison the analytic gradient of this check index (>= 0) so a
  // broken backward pass is observably caught end to end.
  int corrupt_check = -1;
};

std::vector<GradCheckResult> run_gradcheck_suite(const GradCheckOptions& opts = {});

}  // namespace freqkan
