#pragma once

// Vectorized primitives behind every hot loop in the engine.
//
// Two implementations ship: a plain-loop scalar lane (the reference) and an
// AVX2+FMA lane.  The active lane is picked once at startup from CPUID and
// can be overridden programmatically or with FREQKAN_LANE=scalar|avx2.
// Both lanes compute in double precision; they may differ only in summation
// order, so cross-lane results agree to rounding error and the test suite
// holds them to that.

#include <cstddef>
#include <string>

namespace freqkan::kernels {

struct Ops {
  const char* name;

  // y[i] = a[i] (op) b[i]
  void (*add)(const double* a, const double* b, double* y, std::size_t n);
  void (*sub)(const double* a, const double* b, double* y, std::size_t n);
  void (*mul)(const double* a, const double* b, double* y, std::size_t n);

  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scal)(double a, double* x, std::size_t n);
  // y[i] += a[i] * b[i]
  void (*fma_acc)(const double* a, const double* b, double* y, std::size_t n);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*sumsq)(const double* a, std::size_t n);
  // sum of (a[i]-b[i])^2 and sum of |a[i]-b[i]|
  double (*sumsq_diff)(const double* a, const double* b, std::size_t n);
  double (*sumabs_diff)(const double* a, const double* b, std::size_t n);

  // y[r] += sum_c A[r*cols + c] * x[c]   (row-major, accumulating)
  void (*gemv_acc)(const double* A, const double* x, double* y,
                   std::size_t rows, std::size_t cols);

  // Fused Adam step on one parameter block.  m/v are the running moments,
  // c1 = 1/(1-beta1^t), c2 = 1/(1-beta2^t) are the bias corrections.
  void (*adam_step)(double* w, const double* g, double* m, double* v,
                    std::size_t n, double lr, double beta1, double beta2,
                    double eps, double c1, double c2);
};

enum class Lane { auto_detect, scalar, avx2 };

// Active lane (resolved on first use; honors FREQKAN_LANE if set).
const Ops& ops();

// Force a lane.  Returns false (and leaves the lane unchanged) if the
// requested lane is not available on this CPU/build.
bool set_lane(Lane lane);
Lane active_lane();
std::string lane_name();
bool avx2_available();

// Reference/SIMD implementations, exposed for the equivalence tests.
const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when the build or CPU lacks AVX2

}  // namespace freqkan::kernels
