#include "freqkan/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "freqkan/errors.hpp"

namespace freqkan {

namespace {

constexpr double kPi = std::numbers::pi;

struct Plan {
  std::int64_t n = 0;
  std::vector<int> factors;       // mixed-radix schedule (empty for n == 1)
  std::vector<cdouble> twiddles;  // exp(-2*pi*i*j/n), j in [0, n)

  // Bluestein state (set when n has a prime factor > 5).
  bool bluestein = false;
  std::int64_t m = 0;                 // power-of-two convolution length
  std::vector<cdouble> chirp;         // w[j] = exp(-i*pi*(j^2 mod 2n)/n)
  std::vector<cdouble> chirp_fft;     // forward transform of the b-sequence
  std::shared_ptr<const Plan> mplan;  // plan for the length-m transforms
};

void fft_rec(const Plan& plan, std::size_t level, std::int64_t n,
             const cdouble* in, std::int64_t istride, cdouble* out) {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const int r = plan.factors[level];
  const std::int64_t m = n / r;
  for (int p = 0; p < r; ++p)
    fft_rec(plan, level + 1, m, in + p * istride, istride * r, out + p * m);

  // Combine the r interleaved sub-transforms.  At sub-size n the twiddle
  // W_n^j equals the full-size table entry at stride plan.n / n.
  const std::int64_t tw = plan.n / n;
  if (r == 2) {
    for (std::int64_t k = 0; k < m; ++k) {
      const cdouble t0 = out[k];
      const cdouble t1 = out[m + k] * plan.twiddles[static_cast<std::size_t>(k * tw)];
      out[k] = t0 + t1;
      out[m + k] = t0 - t1;
    }
    return;
  }
  const std::int64_t rstep = plan.n / r;  // W_r^1 in the full table
  cdouble t[5];
  for (std::int64_t k = 0; k < m; ++k) {
    for (int p = 0; p < r; ++p)
      t[p] = out[p * m + k] *
             plan.twiddles[static_cast<std::size_t>(p * k * tw)];
    for (int q = 0; q < r; ++q) {
      cdouble acc = t[0];
      for (int p = 1; p < r; ++p)
        acc += t[p] * plan.twiddles[static_cast<std::size_t>(
                          ((p * q) % r) * rstep)];
      out[q * m + k] = acc;
    }
  }
}

void forward_with_plan(const Plan& plan, const cdouble* in, cdouble* out);

std::shared_ptr<const Plan> get_plan(std::int64_t n);

std::shared_ptr<const Plan> make_plan(std::int64_t n) {
  auto plan = std::make_shared<Plan>();
  plan->n = n;
  plan->twiddles.resize(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    const double ang = -2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
    plan->twiddles[static_cast<std::size_t>(j)] = {std::cos(ang), std::sin(ang)};
  }

  std::int64_t rest = n;
  for (int r : {2, 3, 5}) {
    while (rest % r == 0) {
      plan->factors.push_back(r);
      rest /= r;
    }
  }
  if (rest == 1) return plan;

  // Leftover prime factor > 5: chirp-z.  X[k] = w[k] * (a (*) b)[k] with
  // a[j] = x[j]*w[j], b[j] = conj(w[j]), w[j] = exp(-i*pi*j^2/n); the linear
  // convolution is embedded in a cyclic one of power-of-two length m.
  plan->bluestein = true;
  plan->factors.clear();
  std::int64_t m = 1;
  while (m < 2 * n - 1) m *= 2;
  plan->m = m;
  plan->mplan = get_plan(m);

  plan->chirp.resize(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    // j^2 mod 2n keeps the angle argument small and exact in int64.
    const std::int64_t e = (j * j) % (2 * n);
    const double ang = -kPi * static_cast<double>(e) / static_cast<double>(n);
    plan->chirp[static_cast<std::size_t>(j)] = {std::cos(ang), std::sin(ang)};
  }

  std::vector<cdouble> b(static_cast<std::size_t>(m), cdouble{0.0, 0.0});
  b[0] = std::conj(plan->chirp[0]);
  for (std::int64_t j = 1; j < n; ++j) {
    const cdouble bj = std::conj(plan->chirp[static_cast<std::size_t>(j)]);
    b[static_cast<std::size_t>(j)] = bj;
    b[static_cast<std::size_t>(m - j)] = bj;
  }
  plan->chirp_fft.resize(static_cast<std::size_t>(m));
  forward_with_plan(*plan->mplan, b.data(), plan->chirp_fft.data());
  return plan;
}

std::shared_ptr<const Plan> get_plan(std::int64_t n) {
  // Recursive: building a Bluestein plan looks up the power-of-two sub-plan.
  static std::recursive_mutex mu;
  static std::map<std::int64_t, std::shared_ptr<const Plan>> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto plan = make_plan(n);
  cache.emplace(n, plan);
  return plan;
}

void bluestein_exec(const Plan& plan, const cdouble* in, cdouble* out) {
  const std::int64_t n = plan.n;
  const std::int64_t m = plan.m;
  std::vector<cdouble> a(static_cast<std::size_t>(m), cdouble{0.0, 0.0});
  for (std::int64_t j = 0; j < n; ++j)
    a[static_cast<std::size_t>(j)] =
        in[j] * plan.chirp[static_cast<std::size_t>(j)];

  std::vector<cdouble> fa(static_cast<std::size_t>(m));
  forward_with_plan(*plan.mplan, a.data(), fa.data());
  for (std::int64_t j = 0; j < m; ++j)
    fa[static_cast<std::size_t>(j)] *=
        plan.chirp_fft[static_cast<std::size_t>(j)];

  // inverse transform of fa via conj(forward(conj(.)))/m
  for (auto& z : fa) z = std::conj(z);
  forward_with_plan(*plan.mplan, fa.data(), a.data());
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::int64_t k = 0; k < n; ++k) {
    const cdouble c = std::conj(a[static_cast<std::size_t>(k)]) * inv_m;
    out[k] = plan.chirp[static_cast<std::size_t>(k)] * c;
  }
}

void forward_with_plan(const Plan& plan, const cdouble* in, cdouble* out) {
  if (plan.n == 1) {
    out[0] = in[0];
    return;
  }
  if (plan.bluestein)
    bluestein_exec(plan, in, out);
  else
    fft_rec(plan, 0, plan.n, in, 1, out);
}

}  // namespace

namespace fft {

void forward(const cdouble* in, cdouble* out, std::int64_t n) {
  if (n <= 0) throw ShapeError("fft: length must be positive, got " + std::to_string(n));
  forward_with_plan(*get_plan(n), in, out);
}

void inverse(const cdouble* in, cdouble* out, std::int64_t n) {
  if (n <= 0) throw ShapeError("ifft: length must be positive, got " + std::to_string(n));
  std::vector<cdouble> tmp(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) tmp[static_cast<std::size_t>(j)] = std::conj(in[j]);
  forward_with_plan(*get_plan(n), tmp.data(), out);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::int64_t j = 0; j < n; ++j) out[j] = std::conj(out[j]) * inv_n;
}

}  // namespace fft

Spectrum rfft(const double* x, std::int64_t n) {
  if (n <= 0)
    throw ShapeError("rfft: length must be positive, got " + std::to_string(n));
  Spectrum s;
  s.source_length = n;
  const std::int64_t bins = n / 2 + 1;
  s.coeffs.resize(static_cast<std::size_t>(bins));

  if (n == 1) {
    s.coeffs[0] = {x[0], 0.0};
    return s;
  }

  if (n % 2 == 0) {
    // Pack pairs into one half-length complex transform and unpack the
    // even/odd sub-spectra: X[k] = E[k] + W^k O[k].
    const std::int64_t h = n / 2;
    std::vector<cdouble> z(static_cast<std::size_t>(h));
    for (std::int64_t j = 0; j < h; ++j)
      z[static_cast<std::size_t>(j)] = {x[2 * j], x[2 * j + 1]};
    std::vector<cdouble> Z(static_cast<std::size_t>(h));
    fft::forward(z.data(), Z.data(), h);

    const auto plan = get_plan(n);
    for (std::int64_t k = 0; k <= h; ++k) {
      const cdouble Zk = Z[static_cast<std::size_t>(k % h)];
      const cdouble Zr = std::conj(Z[static_cast<std::size_t>((h - k) % h)]);
      const cdouble E = 0.5 * (Zk + Zr);
      const cdouble O = cdouble{0.0, -0.5} * (Zk - Zr);
      s.coeffs[static_cast<std::size_t>(k)] =
          E + plan->twiddles[static_cast<std::size_t>(k)] * O;
    }
    // Bin 0 and Nyquist are exactly real for real input.
    s.coeffs[0] = {s.coeffs[0].real(), 0.0};
    s.coeffs[static_cast<std::size_t>(h)] = {
        s.coeffs[static_cast<std::size_t>(h)].real(), 0.0};
    return s;
  }

  std::vector<cdouble> buf(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) buf[static_cast<std::size_t>(j)] = {x[j], 0.0};
  std::vector<cdouble> full(static_cast<std::size_t>(n));
  fft::forward(buf.data(), full.data(), n);
  for (std::int64_t k = 0; k < bins; ++k) s.coeffs[static_cast<std::size_t>(k)] = full[static_cast<std::size_t>(k)];
  s.coeffs[0] = {s.coeffs[0].real(), 0.0};
  return s;
}

Spectrum rfft(const std::vector<double>& x) {
  return rfft(x.data(), static_cast<std::int64_t>(x.size()));
}

void irfft_into(const Spectrum& s, std::int64_t out_length, double* out) {
  if (out_length <= 0)
    throw ShapeError("irfft: output length must be positive, got " +
                     std::to_string(out_length));
  const std::int64_t bins = out_length / 2 + 1;
  if (s.bins() != bins)
    throw ShapeError("irfft: spectrum has " + std::to_string(s.bins()) +
                     " bins but output length " + std::to_string(out_length) +
                     " needs " + std::to_string(bins));

  if (out_length == 1) {
    out[0] = s.coeffs[0].real();
    return;
  }

  if (out_length % 2 == 0) {
    // Inverse of the rfft pack trick: rebuild the half-length complex
    // spectrum Z[k] = E[k] + i O[k], transform, and interleave.
    const std::int64_t h = out_length / 2;
    const auto plan = get_plan(out_length);
    std::vector<cdouble> Z(static_cast<std::size_t>(h));
    for (std::int64_t k = 0; k < h; ++k) {
      const cdouble Xk = s.coeffs[static_cast<std::size_t>(k)];
      const cdouble Xc = std::conj(s.coeffs[static_cast<std::size_t>(h - k)]);
      const cdouble E = 0.5 * (Xk + Xc);
      const cdouble WO = 0.5 * (Xk - Xc);
      const cdouble O =
          std::conj(plan->twiddles[static_cast<std::size_t>(k)]) * WO;
      Z[static_cast<std::size_t>(k)] = E + cdouble{0.0, 1.0} * O;
    }
    std::vector<cdouble> z(static_cast<std::size_t>(h));
    fft::inverse(Z.data(), z.data(), h);
    for (std::int64_t j = 0; j < h; ++j) {
      out[2 * j] = z[static_cast<std::size_t>(j)].real();
      out[2 * j + 1] = z[static_cast<std::size_t>(j)].imag();
    }
    return;
  }

  std::vector<cdouble> full(static_cast<std::size_t>(out_length));
  for (std::int64_t k = 0; k < bins; ++k) full[static_cast<std::size_t>(k)] = s.coeffs[static_cast<std::size_t>(k)];
  for (std::int64_t k = 1; k < bins; ++k)
    full[static_cast<std::size_t>(out_length - k)] =
        std::conj(s.coeffs[static_cast<std::size_t>(k)]);
  std::vector<cdouble> x(static_cast<std::size_t>(out_length));
  fft::inverse(full.data(), x.data(), out_length);
  for (std::int64_t j = 0; j < out_length; ++j) out[j] = x[static_cast<std::size_t>(j)].real();
}

std::vector<double> irfft(const Spectrum& s, std::int64_t out_length) {
  std::vector<double> out(static_cast<std::size_t>(out_length));
  irfft_into(s, out_length, out.data());
  return out;
}

}  // namespace freqkan
