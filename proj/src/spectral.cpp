#include "freqkan/spectral.hpp"

#include <cmath>
#include <string>

#include "freqkan/errors.hpp"

namespace freqkan {

std::vector<double> moving_average_downsample(const std::vector<double>& x,
                                              std::int64_t d) {
  if (d < 2)
    throw ConfigError("moving_average_downsample: factor must be >= 2, got " +
                      std::to_string(d));
  const std::int64_t L = static_cast<std::int64_t>(x.size());
  if (L < 1)
    throw ShapeError("moving_average_downsample: input must be non-empty");
  const std::int64_t out_len = (L + d - 1) / d;
  std::vector<double> out(static_cast<std::size_t>(out_len));
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::int64_t o = 0; o < out_len; ++o) {
    double acc = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      const std::int64_t idx = o * d + j;
      acc += x[static_cast<std::size_t>(idx < L ? idx : L - 1)];
    }
    out[static_cast<std::size_t>(o)] = acc * inv_d;
  }
  return out;
}

std::vector<double> frequency_upsample(const std::vector<double>& x,
                                       std::int64_t L_out) {
  const std::int64_t L_in = static_cast<std::int64_t>(x.size());
  if (L_in < 1) throw ShapeError("frequency_upsample: input must be non-empty");
  if (L_out < L_in)
    throw ShapeError("frequency_upsample: output length " +
                     std::to_string(L_out) + " is shorter than input length " +
                     std::to_string(L_in));

  Spectrum s = rfft(x);
  const double r = static_cast<double>(L_out) / static_cast<double>(L_in);
  for (auto& c : s.coeffs) c *= r;
  if (L_in % 2 == 0 && L_out > L_in) {
    // The input Nyquist bin becomes an interior bin of the longer spectrum,
    // where synthesis counts it twice (itself plus its conjugate mirror).
    s.coeffs[static_cast<std::size_t>(L_in / 2)] *= 0.5;
  }
  s.coeffs.resize(static_cast<std::size_t>(L_out / 2 + 1), cdouble{0.0, 0.0});
  s.source_length = L_out;
  return irfft(s, L_out);
}

std::vector<double> frequency_upsample_adjoint(const std::vector<double>& v,
                                               std::int64_t L_in) {
  const std::int64_t L_out = static_cast<std::int64_t>(v.size());
  if (L_in < 1)
    throw ShapeError("frequency_upsample_adjoint: L_in must be >= 1, got " +
                     std::to_string(L_in));
  if (L_out < L_in)
    throw ShapeError("frequency_upsample_adjoint: cotangent length " +
                     std::to_string(L_out) + " is shorter than L_in " +
                     std::to_string(L_in));
  Spectrum s = rfft(v);
  s.coeffs.resize(static_cast<std::size_t>(L_in / 2 + 1));
  s.source_length = L_in;
  // The bin inherited at position L_in/2 was interior at length L_out and
  // carries an imaginary part; at length L_in it is the Nyquist bin, whose
  // synthesis only ever sees the real part.  Project before inverting.
  if (L_in % 2 == 0) {
    auto& nyq = s.coeffs[static_cast<std::size_t>(L_in / 2)];
    nyq = {nyq.real(), 0.0};
  }
  return irfft(s, L_in);
}

std::vector<double> linear_interp_upsample(const std::vector<double>& x,
                                           std::int64_t L_out) {
  const std::int64_t L_in = static_cast<std::int64_t>(x.size());
  if (L_in < 1)
    throw ShapeError("linear_interp_upsample: input must be non-empty");
  if (L_out < L_in)
    throw ShapeError("linear_interp_upsample: output length " +
                     std::to_string(L_out) + " is shorter than input length " +
                     std::to_string(L_in));
  std::vector<double> out(static_cast<std::size_t>(L_out));
  if (L_in == 1 || L_out == 1) {
    for (auto& y : out) y = x[0];
    return out;
  }
  const double step = static_cast<double>(L_in - 1) / static_cast<double>(L_out - 1);
  for (std::int64_t m = 0; m < L_out; ++m) {
    const double pos = static_cast<double>(m) * step;
    std::int64_t i0 = static_cast<std::int64_t>(pos);
    if (i0 > L_in - 2) i0 = L_in - 2;
    const double frac = pos - static_cast<double>(i0);
    out[static_cast<std::size_t>(m)] =
        (1.0 - frac) * x[static_cast<std::size_t>(i0)] +
        frac * x[static_cast<std::size_t>(i0 + 1)];
  }
  return out;
}

std::vector<double> linear_interp_upsample_adjoint(const std::vector<double>& v,
                                                   std::int64_t L_in) {
  const std::int64_t L_out = static_cast<std::int64_t>(v.size());
  if (L_in < 1)
    throw ShapeError("linear_interp_upsample_adjoint: L_in must be >= 1");
  if (L_out < L_in)
    throw ShapeError("linear_interp_upsample_adjoint: cotangent length " +
                     std::to_string(L_out) + " is shorter than L_in " +
                     std::to_string(L_in));
  std::vector<double> out(static_cast<std::size_t>(L_in), 0.0);
  if (L_in == 1 || L_out == 1) {
    for (double g : v) out[0] += g;
    return out;
  }
  const double step = static_cast<double>(L_in - 1) / static_cast<double>(L_out - 1);
  for (std::int64_t m = 0; m < L_out; ++m) {
    const double pos = static_cast<double>(m) * step;
    std::int64_t i0 = static_cast<std::int64_t>(pos);
    if (i0 > L_in - 2) i0 = L_in - 2;
    const double frac = pos - static_cast<double>(i0);
    out[static_cast<std::size_t>(i0)] += (1.0 - frac) * v[static_cast<std::size_t>(m)];
    out[static_cast<std::size_t>(i0 + 1)] += frac * v[static_cast<std::size_t>(m)];
  }
  return out;
}

std::int64_t effective_frequency_count(const double* x, std::int64_t n,
                                       double ratio) {
  if (ratio <= 0.0)
    throw ConfigError("effective_frequency_count: ratio must be positive");
  const Spectrum s = rfft(x, n);
  double max_amp = 0.0;
  for (const auto& c : s.coeffs) max_amp = std::max(max_amp, std::abs(c));
  if (max_amp == 0.0) return 0;
  const double thresh = ratio * max_amp;
  std::int64_t count = 0;
  for (const auto& c : s.coeffs)
    if (std::abs(c) > thresh) ++count;
  return count;
}

std::int64_t effective_frequency_count(const std::vector<double>& x,
                                       double ratio) {
  return effective_frequency_count(x.data(), static_cast<std::int64_t>(x.size()),
                                   ratio);
}

Tensor moving_average_downsample(const Tensor& x, std::int64_t d) {
  if (x.rank() != 2)
    throw ShapeError("moving_average_downsample: expected a (B, T) tensor, got " +
                     x.shape_str());
  const std::int64_t B = x.dim(0), T = x.dim(1);
  const std::int64_t out_len = (T + d - 1) / d;
  Tensor y({B, out_len});
  std::vector<double> row(static_cast<std::size_t>(T));
  for (std::int64_t b = 0; b < B; ++b) {
    for (std::int64_t t = 0; t < T; ++t) row[static_cast<std::size_t>(t)] = x(b, t);
    const auto out = moving_average_downsample(row, d);
    for (std::int64_t o = 0; o < out_len; ++o) y(b, o) = out[static_cast<std::size_t>(o)];
  }
  return y;
}

namespace {

using SeqFn = std::vector<double> (*)(const std::vector<double>&, std::int64_t);

// Apply a sequence->sequence map independently to every (batch, channel)
// fiber along the L axis of a (L,D) or (B,L,D) tensor.
Tensor map_channels(const Tensor& x, std::int64_t L_target, SeqFn fn,
                    const char* what) {
  if (x.rank() != 2 && x.rank() != 3)
    throw ShapeError(std::string(what) + ": expected (L, D) or (B, L, D), got " +
                     x.shape_str());
  const bool batched = x.rank() == 3;
  const std::int64_t B = batched ? x.dim(0) : 1;
  const std::int64_t L = batched ? x.dim(1) : x.dim(0);
  const std::int64_t D = batched ? x.dim(2) : x.dim(1);

  Tensor y = batched ? Tensor({B, L_target, D}) : Tensor({L_target, D});
  std::vector<double> fiber(static_cast<std::size_t>(L));
  const double* in = x.data();
  double* out = y.data();
  for (std::int64_t b = 0; b < B; ++b) {
    const double* in_b = in + b * L * D;
    double* out_b = out + b * L_target * D;
    for (std::int64_t c = 0; c < D; ++c) {
      for (std::int64_t l = 0; l < L; ++l)
        fiber[static_cast<std::size_t>(l)] = in_b[l * D + c];
      const auto mapped = fn(fiber, L_target);
      for (std::int64_t l = 0; l < L_target; ++l)
        out_b[l * D + c] = mapped[static_cast<std::size_t>(l)];
    }
  }
  return y;
}

}  // namespace

Tensor upsample(const Tensor& x, std::int64_t L_out, Upsampler u) {
  return map_channels(x, L_out,
                      u == Upsampler::frequency ? &frequency_upsample
                                                : &linear_interp_upsample,
                      "upsample");
}

Tensor upsample_adjoint(const Tensor& v, std::int64_t L_in, Upsampler u) {
  return map_channels(v, L_in,
                      u == Upsampler::frequency ? &frequency_upsample_adjoint
                                                : &linear_interp_upsample_adjoint,
                      "upsample_adjoint");
}

Tensor band_residual(const Tensor& x_i, const Tensor& x_next, Upsampler u) {
  if (x_i.rank() != x_next.rank())
    throw ShapeError("band_residual: rank mismatch " + x_i.shape_str() +
                     " vs " + x_next.shape_str());
  const bool batched = x_i.rank() == 3;
  const std::int64_t D_i = batched ? x_i.dim(2) : x_i.dim(1);
  const std::int64_t D_n = batched ? x_next.dim(2) : x_next.dim(1);
  if (D_i != D_n || (batched && x_i.dim(0) != x_next.dim(0)))
    throw ShapeError("band_residual: incompatible shapes " + x_i.shape_str() +
                     " vs " + x_next.shape_str());
  const std::int64_t L_i = batched ? x_i.dim(1) : x_i.dim(0);
  return ew_sub(x_i, upsample(x_next, L_i, u));
}

}  // namespace freqkan
