#pragma once

// Sequence-domain spectral operations: the moving-average pyramid, Fourier
// zero-padding interpolation ("frequency upsampling") and its adjoint, the
// linear-interpolation fallback used for ablations, band residuals, and the
// effective-frequency diagnostic.

#include <cstdint>
#include <vector>

#include "freqkan/fft.hpp"
#include "freqkan/tensor.hpp"

namespace freqkan {

enum class Upsampler { frequency, linear_interp };

// Replicate the last element until the length is a multiple of d, then
// average non-overlapping windows of d.  Output length is ceil(L/d).
std::vector<double> moving_average_downsample(const std::vector<double>& x,
                                              std::int64_t d);

// Trigonometric interpolation from L_in to L_out >= L_in points: scale the
// one-sided spectrum by L_out/L_in, halve the Nyquist bin when it becomes an
// interior bin of the longer spectrum (even L_in, L_out > L_in), zero-pad,
// inverse-transform.  Exactly reproduces band-limited signals on the denser
// grid and preserves every input bin up to the L_out/L_in gain.
std::vector<double> frequency_upsample(const std::vector<double>& x,
                                       std::int64_t L_out);

// Transpose of frequency_upsample as a real-linear map, for backprop:
// collapses to "truncate the length-L_out spectrum to the length-L_in bin
// count and inverse-transform at L_in" (the per-bin weights cancel).
std::vector<double> frequency_upsample_adjoint(const std::vector<double>& v,
                                               std::int64_t L_in);

// Piecewise-linear interpolation with pinned endpoints, plus its transpose.
std::vector<double> linear_interp_upsample(const std::vector<double>& x,
                                           std::int64_t L_out);
std::vector<double> linear_interp_upsample_adjoint(const std::vector<double>& v,
                                                   std::int64_t L_in);

// Number of one-sided spectrum bins whose magnitude exceeds ratio * max
// magnitude (strict).  An all-zero sequence has zero effective frequencies.
std::int64_t effective_frequency_count(const double* x, std::int64_t n,
                                       double ratio = 0.1);
std::int64_t effective_frequency_count(const std::vector<double>& x,
                                       double ratio = 0.1);

// Tensor forms; sequences run along the L axis.
Tensor moving_average_downsample(const Tensor& x, std::int64_t d);  // (B,T)->(B,ceil(T/d))
// (L,D) or (B,L,D), upsampled along L.
Tensor upsample(const Tensor& x, std::int64_t L_out, Upsampler u);
Tensor upsample_adjoint(const Tensor& v, std::int64_t L_in, Upsampler u);
// x_i - upsample(x_next to x_i's length); shapes (B,L_i,D) and (B,L_next,D).
Tensor band_residual(const Tensor& x_i, const Tensor& x_next,
                     Upsampler u = Upsampler::frequency);

}  // namespace freqkan
