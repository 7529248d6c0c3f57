#pragma once

// Real/complex discrete Fourier transforms.
//
// Conventions (fixed across the whole engine):
//   forward:  X[k] = sum_n x[n] * exp(-2*pi*i*k*n/L)   (unnormalized)
//   inverse:  x[n] = (1/L) * sum_k X[k] * exp(+2*pi*i*k*n/L)
//
// Real sequences use the one-sided spectrum of floor(L/2)+1 bins; bin 0 is
// real, and for even L the Nyquist bin is real too.
//
// Lengths factorable into {2,3,5} run on a mixed-radix Cooley-Tukey path;
// any other length goes through Bluestein's chirp-z reduction to a
// power-of-two transform, so every length is O(L log L).  Plans (twiddle
// tables, chirp spectra) are cached per length behind a mutex; the public
// functions are pure and safe to call from any number of threads.

#include <complex>
#include <cstdint>
#include <vector>

namespace freqkan {

using cdouble = std::complex<double>;

// One-sided spectrum of a real sequence of length `source_length`.
struct Spectrum {
  std::vector<cdouble> coeffs;
  std::int64_t source_length = 0;

  std::int64_t bins() const { return static_cast<std::int64_t>(coeffs.size()); }
};

namespace fft {

// Out-of-place complex transforms; `in` and `out` must not alias.
void forward(const cdouble* in, cdouble* out, std::int64_t n);
void inverse(const cdouble* in, cdouble* out, std::int64_t n);

}  // namespace fft

Spectrum rfft(const double* x, std::int64_t n);
Spectrum rfft(const std::vector<double>& x);

std::vector<double> irfft(const Spectrum& s, std::int64_t out_length);
void irfft_into(const Spectrum& s, std::int64_t out_length, double* out);

}  // namespace freqkan
