#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "freqkan/errors.hpp"
#include "freqkan/fft.hpp"
#include "freqkan/rng.hpp"
#include "oracles.hpp"

using namespace freqkan;

namespace {

std::vector<double> random_seq(Rng& rng, std::int64_t n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_SUITE("fft") {

TEST_CASE("frozen small transforms") {
  // Single alternating cosine: all energy lands in bin 1.
  const Spectrum s1 = rfft(std::vector<double>{1.0, 0.0, -1.0, 0.0});
  REQUIRE(s1.bins() == 3);
  CHECK(std::abs(s1.coeffs[0]) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s1.coeffs[1].real() == doctest::Approx(2.0));
  CHECK(s1.coeffs[1].imag() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(s1.coeffs[2]) == doctest::Approx(0.0).epsilon(1e-12));

  // Nyquist-rate alternation: all energy in the Nyquist bin.
  const Spectrum s2 = rfft(std::vector<double>{1.0, -1.0, 1.0, -1.0});
  CHECK(std::abs(s2.coeffs[0]) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(s2.coeffs[1]) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s2.coeffs[2].real() == doctest::Approx(4.0));

  // Length 1 and 2 degenerate cases.
  const Spectrum s3 = rfft(std::vector<double>{5.0});
  CHECK(s3.bins() == 1);
  CHECK(s3.coeffs[0].real() == doctest::Approx(5.0));
  const Spectrum s4 = rfft(std::vector<double>{1.0, 2.0});
  CHECK(s4.coeffs[0].real() == doctest::Approx(3.0));
  CHECK(s4.coeffs[1].real() == doctest::Approx(-1.0));
}

TEST_CASE("rfft matches the direct summation oracle for every length 1..64") {
  Rng rng(101);
  for (std::int64_t n = 1; n <= 64; ++n) {
    const auto x = random_seq(rng, n);
    const Spectrum got = rfft(x);
    const auto want = oracles::real_dft(x);
    REQUIRE(got.bins() == static_cast<std::int64_t>(want.size()));
    for (std::size_t k = 0; k < want.size(); ++k) {
      CHECK(std::abs(got.coeffs[k] - want[k]) <= 1e-9);
    }
  }
}

TEST_CASE("prime and mixed lengths route through Bluestein correctly") {
  Rng rng(202);
  for (std::int64_t n : {7, 11, 13, 14, 21, 31, 49, 97, 101, 127}) {
    const auto x = random_seq(rng, n);
    const Spectrum got = rfft(x);
    const auto want = oracles::real_dft(x);
    for (std::size_t k = 0; k < want.size(); ++k)
      CHECK(std::abs(got.coeffs[k] - want[k]) <= 1e-9);
  }
}

TEST_CASE("complex forward matches oracle and inverse round-trips") {
  Rng rng(303);
  for (std::int64_t n : {1, 2, 3, 4, 5, 6, 8, 9, 10, 12, 15, 16, 20, 30, 36,
                         60, 96, 7, 13, 23}) {
    std::vector<cdouble> x(static_cast<std::size_t>(n));
    for (auto& z : x) z = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::vector<cdouble> X(x.size()), back(x.size());
    fft::forward(x.data(), X.data(), n);
    const auto want = oracles::dft(x);
    for (std::size_t k = 0; k < x.size(); ++k)
      CHECK(std::abs(X[k] - want[k]) <= 1e-9);
    fft::inverse(X.data(), back.data(), n);
    for (std::size_t j = 0; j < x.size(); ++j)
      CHECK(std::abs(back[j] - x[j]) <= 1e-10);
  }
}

TEST_CASE("real round trip irfft(rfft(x)) == x to 1e-10") {
  Rng rng(404);
  for (std::int64_t n = 1; n <= 64; ++n) {
    const auto x = random_seq(rng, n);
    const auto back = irfft(rfft(x), n);
    REQUIRE(back.size() == x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
      CHECK(std::fabs(back[j] - x[j]) <= 1e-10);
  }
  for (std::int64_t n : {96, 97, 128, 480, 512}) {
    const auto x = random_seq(rng, n);
    const auto back = irfft(rfft(x), n);
    for (std::size_t j = 0; j < x.size(); ++j)
      CHECK(std::fabs(back[j] - x[j]) <= 1e-10);
  }
}

TEST_CASE("Parseval's identity holds to 1e-9 relative") {
  Rng rng(505);
  for (std::int64_t n : {1, 2, 3, 4, 5, 8, 12, 17, 24, 48, 95, 96, 97, 512}) {
    const auto x = random_seq(rng, n);
    double time_energy = 0.0;
    for (double v : x) time_energy += v * v;

    const Spectrum s = rfft(x);
    double spec_energy = std::norm(s.coeffs[0]);
    const std::int64_t last = s.bins() - 1;
    for (std::int64_t k = 1; k < last; ++k)
      spec_energy += 2.0 * std::norm(s.coeffs[static_cast<std::size_t>(k)]);
    if (last >= 1) {
      const double w = (n % 2 == 0) ? 1.0 : 2.0;  // Nyquist unpaired iff n even
      spec_energy += w * std::norm(s.coeffs[static_cast<std::size_t>(last)]);
    }
    spec_energy /= static_cast<double>(n);
    CHECK(std::fabs(spec_energy - time_energy) <=
          1e-9 * std::max(1.0, std::fabs(time_energy)));
  }
}

TEST_CASE("Hermitian bins are exactly real") {
  Rng rng(606);
  for (std::int64_t n : {2, 4, 5, 7, 12, 96, 97}) {
    const auto x = random_seq(rng, n);
    const Spectrum s = rfft(x);
    CHECK(s.coeffs[0].imag() == 0.0);
    if (n % 2 == 0)
      CHECK(s.coeffs[static_cast<std::size_t>(n / 2)].imag() == 0.0);
  }
}

TEST_CASE("irfft validates bin count against the output length") {
  const Spectrum s = rfft(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK_THROWS_WITH_AS(irfft(s, 6), doctest::Contains("bins"), ShapeError);
  CHECK_THROWS_AS(irfft(s, 0), ShapeError);
  CHECK_NOTHROW(irfft(s, 4));
}

TEST_CASE("linearity of the forward transform") {
  Rng rng(707);
  const auto x = random_seq(rng, 24);
  const auto y = random_seq(rng, 24);
  std::vector<double> lin(24);
  for (int j = 0; j < 24; ++j) lin[static_cast<std::size_t>(j)] =
      2.0 * x[static_cast<std::size_t>(j)] - 3.0 * y[static_cast<std::size_t>(j)];
  const Spectrum sx = rfft(x), sy = rfft(y), sl = rfft(lin);
  for (std::int64_t k = 0; k < sl.bins(); ++k) {
    const cdouble want = 2.0 * sx.coeffs[static_cast<std::size_t>(k)] -
                         3.0 * sy.coeffs[static_cast<std::size_t>(k)];
    CHECK(std::abs(sl.coeffs[static_cast<std::size_t>(k)] - want) <= 1e-10);
  }
}

}  // TEST_SUITE
