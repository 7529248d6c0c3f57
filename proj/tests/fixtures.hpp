#pragma once

// Synthetic dataset generators shared by the data/training/cli tests and
// the acceptance harness.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "freqkan/errors.hpp"
#include "freqkan/rng.hpp"

namespace fixtures {

inline double gaussian(freqkan::Rng& rng) {
  const double u1 = 1.0 - rng.uniform(0.0, 1.0);  // (0, 1]
  const double u2 = rng.uniform(0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// y(t) = sin(2*pi*t/24) + 0.5*sin(2*pi*t/96) + noise.
inline std::vector<double> two_tone_series(std::int64_t rows, double noise_std,
                                           std::uint64_t seed) {
  freqkan::Rng rng(seed);
  std::vector<double> y(static_cast<std::size_t>(rows));
  for (std::int64_t t = 0; t < rows; ++t) {
    const double x = static_cast<double>(t);
    y[static_cast<std::size_t>(t)] = std::sin(2.0 * M_PI * x / 24.0) +
                                     0.5 * std::sin(2.0 * M_PI * x / 96.0) +
                                     noise_std * gaussian(rng);
  }
  return y;
}

inline void write_csv(const std::string& path,
                      const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw freqkan::DataError("cannot write fixture '" + path + "'");
  out << "date";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  out.precision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    out << "2016-07-01 " << (r % 24) << ":00:00";
    for (const auto& col : columns) out << ',' << col[r];
    out << '\n';
  }
}

inline void write_two_tone_csv(const std::string& path, std::int64_t rows,
                               double noise_std, std::uint64_t seed) {
  write_csv(path, {"y"}, {two_tone_series(rows, noise_std, seed)});
}

// Seven columns with daily (24) and weekly (168) cycles, per-column phases
// and amplitudes, a mild trend, and noise: the texture of an ETT file.
inline void write_ett_like_csv(const std::string& path, std::int64_t rows,
                               std::uint64_t seed) {
  static const char* kNames[7] = {"HUFL", "HULL", "MUFL", "MULL",
                                  "LUFL", "LULL", "OT"};
  freqkan::Rng rng(seed);
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  for (int c = 0; c < 7; ++c) {
    names.emplace_back(kNames[c]);
    const double daily_amp = rng.uniform(0.6, 1.6);
    const double weekly_amp = rng.uniform(0.3, 0.9);
    const double phase1 = rng.uniform(0.0, 2.0 * M_PI);
    const double phase2 = rng.uniform(0.0, 2.0 * M_PI);
    const double mean = rng.uniform(-1.0, 3.0);
    const double trend = rng.uniform(-0.5, 0.5) / static_cast<double>(rows);
    std::vector<double> col(static_cast<std::size_t>(rows));
    for (std::int64_t t = 0; t < rows; ++t) {
      const double x = static_cast<double>(t);
      col[static_cast<std::size_t>(t)] =
          mean + trend * x + daily_amp * std::sin(2.0 * M_PI * x / 24.0 + phase1) +
          weekly_amp * std::sin(2.0 * M_PI * x / 168.0 + phase2) +
          0.1 * gaussian(rng);
    }
    cols.push_back(std::move(col));
  }
  write_csv(path, names, cols);
}

}  // namespace fixtures
