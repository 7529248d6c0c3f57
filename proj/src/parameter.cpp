#include "freqkan/parameter.hpp"

#include <cmath>

#include "freqkan/errors.hpp"

namespace freqkan {

void init_uniform_fan_in(Parameter& p, std::int64_t fan_in, Rng& rng) {
  if (fan_in <= 0)
    throw ConfigError("init_uniform_fan_in: fan_in must be positive for '" +
                      p.name + "'");
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& w : p.value.vec()) w = rng.uniform(-bound, bound);
}

void init_zeros(Parameter& p) { p.value.fill(0.0); }

}  // namespace freqkan
