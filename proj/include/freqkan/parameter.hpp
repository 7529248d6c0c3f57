#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "freqkan/rng.hpp"
#include "freqkan/tensor.hpp"

namespace freqkan {

// A learnable tensor plus its gradient accumulator and Adam moments.
// Names are stable dotted paths ("block.0.level.1.kan.theta") used in
// checkpoints and diagnostics.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;  // Adam first moment
  Tensor v;  // Adam second moment

  Parameter() = default;
  Parameter(std::string name_, std::vector<std::int64_t> shape)
      : name(std::move(name_)),
        value(shape),
        grad(shape),
        m(shape),
        v(std::move(shape)) {}

  std::int64_t numel() const { return value.numel(); }
  void zero_grad() { grad.fill(0.0); }
};

// U(-1/sqrt(fan_in), +1/sqrt(fan_in)); values drawn in flat index order so
// initialization is a pure function of (seed, registration order).
void init_uniform_fan_in(Parameter& p, std::int64_t fan_in, Rng& rng);
void init_zeros(Parameter& p);

}  // namespace freqkan
