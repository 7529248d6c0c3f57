#pragma once

// Learnable building blocks.  Every layer owns its Parameters, exposes a
// pure forward pass, and a backward pass that accumulates parameter
// gradients (into Parameter::grad) and returns the input gradient.
// Intermediate activations needed by backward are returned to the caller in
// small cache structs — layers hold no per-call state, so a layer instance
// can serve any number of concurrent forward/backward pairs.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "freqkan/parameter.hpp"
#include "freqkan/rng.hpp"
#include "freqkan/tensor.hpp"

namespace freqkan {

// First-kind Chebyshev values T_0(x)..T_order(x) by the three-term
// recurrence.  x must lie in [-1, 1]; inputs reach this through tanh.
std::vector<double> chebyshev_basis(double x, int order);

using ParamVisitor = std::function<void(Parameter&)>;

// y = W x + b applied along one axis of a (B, L, C) tensor:
//   channel: contracts the trailing axis, (B, L, in) -> (B, L, out)
//   time:    contracts the middle axis,   (B, in, D) -> (B, out, D)
struct LinearMap {
  enum class Axis { channel, time };

  Axis axis;
  std::int64_t in_dim, out_dim;
  Parameter weight;  // (out, in)
  Parameter bias;    // (out)

  LinearMap(const std::string& name, Axis axis, std::int64_t in_dim,
            std::int64_t out_dim);

  void init(Rng& rng);  // weight ~ U(+-1/sqrt(in_dim)), bias = 0
  Tensor forward(const Tensor& x) const;
  // Accumulates weight/bias grads; returns dLoss/dx.  `x` must be the same
  // tensor the forward pass saw.
  Tensor backward(const Tensor& x, const Tensor& upstream);
  void visit(const ParamVisitor& fn);
};

// Per-channel 1-D convolution (groups == channels) with zero padding that
// preserves the sequence length; taps for output l read input
// l + m - (M-1)/2.
struct DepthwiseConv1d {
  std::int64_t channels, taps;
  Parameter kernels;  // (D, M)
  Parameter bias;     // (D)

  DepthwiseConv1d(const std::string& name, std::int64_t channels,
                  std::int64_t taps);

  void init(Rng& rng);
  Tensor forward(const Tensor& x) const;  // (B, L, D) -> (B, L, D)
  Tensor backward(const Tensor& x, const Tensor& upstream);
  void visit(const ParamVisitor& fn);
};

// Chebyshev-basis Kolmogorov-Arnold layer.  Each output channel o mixes
// polynomial features of every squashed input channel:
//   y[o] = sum_j sum_i theta[o, j, i] * T_i(tanh(x[j]))
// There is no bias term; T_0 supplies the constant.
struct ChebyKanLayer {
  std::int64_t in_dim, out_dim;
  int order;          // highest polynomial degree n; theta holds n+1 slices
  Parameter theta;    // (out, in, order + 1)

  ChebyKanLayer(const std::string& name, std::int64_t in_dim,
                std::int64_t out_dim, int order);

  void init(Rng& rng);  // fan_in = in_dim * (order + 1)

  struct Cache {
    Tensor tanh_x;  // squashed inputs; basis values are recomputed from this
  };
  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;
  Tensor backward(const Cache& cache, const Tensor& upstream);
  void visit(const ParamVisitor& fn);
};

// Two channel-axis linear maps around a tanh: the like-for-like replacement
// used by the `mlp` order-policy ablation.
struct MlpBlock {
  LinearMap lin1, lin2;

  MlpBlock(const std::string& name, std::int64_t dim);

  void init(Rng& rng);

  struct Cache {
    Tensor hidden_tanh;  // tanh(lin1(x))
  };
  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;
  Tensor backward(const Tensor& x, const Cache& cache, const Tensor& upstream);
  void visit(const ParamVisitor& fn);
};

}  // namespace freqkan
