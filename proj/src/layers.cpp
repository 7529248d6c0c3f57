#include "freqkan/layers.hpp"

#include <cmath>
#include <string>

#include "freqkan/errors.hpp"
#include "freqkan/kernels/kernels.hpp"

namespace freqkan {

namespace {

void require_rank3(const Tensor& x, const char* who) {
  if (x.rank() != 3)
    throw ShapeError(std::string(who) + ": expected a rank-3 tensor, got " +
                     x.shape_str());
}

void require_axis_extent(const Tensor& x, int axis, std::int64_t want,
                         const char* who) {
  if (x.dim(axis) != want)
    throw ShapeError(std::string(who) + ": axis " + std::to_string(axis) +
                     " of input " + x.shape_str() + " must have extent " +
                     std::to_string(want));
}

}  // namespace

std::vector<double> chebyshev_basis(double x, int order) {
  if (order < 0)
    throw ConfigError("chebyshev_basis: order must be >= 0, got " +
                      std::to_string(order));
  if (!(x >= -1.0 && x <= 1.0))
    throw NumericError("chebyshev_basis: x = " + std::to_string(x) +
                       " outside [-1, 1]");
  std::vector<double> t(static_cast<std::size_t>(order) + 1);
  t[0] = 1.0;
  if (order >= 1) t[1] = x;
  for (int i = 2; i <= order; ++i)
    t[static_cast<std::size_t>(i)] =
        2.0 * x * t[static_cast<std::size_t>(i - 1)] - t[static_cast<std::size_t>(i - 2)];
  return t;
}

// ---------------------------------------------------------------------------
// LinearMap
// ---------------------------------------------------------------------------

LinearMap::LinearMap(const std::string& name, Axis axis_, std::int64_t in,
                     std::int64_t out)
    : axis(axis_),
      in_dim(in),
      out_dim(out),
      weight(name + ".weight", {out, in}),
      bias(name + ".bias", {out}) {
  if (in < 1 || out < 1)
    throw ConfigError("LinearMap '" + name + "': dimensions must be >= 1, got " +
                      std::to_string(in) + " -> " + std::to_string(out));
}

void LinearMap::init(Rng& rng) {
  init_uniform_fan_in(weight, in_dim, rng);
  init_zeros(bias);
}

Tensor LinearMap::forward(const Tensor& x) const {
  require_rank3(x, "LinearMap");
  const auto& k = kernels::ops();
  const std::int64_t B = x.dim(0);

  if (axis == Axis::channel) {
    require_axis_extent(x, 2, in_dim, "LinearMap(channel)");
    const std::int64_t L = x.dim(1);
    Tensor y({B, L, out_dim});
    const double* xp = x.data();
    double* yp = y.data();
    for (std::int64_t bl = 0; bl < B * L; ++bl) {
      double* row = yp + bl * out_dim;
      for (std::int64_t o = 0; o < out_dim; ++o) row[o] = bias.value(o);
      k.gemv_acc(weight.value.data(), xp + bl * in_dim, row,
                 static_cast<std::size_t>(out_dim),
                 static_cast<std::size_t>(in_dim));
    }
    return y;
  }

  // time axis: y[b, f, :] = bias[f] + sum_t W[f, t] * x[b, t, :]
  require_axis_extent(x, 1, in_dim, "LinearMap(time)");
  const std::int64_t D = x.dim(2);
  Tensor y({B, out_dim, D});
  const double* xp = x.data();
  double* yp = y.data();
  for (std::int64_t b = 0; b < B; ++b) {
    const double* xb = xp + b * in_dim * D;
    double* yb = yp + b * out_dim * D;
    for (std::int64_t f = 0; f < out_dim; ++f) {
      double* yrow = yb + f * D;
      const double bf = bias.value(f);
      for (std::int64_t d = 0; d < D; ++d) yrow[d] = bf;
      const double* wrow = weight.value.data() + f * in_dim;
      for (std::int64_t t = 0; t < in_dim; ++t)
        k.axpy(wrow[t], xb + t * D, yrow, static_cast<std::size_t>(D));
    }
  }
  return y;
}

Tensor LinearMap::backward(const Tensor& x, const Tensor& upstream) {
  require_rank3(x, "LinearMap::backward");
  require_rank3(upstream, "LinearMap::backward");
  const auto& k = kernels::ops();
  const std::int64_t B = x.dim(0);
  Tensor gx(x.shape());

  if (axis == Axis::channel) {
    require_axis_extent(upstream, 2, out_dim, "LinearMap(channel)::backward");
    const std::int64_t L = x.dim(1);
    if (upstream.dim(0) != B || upstream.dim(1) != L)
      throw ShapeError("LinearMap(channel)::backward: upstream " +
                       upstream.shape_str() + " does not match input " +
                       x.shape_str());
    const double* xp = x.data();
    const double* gp = upstream.data();
    double* gxp = gx.data();
    for (std::int64_t bl = 0; bl < B * L; ++bl) {
      const double* xrow = xp + bl * in_dim;
      const double* grow = gp + bl * out_dim;
      double* gxrow = gxp + bl * in_dim;
      for (std::int64_t o = 0; o < out_dim; ++o) {
        const double g = grow[o];
        if (g == 0.0) continue;
        const double* wrow = weight.value.data() + o * in_dim;
        // dL/dx += g * W[o, :]; dL/dW[o, :] += g * x
        k.axpy(g, wrow, gxrow, static_cast<std::size_t>(in_dim));
        k.axpy(g, xrow, weight.grad.data() + o * in_dim,
               static_cast<std::size_t>(in_dim));
        bias.grad(o) += g;
      }
    }
    return gx;
  }

  require_axis_extent(upstream, 1, out_dim, "LinearMap(time)::backward");
  const std::int64_t D = x.dim(2);
  if (upstream.dim(0) != B || upstream.dim(2) != D)
    throw ShapeError("LinearMap(time)::backward: upstream " +
                     upstream.shape_str() + " does not match input " +
                     x.shape_str());
  const double* xp = x.data();
  const double* gp = upstream.data();
  double* gxp = gx.data();
  for (std::int64_t b = 0; b < B; ++b) {
    const double* xb = xp + b * in_dim * D;
    const double* gb = gp + b * out_dim * D;
    double* gxb = gxp + b * in_dim * D;
    for (std::int64_t f = 0; f < out_dim; ++f) {
      const double* grow = gb + f * D;
      const double* wrow = weight.value.data() + f * in_dim;
      double* gwrow = weight.grad.data() + f * in_dim;
      for (std::int64_t t = 0; t < in_dim; ++t) {
        k.axpy(wrow[t], grow, gxb + t * D, static_cast<std::size_t>(D));
        gwrow[t] += k.dot(grow, xb + t * D, static_cast<std::size_t>(D));
      }
      bias.grad(f) += k.sum(grow, static_cast<std::size_t>(D));
    }
  }
  return gx;
}

void LinearMap::visit(const ParamVisitor& fn) {
  fn(weight);
  fn(bias);
}

// ---------------------------------------------------------------------------
// DepthwiseConv1d
// ---------------------------------------------------------------------------

DepthwiseConv1d::DepthwiseConv1d(const std::string& name, std::int64_t channels_,
                                 std::int64_t taps_)
    : channels(channels_),
      taps(taps_),
      kernels(name + ".kernels", {channels_, taps_}),
      bias(name + ".bias", {channels_}) {
  if (channels_ < 1 || taps_ < 1)
    throw ConfigError("DepthwiseConv1d '" + name +
                      "': channels and taps must be >= 1");
}

void DepthwiseConv1d::init(Rng& rng) {
  init_uniform_fan_in(kernels, taps, rng);
  init_zeros(bias);
}

Tensor DepthwiseConv1d::forward(const Tensor& x) const {
  require_rank3(x, "DepthwiseConv1d");
  require_axis_extent(x, 2, channels, "DepthwiseConv1d");
  const auto& k = kernels::ops();
  const std::int64_t B = x.dim(0), L = x.dim(1), D = channels, M = taps;
  const std::int64_t left = (M - 1) / 2;

  // Tap-major copy of the kernels so each tap is a contiguous channel row.
  std::vector<double> tap_rows(static_cast<std::size_t>(M * D));
  for (std::int64_t c = 0; c < D; ++c)
    for (std::int64_t m = 0; m < M; ++m)
      tap_rows[static_cast<std::size_t>(m * D + c)] = this->kernels.value(c, m);

  Tensor y({B, L, D});
  double* yp = y.data();
  const double* xp = x.data();
  for (std::int64_t b = 0; b < B; ++b) {
    double* yb = yp + b * L * D;
    const double* xb = xp + b * L * D;
    for (std::int64_t l = 0; l < L; ++l) {
      double* yrow = yb + l * D;
      for (std::int64_t c = 0; c < D; ++c) yrow[c] = bias.value(c);
    }
    for (std::int64_t m = 0; m < M; ++m) {
      const std::int64_t off = m - left;
      const double* tap = tap_rows.data() + m * D;
      const std::int64_t l_lo = std::max<std::int64_t>(0, -off);
      const std::int64_t l_hi = std::min<std::int64_t>(L, L - off);
      for (std::int64_t l = l_lo; l < l_hi; ++l)
        k.fma_acc(tap, xb + (l + off) * D, yb + l * D,
                  static_cast<std::size_t>(D));
    }
  }
  return y;
}

Tensor DepthwiseConv1d::backward(const Tensor& x, const Tensor& upstream) {
  require_rank3(upstream, "DepthwiseConv1d::backward");
  if (!x.same_shape(upstream))
    throw ShapeError("DepthwiseConv1d::backward: upstream " +
                     upstream.shape_str() + " does not match input " +
                     x.shape_str());
  const auto& k = kernels::ops();
  const std::int64_t B = x.dim(0), L = x.dim(1), D = channels, M = taps;
  const std::int64_t left = (M - 1) / 2;

  std::vector<double> tap_rows(static_cast<std::size_t>(M * D));
  for (std::int64_t c = 0; c < D; ++c)
    for (std::int64_t m = 0; m < M; ++m)
      tap_rows[static_cast<std::size_t>(m * D + c)] = this->kernels.value(c, m);
  std::vector<double> tap_grads(static_cast<std::size_t>(M * D), 0.0);

  Tensor gx(x.shape());
  const double* xp = x.data();
  const double* gp = upstream.data();
  double* gxp = gx.data();
  for (std::int64_t b = 0; b < B; ++b) {
    const double* xb = xp + b * L * D;
    const double* gb = gp + b * L * D;
    double* gxb = gxp + b * L * D;
    for (std::int64_t m = 0; m < M; ++m) {
      const std::int64_t off = m - left;
      const double* tap = tap_rows.data() + m * D;
      double* tgrad = tap_grads.data() + m * D;
      const std::int64_t l_lo = std::max<std::int64_t>(0, -off);
      const std::int64_t l_hi = std::min<std::int64_t>(L, L - off);
      for (std::int64_t l = l_lo; l < l_hi; ++l) {
        // dL/dx[l+off] += K[., m] (.) g[l];  dL/dK[., m] += g[l] (.) x[l+off]
        k.fma_acc(tap, gb + l * D, gxb + (l + off) * D,
                  static_cast<std::size_t>(D));
        k.fma_acc(gb + l * D, xb + (l + off) * D, tgrad,
                  static_cast<std::size_t>(D));
      }
    }
  }

  // fold tap-major grads back into (D, M) and accumulate bias
  for (std::int64_t c = 0; c < D; ++c)
    for (std::int64_t m = 0; m < M; ++m)
      this->kernels.grad(c, m) += tap_grads[static_cast<std::size_t>(m * D + c)];
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t l = 0; l < L; ++l)
      for (std::int64_t c = 0; c < D; ++c) bias.grad(c) += upstream(b, l, c);
  return gx;
}

void DepthwiseConv1d::visit(const ParamVisitor& fn) {
  fn(kernels);
  fn(bias);
}

// ---------------------------------------------------------------------------
// ChebyKanLayer
// ---------------------------------------------------------------------------

namespace {

std::int64_t checked_kan_order(const std::string& name, int order) {
  if (order < 0)
    throw ConfigError("ChebyKanLayer '" + name + "': order must be >= 0, got " +
                      std::to_string(order));
  return static_cast<std::int64_t>(order);
}

}  // namespace

ChebyKanLayer::ChebyKanLayer(const std::string& name, std::int64_t in,
                             std::int64_t out, int order_)
    : in_dim(in), out_dim(out), order(order_),
      theta(name + ".theta", {out, in, checked_kan_order(name, order_) + 1}) {
  if (in < 1 || out < 1)
    throw ConfigError("ChebyKanLayer '" + name + "': dimensions must be >= 1");
}

void ChebyKanLayer::init(Rng& rng) {
  init_uniform_fan_in(theta, in_dim * (order + 1), rng);
}

Tensor ChebyKanLayer::forward(const Tensor& x, Cache* cache) const {
  require_rank3(x, "ChebyKanLayer");
  require_axis_extent(x, 2, in_dim, "ChebyKanLayer");
  const auto& k = kernels::ops();
  const std::int64_t B = x.dim(0), L = x.dim(1);
  const std::int64_t K = order + 1;
  const std::int64_t feat = in_dim * K;

  Tensor tanh_x = ew_tanh(x);
  Tensor y({B, L, out_dim});
  std::vector<double> basis(static_cast<std::size_t>(feat));
  const double* tp = tanh_x.data();
  double* yp = y.data();
  // theta viewed as a (out, in*(order+1)) matrix over the basis vector
  const double* theta_mat = theta.value.data();
  for (std::int64_t bl = 0; bl < B * L; ++bl) {
    const double* trow = tp + bl * in_dim;
    for (std::int64_t j = 0; j < in_dim; ++j) {
      double* tj = basis.data() + j * K;
      const double t = trow[j];
      tj[0] = 1.0;
      if (K > 1) tj[1] = t;
      for (std::int64_t i = 2; i < K; ++i)
        tj[i] = 2.0 * t * tj[i - 1] - tj[i - 2];
    }
    k.gemv_acc(theta_mat, basis.data(), yp + bl * out_dim,
               static_cast<std::size_t>(out_dim), static_cast<std::size_t>(feat));
  }
  if (cache) cache->tanh_x = std::move(tanh_x);
  return y;
}

Tensor ChebyKanLayer::backward(const Cache& cache, const Tensor& upstream) {
  const Tensor& tanh_x = cache.tanh_x;
  require_rank3(tanh_x, "ChebyKanLayer::backward");
  require_rank3(upstream, "ChebyKanLayer::backward");
  require_axis_extent(upstream, 2, out_dim, "ChebyKanLayer::backward");
  if (upstream.dim(0) != tanh_x.dim(0) || upstream.dim(1) != tanh_x.dim(1))
    throw ShapeError("ChebyKanLayer::backward: upstream " +
                     upstream.shape_str() + " does not match cached input " +
                     tanh_x.shape_str());
  const auto& k = kernels::ops();
  const std::int64_t B = tanh_x.dim(0), L = tanh_x.dim(1);
  const std::int64_t K = order + 1;
  const std::int64_t feat = in_dim * K;

  Tensor gx({B, L, in_dim});
  std::vector<double> basis(static_cast<std::size_t>(feat));
  std::vector<double> second(static_cast<std::size_t>(K));  // U_0..U_{K-1}
  std::vector<double> h(static_cast<std::size_t>(feat));
  const double* tp = tanh_x.data();
  const double* gp = upstream.data();
  double* gxp = gx.data();
  const double* theta_mat = theta.value.data();
  double* theta_grad = theta.grad.data();

  for (std::int64_t bl = 0; bl < B * L; ++bl) {
    const double* trow = tp + bl * in_dim;
    const double* grow = gp + bl * out_dim;
    double* gxrow = gxp + bl * in_dim;

    for (std::int64_t j = 0; j < in_dim; ++j) {
      double* tj = basis.data() + j * K;
      const double t = trow[j];
      tj[0] = 1.0;
      if (K > 1) tj[1] = t;
      for (std::int64_t i = 2; i < K; ++i)
        tj[i] = 2.0 * t * tj[i - 1] - tj[i - 2];
    }

    // dL/dtheta[o, :] += g_o * basis;  h = theta^T g
    std::fill(h.begin(), h.end(), 0.0);
    for (std::int64_t o = 0; o < out_dim; ++o) {
      const double g = grow[o];
      if (g == 0.0) continue;
      k.axpy(g, basis.data(), theta_grad + o * feat,
             static_cast<std::size_t>(feat));
      k.axpy(g, theta_mat + o * feat, h.data(), static_cast<std::size_t>(feat));
    }

    // Chain through the basis: dT_i/dt = i * U_{i-1} (second kind), then
    // through tanh: dt/dx = 1 - t^2.
    for (std::int64_t j = 0; j < in_dim; ++j) {
      const double t = trow[j];
      second[0] = 1.0;
      if (K > 1) second[1] = 2.0 * t;
      for (std::int64_t i = 2; i < K; ++i)
        second[static_cast<std::size_t>(i)] =
            2.0 * t * second[static_cast<std::size_t>(i - 1)] -
            second[static_cast<std::size_t>(i - 2)];
      const double* hj = h.data() + j * K;
      double acc = 0.0;
      for (std::int64_t i = 1; i < K; ++i)
        acc += hj[i] * static_cast<double>(i) * second[static_cast<std::size_t>(i - 1)];
      gxrow[j] = acc * (1.0 - t * t);
    }
  }
  return gx;
}

void ChebyKanLayer::visit(const ParamVisitor& fn) { fn(theta); }

// ---------------------------------------------------------------------------
// MlpBlock
// ---------------------------------------------------------------------------

MlpBlock::MlpBlock(const std::string& name, std::int64_t dim)
    : lin1(name + ".lin1", LinearMap::Axis::channel, dim, dim),
      lin2(name + ".lin2", LinearMap::Axis::channel, dim, dim) {}

void MlpBlock::init(Rng& rng) {
  lin1.init(rng);
  lin2.init(rng);
}

Tensor MlpBlock::forward(const Tensor& x, Cache* cache) const {
  Tensor t = ew_tanh(lin1.forward(x));
  Tensor y = lin2.forward(t);
  if (cache) cache->hidden_tanh = std::move(t);
  return y;
}

Tensor MlpBlock::backward(const Tensor& x, const Cache& cache,
                          const Tensor& upstream) {
  const Tensor& t = cache.hidden_tanh;
  Tensor gt = lin2.backward(t, upstream);
  // through tanh: dL/dh = dL/dt * (1 - t^2)
  double* gtp = gt.data();
  const double* tp = t.data();
  for (std::int64_t i = 0; i < gt.numel(); ++i)
    gtp[i] *= 1.0 - tp[i] * tp[i];
  return lin1.backward(x, gt);
}

void MlpBlock::visit(const ParamVisitor& fn) {
  lin1.visit(fn);
  lin2.visit(fn);
}

}  // namespace freqkan
