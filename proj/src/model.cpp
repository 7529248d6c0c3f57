#include "freqkan/model.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "freqkan/errors.hpp"
#include "freqkan/kernels/kernels.hpp"
#include "freqkan/rng.hpp"

namespace freqkan {

std::string to_string(OrderPolicy p) {
  switch (p) {
    case OrderPolicy::multi_order: return "multi_order";
    case OrderPolicy::fixed: return "fixed";
    case OrderPolicy::mlp: return "mlp";
  }
  return "?";
}

std::string to_string(Upsampler u) {
  return u == Upsampler::frequency ? "frequency" : "linear_interp";
}

OrderPolicy order_policy_from_string(const std::string& s) {
  if (s == "multi_order") return OrderPolicy::multi_order;
  if (s == "fixed") return OrderPolicy::fixed;
  if (s == "mlp") return OrderPolicy::mlp;
  throw ConfigError("unknown order_policy '" + s +
                    "' (expected multi_order, fixed, or mlp)");
}

Upsampler upsampler_from_string(const std::string& s) {
  if (s == "frequency") return Upsampler::frequency;
  if (s == "linear_interp") return Upsampler::linear_interp;
  throw ConfigError("unknown upsampler '" + s +
                    "' (expected frequency or linear_interp)");
}

void ModelConfig::validate() const {
  if (T < 1 || F < 1) {
    throw ConfigError("model: T and F must be >= 1, got T=" + std::to_string(T) +
                      " F=" + std::to_string(F));
  }
  if (D < 1) throw ConfigError("model: D must be >= 1, got " + std::to_string(D));
  if (k < 2) throw ConfigError("model: k must be >= 2, got " + std::to_string(k));
  if (d < 2) throw ConfigError("model: d must be >= 2, got " + std::to_string(d));
  if (b < 1) throw ConfigError("model: b must be >= 1, got " + std::to_string(b));
  if (blocks < 1) {
    throw ConfigError("model: blocks must be >= 1, got " + std::to_string(blocks));
  }
  if (M < 1 || M % 2 == 0) {
    throw ConfigError("model: M must be odd and >= 1, got " + std::to_string(M));
  }
  if (order_policy == OrderPolicy::fixed && fixed_order < 1) {
    throw ConfigError("model: fixed_order must be >= 1, got " +
                      std::to_string(fixed_order));
  }
  std::int64_t stride = 1;
  for (std::int64_t i = 1; i < k; ++i) {
    if (stride > T / d) {
      throw ConfigError("model: d^(k-1) exceeds T (T=" + std::to_string(T) +
                        ", d=" + std::to_string(d) + ", k=" + std::to_string(k) + ")");
    }
    stride *= d;
  }
  if (T % stride != 0) {
    throw ConfigError("model: T must be divisible by d^(k-1); T=" +
                      std::to_string(T) + ", d^(k-1)=" + std::to_string(stride));
  }
}

std::vector<std::int64_t> ModelConfig::level_lengths() const {
  std::vector<std::int64_t> lens(static_cast<std::size_t>(k));
  std::int64_t len = T;
  for (std::int64_t i = 0; i < k; ++i) {
    lens[static_cast<std::size_t>(i)] = len;
    if (i + 1 < k) len /= d;
  }
  return lens;
}

int ModelConfig::kan_order(std::int64_t level) const {
  if (order_policy == OrderPolicy::fixed) return fixed_order;
  return b + static_cast<int>(k - 1 - level);
}

namespace {

std::string level_name(std::int64_t block, std::int64_t level,
                       const char* component) {
  return "block." + std::to_string(block) + ".level." + std::to_string(level) +
         "." + component;
}

}  // namespace

Model::Model(const ModelConfig& config)
    : cfg_(config),
      lens_((config.validate(), config.level_lengths())),
      head_time_("head.time", LinearMap::Axis::time, config.T, config.F),
      head_channel_("head.channel", LinearMap::Axis::channel, config.D, 1) {
  embed_.reserve(static_cast<std::size_t>(cfg_.k));
  for (std::int64_t i = 0; i < cfg_.k; ++i) {
    embed_.emplace_back("embed." + std::to_string(i), LinearMap::Axis::channel,
                        1, cfg_.D);
  }
  convs_.reserve(static_cast<std::size_t>(cfg_.blocks * cfg_.k));
  for (std::int64_t j = 0; j < cfg_.blocks; ++j) {
    for (std::int64_t i = 0; i < cfg_.k; ++i) {
      convs_.emplace_back(level_name(j, i, "conv"), cfg_.D, cfg_.M);
      if (cfg_.order_policy == OrderPolicy::mlp) {
        mlps_.emplace_back(level_name(j, i, "mlp"), cfg_.D);
      } else {
        kans_.emplace_back(level_name(j, i, "kan"), cfg_.D, cfg_.D,
                           cfg_.kan_order(i));
      }
    }
  }

  // One stream, drawn in registration order, so initialization is a pure
  // function of (seed, architecture).
  Rng rng(cfg_.seed);
  for (auto& e : embed_) e.init(rng);
  for (std::int64_t j = 0; j < cfg_.blocks; ++j) {
    for (std::int64_t i = 0; i < cfg_.k; ++i) {
      const std::int64_t u = unit_index(j, i);
      convs_[static_cast<std::size_t>(u)].init(rng);
      if (cfg_.order_policy == OrderPolicy::mlp) {
        mlps_[static_cast<std::size_t>(u)].init(rng);
      } else {
        kans_[static_cast<std::size_t>(u)].init(rng);
      }
    }
  }
  head_time_.init(rng);
  head_channel_.init(rng);
}

std::vector<Tensor> Model::build_levels(const Tensor& x,
                                        ForwardCache* cache) const {
  if (x.rank() != 2 || x.dim(1) != cfg_.T) {
    throw ShapeError("model input must be (B, " + std::to_string(cfg_.T) +
                     "), got " + x.shape_str());
  }
  const std::int64_t B = x.dim(0);
  std::vector<Tensor> levels;
  levels.reserve(static_cast<std::size_t>(cfg_.k));
  if (cache) {
    cache->raw_levels.clear();
    cache->raw_levels.reserve(static_cast<std::size_t>(cfg_.k));
  }
  Tensor series = x;  // (B, L_i) raw-space pyramid
  for (std::int64_t i = 0; i < cfg_.k; ++i) {
    const std::int64_t L = lens_[static_cast<std::size_t>(i)];
    Tensor lifted({B, L, 1});
    lifted.vec() = series.vec();
    levels.push_back(embed_[static_cast<std::size_t>(i)].forward(lifted));
    if (cache) cache->raw_levels.push_back(std::move(lifted));
    if (i + 1 < cfg_.k) series = moving_average_downsample(series, cfg_.d);
  }
  return levels;
}

std::vector<Tensor> Model::decompose(const std::vector<Tensor>& levels) const {
  if (static_cast<std::int64_t>(levels.size()) != cfg_.k) {
    throw ShapeError("decompose: expected " + std::to_string(cfg_.k) +
                     " levels, got " + std::to_string(levels.size()));
  }
  std::vector<Tensor> bands;
  bands.reserve(levels.size());
  for (std::int64_t i = 0; i < cfg_.k - 1; ++i) {
    bands.push_back(band_residual(levels[static_cast<std::size_t>(i)],
                                  levels[static_cast<std::size_t>(i + 1)],
                                  cfg_.upsampler));
  }
  bands.push_back(levels.back());
  return bands;
}

std::vector<Tensor> Model::learn_bands(const std::vector<Tensor>& bands,
                                       std::int64_t block,
                                       ForwardCache::BlockCache* cache) const {
  if (block < 0 || block >= cfg_.blocks) {
    throw ConfigError("learn_bands: block index " + std::to_string(block) +
                      " out of range [0, " + std::to_string(cfg_.blocks) + ")");
  }
  if (static_cast<std::int64_t>(bands.size()) != cfg_.k) {
    throw ShapeError("learn_bands: expected " + std::to_string(cfg_.k) +
                     " bands, got " + std::to_string(bands.size()));
  }
  if (cache) {
    cache->bands = bands;
    cache->kan.assign(static_cast<std::size_t>(cfg_.k), {});
    cache->mlp.assign(static_cast<std::size_t>(cfg_.k), {});
  }
  std::vector<Tensor> out;
  out.reserve(bands.size());
  for (std::int64_t i = 0; i < cfg_.k; ++i) {
    const auto ui = static_cast<std::size_t>(unit_index(block, i));
    const auto li = static_cast<std::size_t>(i);
    Tensor conv_out = convs_[ui].forward(bands[li]);
    Tensor branch =
        cfg_.order_policy == OrderPolicy::mlp
            ? mlps_[ui].forward(bands[li], cache ? &cache->mlp[li] : nullptr)
            : kans_[ui].forward(bands[li], cache ? &cache->kan[li] : nullptr);
    out.push_back(ew_add(conv_out, branch));
  }
  return out;
}

std::vector<Tensor> Model::mix(const std::vector<Tensor>& bands) const {
  if (static_cast<std::int64_t>(bands.size()) != cfg_.k) {
    throw ShapeError("mix: expected " + std::to_string(cfg_.k) + " bands, got " +
                     std::to_string(bands.size()));
  }
  std::vector<Tensor> levels(bands.size());
  levels[static_cast<std::size_t>(cfg_.k - 1)] = bands.back();
  for (std::int64_t i = cfg_.k - 2; i >= 0; --i) {
    const auto li = static_cast<std::size_t>(i);
    levels[li] = ew_add(upsample(levels[li + 1], lens_[li], cfg_.upsampler),
                        bands[li]);
  }
  return levels;
}

Tensor Model::forward(const Tensor& x, ForwardCache* cache) const {
  if (x.rank() != 2 || x.dim(1) != cfg_.T) {
    throw ShapeError("model input must be (B, " + std::to_string(cfg_.T) +
                     "), got " + x.shape_str());
  }
  x.ensure_finite("input window");
  const std::int64_t B = x.dim(0);
  if (cache) {
    *cache = ForwardCache{};
    cache->batch = B;
    cache->block.resize(static_cast<std::size_t>(cfg_.blocks));
  }

  Tensor normed = x;
  std::vector<double> means, scales;
  if (cfg_.instance_norm) {
    means.resize(static_cast<std::size_t>(B));
    scales.resize(static_cast<std::size_t>(B));
    const auto& krn = kernels::ops();
    for (std::int64_t r = 0; r < B; ++r) {
      double* row = normed.data() + r * cfg_.T;
      const double mean = krn.sum(row, cfg_.T) / static_cast<double>(cfg_.T);
      double var = 0.0;
      for (std::int64_t t = 0; t < cfg_.T; ++t) {
        const double c = row[t] - mean;
        var += c * c;
      }
      var /= static_cast<double>(cfg_.T);
      const double scale = std::sqrt(var) + 1e-5;
      for (std::int64_t t = 0; t < cfg_.T; ++t) row[t] = (row[t] - mean) / scale;
      means[static_cast<std::size_t>(r)] = mean;
      scales[static_cast<std::size_t>(r)] = scale;
    }
    normed.ensure_finite("normalized window");
  }

  std::vector<Tensor> levels = build_levels(normed, cache);
  for (const Tensor& lvl : levels) lvl.ensure_finite("embedded levels");

  for (std::int64_t j = 0; j < cfg_.blocks; ++j) {
    ForwardCache::BlockCache* bc =
        cache ? &cache->block[static_cast<std::size_t>(j)] : nullptr;
    std::vector<Tensor> bands = decompose(levels);
    std::vector<Tensor> learned = learn_bands(bands, j, bc);
    levels = mix(learned);
    levels.front().ensure_finite("block " + std::to_string(j) + " output");
  }

  Tensor head_mid = head_time_.forward(levels.front());
  Tensor head_out = head_channel_.forward(head_mid);  // (B, F, 1)
  Tensor y({B, cfg_.F});
  y.vec() = head_out.vec();

  if (cfg_.instance_norm) {
    for (std::int64_t r = 0; r < B; ++r) {
      double* row = y.data() + r * cfg_.F;
      const double mean = means[static_cast<std::size_t>(r)];
      const double scale = scales[static_cast<std::size_t>(r)];
      for (std::int64_t f = 0; f < cfg_.F; ++f) row[f] = row[f] * scale + mean;
    }
  }
  y.ensure_finite("forecast output");

  if (cache) {
    cache->norm_mean = std::move(means);
    cache->norm_scale = std::move(scales);
    cache->head_in = std::move(levels.front());
    cache->head_mid = std::move(head_mid);
    cache->valid = true;
  }
  return y;
}

void Model::backward(const ForwardCache& cache, const Tensor& upstream) {
  if (!cache.valid) {
    throw ConfigError("model backward called before forward");
  }
  const std::int64_t B = cache.batch;
  if (upstream.rank() != 2 || upstream.dim(0) != B || upstream.dim(1) != cfg_.F) {
    throw ShapeError("model backward: upstream must be (" + std::to_string(B) +
                     ", " + std::to_string(cfg_.F) + "), got " +
                     upstream.shape_str());
  }

  // De-normalization y = y_hat * scale + mean contributes d y / d y_hat = scale.
  Tensor g_head({B, cfg_.F, 1});
  for (std::int64_t r = 0; r < B; ++r) {
    const double scale =
        cfg_.instance_norm ? cache.norm_scale[static_cast<std::size_t>(r)] : 1.0;
    const double* src = upstream.data() + r * cfg_.F;
    double* dst = g_head.data() + r * cfg_.F;
    for (std::int64_t f = 0; f < cfg_.F; ++f) dst[f] = src[f] * scale;
  }

  Tensor g_mid = head_channel_.backward(cache.head_mid, g_head);
  Tensor g_top = head_time_.backward(cache.head_in, g_mid);

  // Grads w.r.t. the k levels leaving the last block; only the finest level
  // feeds the head.
  std::vector<Tensor> g_levels;
  g_levels.reserve(static_cast<std::size_t>(cfg_.k));
  g_levels.push_back(std::move(g_top));
  for (std::int64_t i = 1; i < cfg_.k; ++i) {
    g_levels.emplace_back(
        std::vector<std::int64_t>{B, lens_[static_cast<std::size_t>(i)], cfg_.D});
  }

  for (std::int64_t j = cfg_.blocks - 1; j >= 0; --j) {
    const ForwardCache::BlockCache& bc = cache.block[static_cast<std::size_t>(j)];

    // mix: x_i = up(x_{i+1}) + f_i, so the running gradient of x_i flows
    // both into band i and (through the upsampler adjoint) into x_{i+1}.
    std::vector<Tensor> g_learned(static_cast<std::size_t>(cfg_.k));
    g_learned[0] = std::move(g_levels[0]);
    for (std::int64_t i = 1; i < cfg_.k; ++i) {
      const auto li = static_cast<std::size_t>(i);
      g_learned[li] = ew_add(
          g_levels[li],
          upsample_adjoint(g_learned[li - 1], lens_[li], cfg_.upsampler));
    }

    // Both learner branches read the same band input.
    std::vector<Tensor> g_bands(static_cast<std::size_t>(cfg_.k));
    for (std::int64_t i = 0; i < cfg_.k; ++i) {
      const auto ui = static_cast<std::size_t>(unit_index(j, i));
      const auto li = static_cast<std::size_t>(i);
      Tensor g_conv = convs_[ui].backward(bc.bands[li], g_learned[li]);
      Tensor g_branch =
          cfg_.order_policy == OrderPolicy::mlp
              ? mlps_[ui].backward(bc.bands[li], bc.mlp[li], g_learned[li])
              : kans_[ui].backward(bc.kan[li], g_learned[li]);
      g_bands[li] = ew_add(g_conv, g_branch);
    }

    // decompose: f_i = x_i - up(x_{i+1}) for i < k-1, f_{k-1} = x_{k-1}.
    // Each x_{i+1} feeds exactly two bands, so the correction uses the band
    // gradients themselves, not the running input-level gradients.  Walking
    // coarsest-first lets the update happen in place.
    for (std::int64_t i = cfg_.k - 1; i >= 1; --i) {
      const auto li = static_cast<std::size_t>(i);
      g_bands[li] = ew_sub(
          g_bands[li],
          upsample_adjoint(g_bands[li - 1], lens_[li], cfg_.upsampler));
    }
    g_levels = std::move(g_bands);
  }

  // Embeddings are the first learnable stage; the raw pyramid upstream of
  // them carries no parameters, so the input gradient is dropped.
  for (std::int64_t i = 0; i < cfg_.k; ++i) {
    const auto li = static_cast<std::size_t>(i);
    embed_[li].backward(cache.raw_levels[li], g_levels[li]);
  }
}

void Model::zero_grad() {
  visit_params([](Parameter& p) { p.zero_grad(); });
}

void Model::visit_params(const ParamVisitor& fn) {
  for (auto& e : embed_) e.visit(fn);
  for (std::int64_t j = 0; j < cfg_.blocks; ++j) {
    for (std::int64_t i = 0; i < cfg_.k; ++i) {
      const auto u = static_cast<std::size_t>(unit_index(j, i));
      convs_[u].visit(fn);
      if (cfg_.order_policy == OrderPolicy::mlp) {
        mlps_[u].visit(fn);
      } else {
        kans_[u].visit(fn);
      }
    }
  }
  head_time_.visit(fn);
  head_channel_.visit(fn);
}

std::int64_t Model::count_params() const {
  std::int64_t n = 0;
  const_cast<Model*>(this)->visit_params(
      [&n](Parameter& p) { n += p.numel(); });
  return n;
}

namespace {

// Complex-multiply-equivalents for one length-L transform; rounded per
// length so totals stay integer-exact under batch/block scaling.
std::int64_t fft_macs(std::int64_t L) {
  if (L <= 1) return 0;
  return std::llround(2.5 * static_cast<double>(L) *
                      std::log2(static_cast<double>(L)));
}

}  // namespace

std::int64_t Model::estimate_macs(std::int64_t batch) const {
  if (batch < 1) {
    throw ConfigError("estimate_macs: batch must be >= 1, got " +
                      std::to_string(batch));
  }
  const std::int64_t D = cfg_.D;
  std::int64_t once = 0;       // per batch element, independent of blocks
  std::int64_t per_block = 0;  // per batch element, per block
  for (std::int64_t i = 0; i < cfg_.k; ++i) {
    const std::int64_t L = lens_[static_cast<std::size_t>(i)];
    once += L * D;  // 1->D embedding
    const std::int64_t branch =
        cfg_.order_policy == OrderPolicy::mlp
            ? L * D * D * 2
            : L * D * D * (cfg_.kan_order(i) + 1);
    per_block += branch + L * D * cfg_.M;
  }
  for (std::int64_t i = 0; i + 1 < cfg_.k; ++i) {
    const std::int64_t L_out = lens_[static_cast<std::size_t>(i)];
    const std::int64_t L_in = lens_[static_cast<std::size_t>(i + 1)];
    // One upsample during decomposition and one during mixing, per channel.
    const std::int64_t per_upsample = cfg_.upsampler == Upsampler::frequency
                                          ? fft_macs(L_in) + fft_macs(L_out)
                                          : 2 * L_out;
    per_block += 2 * D * per_upsample;
  }
  once += D * cfg_.F * cfg_.T;  // time map, per channel
  once += cfg_.F * D;           // channel map
  return batch * (once + cfg_.blocks * per_block);
}

}  // namespace freqkan
