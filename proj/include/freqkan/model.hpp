#pragma once

// The full forecasting network: a moving-average level pyramid over the
// look-back window, per-level band residuals computed against the
// spectrally upsampled coarser level, a dual-branch learner per band
// (depthwise convolution + Chebyshev-KAN), band mixing back up the
// pyramid, and a factorized linear head (time axis T->F, then channels
// D->1).  One model instance forecasts one column; multivariate datasets
// share the weights across columns.

#include <cstdint>
#include <string>
#include <vector>

#include "freqkan/layers.hpp"
#include "freqkan/parameter.hpp"
#include "freqkan/spectral.hpp"
#include "freqkan/tensor.hpp"

namespace freqkan {

enum class OrderPolicy { multi_order, fixed, mlp };

std::string to_string(OrderPolicy p);
std::string to_string(Upsampler u);
OrderPolicy order_policy_from_string(const std::string& s);
Upsampler upsampler_from_string(const std::string& s);

struct ModelConfig {
  std::int64_t T = 96;   // look-back length
  std::int64_t F = 96;   // forecast horizon
  std::int64_t D = 16;   // embedding width
  std::int64_t k = 4;    // number of pyramid levels
  std::int64_t d = 2;    // moving-average window / downsample factor
  int b = 2;             // polynomial order at the coarsest level
  std::int64_t M = 3;    // depthwise kernel taps (odd)
  std::int64_t blocks = 1;
  OrderPolicy order_policy = OrderPolicy::multi_order;
  int fixed_order = 2;   // used when order_policy == fixed
  Upsampler upsampler = Upsampler::frequency;
  bool instance_norm = true;
  std::uint64_t seed = 2024;

  // Throws ConfigError on any violated constraint.
  void validate() const;

  // Lengths T, T/d, ..., T/d^{k-1} (validated to divide exactly).
  std::vector<std::int64_t> level_lengths() const;

  // Polynomial order of the band learner at 0-based level i.  The finest
  // level gets the highest order (b + k - 1), the coarsest gets b.
  int kan_order(std::int64_t level) const;
};

// The k level sequences and their band residuals; level i is shaped
// (B, T/d^i, D) and lengths strictly decrease by factor d.
struct LevelStack {
  std::vector<Tensor> levels;
  std::vector<Tensor> bands;
};

// Intermediates captured by forward() and consumed by backward().  Owned
// by the caller so concurrent inference on a frozen model stays possible.
struct ForwardCache {
  bool valid = false;
  std::int64_t batch = 0;
  std::vector<double> norm_mean;   // per-row window mean (instance norm)
  std::vector<double> norm_scale;  // per-row std + 1e-5 (instance norm)
  std::vector<Tensor> raw_levels;  // (B, L_i, 1) downsampled raw series

  struct BlockCache {
    std::vector<Tensor> bands;  // learner inputs f_i
    std::vector<ChebyKanLayer::Cache> kan;
    std::vector<MlpBlock::Cache> mlp;
  };
  std::vector<BlockCache> block;

  Tensor head_in;   // finest level entering the head, (B, T, D)
  Tensor head_mid;  // after the time map, (B, F, D)
};

class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return cfg_; }
  const std::vector<std::int64_t>& level_lengths() const { return lens_; }

  // (B, T) raw windows -> (B, F) raw-unit forecasts.  Pass a cache to
  // enable backward().
  Tensor forward(const Tensor& x, ForwardCache* cache = nullptr) const;

  // Accumulates dLoss/dParameter into every Parameter::grad given
  // dLoss/dOutput.  Requires the cache filled by a prior forward().
  void backward(const ForwardCache& cache, const Tensor& upstream);

  // --- pipeline stages, exposed for direct testing ---

  // Normalized windows (B, T) -> k embedded levels (B, L_i, D).
  std::vector<Tensor> build_levels(const Tensor& x, ForwardCache* cache) const;
  // Levels -> band residuals: f_i = x_i - up(x_{i+1}); f_{k-1} = x_{k-1}.
  std::vector<Tensor> decompose(const std::vector<Tensor>& levels) const;
  // Bands -> learned bands via conv + KAN (or conv + MLP) per level.
  std::vector<Tensor> learn_bands(const std::vector<Tensor>& bands,
                                  std::int64_t block,
                                  ForwardCache::BlockCache* cache) const;
  // Learned bands -> levels: x_{k-1} = f_{k-1}; x_i = up(x_{i+1}) + f_i.
  std::vector<Tensor> mix(const std::vector<Tensor>& bands) const;

  void zero_grad();
  void visit_params(const ParamVisitor& fn);
  std::int64_t count_params() const;

  // Closed-form multiply-accumulate estimate for one forward pass at the
  // given batch size: KAN evaluations, depthwise taps, the linear maps,
  // and 2.5*L*log2(L) per length-L transform (rounded per length so the
  // total is exactly linear in batch and affine in blocks).
  std::int64_t estimate_macs(std::int64_t batch) const;

 private:
  std::int64_t unit_index(std::int64_t block, std::int64_t level) const {
    return block * cfg_.k + level;
  }

  ModelConfig cfg_;
  std::vector<std::int64_t> lens_;
  std::vector<LinearMap> embed_;        // k maps 1 -> D
  std::vector<DepthwiseConv1d> convs_;  // blocks*k, [block*k + level]
  std::vector<ChebyKanLayer> kans_;     // blocks*k unless policy == mlp
  std::vector<MlpBlock> mlps_;          // blocks*k when policy == mlp
  LinearMap head_time_;                 // T -> F along the time axis
  LinearMap head_channel_;              // D -> 1 along channels
};

}  // namespace freqkan
