#pragma once

// CSV ingestion, train-statistics standardization, chronological splits,
// and sliding-window sampling.  Windows are univariate: every (start,
// column) pair becomes one sample, so a multivariate dataset is exactly N
// concatenated univariate forecasting problems sharing one model.

#include <cstdint>
#include <string>
#include <vector>

#include "freqkan/rng.hpp"
#include "freqkan/tensor.hpp"

namespace freqkan {

struct RawDataset {
  std::vector<std::string> column_names;  // numeric columns only
  std::vector<double> values;             // row-major, rows x cols
  std::int64_t rows = 0;
  std::int64_t cols = 0;

  double value(std::int64_t r, std::int64_t c) const {
    return values[static_cast<std::size_t>(r * cols + c)];
  }
};

// Header row required; when `has_timestamp_col`, the first column is
// skipped (its cells may hold anything).  Every other cell must parse as a
// finite real; violations name the line and column.
RawDataset load_csv(const std::string& path, bool has_timestamp_col);

enum class DatasetFamily { ett, other };
DatasetFamily family_from_string(const std::string& s);
std::string to_string(DatasetFamily f);

enum class SplitPart { train, val, test };
std::string to_string(SplitPart p);

// Chronological split (6:2:2 for ett, 7:1:2 otherwise, floor boundaries)
// with per-column z-scoring by train-only statistics.
struct DatasetSplit {
  std::vector<std::string> column_names;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::int64_t train_rows = 0;
  std::int64_t val_rows = 0;
  std::int64_t test_rows = 0;
  std::vector<double> mean;     // per column, train rows only
  std::vector<double> stddev;   // per column, train rows only (> 0)
  std::vector<double> standardized;  // row-major, rows x cols

  std::int64_t part_begin(SplitPart p) const;
  std::int64_t part_rows(SplitPart p) const;
  double value(std::int64_t r, std::int64_t c) const {
    return standardized[static_cast<std::size_t>(r * cols + c)];
  }
  double destandardize(double v, std::int64_t c) const {
    return v * stddev[static_cast<std::size_t>(c)] +
           mean[static_cast<std::size_t>(c)];
  }
};

// Throws DataError if any split is shorter than T+F (message states the
// minimum) or if a train column is constant.
DatasetSplit split_and_standardize(const RawDataset& raw, DatasetFamily family,
                                   std::int64_t T, std::int64_t F);

struct WindowBatch {
  Tensor inputs;   // (B, T)
  Tensor targets;  // (B, F), starting the row after the input ends
};

// Every start s with s*stride + T + F <= part length, crossed with every
// column.  Iteration order is ascending (start-major) until shuffled.
class WindowStream {
 public:
  WindowStream(const DatasetSplit& split, SplitPart part, std::int64_t T,
               std::int64_t F, std::int64_t stride = 1);

  std::int64_t sample_count() const {
    return static_cast<std::int64_t>(order_.size());
  }
  std::int64_t start_count() const { return starts_; }

  // Samples [begin, begin + size) in the current order; clipped at the end.
  WindowBatch batch(std::int64_t begin, std::int64_t size) const;

  void shuffle(Rng& rng);
  void reset_ascending();

 private:
  const DatasetSplit* split_;
  std::int64_t part_begin_ = 0;
  std::int64_t T_ = 0;
  std::int64_t F_ = 0;
  std::int64_t stride_ = 1;
  std::int64_t starts_ = 0;
  std::vector<std::int64_t> order_;  // sample id = start_index * cols + col
};

// Per-variate mean effective-frequency count over consecutive
// non-overlapping windows of the given length (plus the overall mean as
// the last entry).  Used by the window-length spectral study.
std::vector<double> mean_effective_frequencies(const RawDataset& raw,
                                               std::int64_t window,
                                               double ratio = 0.1);

}  // namespace freqkan
