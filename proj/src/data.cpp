#include "freqkan/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

#include "freqkan/errors.hpp"
#include "freqkan/spectral.hpp"

namespace freqkan {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(begin)));
      break;
    }
    cells.push_back(trim(line.substr(begin, comma - begin)));
    begin = comma + 1;
  }
  return cells;
}

double parse_cell(std::string_view cell, const std::string& path,
                  std::int64_t line_no, std::int64_t col_no,
                  const std::string& col_name) {
  auto fail = [&](const std::string& why) -> DataError {
    return DataError(path + ": line " + std::to_string(line_no) + ", column " +
                     std::to_string(col_no) +
                     (col_name.empty() ? "" : " ('" + col_name + "')") + ": " +
                     why);
  };
  if (cell.empty()) throw fail("empty cell");
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw fail("cannot parse '" + std::string(cell) + "' as a real number");
  }
  if (!std::isfinite(value)) {
    throw fail("non-finite value '" + std::string(cell) + "'");
  }
  return value;
}

}  // namespace

RawDataset load_csv(const std::string& path, bool has_timestamp_col) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);  // UTF-8 byte-order mark
  }

  const std::vector<std::string_view> header = split_line(line);
  const std::size_t skip = has_timestamp_col ? 1 : 0;
  if (header.size() < skip + 1) {
    throw DataError(path + ": header must list at least one data column" +
                    std::string(has_timestamp_col
                                    ? " after the timestamp column"
                                    : ""));
  }

  RawDataset raw;
  for (std::size_t c = skip; c < header.size(); ++c) {
    raw.column_names.emplace_back(header[c]);
  }
  raw.cols = static_cast<std::int64_t>(raw.column_names.size());

  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) {
      if (in.peek() == std::ifstream::traits_type::eof()) break;
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": empty row");
    }
    const std::vector<std::string_view> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    }
    for (std::size_t c = skip; c < cells.size(); ++c) {
      raw.values.push_back(parse_cell(
          cells[c], path, line_no, static_cast<std::int64_t>(c + 1),
          raw.column_names[c - skip]));
    }
    ++raw.rows;
  }
  if (raw.rows == 0) throw DataError(path + ": no data rows");
  return raw;
}

DatasetFamily family_from_string(const std::string& s) {
  if (s == "ett") return DatasetFamily::ett;
  if (s == "other") return DatasetFamily::other;
  throw ConfigError("unknown dataset family '" + s + "' (expected ett or other)");
}

std::string to_string(DatasetFamily f) {
  return f == DatasetFamily::ett ? "ett" : "other";
}

std::string to_string(SplitPart p) {
  switch (p) {
    case SplitPart::train: return "train";
    case SplitPart::val: return "val";
    case SplitPart::test: return "test";
  }
  return "?";
}

std::int64_t DatasetSplit::part_begin(SplitPart p) const {
  switch (p) {
    case SplitPart::train: return 0;
    case SplitPart::val: return train_rows;
    case SplitPart::test: return train_rows + val_rows;
  }
  return 0;
}

std::int64_t DatasetSplit::part_rows(SplitPart p) const {
  switch (p) {
    case SplitPart::train: return train_rows;
    case SplitPart::val: return val_rows;
    case SplitPart::test: return test_rows;
  }
  return 0;
}

DatasetSplit split_and_standardize(const RawDataset& raw, DatasetFamily family,
                                   std::int64_t T, std::int64_t F) {
  if (T < 1 || F < 1) {
    throw ConfigError("split: T and F must be >= 1, got T=" + std::to_string(T) +
                      " F=" + std::to_string(F));
  }
  DatasetSplit split;
  split.column_names = raw.column_names;
  split.rows = raw.rows;
  split.cols = raw.cols;

  const double train_ratio = family == DatasetFamily::ett ? 0.6 : 0.7;
  const double val_ratio = family == DatasetFamily::ett ? 0.2 : 0.1;
  split.train_rows =
      static_cast<std::int64_t>(std::floor(train_ratio * static_cast<double>(raw.rows)));
  split.val_rows =
      static_cast<std::int64_t>(std::floor(val_ratio * static_cast<double>(raw.rows)));
  split.test_rows = raw.rows - split.train_rows - split.val_rows;

  const std::int64_t need = T + F;
  for (SplitPart p : {SplitPart::train, SplitPart::val, SplitPart::test}) {
    if (split.part_rows(p) < need) {
      throw DataError("the " + to_string(p) + " split has " +
                      std::to_string(split.part_rows(p)) +
                      " rows but one window needs at least T+F = " +
                      std::to_string(need));
    }
  }

  split.mean.assign(static_cast<std::size_t>(raw.cols), 0.0);
  split.stddev.assign(static_cast<std::size_t>(raw.cols), 0.0);
  for (std::int64_t c = 0; c < raw.cols; ++c) {
    double sum = 0.0;
    for (std::int64_t r = 0; r < split.train_rows; ++r) sum += raw.value(r, c);
    const double mean = sum / static_cast<double>(split.train_rows);
    double var = 0.0;
    for (std::int64_t r = 0; r < split.train_rows; ++r) {
      const double d = raw.value(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(split.train_rows);
    const double sd = std::sqrt(var);
    if (sd == 0.0) {
      throw DataError("column '" + raw.column_names[static_cast<std::size_t>(c)] +
                      "' is constant over the training rows; it cannot be "
                      "standardized (drop it or extend the data)");
    }
    split.mean[static_cast<std::size_t>(c)] = mean;
    split.stddev[static_cast<std::size_t>(c)] = sd;
  }

  split.standardized.resize(static_cast<std::size_t>(raw.rows * raw.cols));
  for (std::int64_t r = 0; r < raw.rows; ++r) {
    for (std::int64_t c = 0; c < raw.cols; ++c) {
      split.standardized[static_cast<std::size_t>(r * raw.cols + c)] =
          (raw.value(r, c) - split.mean[static_cast<std::size_t>(c)]) /
          split.stddev[static_cast<std::size_t>(c)];
    }
  }
  return split;
}

WindowStream::WindowStream(const DatasetSplit& split, SplitPart part,
                           std::int64_t T, std::int64_t F, std::int64_t stride)
    : split_(&split),
      part_begin_(split.part_begin(part)),
      T_(T),
      F_(F),
      stride_(stride) {
  if (stride < 1) {
    throw ConfigError("window stride must be >= 1, got " + std::to_string(stride));
  }
  const std::int64_t len = split.part_rows(part);
  if (len < T + F) {
    throw DataError("the " + to_string(part) + " split has " +
                    std::to_string(len) + " rows but one window needs T+F = " +
                    std::to_string(T + F));
  }
  starts_ = (len - T - F) / stride + 1;
  order_.resize(static_cast<std::size_t>(starts_ * split.cols));
  std::iota(order_.begin(), order_.end(), std::int64_t{0});
}

WindowBatch WindowStream::batch(std::int64_t begin, std::int64_t size) const {
  if (begin < 0 || begin >= sample_count()) {
    throw ConfigError("batch begin " + std::to_string(begin) +
                      " out of range [0, " + std::to_string(sample_count()) + ")");
  }
  const std::int64_t B = std::min(size, sample_count() - begin);
  WindowBatch out{Tensor({B, T_}), Tensor({B, F_})};
  for (std::int64_t j = 0; j < B; ++j) {
    const std::int64_t id = order_[static_cast<std::size_t>(begin + j)];
    const std::int64_t start = (id / split_->cols) * stride_;
    const std::int64_t col = id % split_->cols;
    const std::int64_t row0 = part_begin_ + start;
    for (std::int64_t t = 0; t < T_; ++t) {
      out.inputs(j, t) = split_->value(row0 + t, col);
    }
    for (std::int64_t f = 0; f < F_; ++f) {
      out.targets(j, f) = split_->value(row0 + T_ + f, col);
    }
  }
  return out;
}

void WindowStream::shuffle(Rng& rng) { rng.shuffle(order_); }

void WindowStream::reset_ascending() {
  std::iota(order_.begin(), order_.end(), std::int64_t{0});
}

std::vector<double> mean_effective_frequencies(const RawDataset& raw,
                                               std::int64_t window,
                                               double ratio) {
  if (window < 1 || window > raw.rows) {
    throw ConfigError("effective-frequency window " + std::to_string(window) +
                      " does not fit a dataset of " + std::to_string(raw.rows) +
                      " rows");
  }
  const std::int64_t count = raw.rows / window;
  std::vector<double> per_col(static_cast<std::size_t>(raw.cols) + 1, 0.0);
  std::vector<double> buf(static_cast<std::size_t>(window));
  double overall = 0.0;
  for (std::int64_t c = 0; c < raw.cols; ++c) {
    double acc = 0.0;
    for (std::int64_t w = 0; w < count; ++w) {
      for (std::int64_t t = 0; t < window; ++t) {
        buf[static_cast<std::size_t>(t)] = raw.value(w * window + t, c);
      }
      acc += static_cast<double>(
          effective_frequency_count(buf.data(), window, ratio));
    }
    per_col[static_cast<std::size_t>(c)] = acc / static_cast<double>(count);
    overall += per_col[static_cast<std::size_t>(c)];
  }
  per_col.back() = overall / static_cast<double>(raw.cols);
  return per_col;
}

}  // namespace freqkan
