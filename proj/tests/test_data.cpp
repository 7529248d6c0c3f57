#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "freqkan/data.hpp"
#include "freqkan/errors.hpp"
#include "freqkan/rng.hpp"

using namespace freqkan;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& tag, const std::string& content) {
    path = fs::temp_directory_path() /
           ("freqkan-data-" + tag + "-" + std::to_string(::getpid()) + ".csv");
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << content;
  }
  ~TempFile() { fs::remove(path); }
  std::string str() const { return path.string(); }
};

RawDataset sine_raw(std::int64_t rows, std::int64_t cols, double mean = 0.0) {
  RawDataset raw;
  raw.rows = rows;
  raw.cols = cols;
  for (std::int64_t c = 0; c < cols; ++c) {
    raw.column_names.push_back("c" + std::to_string(c));
  }
  Rng rng(40 + static_cast<std::uint64_t>(cols));
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      const double x = static_cast<double>(r);
      raw.values.push_back(mean + std::sin(2.0 * M_PI * x / 24.0 +
                                           static_cast<double>(c)) +
                           0.05 * std::cos(2.0 * M_PI * x / 7.0) +
                           0.02 * rng.uniform(-1.0, 1.0));
    }
  }
  return raw;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("load_csv parses a toy file and preserves column order") {
  TempFile f("toy",
             "date,alpha,beta\n"
             "2016-01-01,1.5,-2\n"
             "2016-01-02,2.5,3e-1\n"
             "2016-01-03,.75,4\n");
  RawDataset raw = load_csv(f.str(), true);
  CHECK(raw.rows == 3);
  CHECK(raw.cols == 2);
  CHECK(raw.column_names == std::vector<std::string>{"alpha", "beta"});
  CHECK(raw.value(0, 0) == 1.5);
  CHECK(raw.value(0, 1) == -2.0);
  CHECK(raw.value(1, 1) == doctest::Approx(0.3));
  CHECK(raw.value(2, 0) == 0.75);
}

TEST_CASE("load_csv without a timestamp column keeps every column") {
  TempFile f("plain", "a,b,c\n1,2,3\n4,5,6\n");
  RawDataset raw = load_csv(f.str(), false);
  CHECK(raw.cols == 3);
  CHECK(raw.rows == 2);
  CHECK(raw.value(1, 2) == 6.0);
}

TEST_CASE("load_csv handles BOM and CRLF line endings") {
  TempFile f("crlf", "\xEF\xBB\xBF" "date,v\r\n2016,1.25\r\n2017,2.5\r\n");
  RawDataset raw = load_csv(f.str(), true);
  CHECK(raw.column_names == std::vector<std::string>{"v"});
  CHECK(raw.rows == 2);
  CHECK(raw.value(1, 0) == 2.5);
}

TEST_CASE("load_csv rejects malformed input naming the location") {
  auto message_of = [](const std::string& content) {
    TempFile f("bad", content);
    try {
      load_csv(f.str(), true);
      return std::string("no error");
    } catch (const DataError& e) {
      return std::string(e.what());
    }
  };

  SUBCASE("non-numeric cell") {
    const std::string msg = message_of("date,v\n2016,1\n2016,oops\n");
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
    CHECK(msg.find("oops") != std::string::npos);
  }
  SUBCASE("NaN cell") {
    const std::string msg = message_of("date,v\n2016,NaN\n");
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("non-finite") != std::string::npos);
  }
  SUBCASE("ragged row") {
    const std::string msg = message_of("date,a,b\n2016,1,2\n2016,3\n");
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("2 cells") != std::string::npos);
  }
  SUBCASE("empty cell") {
    const std::string msg = message_of("date,a,b\n2016,1,\n");
    CHECK(msg.find("empty cell") != std::string::npos);
  }
  SUBCASE("timestamp-only header") {
    const std::string msg = message_of("date\n2016\n");
    CHECK(msg.find("at least one data column") != std::string::npos);
  }
  SUBCASE("no data rows") {
    const std::string msg = message_of("date,v\n");
    CHECK(msg.find("no data rows") != std::string::npos);
  }
  CHECK_THROWS_AS(load_csv("/nonexistent.csv", true), DataError);
}

TEST_CASE("split boundaries follow the family ratios with floors") {
  RawDataset raw = sine_raw(100, 2);
  DatasetSplit ett = split_and_standardize(raw, DatasetFamily::ett, 8, 8);
  CHECK(ett.train_rows == 60);
  CHECK(ett.val_rows == 20);
  CHECK(ett.test_rows == 20);
  CHECK(ett.part_begin(SplitPart::val) == 60);
  CHECK(ett.part_begin(SplitPart::test) == 80);

  DatasetSplit other = split_and_standardize(raw, DatasetFamily::other, 4, 4);
  CHECK(other.train_rows == 70);
  CHECK(other.val_rows == 10);
  CHECK(other.test_rows == 20);
}

TEST_CASE("standardization uses train statistics only") {
  RawDataset raw = sine_raw(200, 3, 2.5);
  DatasetSplit split = split_and_standardize(raw, DatasetFamily::ett, 16, 16);

  for (std::int64_t c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (std::int64_t r = 0; r < split.train_rows; ++r) mean += split.value(r, c);
    mean /= static_cast<double>(split.train_rows);
    double var = 0.0;
    for (std::int64_t r = 0; r < split.train_rows; ++r) {
      const double d = split.value(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(split.train_rows);
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-9);
  }

  // Leakage probe: rewriting val/test rows leaves the statistics bit-equal.
  RawDataset tampered = raw;
  for (std::int64_t r = split.train_rows; r < raw.rows; ++r) {
    for (std::int64_t c = 0; c < raw.cols; ++c) {
      tampered.values[static_cast<std::size_t>(r * raw.cols + c)] = 1000.0 + static_cast<double>(r + c);
    }
  }
  DatasetSplit split2 = split_and_standardize(tampered, DatasetFamily::ett, 16, 16);
  CHECK(split2.mean == split.mean);
  CHECK(split2.stddev == split.stddev);

  // Round trip back to raw units.
  for (std::int64_t r = 0; r < raw.rows; ++r) {
    for (std::int64_t c = 0; c < raw.cols; ++c) {
      CHECK(std::abs(split.destandardize(split.value(r, c), c) -
                     raw.value(r, c)) <= 1e-10);
    }
  }
}

TEST_CASE("split rejects constant columns and too-short parts") {
  RawDataset raw = sine_raw(100, 2);
  for (std::int64_t r = 0; r < raw.rows; ++r) {
    raw.values[static_cast<std::size_t>(r * raw.cols + 1)] = 42.0;
  }
  try {
    split_and_standardize(raw, DatasetFamily::ett, 8, 8);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("'c1'") != std::string::npos);
    CHECK(std::string(e.what()).find("constant") != std::string::npos);
  }

  RawDataset small = sine_raw(100, 1);
  try {
    split_and_standardize(small, DatasetFamily::ett, 16, 16);  // val has 20 < 32
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("T+F") != std::string::npos);
    CHECK(msg.find("32") != std::string::npos);
  }
}

TEST_CASE("window streams enumerate every start crossed with every column") {
  RawDataset raw = sine_raw(160, 2);
  DatasetSplit split = split_and_standardize(raw, DatasetFamily::ett, 8, 8);
  // ett split of 160 rows: 96/32/32.

  WindowStream val(split, SplitPart::val, 8, 8);
  CHECK(val.start_count() == 32 - 16 + 1);
  CHECK(val.sample_count() == 17 * 2);

  // Exactly one window when the part length equals T+F.
  WindowStream one(split, SplitPart::val, 8, 24);
  CHECK(one.start_count() == 1);

  // Three windows at part length T+F+2.
  WindowStream three(split, SplitPart::val, 8, 22);
  CHECK(three.start_count() == 3);

  WindowBatch b = val.batch(0, 4);
  CHECK(b.inputs.shape() == std::vector<std::int64_t>{4, 8});
  CHECK(b.targets.shape() == std::vector<std::int64_t>{4, 8});
  const std::int64_t val_begin = split.part_begin(SplitPart::val);
  // Ascending order is start-major: (s0,c0), (s0,c1), (s1,c0), ...
  CHECK(b.inputs(0, 0) == split.value(val_begin, 0));
  CHECK(b.inputs(1, 0) == split.value(val_begin, 1));
  CHECK(b.inputs(2, 0) == split.value(val_begin + 1, 0));
  // Target adjacency: first target row immediately follows the input.
  CHECK(b.targets(0, 0) == split.value(val_begin + 8, 0));
  CHECK(b.targets(2, 7) == split.value(val_begin + 1 + 15, 0));

  // Clipped final batch.
  WindowBatch tail = val.batch(val.sample_count() - 3, 10);
  CHECK(tail.inputs.dim(0) == 3);
  CHECK_THROWS_AS(val.batch(val.sample_count(), 1), ConfigError);
  CHECK_THROWS_AS(WindowStream(split, SplitPart::val, 8, 8, 0), ConfigError);
}

TEST_CASE("train shuffling is seeded and reversible") {
  RawDataset raw = sine_raw(200, 2);
  DatasetSplit split = split_and_standardize(raw, DatasetFamily::other, 8, 8);
  WindowStream a(split, SplitPart::train, 8, 8);
  WindowStream b(split, SplitPart::train, 8, 8);

  Rng ra(123), rb(123);
  a.shuffle(ra);
  b.shuffle(rb);
  WindowBatch ba = a.batch(0, 16);
  WindowBatch bb = b.batch(0, 16);
  CHECK(ba.inputs.vec() == bb.inputs.vec());
  CHECK(ba.targets.vec() == bb.targets.vec());

  // A different seed reorders (overwhelmingly likely for 248 samples).
  Rng rc(124);
  b.shuffle(rc);
  CHECK(b.batch(0, 16).inputs.vec() != ba.inputs.vec());

  // reset_ascending restores the deterministic evaluation order.
  a.reset_ascending();
  WindowBatch first = a.batch(0, 1);
  CHECK(first.inputs(0, 0) == split.value(0, 0));
}

TEST_CASE("longer windows resolve more effective frequencies") {
  RawDataset raw;
  raw.rows = 2048;
  raw.cols = 2;
  raw.column_names = {"a", "b"};
  Rng rng(7);
  for (std::int64_t r = 0; r < raw.rows; ++r) {
    const double x = static_cast<double>(r);
    raw.values.push_back(1.0 + std::sin(2.0 * M_PI * x / 24.0) +
                         0.5 * std::sin(2.0 * M_PI * x / 168.0) +
                         0.05 * rng.uniform(-1.0, 1.0));
    raw.values.push_back(0.5 + 0.8 * std::cos(2.0 * M_PI * x / 24.0) +
                         0.4 * std::sin(2.0 * M_PI * x / 168.0 + 1.0) +
                         0.05 * rng.uniform(-1.0, 1.0));
  }
  const std::vector<double> short_counts = mean_effective_frequencies(raw, 96);
  const std::vector<double> long_counts = mean_effective_frequencies(raw, 512);
  REQUIRE(short_counts.size() == 3);  // per column + overall mean
  REQUIRE(long_counts.size() == 3);
  CHECK(long_counts.back() > short_counts.back());

  // A constant column scores exactly one effective bin.
  RawDataset flat;
  flat.rows = 96;
  flat.cols = 1;
  flat.column_names = {"k"};
  flat.values.assign(96, 5.0);
  CHECK(mean_effective_frequencies(flat, 96)[0] == 1.0);

  CHECK_THROWS_AS(mean_effective_frequencies(flat, 97), ConfigError);
}

TEST_CASE("fixture generators emit loadable files") {
  const std::string dir = fs::temp_directory_path().string();
  const std::string two_tone = dir + "/freqkan-fixture-two-tone.csv";
  const std::string ett = dir + "/freqkan-fixture-ett.csv";
  fixtures::write_two_tone_csv(two_tone, 512, 0.1, 3);
  fixtures::write_ett_like_csv(ett, 600, 4);

  RawDataset a = load_csv(two_tone, true);
  CHECK(a.rows == 512);
  CHECK(a.cols == 1);
  RawDataset b = load_csv(ett, true);
  CHECK(b.rows == 600);
  CHECK(b.cols == 7);
  CHECK(b.column_names[6] == "OT");

  // Deterministic generation.
  fixtures::write_two_tone_csv(two_tone + ".again", 512, 0.1, 3);
  std::ifstream f1(two_tone), f2(two_tone + ".again");
  std::string s1((std::istreambuf_iterator<char>(f1)), {});
  std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
  fs::remove(two_tone);
  fs::remove(two_tone + ".again");
  fs::remove(ett);
}

}  // TEST_SUITE
