#include "freqkan/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "freqkan/checkpoint.hpp"
#include "freqkan/errors.hpp"
#include "freqkan/gradcheck.hpp"

namespace freqkan {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config key table
// ---------------------------------------------------------------------------

enum class KeyKind { integer, real, boolean, text };

std::int64_t as_i64(const std::string& key, const json& v) {
  if (v.is_number_unsigned() &&
      v.get<std::uint64_t>() >
          static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw ConfigError("config key " + key + " is out of range: " + v.dump());
  }
  if (!v.is_number_integer()) {
    throw ConfigError("config key " + key + " expects an integer, got " +
                      v.dump());
  }
  return v.get<std::int64_t>();
}

int as_int(const std::string& key, const json& v) {
  const std::int64_t x = as_i64(key, v);
  if (x < std::numeric_limits<int>::min() ||
      x > std::numeric_limits<int>::max()) {
    throw ConfigError("config key " + key + " is out of range: " + v.dump());
  }
  return static_cast<int>(x);
}

std::uint64_t as_u64(const std::string& key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError("config key " + key +
                    " expects a non-negative integer, got " + v.dump());
}

double as_f64(const std::string& key, const json& v) {
  if (!v.is_number()) {
    throw ConfigError("config key " + key + " expects a number, got " +
                      v.dump());
  }
  return v.get<double>();
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) {
    throw ConfigError("config key " + key + " expects true or false, got " +
                      v.dump());
  }
  return v.get<bool>();
}

std::string as_text(const std::string& key, const json& v) {
  if (!v.is_string()) {
    throw ConfigError("config key " + key + " expects a string, got " +
                      v.dump());
  }
  return v.get<std::string>();
}

struct KeySpec {
  KeyKind kind;
  std::function<void(RunConfig&, const json&)> set;
};

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = [] {
    constexpr KeyKind I = KeyKind::integer;
    constexpr KeyKind R = KeyKind::real;
    constexpr KeyKind B = KeyKind::boolean;
    constexpr KeyKind S = KeyKind::text;
    std::map<std::string, KeySpec> t;
    t["model.T"] = {I, [](RunConfig& rc, const json& v) { rc.model.T = as_i64("model.T", v); }};
    t["model.F"] = {I, [](RunConfig& rc, const json& v) { rc.model.F = as_i64("model.F", v); }};
    t["model.D"] = {I, [](RunConfig& rc, const json& v) { rc.model.D = as_i64("model.D", v); }};
    t["model.k"] = {I, [](RunConfig& rc, const json& v) { rc.model.k = as_i64("model.k", v); }};
    t["model.d"] = {I, [](RunConfig& rc, const json& v) { rc.model.d = as_i64("model.d", v); }};
    t["model.b"] = {I, [](RunConfig& rc, const json& v) { rc.model.b = as_int("model.b", v); }};
    t["model.M"] = {I, [](RunConfig& rc, const json& v) { rc.model.M = as_i64("model.M", v); }};
    t["model.blocks"] = {I, [](RunConfig& rc, const json& v) { rc.model.blocks = as_i64("model.blocks", v); }};
    t["model.order_policy"] = {S, [](RunConfig& rc, const json& v) {
      rc.model.order_policy = order_policy_from_string(as_text("model.order_policy", v));
    }};
    t["model.fixed_order"] = {I, [](RunConfig& rc, const json& v) {
      rc.model.fixed_order = as_int("model.fixed_order", v);
    }};
    t["model.upsampler"] = {S, [](RunConfig& rc, const json& v) {
      rc.model.upsampler = upsampler_from_string(as_text("model.upsampler", v));
    }};
    t["model.instance_norm"] = {B, [](RunConfig& rc, const json& v) {
      rc.model.instance_norm = as_bool("model.instance_norm", v);
    }};
    t["model.seed"] = {I, [](RunConfig& rc, const json& v) { rc.model.seed = as_u64("model.seed", v); }};
    t["train.lr"] = {R, [](RunConfig& rc, const json& v) { rc.train.lr = as_f64("train.lr", v); }};
    t["train.batch_size"] = {I, [](RunConfig& rc, const json& v) {
      rc.train.batch_size = as_i64("train.batch_size", v);
    }};
    t["train.max_epochs"] = {I, [](RunConfig& rc, const json& v) {
      rc.train.max_epochs = as_i64("train.max_epochs", v);
    }};
    t["train.patience"] = {I, [](RunConfig& rc, const json& v) {
      rc.train.patience = as_i64("train.patience", v);
    }};
    t["train.beta1"] = {R, [](RunConfig& rc, const json& v) { rc.train.beta1 = as_f64("train.beta1", v); }};
    t["train.beta2"] = {R, [](RunConfig& rc, const json& v) { rc.train.beta2 = as_f64("train.beta2", v); }};
    t["train.eps"] = {R, [](RunConfig& rc, const json& v) { rc.train.eps = as_f64("train.eps", v); }};
    t["train.clip_norm"] = {R, [](RunConfig& rc, const json& v) {
      rc.train.clip_norm = as_f64("train.clip_norm", v);
    }};
    t["train.seed"] = {I, [](RunConfig& rc, const json& v) { rc.train.seed = as_u64("train.seed", v); }};
    t["data.csv"] = {S, [](RunConfig& rc, const json& v) { rc.csv = as_text("data.csv", v); }};
    t["data.family"] = {S, [](RunConfig& rc, const json& v) {
      rc.family = family_from_string(as_text("data.family", v));
    }};
    t["data.timestamp_col"] = {S, [](RunConfig& rc, const json& v) {
      const std::string s = as_text("data.timestamp_col", v);
      if (s != "auto" && s != "yes" && s != "no") {
        throw ConfigError("config key data.timestamp_col must be auto, yes, or no, got '" + s + "'");
      }
      rc.timestamp_col = s;
    }};
    t["out"] = {S, [](RunConfig& rc, const json& v) { rc.out = as_text("out", v); }};
    t["seed"] = {I, [](RunConfig& rc, const json& v) {
      const std::uint64_t s = as_u64("seed", v);
      rc.model.seed = s;
      rc.train.seed = s;
    }};
    return t;
  }();
  return table;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw DataError("failed while writing " + path.string());
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

void write_resolved_config(const RunConfig& rc) {
  fs::create_directories(rc.out);
  write_text_file(fs::path(rc.out) / "resolved_config.json",
                  resolved_config_json(rc).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Data plumbing
// ---------------------------------------------------------------------------

// auto mode: the file has a timestamp column iff the first cell of the
// first data row does not parse as a finite number.  I/O trouble defers to
// load_csv, whose errors name the path.
bool sniff_timestamp_column(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line)) return false;  // header
  if (!std::getline(in, line)) return false;  // first data row
  std::string cell = line.substr(0, line.find(','));
  while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
  std::size_t i = 0;
  while (i < cell.size() && cell[i] == ' ') ++i;
  double v = 0.0;
  const char* b = cell.data() + i;
  const char* e = cell.data() + cell.size();
  auto [p, ec] = std::from_chars(b, e, v);
  return !(ec == std::errc{} && p == e && std::isfinite(v));
}

bool resolve_timestamp(const std::string& path, const std::string& mode) {
  if (mode == "yes") return true;
  if (mode == "no") return false;
  return sniff_timestamp_column(path);
}

RawDataset load_raw(const RunConfig& rc, const std::string& path) {
  if (path.empty()) {
    throw ConfigError("data.csv is required for this command (set it in the config file or via --set data.csv=<path>)");
  }
  return load_csv(path, resolve_timestamp(path, rc.timestamp_col));
}

DatasetSplit load_split(const RunConfig& rc) {
  const RawDataset raw = load_raw(rc, rc.csv);
  return split_and_standardize(raw, rc.family, rc.model.T, rc.model.F);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string bracket_list(const std::vector<std::int64_t>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(xs[i]);
  }
  return s + "]";
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_train(const RunConfig& rc) {
  rc.model.validate();
  rc.train.validate();
  write_resolved_config(rc);
  const DatasetSplit split = load_split(rc);
  Model model{rc.model};
  const FitReport report = fit(model, split, rc.train);
  write_text_file(fs::path(rc.out) / "metrics.json",
                  fit_report_to_json(report).dump(2) + "\n");
  save_checkpoint(model, rc.out);
  std::cout << "train: epochs=" << report.train_loss.size()
            << " best_epoch=" << report.best_epoch
            << " best_val_mse=" << format_double(report.best_val_mse)
            << " test_mse=" << format_double(report.test_mse)
            << " test_mae=" << format_double(report.test_mae) << "\n"
            << "wrote " << (fs::path(rc.out) / "metrics.json").string()
            << ", model.ckpt, model.manifest.json, resolved_config.json\n";
  return 0;
}

// Checkpoint-backed commands take the model shape from the checkpoint
// manifest, so a plain `--checkpoint` works without restating the training
// config.  Keys the user explicitly set are applied on top; if one disagrees
// with the manifest, load_checkpoint rejects the mix and names the fields.
ModelConfig model_config_for_checkpoint(const RunConfig& rc,
                                        const std::string& ckpt) {
  ModelConfig mc = checkpoint_config(ckpt);
  const auto set = [&](const char* key) {
    return rc.explicit_keys.count(key) > 0;
  };
  if (set("model.T")) mc.T = rc.model.T;
  if (set("model.F")) mc.F = rc.model.F;
  if (set("model.D")) mc.D = rc.model.D;
  if (set("model.k")) mc.k = rc.model.k;
  if (set("model.d")) mc.d = rc.model.d;
  if (set("model.b")) mc.b = rc.model.b;
  if (set("model.M")) mc.M = rc.model.M;
  if (set("model.blocks")) mc.blocks = rc.model.blocks;
  if (set("model.order_policy")) mc.order_policy = rc.model.order_policy;
  if (set("model.fixed_order")) mc.fixed_order = rc.model.fixed_order;
  if (set("model.upsampler")) mc.upsampler = rc.model.upsampler;
  if (set("model.instance_norm")) mc.instance_norm = rc.model.instance_norm;
  if (set("model.seed")) mc.seed = rc.model.seed;
  mc.validate();
  return mc;
}

int cmd_eval(RunConfig rc, const std::string& ckpt, bool on_val) {
  rc.train.validate();
  rc.model = model_config_for_checkpoint(rc, ckpt);
  Model model{rc.model};
  load_checkpoint(model, ckpt);
  const DatasetSplit split = load_split(rc);
  const SplitPart part = on_val ? SplitPart::val : SplitPart::test;
  const EvalMetrics m = evaluate(model, split, part, rc.train.batch_size);
  write_resolved_config(rc);
  const json j{{"split", to_string(part)},
               {"mse", m.mse},
               {"mae", m.mae},
               {"checkpoint", ckpt},
               {"csv", rc.csv}};
  write_text_file(fs::path(rc.out) / "eval.json", j.dump(2) + "\n");
  std::cout << to_string(part) << " mse=" << format_double(m.mse)
            << " mae=" << format_double(m.mae) << "\n"
            << "wrote " << (fs::path(rc.out) / "eval.json").string() << "\n";
  return 0;
}

int cmd_predict(RunConfig rc, const std::string& ckpt,
                const std::string& input_csv) {
  rc.model = model_config_for_checkpoint(rc, ckpt);
  Model model{rc.model};
  load_checkpoint(model, ckpt);
  const RawDataset raw = load_raw(rc, input_csv);
  if (raw.rows < rc.model.T) {
    throw DataError("input " + input_csv + " has " + std::to_string(raw.rows) +
                    " rows; the model needs at least T = " +
                    std::to_string(rc.model.T));
  }

  // Standardize each variate by its own statistics over the whole input
  // (population variance, matching training-time standardization); a
  // constant column keeps scale 1 so raw units pass straight through.
  std::vector<double> mean(raw.cols, 0.0), sdev(raw.cols, 1.0);
  for (std::int64_t c = 0; c < raw.cols; ++c) {
    double m = 0.0;
    for (std::int64_t r = 0; r < raw.rows; ++r) m += raw.value(r, c);
    m /= static_cast<double>(raw.rows);
    double var = 0.0;
    for (std::int64_t r = 0; r < raw.rows; ++r) {
      const double d = raw.value(r, c) - m;
      var += d * d;
    }
    var /= static_cast<double>(raw.rows);
    mean[static_cast<std::size_t>(c)] = m;
    sdev[static_cast<std::size_t>(c)] = var > 0.0 ? std::sqrt(var) : 1.0;
  }

  Tensor x({raw.cols, rc.model.T});
  for (std::int64_t c = 0; c < raw.cols; ++c) {
    for (std::int64_t t = 0; t < rc.model.T; ++t) {
      x(c, t) = (raw.value(raw.rows - rc.model.T + t, c) -
                 mean[static_cast<std::size_t>(c)]) /
                sdev[static_cast<std::size_t>(c)];
    }
  }
  const Tensor y = model.forward(x, nullptr);  // (cols, F)

  std::ostringstream csv;
  csv << "step";
  for (const std::string& name : raw.column_names) csv << "," << name;
  csv << "\n";
  for (std::int64_t f = 0; f < rc.model.F; ++f) {
    csv << (f + 1);
    for (std::int64_t c = 0; c < raw.cols; ++c) {
      csv << ","
          << format_double(y(c, f) * sdev[static_cast<std::size_t>(c)] +
                           mean[static_cast<std::size_t>(c)]);
    }
    csv << "\n";
  }
  write_resolved_config(rc);
  write_text_file(fs::path(rc.out) / "predictions.csv", csv.str());
  std::cout << "wrote " << (fs::path(rc.out) / "predictions.csv").string()
            << " (" << rc.model.F << " steps x " << raw.cols << " variates)\n";
  return 0;
}

int cmd_gradcheck(const RunConfig& rc, int corrupt_check) {
  GradCheckOptions opts;
  opts.seed = rc.model.seed;
  opts.corrupt_check = corrupt_check;
  const std::vector<GradCheckResult> results = run_gradcheck_suite(opts);
  std::size_t passed = 0;
  for (const GradCheckResult& r : results) {
    std::ostringstream line;
    line << std::left << std::setw(28) << r.name << " max rel err "
         << std::scientific << std::setprecision(3) << r.max_err << "  "
         << (r.pass ? "ok" : "FAIL");
    std::cout << line.str() << "\n";
    if (r.pass) ++passed;
  }
  const bool all = passed == results.size();
  std::cout << "gradient check " << (all ? "passed" : "FAILED") << ": "
            << passed << "/" << results.size() << " within "
            << kGradcheckTol << "\n";
  return all ? 0 : 2;
}

int cmd_inspect(const RunConfig& rc, const std::string& ckpt,
                const std::string& csv_path) {
  const ModelConfig mc = ckpt.empty() ? rc.model : checkpoint_config(ckpt);
  mc.validate();
  Model model{mc};

  std::cout << "parameters:       " << model.count_params() << "\n";
  std::cout << "macs (batch 32):  " << model.estimate_macs(32) << "\n";
  std::cout << "level lengths:    " << bracket_list(model.level_lengths()) << "\n";
  if (mc.order_policy == OrderPolicy::mlp) {
    std::cout << "band learner:     mlp (no polynomial orders)\n";
  } else {
    std::vector<std::int64_t> orders;
    for (std::int64_t i = 0; i < mc.k; ++i) orders.push_back(mc.kan_order(i));
    std::cout << "kan orders:       " << bracket_list(orders) << "\n";
  }

  if (!csv_path.empty()) {
    const RawDataset raw = load_raw(rc, csv_path);
    for (const std::int64_t window : {std::int64_t{96}, std::int64_t{512}}) {
      if (window > raw.rows) {
        std::cout << "effective frequencies (window " << window
                  << "): skipped - needs at least " << window
                  << " rows, csv has " << raw.rows << "\n";
        continue;
      }
      const std::vector<double> counts = mean_effective_frequencies(raw, window);
      std::cout << "effective frequencies (window " << window << "):\n";
      for (std::int64_t c = 0; c < raw.cols; ++c) {
        std::cout << "  " << raw.column_names[static_cast<std::size_t>(c)]
                  << ": " << counts[static_cast<std::size_t>(c)] << "\n";
      }
      std::cout << "  mean: " << counts.back() << "\n";
    }
  }
  return 0;
}

int cmd_ablate(const RunConfig& rc) {
  rc.model.validate();
  rc.train.validate();
  write_resolved_config(rc);
  const DatasetSplit split = load_split(rc);

  struct Variant {
    std::string name;
    ModelConfig cfg;
  };
  std::vector<Variant> variants;
  {
    ModelConfig mc = rc.model;
    mc.order_policy = OrderPolicy::multi_order;
    variants.push_back({"multi_order", mc});
  }
  {
    ModelConfig mc = rc.model;
    mc.order_policy = OrderPolicy::fixed;
    mc.fixed_order = 2;
    variants.push_back({"fixed_2", mc});
  }
  {
    ModelConfig mc = rc.model;
    mc.order_policy = OrderPolicy::fixed;
    mc.fixed_order = 5;
    variants.push_back({"fixed_5", mc});
  }
  {
    ModelConfig mc = rc.model;
    mc.order_policy = OrderPolicy::mlp;
    variants.push_back({"mlp", mc});
  }
  {
    ModelConfig mc = rc.model;
    mc.upsampler = Upsampler::frequency;
    variants.push_back({"frequency", mc});
  }
  {
    ModelConfig mc = rc.model;
    mc.upsampler = Upsampler::linear_interp;
    variants.push_back({"linear_interp", mc});
  }

  json rows = json::array();
  struct Ranked {
    std::string name;
    double mse;
  };
  std::vector<Ranked> ranking;
  for (const Variant& v : variants) {
    Model model{v.cfg};
    const FitReport rep = fit(model, split, rc.train);
    RunConfig vrc = rc;
    vrc.model = v.cfg;
    rows.push_back(json{{"name", v.name},
                        {"test_mse", rep.test_mse},
                        {"test_mae", rep.test_mae},
                        {"best_val_mse", rep.best_val_mse},
                        {"best_epoch", rep.best_epoch},
                        {"epochs_run", rep.train_loss.size()},
                        {"param_count", rep.param_count},
                        {"config", resolved_config_json(vrc)}});
    ranking.push_back({v.name, rep.test_mse});
    std::cout << std::left << std::setw(16) << v.name
              << " test_mse=" << format_double(rep.test_mse)
              << " test_mae=" << format_double(rep.test_mae) << "\n";
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const Ranked& a, const Ranked& b) { return a.mse < b.mse; });
  std::cout << "ranked by test mse:";
  for (const Ranked& r : ranking) std::cout << " " << r.name;
  std::cout << "\n";
  write_text_file(fs::path(rc.out) / "ablation.json",
                  json{{"variants", rows}}.dump(2) + "\n");
  std::cout << "wrote " << (fs::path(rc.out) / "ablation.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Argument wiring
// ---------------------------------------------------------------------------

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonArgs& c) {
  cmd->add_option("--config", c.config_path,
                  "JSON config file with flat dotted keys");
  c.out_opt = cmd->add_option("--out", c.out, "output directory");
  c.seed_opt = cmd->add_option("--seed", c.seed,
                               "seed for both init and shuffling");
  cmd->add_option("--set", c.sets,
                  "override one config key, e.g. --set model.k=3 (repeatable)");
}

RunConfig make_run_config(const CommonArgs& c) {
  RunConfig rc;
  if (!c.config_path.empty()) {
    apply_config_json(rc, read_json_file(c.config_path), c.config_path);
  }
  if (c.seed_opt != nullptr && c.seed_opt->count() > 0) {
    apply_config_key(rc, "seed", json(c.seed));
  }
  if (c.out_opt != nullptr && c.out_opt->count() > 0) rc.out = c.out;
  for (const std::string& spec : c.sets) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects key=value, got '" + spec + "'");
    }
    const std::string key = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);
    const auto it = key_table().find(key);
    if (it == key_table().end()) {
      throw ConfigError("unknown config key: " + key);
    }
    json value;
    if (it->second.kind == KeyKind::text) {
      value = raw;
    } else {
      value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
      if (value.is_discarded()) {
        throw ConfigError("--set " + key + ": value '" + raw +
                          "' does not parse as a number or boolean");
      }
    }
    apply_config_key(rc, key, value);
  }
  return rc;
}

}  // namespace

void apply_config_key(RunConfig& rc, const std::string& key,
                      const nlohmann::json& value) {
  const auto it = key_table().find(key);
  if (it == key_table().end()) {
    throw ConfigError("unknown config key: " + key);
  }
  it->second.set(rc, value);
  rc.explicit_keys.insert(key);
  if (key == "seed") {
    rc.explicit_keys.insert("model.seed");
    rc.explicit_keys.insert("train.seed");
  }
}

void apply_config_json(RunConfig& rc, const nlohmann::json& j,
                       const std::string& origin) {
  if (!j.is_object()) {
    throw ConfigError(origin + ": top level must be a JSON object of dotted keys");
  }
  if (j.contains("seed")) apply_config_key(rc, "seed", j.at("seed"));
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") continue;
    apply_config_key(rc, key, value);
  }
}

nlohmann::json resolved_config_json(const RunConfig& rc) {
  return json{
      {"data.csv", rc.csv},
      {"data.family", to_string(rc.family)},
      {"data.timestamp_col", rc.timestamp_col},
      {"model.T", rc.model.T},
      {"model.F", rc.model.F},
      {"model.D", rc.model.D},
      {"model.k", rc.model.k},
      {"model.d", rc.model.d},
      {"model.b", rc.model.b},
      {"model.M", rc.model.M},
      {"model.blocks", rc.model.blocks},
      {"model.order_policy", to_string(rc.model.order_policy)},
      {"model.fixed_order", rc.model.fixed_order},
      {"model.upsampler", to_string(rc.model.upsampler)},
      {"model.instance_norm", rc.model.instance_norm},
      {"model.seed", rc.model.seed},
      {"out", rc.out},
      {"train.lr", rc.train.lr},
      {"train.batch_size", rc.train.batch_size},
      {"train.max_epochs", rc.train.max_epochs},
      {"train.patience", rc.train.patience},
      {"train.beta1", rc.train.beta1},
      {"train.beta2", rc.train.beta2},
      {"train.eps", rc.train.eps},
      {"train.clip_norm", rc.train.clip_norm},
      {"train.seed", rc.train.seed},
  };
}

int run_command(std::vector<std::string> args) {
  CLI::App app{"frequency-band forecaster: pyramid decomposition with Chebyshev-KAN band learners"};
  app.name("freqkan");
  app.require_subcommand(1);

  CommonArgs c_train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "fit a model; writes metrics.json and a checkpoint");
  add_common(train_cmd, c_train);

  CommonArgs c_eval;
  std::string eval_ckpt;
  bool eval_on_val = false;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  add_common(eval_cmd, c_eval);
  eval_cmd->add_option("--checkpoint", eval_ckpt,
                       "checkpoint manifest or its directory")->required();
  eval_cmd->add_flag("--val", eval_on_val,
                     "evaluate on the validation split instead of test");

  CommonArgs c_pred;
  std::string pred_ckpt, pred_input;
  CLI::App* pred_cmd = app.add_subcommand(
      "predict", "forecast F steps past the end of an input csv");
  add_common(pred_cmd, c_pred);
  pred_cmd->add_option("--checkpoint", pred_ckpt,
                       "checkpoint manifest or its directory")->required();
  pred_cmd->add_option("--input", pred_input, "input csv")->required();

  CommonArgs c_grad;
  int corrupt_check = -1;
  CLI::App* grad_cmd = app.add_subcommand(
      "gradcheck", "verify every backward pass against finite differences");
  add_common(grad_cmd, c_grad);
  grad_cmd->add_option("--corrupt-check", corrupt_check,
                       "test fixture: poison the analytic gradient of check N")
      ->group("");

  CommonArgs c_inspect;
  std::string inspect_ckpt, inspect_csv;
  CLI::App* inspect_cmd = app.add_subcommand(
      "inspect", "report parameter count, cost estimate, and band orders");
  add_common(inspect_cmd, c_inspect);
  inspect_cmd->add_option("--checkpoint", inspect_ckpt,
                          "inspect a checkpoint instead of the config");
  inspect_cmd->add_option("--csv", inspect_csv,
                          "also report effective-frequency counts at windows 96 and 512");

  CommonArgs c_ablate;
  CLI::App* ablate_cmd = app.add_subcommand(
      "ablate", "train the order-policy and upsampler variants; writes ablation.json");
  add_common(ablate_cmd, c_ablate);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(make_run_config(c_train));
    if (eval_cmd->parsed()) {
      return cmd_eval(make_run_config(c_eval), eval_ckpt, eval_on_val);
    }
    if (pred_cmd->parsed()) {
      return cmd_predict(make_run_config(c_pred), pred_ckpt, pred_input);
    }
    if (grad_cmd->parsed()) {
      return cmd_gradcheck(make_run_config(c_grad), corrupt_check);
    }
    if (inspect_cmd->parsed()) {
      return cmd_inspect(make_run_config(c_inspect), inspect_ckpt, inspect_csv);
    }
    if (ablate_cmd->parsed()) return cmd_ablate(make_run_config(c_ablate));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace freqkan
