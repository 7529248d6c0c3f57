#include "freqkan/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "freqkan/errors.hpp"

namespace freqkan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "freqkan-checkpoint-v1";
constexpr const char* kManifestName = "model.manifest.json";
constexpr const char* kBlobName = "model.ckpt";

void append_f32_le(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

float read_f32_le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to '" + path + "'");
}

}  // namespace

std::vector<float> snapshot_params(Model& model) {
  std::vector<float> image;
  image.reserve(static_cast<std::size_t>(model.count_params()));
  model.visit_params([&](Parameter& p) {
    for (std::int64_t i = 0; i < p.numel(); ++i) {
      image.push_back(static_cast<float>(p.value(i)));
    }
  });
  return image;
}

void restore_params(Model& model, const std::vector<float>& image) {
  if (static_cast<std::int64_t>(image.size()) != model.count_params()) {
    throw DataError("parameter image holds " + std::to_string(image.size()) +
                    " values, model expects " +
                    std::to_string(model.count_params()));
  }
  std::size_t at = 0;
  model.visit_params([&](Parameter& p) {
    for (std::int64_t i = 0; i < p.numel(); ++i) {
      p.value(i) = static_cast<double>(image[at++]);
    }
  });
}

json config_to_json(const ModelConfig& cfg) {
  return json{{"T", cfg.T},
              {"F", cfg.F},
              {"D", cfg.D},
              {"k", cfg.k},
              {"d", cfg.d},
              {"b", cfg.b},
              {"M", cfg.M},
              {"blocks", cfg.blocks},
              {"order_policy", to_string(cfg.order_policy)},
              {"fixed_order", cfg.fixed_order},
              {"upsampler", to_string(cfg.upsampler)},
              {"instance_norm", cfg.instance_norm},
              {"seed", cfg.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  try {
    cfg.T = j.at("T").get<std::int64_t>();
    cfg.F = j.at("F").get<std::int64_t>();
    cfg.D = j.at("D").get<std::int64_t>();
    cfg.k = j.at("k").get<std::int64_t>();
    cfg.d = j.at("d").get<std::int64_t>();
    cfg.b = j.at("b").get<int>();
    cfg.M = j.at("M").get<std::int64_t>();
    cfg.blocks = j.at("blocks").get<std::int64_t>();
    cfg.order_policy = order_policy_from_string(j.at("order_policy").get<std::string>());
    cfg.fixed_order = j.at("fixed_order").get<int>();
    cfg.upsampler = upsampler_from_string(j.at("upsampler").get<std::string>());
    cfg.instance_norm = j.at("instance_norm").get<bool>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model config: ") + e.what());
  }
  return cfg;
}

std::vector<std::string> config_diff(const ModelConfig& a, const ModelConfig& b) {
  std::vector<std::string> diffs;
  auto cmp = [&diffs](const char* name, auto va, auto vb) {
    if (va != vb) {
      std::ostringstream os;
      os << name << ": " << va << " vs " << vb;
      diffs.push_back(std::move(os).str());
    }
  };
  cmp("T", a.T, b.T);
  cmp("F", a.F, b.F);
  cmp("D", a.D, b.D);
  cmp("k", a.k, b.k);
  cmp("d", a.d, b.d);
  cmp("b", a.b, b.b);
  cmp("M", a.M, b.M);
  cmp("blocks", a.blocks, b.blocks);
  cmp("order_policy", to_string(a.order_policy), to_string(b.order_policy));
  if (a.order_policy == OrderPolicy::fixed && b.order_policy == OrderPolicy::fixed) {
    cmp("fixed_order", a.fixed_order, b.fixed_order);
  }
  cmp("upsampler", to_string(a.upsampler), to_string(b.upsampler));
  cmp("instance_norm", a.instance_norm, b.instance_norm);
  return diffs;
}

void save_checkpoint(Model& model, const std::string& dir) {
  fs::create_directories(dir);

  std::string blob;
  blob.reserve(static_cast<std::size_t>(model.count_params()) * 4);
  json params = json::array();
  std::int64_t offset = 0;
  model.visit_params([&](Parameter& p) {
    params.push_back(json{{"name", p.name},
                          {"shape", p.value.shape()},
                          {"dtype", "f32"},
                          {"byte_offset", offset}});
    for (std::int64_t i = 0; i < p.numel(); ++i) {
      append_f32_le(blob, static_cast<float>(p.value(i)));
    }
    offset += p.numel() * 4;
  });

  json manifest{{"format", kFormat},
                {"blob", kBlobName},
                {"blob_bytes", offset},
                {"config", config_to_json(model.config())},
                {"params", std::move(params)}};

  write_file((fs::path(dir) / kBlobName).string(), blob);
  write_file((fs::path(dir) / kManifestName).string(), manifest.dump(2) + "\n");
}

std::string resolve_manifest_path(const std::string& path) {
  fs::path p(path);
  if (fs::is_directory(p)) p /= kManifestName;
  if (!fs::exists(p)) {
    throw DataError("checkpoint manifest not found at '" + p.string() + "'");
  }
  return p.string();
}

namespace {

json load_manifest(const std::string& manifest_path) {
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw DataError("cannot parse checkpoint manifest '" + manifest_path +
                    "': " + e.what());
  }
  if (!manifest.is_object() || manifest.value("format", "") != kFormat) {
    throw DataError("'" + manifest_path + "' is not a " + kFormat + " manifest");
  }
  return manifest;
}

}  // namespace

ModelConfig checkpoint_config(const std::string& path) {
  const std::string manifest_path = resolve_manifest_path(path);
  return config_from_json(load_manifest(manifest_path).at("config"));
}

void load_checkpoint(Model& model, const std::string& path) {
  const std::string manifest_path = resolve_manifest_path(path);
  const json manifest = load_manifest(manifest_path);

  const ModelConfig stored = config_from_json(manifest.at("config"));
  const std::vector<std::string> diffs = config_diff(stored, model.config());
  if (!diffs.empty()) {
    std::string msg = "checkpoint config disagrees with the model config:";
    for (const std::string& d : diffs) msg += "\n  " + d;
    throw ConfigError(msg);
  }

  const fs::path blob_path =
      fs::path(manifest_path).parent_path() /
      manifest.value("blob", std::string(kBlobName));
  const std::string blob = read_file(blob_path.string());

  // Index manifest entries by name; loading honors recorded offsets.
  struct Entry {
    std::vector<std::int64_t> shape;
    std::int64_t byte_offset = 0;
  };
  std::map<std::string, Entry> entries;
  try {
    for (const json& pj : manifest.at("params")) {
      if (pj.value("dtype", "") != "f32") {
        throw DataError("unsupported dtype '" + pj.value("dtype", "") +
                        "' for parameter '" + pj.value("name", "?") + "'");
      }
      Entry e;
      e.shape = pj.at("shape").get<std::vector<std::int64_t>>();
      e.byte_offset = pj.at("byte_offset").get<std::int64_t>();
      entries[pj.at("name").get<std::string>()] = std::move(e);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint params list: ") + e.what());
  }

  std::size_t used = 0;
  model.visit_params([&](Parameter& p) {
    auto it = entries.find(p.name);
    if (it == entries.end()) {
      throw DataError("checkpoint is missing parameter '" + p.name + "'");
    }
    const Entry& e = it->second;
    if (e.shape != p.value.shape()) {
      throw DataError("checkpoint parameter '" + p.name + "' has shape " +
                      shape_str(e.shape) + ", model expects " +
                      p.value.shape_str());
    }
    const std::int64_t bytes = p.numel() * 4;
    if (e.byte_offset < 0 ||
        e.byte_offset + bytes > static_cast<std::int64_t>(blob.size())) {
      throw DataError("checkpoint blob too short for parameter '" + p.name +
                      "' (need " + std::to_string(e.byte_offset + bytes) +
                      " bytes, have " + std::to_string(blob.size()) + ")");
    }
    const auto* base =
        reinterpret_cast<const unsigned char*>(blob.data()) + e.byte_offset;
    for (std::int64_t i = 0; i < p.numel(); ++i) {
      p.value(i) = static_cast<double>(read_f32_le(base + i * 4));
    }
    ++used;
  });
  if (used != entries.size()) {
    throw DataError("checkpoint lists " + std::to_string(entries.size()) +
                    " parameters, model has " + std::to_string(used));
  }
}

}  // namespace freqkan
