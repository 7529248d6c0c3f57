#pragma once

// Checkpoint wire format: a flat blob of little-endian 32-bit floats (all
// parameter values, concatenated in visit order) plus a JSON manifest
// recording the model config and every parameter's name/shape/dtype/offset.
// The same f32 image backs the trainer's best-epoch snapshot, so metrics
// computed after a restore are reproduced exactly by a later load.

#include <cstdint>
#include <string>
#include <vector>

#include "freqkan/model.hpp"
#include "json.hpp"

namespace freqkan {

// Flat f32 image of every parameter value, in visit order.
std::vector<float> snapshot_params(Model& model);
// Writes the image back (each value widened f32 -> f64).
void restore_params(Model& model, const std::vector<float>& image);

nlohmann::json config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const nlohmann::json& j);

// Field-by-field comparison; returns "name: a vs b" lines for every
// difference.  The seed only affects initialization, which a loaded image
// overrides, so it is not compared.
std::vector<std::string> config_diff(const ModelConfig& a, const ModelConfig& b);

// Writes <dir>/model.ckpt and <dir>/model.manifest.json.
void save_checkpoint(Model& model, const std::string& dir);

// `path` may be the manifest file or a directory containing
// model.manifest.json; the blob is resolved next to the manifest.
std::string resolve_manifest_path(const std::string& path);
ModelConfig checkpoint_config(const std::string& path);

// Loads parameter values into a model whose config must match the
// manifest's (up to the seed); throws ConfigError naming differing fields.
void load_checkpoint(Model& model, const std::string& path);

}  // namespace freqkan
