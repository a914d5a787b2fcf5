#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vsp/envs.hpp"
#include "vsp/partitioner.hpp"

namespace vsp {

// All files are JSON with a "format" tag and integer "version". Reals are
// written in shortest round-trip form, so load(save(x)) == x bit-exactly.

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(const std::string& text);  // throws FormatError
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);

struct ModelMetadata {
  std::string env_name;
  std::uint64_t seed = 0;
  std::string config_json;  // canonical VspConfig, see config_to_json
  std::string config_digest;

  friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

struct ModelFile {
  ModelMetadata metadata;
  PartitionModel model;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

ModelFile make_model_file(PartitionModel model, const std::string& env_name, const VspConfig& cfg);

std::string serialize_model(const ModelFile& file);
ModelFile parse_model(const std::string& text);  // throws FormatError
void write_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile read_model(const std::filesystem::path& path);

// Canonical JSON of a configuration, keys named as in the hyperparameter table
// (min_codeword_distance, value_ratio_threshold, ...).
std::string config_to_json(const VspConfig& cfg);
// Overlays the keys present in `json_text` onto `base`; unknown keys are a FormatError.
VspConfig config_from_json(const std::string& json_text, VspConfig base = {});
// 16 hex digits, FNV-1a over the canonical JSON.
std::string config_digest(const VspConfig& cfg);

// iteration,regions,mean_loss,eval_return
std::string history_csv(const std::vector<IterationRecord>& history);
// episode,return
std::string returns_csv(const EvalSummary& summary);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Full-precision decimal rendering used by every CSV writer.
std::string format_real(double v);

}  // namespace vsp
