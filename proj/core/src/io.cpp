#include "vsp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vsp {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw FormatError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(path + "." + key + ": missing");
  return *it;
}

void check_header(const json& doc, const char* format, int version) {
  const json& f = require(doc, "format", "$");
  if (!f.is_string() || f.get<std::string>() != format)
    throw FormatError(std::string("$.format: expected \"") + format + "\"");
  const json& v = require(doc, "version", "$");
  if (!v.is_number_integer() || v.get<int>() != version)
    throw FormatError("$.version: unsupported version (expected " + std::to_string(version) + ")");
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

Vector to_vector(const json& v, std::size_t dim, const std::string& path) {
  if (!v.is_array()) throw FormatError(path + ": expected an array");
  if (v.size() != dim)
    throw FormatError(path + ": expected " + std::to_string(dim) + " values, got " + std::to_string(v.size()));
  Vector out;
  out.reserve(dim);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw FormatError(path + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

template <typename T>
T get_as(const json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw FormatError(path + ": wrong type");
  }
}

std::size_t get_size(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw FormatError(path + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

json real_array(const Vector& v) {
  json out = json::array();
  for (const double x : v) {
    if (!std::isfinite(x)) throw Error("cannot serialize a non-finite value");
    out.push_back(x);
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------------ dataset

std::string serialize_dataset(const Dataset& dataset) {
  dataset.validate();
  json episodes = json::array();
  for (const auto& ep : dataset.episodes) {
    json states = json::array();
    json actions = json::array();
    for (const auto& s : ep.states) states.push_back(real_array(s));
    for (const auto& a : ep.actions) actions.push_back(real_array(a));
    episodes.push_back({{"states", std::move(states)}, {"actions", std::move(actions)}});
  }
  const auto& m = dataset.metadata;
  json doc = {{"format", "vsp-dataset"},
              {"version", kDatasetFormatVersion},
              {"env", m.env_name},
              {"state_dim", m.state_dim},
              {"action_dim", m.action_dim},
              {"teacher", m.teacher_id},
              {"seed", m.seed},
              {"n_episodes", dataset.episodes.size()},
              {"episodes", std::move(episodes)}};
  return doc.dump() + "\n";
}

Dataset parse_dataset(const std::string& text) {
  const json doc = parse_json(text, "dataset file");
  check_header(doc, "vsp-dataset", kDatasetFormatVersion);
  Dataset ds;
  ds.metadata.env_name = get_as<std::string>(require(doc, "env", "$"), "$.env");
  ds.metadata.state_dim = get_size(require(doc, "state_dim", "$"), "$.state_dim");
  ds.metadata.action_dim = get_size(require(doc, "action_dim", "$"), "$.action_dim");
  if (ds.metadata.state_dim == 0 || ds.metadata.action_dim == 0)
    throw FormatError("$: state_dim and action_dim must be positive");
  ds.metadata.teacher_id = doc.value("teacher", std::string{});
  if (doc.contains("seed")) ds.metadata.seed = get_as<std::uint64_t>(doc["seed"], "$.seed");

  const json& episodes = require(doc, "episodes", "$");
  if (!episodes.is_array()) throw FormatError("$.episodes: expected an array");
  if (doc.contains("n_episodes") && get_size(doc["n_episodes"], "$.n_episodes") != episodes.size())
    throw FormatError("$.n_episodes: header says " + doc["n_episodes"].dump() + " but file holds " +
                      std::to_string(episodes.size()));
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const std::string ep_path = "$.episodes[" + std::to_string(e) + "]";
    const json& states = require(episodes[e], "states", ep_path);
    const json& actions = require(episodes[e], "actions", ep_path);
    if (!states.is_array() || !actions.is_array()) throw FormatError(ep_path + ": states/actions must be arrays");
    if (states.size() != actions.size()) throw FormatError(ep_path + ": states and actions differ in length");
    Episode ep;
    for (std::size_t t = 0; t < states.size(); ++t) {
      ep.states.push_back(to_vector(states[t], ds.metadata.state_dim, ep_path + ".states[" + std::to_string(t) + "]"));
      ep.actions.push_back(
          to_vector(actions[t], ds.metadata.action_dim, ep_path + ".actions[" + std::to_string(t) + "]"));
    }
    ds.episodes.push_back(std::move(ep));
  }
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  write_text_file(path, serialize_dataset(dataset));
}

Dataset read_dataset(const std::filesystem::path& path) { return parse_dataset(read_text_file(path)); }

// ------------------------------------------------------------------ config

namespace {

json config_object(const VspConfig& cfg) {
  json j = {{"min_codeword_distance", cfg.min_codeword_distance},
            {"value_ratio_threshold", cfg.value_ratio_threshold},
            {"max_codewords_region", cfg.max_codewords_region},
            {"max_codewords_iteration", cfg.max_codewords_iteration},
            {"n_iterations", cfg.n_iterations},
            {"max_k_clusters", cfg.max_k_clusters},
            {"kmeans_restarts", cfg.kmeans_restarts},
            {"mode", to_string(cfg.mode)},
            {"seed", cfg.seed},
            {"standardize_states", cfg.standardize_states},
            {"learning_rate", cfg.train.learning_rate},
            {"batch_size", cfg.train.batch_size},
            {"n_epochs", cfg.train.n_epochs},
            {"patience", cfg.train.patience},
            {"min_delta", cfg.train.min_delta}};
  if (cfg.action_low) j["action_low"] = *cfg.action_low;
  if (cfg.action_high) j["action_high"] = *cfg.action_high;
  return j;
}

}  // namespace

std::string config_to_json(const VspConfig& cfg) { return config_object(cfg).dump(); }

VspConfig config_from_json(const std::string& json_text, VspConfig cfg) {
  const json doc = parse_json(json_text, "configuration");
  if (!doc.is_object()) throw FormatError("configuration: expected an object");
  for (const auto& [key, value] : doc.items()) {
    const std::string path = "config." + key;
    if (key == "min_codeword_distance") cfg.min_codeword_distance = get_as<double>(value, path);
    else if (key == "value_ratio_threshold") cfg.value_ratio_threshold = get_as<double>(value, path);
    else if (key == "max_codewords_region") cfg.max_codewords_region = get_size(value, path);
    else if (key == "max_codewords_iteration") cfg.max_codewords_iteration = get_size(value, path);
    else if (key == "n_iterations") cfg.n_iterations = get_size(value, path);
    else if (key == "max_k_clusters") cfg.max_k_clusters = get_size(value, path);
    else if (key == "kmeans_restarts") cfg.kmeans_restarts = get_size(value, path);
    else if (key == "mode") {
      try {
        cfg.mode = parse_split_mode(get_as<std::string>(value, path));
      } catch (const InvalidArgument& e) {
        throw FormatError(path + ": " + e.what());
      }
    } else if (key == "seed") cfg.seed = get_as<std::uint64_t>(value, path);
    else if (key == "standardize_states") cfg.standardize_states = get_as<bool>(value, path);
    else if (key == "threads") cfg.threads = get_size(value, path);
    else if (key == "learning_rate") cfg.train.learning_rate = get_as<double>(value, path);
    else if (key == "batch_size") cfg.train.batch_size = get_size(value, path);
    else if (key == "n_epochs") cfg.train.n_epochs = get_size(value, path);
    else if (key == "patience") cfg.train.patience = get_size(value, path);
    else if (key == "min_delta") cfg.train.min_delta = get_as<double>(value, path);
    else if (key == "action_low") cfg.action_low = to_vector(value, value.size(), path);
    else if (key == "action_high") cfg.action_high = to_vector(value, value.size(), path);
    else throw FormatError(path + ": unknown configuration key");
  }
  return cfg;
}

std::string config_digest(const VspConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : config_to_json(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ------------------------------------------------------------------- model

ModelFile make_model_file(PartitionModel model, const std::string& env_name, const VspConfig& cfg) {
  return ModelFile{ModelMetadata{env_name, cfg.seed, config_to_json(cfg), config_digest(cfg)}, std::move(model)};
}

std::string serialize_model(const ModelFile& file) {
  const PartitionModel& m = file.model;
  json codewords = json::array();
  for (const auto& c : m.quantizer().codewords()) codewords.push_back(real_array(c.point));
  json regions = json::array();
  for (std::size_t r = 0; r < m.size(); ++r) {
    const auto& p = m.subpolicies()[r];
    json rows = json::array();
    for (std::size_t k = 0; k < p.action_dim(); ++k) {
      Vector row(p.weights().data.begin() + static_cast<std::ptrdiff_t>(k * p.state_dim()),
                 p.weights().data.begin() + static_cast<std::ptrdiff_t>((k + 1) * p.state_dim()));
      rows.push_back(real_array(row));
    }
    const auto& loss = m.region_losses()[r];
    regions.push_back({{"weights", std::move(rows)},
                       {"bias", real_array(p.biases())},
                       {"action_low", real_array(p.action_low())},
                       {"action_high", real_array(p.action_high())},
                       {"loss", loss ? json(*loss) : json(nullptr)}});
  }
  json config = file.metadata.config_json.empty() ? json::object() : parse_json(file.metadata.config_json, "config");
  const auto& scale = m.quantizer().metric_scale();
  json doc = {{"format", "vsp-model"},
              {"version", kModelFormatVersion},
              {"env", file.metadata.env_name},
              {"state_dim", m.state_dim()},
              {"action_dim", m.action_dim()},
              {"seed", file.metadata.seed},
              {"config_digest", file.metadata.config_digest},
              {"config", std::move(config)},
              {"metric_scale", scale ? real_array(*scale) : json(nullptr)},
              {"codewords", std::move(codewords)},
              {"regions", std::move(regions)}};
  return doc.dump(1) + "\n";
}

ModelFile parse_model(const std::string& text) {
  const json doc = parse_json(text, "model file");
  check_header(doc, "vsp-model", kModelFormatVersion);
  ModelMetadata meta;
  meta.env_name = get_as<std::string>(require(doc, "env", "$"), "$.env");
  meta.seed = get_as<std::uint64_t>(require(doc, "seed", "$"), "$.seed");
  meta.config_digest = doc.value("config_digest", std::string{});
  if (doc.contains("config") && doc["config"].is_object() && !doc["config"].empty())
    meta.config_json = doc["config"].dump();
  const std::size_t sd = get_size(require(doc, "state_dim", "$"), "$.state_dim");
  const std::size_t ad = get_size(require(doc, "action_dim", "$"), "$.action_dim");
  if (sd == 0 || ad == 0) throw FormatError("$: state_dim and action_dim must be positive");

  const json& cw = require(doc, "codewords", "$");
  const json& regions = require(doc, "regions", "$");
  if (!cw.is_array() || cw.empty()) throw FormatError("$.codewords: expected a non-empty array");
  if (!regions.is_array() || regions.size() != cw.size())
    throw FormatError("$.regions: expected one entry per codeword");

  std::vector<Vector> codewords;
  for (std::size_t i = 0; i < cw.size(); ++i)
    codewords.push_back(to_vector(cw[i], sd, "$.codewords[" + std::to_string(i) + "]"));
  std::optional<Vector> scale;
  if (doc.contains("metric_scale") && !doc["metric_scale"].is_null())
    scale = to_vector(doc["metric_scale"], sd, "$.metric_scale");

  std::vector<LinearSubpolicy> subs;
  std::vector<std::optional<double>> losses;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const std::string rp = "$.regions[" + std::to_string(r) + "]";
    const json& rows = require(regions[r], "weights", rp);
    if (!rows.is_array() || rows.size() != ad) throw FormatError(rp + ".weights: expected action_dim rows");
    Matrix w(ad, sd);
    for (std::size_t k = 0; k < ad; ++k) {
      const Vector row = to_vector(rows[k], sd, rp + ".weights[" + std::to_string(k) + "]");
      std::copy(row.begin(), row.end(), w.data.begin() + static_cast<std::ptrdiff_t>(k * sd));
    }
    try {
      subs.emplace_back(std::move(w), to_vector(require(regions[r], "bias", rp), ad, rp + ".bias"),
                        to_vector(require(regions[r], "action_low", rp), ad, rp + ".action_low"),
                        to_vector(require(regions[r], "action_high", rp), ad, rp + ".action_high"));
    } catch (const InvalidArgument& e) {
      throw FormatError(rp + ": " + e.what());
    }
    const json& loss = require(regions[r], "loss", rp);
    losses.push_back(loss.is_null() ? std::nullopt : std::optional<double>(get_as<double>(loss, rp + ".loss")));
  }
  try {
    return ModelFile{std::move(meta),
                     PartitionModel(Quantizer(codewords, std::move(scale)), std::move(subs), std::move(losses))};
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("$: ") + e.what());
  }
}

void write_model(const std::filesystem::path& path, const ModelFile& file) {
  write_text_file(path, serialize_model(file));
}

ModelFile read_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

// --------------------------------------------------------------------- CSV

std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string history_csv(const std::vector<IterationRecord>& history) {
  std::ostringstream out;
  out << "iteration,regions,mean_loss,eval_return\n";
  for (const auto& r : history) {
    out << r.iteration << ',' << r.region_count << ',' << format_real(r.mean_loss) << ',';
    if (r.eval_return) out << format_real(*r.eval_return);
    out << '\n';
  }
  return out.str();
}

std::string returns_csv(const EvalSummary& summary) {
  std::ostringstream out;
  out << "episode,return\n";
  for (std::size_t i = 0; i < summary.per_episode_returns.size(); ++i)
    out << i << ',' << format_real(summary.per_episode_returns[i]) << '\n';
  return out.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace vsp
