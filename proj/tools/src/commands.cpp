#include "vsp/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "vsp/errors.hpp"

namespace vsp::cli {

using json = nlohmann::json;

namespace {

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

template <class T>
T json_value(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw FormatError("config." + key + ": wrong type");
  }
}

std::size_t json_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) throw FormatError("config." + key + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  std::size_t n = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, n);
  if (res.ec != std::errc{} || res.ptr != end) throw InvalidArgument(what + ": expected a non-negative integer, got '" + text + "'");
  return n;
}

std::string default_env_lookup_value(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  return v ? std::string(v) : std::string{};
}

std::unique_ptr<Environment> require_environment(const std::string& name) {
  if (name.empty()) throw InvalidArgument("no environment given");
  return make_environment(name);
}

}  // namespace

void RunConfig::validate() const {
  if (teacher.empty()) throw InvalidArgument("teacher source must be 'scripted' or a weight-file path");
  if (critic.empty()) throw InvalidArgument("critic source must be 'monte-carlo' or a weight-file path");
  if (n_episodes_training == 0) throw InvalidArgument("n_episodes_training must be positive");
  vsp.validate();
}

RunConfig parse_run_config(const std::string& json_text, RunConfig cfg) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("config: expected an object");
  json rest = json::object();
  for (const auto& [key, value] : doc.items()) {
    if (key == "env") cfg.env = json_value<std::string>(value, key);
    else if (key == "teacher") cfg.teacher = json_value<std::string>(value, key);
    else if (key == "critic") cfg.critic = json_value<std::string>(value, key);
    else if (key == "n_episodes_training") cfg.n_episodes_training = json_count(value, key);
    else if (key == "n_episodes_eval") cfg.n_episodes_eval = json_count(value, key);
    else if (key == "n_episodes_track") cfg.n_episodes_track = json_count(value, key);
    else if (key == "output_dir") cfg.output_dir = json_value<std::string>(value, key);
    else if (key == "seed") cfg.seed = json_value<std::uint64_t>(value, key);
    else if (key == "gamma") cfg.monte_carlo.gamma = json_value<double>(value, key);
    else if (key == "horizon") cfg.monte_carlo.horizon = json_count(value, key);
    else if (key == "n_rollouts") cfg.monte_carlo.n_rollouts = json_count(value, key);
    else rest[key] = value;
  }
  cfg.vsp = config_from_json(rest.dump(), cfg.vsp);
  cfg.vsp.seed = cfg.seed;
  return cfg;
}

void apply_environment(RunConfig& cfg, const EnvLookup& lookup) {
  const auto get = [&](const std::string& name) -> std::optional<std::string> {
    if (lookup) return lookup(name);
    std::string v = default_env_lookup_value(name);
    if (v.empty()) return std::nullopt;
    return v;
  };
  if (auto dir = get("VSP_OUTPUT_DIR"); dir && !dir->empty()) cfg.output_dir = *dir;
  if (auto threads = get("VSP_THREADS"); threads && !threads->empty())
    cfg.vsp.threads = parse_count(*threads, "VSP_THREADS");
}

std::filesystem::path output_path(const RunConfig& cfg, const std::filesystem::path& p) {
  if (p.is_absolute() || cfg.output_dir.empty()) return p;
  return cfg.output_dir / p;
}

TeacherPolicy resolve_teacher(const RunConfig& cfg, const std::string& env_name) {
  if (cfg.teacher == kScriptedSource) return scripted_teacher(env_name);
  return load_teacher(cfg.teacher).policy;
}

std::optional<Critic> resolve_critic(const RunConfig& cfg, const std::string& env_name) {
  if (cfg.critic != kMonteCarloSource) {
    auto loaded = load_teacher(cfg.critic);
    if (!loaded.critic) throw FormatError(cfg.critic + ": $.critic is missing");
    return loaded.critic;
  }
  if (cfg.vsp.mode == SplitMode::kRandom) return std::nullopt;
  const auto env = require_environment(env_name);
  TeacherPolicy teacher = resolve_teacher(cfg, env_name);
  if (teacher.state_dim != env->state_dim()) throw DimensionMismatch(env->state_dim(), teacher.state_dim, "teacher state");
  if (teacher.action_dim != env->action_dim())
    throw DimensionMismatch(env->action_dim(), teacher.action_dim, "teacher action");
  Policy policy = [teacher](ConstVectorView s) { return teacher(s); };
  return make_mc_critic(*env, std::move(policy), cfg.monte_carlo);
}

CollectResult cmd_collect(const RunConfig& cfg, const std::filesystem::path& dataset_out, std::ostream& out) {
  cfg.validate();
  const auto env = require_environment(cfg.env);
  const TeacherPolicy teacher = resolve_teacher(cfg, cfg.env);
  if (teacher.state_dim != env->state_dim()) throw DimensionMismatch(env->state_dim(), teacher.state_dim, "teacher state");
  if (teacher.action_dim != env->action_dim())
    throw DimensionMismatch(env->action_dim(), teacher.action_dim, "teacher action");
  const Policy policy = [&teacher](ConstVectorView s) { return teacher(s); };
  Rollout ro = rollout(*env, policy, cfg.n_episodes_training, cfg.seed, teacher.id);

  CollectResult res{std::move(ro.dataset), std::move(ro.summary), output_path(cfg, dataset_out)};
  write_dataset(res.dataset_path, res.dataset);
  out << "collected " << res.dataset.episodes.size() << " episodes (" << res.dataset.num_pairs() << " pairs) from "
      << teacher.id << " -> " << res.dataset_path.string() << '\n';
  out << "teacher return: " << summary_line(res.summary) << '\n';
  return res;
}

DistillOutput cmd_distill(const RunConfig& cfg, const std::filesystem::path& dataset_in,
                          const std::filesystem::path& model_out, const std::filesystem::path& history_out,
                          std::ostream& out) {
  cfg.validate();
  const Dataset dataset = read_dataset(dataset_in);
  const std::string env_name = cfg.env.empty() ? dataset.metadata.env_name : cfg.env;
  const std::optional<Critic> critic = resolve_critic(cfg, env_name);

  VspConfig vcfg = cfg.vsp;
  vcfg.seed = cfg.seed;
  DistillOptions options;
  std::unique_ptr<Environment> track_env;
  if (cfg.n_episodes_track > 0) {
    track_env = require_environment(env_name);
    options.eval = EvalHook{track_env.get(), cfg.n_episodes_track, cfg.seed, std::nullopt};
  }
  DistillOutput res{distill(dataset, critic, vcfg, options), output_path(cfg, model_out), output_path(cfg, history_out)};
  write_model(res.model_path, make_model_file(res.result.model, env_name, vcfg));
  write_text_file(res.history_path, history_csv(res.result.history));

  out << "distilled " << dataset.num_pairs() << " pairs into " << res.result.model.size() << " regions ("
      << to_string(vcfg.mode) << ", " << vcfg.n_iterations << " iterations)";
  if (res.result.converged_at) out << ", converged at iteration " << *res.result.converged_at;
  out << '\n';
  out << "model -> " << res.model_path.string() << "\nhistory -> " << res.history_path.string() << '\n';
  return res;
}

std::string summary_line(const EvalSummary& summary) {
  return fixed(summary.mean_return) + " ± " + fixed(summary.std_return) + " over " +
         std::to_string(summary.n_episodes) + " episodes";
}

EvalSummary cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& model_in,
                         const std::string& env_override, const std::filesystem::path& csv_out, std::ostream& out) {
  if (cfg.n_episodes_eval == 0) throw InvalidArgument("n_episodes_eval must be positive");
  const ModelFile file = read_model(model_in);
  const std::string env_name = env_override.empty() ? file.metadata.env_name : env_override;
  const auto env = require_environment(env_name);
  if (env->state_dim() != file.model.state_dim())
    throw DimensionMismatch(env->state_dim(), file.model.state_dim(), "model state");
  if (env->action_dim() != file.model.action_dim())
    throw DimensionMismatch(env->action_dim(), file.model.action_dim(), "model action");
  const PartitionModel& model = file.model;
  const EvalSummary summary =
      evaluate(*env, [&model](ConstVectorView s) { return model.predict(s); }, cfg.n_episodes_eval, cfg.seed);
  const auto csv_path = output_path(cfg, csv_out);
  write_text_file(csv_path, returns_csv(summary));
  out << summary_line(summary) << '\n';
  out << "goal reached in " << summary.successful_episodes << ", failed in " << summary.failed_episodes
      << " (" << model.size() << " regions, " << env_name << ")\n";
  out << "returns -> " << csv_path.string() << '\n';
  return summary;
}

Diagram cmd_diagram(const RunConfig& cfg, const std::filesystem::path& model_in, const DiagramOptions& options,
                    const std::filesystem::path& svg_out, const std::filesystem::path& csv_out, std::ostream& out) {
  const ModelFile file = read_model(model_in);
  const PartitionModel& model = file.model;
  const std::string env_name = options.env_override.empty() ? file.metadata.env_name : options.env_override;
  const std::size_t d = model.state_dim();

  DiagramSpec spec;
  spec.axes = options.axes;
  spec.resolution = options.resolution;
  if (spec.axes[0] >= d || spec.axes[1] >= d || spec.axes[0] == spec.axes[1])
    throw InvalidArgument("diagram axes must be two distinct indices below " + std::to_string(d));

  std::unique_ptr<Environment> env;
  try {
    env = make_environment(env_name);
  } catch (const InvalidArgument&) {
  }
  const auto default_range = [&](std::size_t axis) -> std::array<double, 2> {
    if (env && env->state_dim() == d) return {env->observation_low()[axis], env->observation_high()[axis]};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : model.quantizer().codewords()) {
      lo = std::min(lo, c.point[axis]);
      hi = std::max(hi, c.point[axis]);
    }
    const double pad = hi > lo ? 0.25 * (hi - lo) : 1.0;
    return {lo - pad, hi + pad};
  };
  spec.x_range = options.x_range.value_or(default_range(spec.axes[0]));
  spec.y_range = options.y_range.value_or(default_range(spec.axes[1]));

  if (options.fixed) {
    spec.fixed = *options.fixed;
  } else if (options.dataset) {
    const Dataset ds = read_dataset(*options.dataset);
    if (ds.metadata.state_dim != d) throw DimensionMismatch(d, ds.metadata.state_dim, "diagram dataset");
    Vector mean(d, 0.0);
    const auto states = ds.all_states();
    for (const auto& s : states)
      for (std::size_t i = 0; i < d; ++i) mean[i] += s[i];
    for (auto& m : mean) m /= static_cast<double>(std::max<std::size_t>(states.size(), 1));
    spec.fixed = mean;
  }

  Diagram diagram = compute_diagram(model, spec);
  const auto names = state_variable_names(env_name, d);
  const auto svg_path = output_path(cfg, svg_out);
  const auto csv_path = output_path(cfg, csv_out);
  write_text_file(svg_path, diagram_svg(diagram, {names[spec.axes[0]], names[spec.axes[1]]}));
  write_text_file(csv_path, diagram_grid_csv(diagram));
  out << "diagram of " << model.size() << " regions over (" << names[spec.axes[0]] << ", " << names[spec.axes[1]]
      << "), " << spec.resolution << "x" << spec.resolution << " grid, " << diagram.boundaries.size()
      << " boundary segments\nsvg -> " << svg_path.string() << "\ngrid -> " << csv_path.string() << '\n';
  return diagram;
}

void cmd_explain(const std::filesystem::path& model_in, const std::string& env_override, std::ostream& out) {
  const ModelFile file = read_model(model_in);
  out << explain(file.model, env_override.empty() ? file.metadata.env_name : env_override);
}

}  // namespace vsp::cli
