#include <exception>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "vsp/cli/commands.hpp"
#include "vsp/errors.hpp"

namespace vsp::cli {

namespace {

// Flag values land here; only options the user actually passed override the
// configuration file.
struct Flags {
  std::string config;
  std::string env;
  std::string teacher;
  std::string critic;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::size_t episodes = 0;
  std::size_t track = 0;
  double min_codeword_distance = 0.0;
  double value_ratio_threshold = 0.0;
  std::size_t max_codewords_region = 0;
  std::size_t max_codewords_iteration = 0;
  std::size_t n_iterations = 0;
  std::size_t max_k_clusters = 0;
  std::string mode;
  bool standardize = false;
};

struct Options {
  CLI::Option* config = nullptr;
  CLI::Option* env = nullptr;
  CLI::Option* teacher = nullptr;
  CLI::Option* critic = nullptr;
  CLI::Option* output_dir = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* episodes = nullptr;
  CLI::Option* track = nullptr;
  CLI::Option* min_codeword_distance = nullptr;
  CLI::Option* value_ratio_threshold = nullptr;
  CLI::Option* max_codewords_region = nullptr;
  CLI::Option* max_codewords_iteration = nullptr;
  CLI::Option* n_iterations = nullptr;
  CLI::Option* max_k_clusters = nullptr;
  CLI::Option* mode = nullptr;
  CLI::Option* standardize = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

void add_common(CLI::App& cmd, Flags& f, Options& o) {
  o.config = cmd.add_option("--config", f.config, "JSON configuration file");
  o.output_dir = cmd.add_option("-o,--output-dir", f.output_dir, "Directory for relative output paths");
  o.seed = cmd.add_option("--seed", f.seed, "Run seed");
}

void add_vsp(CLI::App& cmd, Flags& f, Options& o) {
  o.min_codeword_distance = cmd.add_option("--min-codeword-distance", f.min_codeword_distance, "D-");
  o.value_ratio_threshold =
      cmd.add_option("--value-ratio-threshold", f.value_ratio_threshold, "Fraction of lowest-value candidates");
  o.max_codewords_region = cmd.add_option("--max-codewords-region", f.max_codewords_region, "N_r");
  o.max_codewords_iteration = cmd.add_option("--max-codewords-iteration", f.max_codewords_iteration, "N_i");
  o.n_iterations = cmd.add_option("--n-iterations", f.n_iterations, "Training/splitting iterations");
  o.max_k_clusters = cmd.add_option("--max-k-clusters", f.max_k_clusters, "Largest k tried by the silhouette search");
  o.mode = cmd.add_option("--mode", f.mode, "critic | random")->check(CLI::IsMember({"critic", "random"}));
  o.standardize = cmd.add_flag("--standardize", f.standardize, "Measure distances in per-dimension std units");
  o.critic = cmd.add_option("--critic", f.critic, "'monte-carlo' or a weight file with a critic section");
  o.teacher = cmd.add_option("--teacher", f.teacher, "Teacher behind the Monte-Carlo critic: 'scripted' or a weight file");
  o.threads = cmd.add_option("--threads", f.threads, "Training threads (0 = hardware count)");
  o.track = cmd.add_option("--track-episodes", f.track, "Evaluation episodes after every iteration (0 = off)");
  o.env = cmd.add_option("--env", f.env, "Environment (defaults to the dataset's)");
}

RunConfig build_config(const Flags& f, const Options& o, const EnvLookup& lookup) {
  RunConfig cfg;
  if (given(o.config)) cfg = parse_run_config(read_text_file(f.config), cfg);
  apply_environment(cfg, lookup);
  if (given(o.env)) cfg.env = f.env;
  if (given(o.teacher)) cfg.teacher = f.teacher;
  if (given(o.critic)) cfg.critic = f.critic;
  if (given(o.output_dir)) cfg.output_dir = f.output_dir;
  if (given(o.seed)) cfg.seed = f.seed;
  if (given(o.threads)) cfg.vsp.threads = f.threads;
  if (given(o.track)) cfg.n_episodes_track = f.track;
  if (given(o.min_codeword_distance)) cfg.vsp.min_codeword_distance = f.min_codeword_distance;
  if (given(o.value_ratio_threshold)) cfg.vsp.value_ratio_threshold = f.value_ratio_threshold;
  if (given(o.max_codewords_region)) cfg.vsp.max_codewords_region = f.max_codewords_region;
  if (given(o.max_codewords_iteration)) cfg.vsp.max_codewords_iteration = f.max_codewords_iteration;
  if (given(o.n_iterations)) cfg.vsp.n_iterations = f.n_iterations;
  if (given(o.max_k_clusters)) cfg.vsp.max_k_clusters = f.max_k_clusters;
  if (given(o.mode)) cfg.vsp.mode = parse_split_mode(f.mode);
  if (given(o.standardize)) cfg.vsp.standardize_states = f.standardize;
  cfg.vsp.seed = cfg.seed;
  return cfg;
}

std::array<double, 2> parse_pair(const std::vector<double>& v, const std::string& what) {
  if (v.size() != 2) throw InvalidArgument(what + " expects exactly two values");
  return {v[0], v[1]};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& lookup) {
  CLI::App app{"Voronoi state partitioning: distill a policy into linear subpolicies", "vsp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "vsp 0.1.0");

  Flags f;
  Options oc;
  Options od;
  Options oe;
  Options og;

  auto* collect = app.add_subcommand("collect", "Roll out a teacher and write a dataset");
  add_common(*collect, f, oc);
  oc.env = collect->add_option("--env", f.env, "Environment");
  oc.teacher = collect->add_option("--teacher", f.teacher, "'scripted' or a weight file");
  oc.episodes = collect->add_option("-n,--episodes", f.episodes, "Episodes to record");
  std::string dataset_out = "dataset.json";
  collect->add_option("--out", dataset_out, "Dataset file")->capture_default_str();

  auto* distill_cmd = app.add_subcommand("distill", "Partition a dataset into linear subpolicies");
  add_common(*distill_cmd, f, od);
  add_vsp(*distill_cmd, f, od);
  std::string dataset_in;
  distill_cmd->add_option("-d,--dataset", dataset_in, "Dataset file")->required();
  std::string model_out = "model.json";
  std::string history_out = "history.csv";
  distill_cmd->add_option("--model", model_out, "Model file")->capture_default_str();
  distill_cmd->add_option("--history", history_out, "Per-iteration history CSV")->capture_default_str();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Roll out a distilled model");
  add_common(*evaluate_cmd, f, oe);
  std::string model_in;
  std::string env_override;
  std::string returns_out = "returns.csv";
  evaluate_cmd->add_option("-m,--model", model_in, "Model file")->required();
  evaluate_cmd->add_option("--env", env_override, "Environment (defaults to the model's)");
  oe.episodes = evaluate_cmd->add_option("-n,--episodes", f.episodes, "Evaluation episodes");
  evaluate_cmd->add_option("--csv", returns_out, "Per-episode returns CSV")->capture_default_str();

  auto* diagram_cmd = app.add_subcommand("diagram", "Export a 2-D slice of the partition as SVG and grid CSV");
  add_common(*diagram_cmd, f, og);
  DiagramOptions dopt;
  std::vector<std::size_t> axes;
  std::vector<double> x_range;
  std::vector<double> y_range;
  std::vector<double> fixed_state;
  std::string diagram_dataset;
  std::string svg_out = "diagram.svg";
  std::string grid_out = "diagram_grid.csv";
  diagram_cmd->add_option("-m,--model", model_in, "Model file")->required();
  diagram_cmd->add_option("--axes", axes, "Two state indices")->delimiter(',')->expected(2);
  diagram_cmd->add_option("--x-range", x_range, "lo,hi")->delimiter(',')->expected(2);
  diagram_cmd->add_option("--y-range", y_range, "lo,hi")->delimiter(',')->expected(2);
  diagram_cmd->add_option("--resolution", dopt.resolution, "Grid cells per axis")->capture_default_str();
  diagram_cmd->add_option("--fixed", fixed_state, "Full state supplying the off-axis components")->delimiter(',');
  diagram_cmd->add_option("--dataset", diagram_dataset, "Dataset whose state means fix the off-axis components");
  diagram_cmd->add_option("--env", env_override, "Environment (defaults to the model's)");
  diagram_cmd->add_option("--svg", svg_out, "SVG file")->capture_default_str();
  diagram_cmd->add_option("--csv", grid_out, "Grid CSV file")->capture_default_str();

  auto* explain_cmd = app.add_subcommand("explain", "Print codewords and their linear functions");
  explain_cmd->add_option("-m,--model", model_in, "Model file")->required();
  explain_cmd->add_option("--env", env_override, "Environment used for variable names");

  std::vector<std::string> argv(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitSuccess;
  } catch (const CLI::CallForVersion&) {
    out << "vsp 0.1.0\n";
    return kExitSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsageError;
  }

  try {
    if (collect->parsed()) {
      RunConfig cfg = build_config(f, oc, lookup);
      if (given(oc.episodes)) cfg.n_episodes_training = f.episodes;
      cmd_collect(cfg, dataset_out, out);
    } else if (distill_cmd->parsed()) {
      cmd_distill(build_config(f, od, lookup), dataset_in, model_out, history_out, out);
    } else if (evaluate_cmd->parsed()) {
      RunConfig cfg = build_config(f, oe, lookup);
      if (given(oe.episodes)) cfg.n_episodes_eval = f.episodes;
      cmd_evaluate(cfg, model_in, env_override, returns_out, out);
    } else if (diagram_cmd->parsed()) {
      const RunConfig cfg = build_config(f, og, lookup);
      if (!axes.empty()) {
        if (axes.size() != 2) throw InvalidArgument("--axes expects two indices");
        dopt.axes = {axes[0], axes[1]};
      }
      if (!x_range.empty()) dopt.x_range = parse_pair(x_range, "--x-range");
      if (!y_range.empty()) dopt.y_range = parse_pair(y_range, "--y-range");
      if (!fixed_state.empty()) dopt.fixed = fixed_state;
      if (!diagram_dataset.empty()) dopt.dataset = diagram_dataset;
      dopt.env_override = env_override;
      cmd_diagram(cfg, model_in, dopt, svg_out, grid_out, out);
    } else if (explain_cmd->parsed()) {
      cmd_explain(model_in, env_override, out);
    }
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsageError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitSuccess;
}

}  // namespace vsp::cli
