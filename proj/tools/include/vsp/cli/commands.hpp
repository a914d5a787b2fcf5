#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vsp/io.hpp"
#include "vsp/partitioner.hpp"
#include "vsp/report.hpp"
#include "vsp/teacher.hpp"

namespace vsp::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitUsageError = 2;

inline constexpr const char* kScriptedSource = "scripted";
inline constexpr const char* kMonteCarloSource = "monte-carlo";

// Everything a command needs. The teacher is either "scripted" (the built-in
// controller for `env`) or a weight-file path; the critic is either
// "monte-carlo" (rollouts of the teacher) or a weight-file path.
struct RunConfig {
  std::string env;
  std::string teacher = kScriptedSource;
  std::string critic = kMonteCarloSource;
  VspConfig vsp;
  MonteCarloCriticConfig monte_carlo;
  std::size_t n_episodes_training = 100;
  std::size_t n_episodes_eval = 100;
  // Per-iteration evaluation episodes during distill (0 disables).
  std::size_t n_episodes_track = 0;
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidArgument
};

// Overlays a JSON config file onto `base`. Run-level keys are env, teacher,
// critic, n_episodes_training, n_episodes_eval, n_episodes_track, output_dir,
// seed, gamma, horizon and n_rollouts; every other key is a VspConfig key.
RunConfig parse_run_config(const std::string& json_text, RunConfig base = {});

// VSP_OUTPUT_DIR and VSP_THREADS. `lookup` defaults to std::getenv.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
void apply_environment(RunConfig& cfg, const EnvLookup& lookup = {});

// Relative output paths land in cfg.output_dir.
std::filesystem::path output_path(const RunConfig& cfg, const std::filesystem::path& p);

TeacherPolicy resolve_teacher(const RunConfig& cfg, const std::string& env_name);
// Absent in random mode unless a critic weight file is configured.
std::optional<Critic> resolve_critic(const RunConfig& cfg, const std::string& env_name);

struct CollectResult {
  Dataset dataset;
  EvalSummary summary;
  std::filesystem::path dataset_path;
};
CollectResult cmd_collect(const RunConfig& cfg, const std::filesystem::path& dataset_out, std::ostream& out);

struct DistillOutput {
  DistillResult result;
  std::filesystem::path model_path;
  std::filesystem::path history_path;
};
DistillOutput cmd_distill(const RunConfig& cfg, const std::filesystem::path& dataset_in,
                          const std::filesystem::path& model_out, const std::filesystem::path& history_out,
                          std::ostream& out);

// Empty env_override means the environment recorded in the model file.
EvalSummary cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& model_in,
                         const std::string& env_override, const std::filesystem::path& csv_out,
                         std::ostream& out);

// "13.482 ± 1.790 over 100 episodes"
std::string summary_line(const EvalSummary& summary);

struct DiagramOptions {
  std::array<std::size_t, 2> axes{0, 1};
  std::optional<std::array<double, 2>> x_range;
  std::optional<std::array<double, 2>> y_range;
  std::size_t resolution = 100;
  std::optional<Vector> fixed;
  std::optional<std::filesystem::path> dataset;  // fixed components default to its state means
  std::string env_override;
};
Diagram cmd_diagram(const RunConfig& cfg, const std::filesystem::path& model_in, const DiagramOptions& options,
                    const std::filesystem::path& svg_out, const std::filesystem::path& csv_out, std::ostream& out);

void cmd_explain(const std::filesystem::path& model_in, const std::string& env_override, std::ostream& out);

// Full command line (args[0] is the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& lookup = {});

}  // namespace vsp::cli
