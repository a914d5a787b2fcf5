#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vsp/envs.hpp"
#include "vsp/geometry.hpp"
#include "vsp/linear_policy.hpp"
#include "vsp/teacher.hpp"

namespace vsp {

enum class SplitMode { kCritic, kRandom };

SplitMode parse_split_mode(const std::string& s);  // "critic" | "random"
std::string to_string(SplitMode m);

struct VspConfig {
  double min_codeword_distance = 0.6;  // D-, state-space units
  double value_ratio_threshold = 0.5;  // fraction of lowest-value candidates clustered
  std::size_t max_codewords_region = 2;
  std::size_t max_codewords_iteration = 3;
  std::size_t n_iterations = 10;
  std::size_t max_k_clusters = 8;
  std::size_t kmeans_restarts = 1;
  SplitMode mode = SplitMode::kCritic;
  std::uint64_t seed = 0;
  // Measure distances in units of the dataset's per-dimension std.
  bool standardize_states = false;
  // Worker threads for per-region training; 0 picks the hardware count.
  std::size_t threads = 1;
  // Subpolicy output clipping. When unset, the bounds of the dataset's
  // environment are used if it is a known one, else the observed action range.
  std::optional<Vector> action_low;
  std::optional<Vector> action_high;
  TrainConfig train;

  void validate() const;
};

// One Voronoi region per codeword, each with its own linear subpolicy.
class PartitionModel {
 public:
  PartitionModel(Quantizer quantizer, std::vector<LinearSubpolicy> subpolicies,
                 std::vector<std::optional<double>> region_losses);

  const Quantizer& quantizer() const noexcept { return quantizer_; }
  const std::vector<LinearSubpolicy>& subpolicies() const noexcept { return subpolicies_; }
  const std::vector<std::optional<double>>& region_losses() const noexcept { return losses_; }
  std::size_t size() const noexcept { return subpolicies_.size(); }
  std::size_t state_dim() const noexcept { return quantizer_.dimension(); }
  std::size_t action_dim() const noexcept { return subpolicies_.front().action_dim(); }

  std::size_t route(ConstVectorView state) const { return quantizer_.nearest(state); }
  Vector predict(ConstVectorView state) const;

  // Appends regions and rebuilds the spatial index once.
  void add_regions(const std::vector<Vector>& codewords, std::vector<LinearSubpolicy> subpolicies);
  void set_subpolicy(std::size_t region, LinearSubpolicy policy);
  void set_region_loss(std::size_t region, std::optional<double> loss);

  friend bool operator==(const PartitionModel&, const PartitionModel&) = default;

 private:
  Quantizer quantizer_;
  std::vector<LinearSubpolicy> subpolicies_;
  std::vector<std::optional<double>> losses_;
};

Vector model_predict(const PartitionModel& model, ConstVectorView state);

// Single region whose codeword is the first state of the first episode.
PartitionModel init_partition(const Dataset& dataset, const VspConfig& cfg);

// States strictly farther than min_dist (Euclidean) from the codeword.
std::vector<Vector> candidate_states(const std::vector<Vector>& states, ConstVectorView codeword,
                                     double min_dist);

// floor(ratio * n) with a tolerance for representation error, at least 1 when n > 0.
std::size_t selection_count(double ratio, std::size_t n);

// The selection_count(ratio, n) candidates with the lowest Q(s, subpolicy(s)),
// in ascending order of value. Ties keep input order.
std::vector<Vector> select_low_value(const std::vector<Vector>& candidates,
                                     const LinearSubpolicy& subpolicy, const Critic& critic,
                                     double ratio);

// Clusters X and appends centroids as new regions (each with a fresh
// subpolicy) until max_codewords_region or the budget is hit. A centroid
// within min_codeword_distance of any codeword is discarded.
std::vector<Vector> split_region(const std::vector<Vector>& X, PartitionModel& model,
                                 const VspConfig& cfg, std::size_t budget,
                                 std::uint64_t cluster_seed);

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t region_count = 0;  // regions trained this iteration
  std::vector<std::optional<double>> region_losses;
  double mean_loss = 0.0;  // sample-weighted over all trained regions
  std::optional<double> eval_return;
  std::size_t codewords_added = 0;
};

// Emitted once per region visited during splitting.
struct SplitEvent {
  std::size_t iteration = 0;
  std::size_t region = 0;
  std::vector<std::size_t> candidates;  // dataset positions passing the distance filter
  std::vector<std::size_t> selected;    // positions handed to clustering, ascending
  std::vector<Vector> added;            // codewords accepted
};

struct EvalHook {
  const Environment* env = nullptr;
  std::size_t n_episodes = 10;
  std::uint64_t seed = 0;
  std::optional<double> target_return;  // stop once the mean return reaches this
};

struct DistillOptions {
  std::optional<EvalHook> eval;
  std::function<void(const SplitEvent&)> on_split;
};

struct DistillResult {
  PartitionModel model;
  std::vector<IterationRecord> history;
  std::optional<std::size_t> converged_at;
};

// First iteration after which the region count stays unchanged for `window`
// consecutive iterations.
std::optional<std::size_t> detect_convergence(const std::vector<IterationRecord>& history,
                                              std::size_t window = 3);

// Alternates per-region training with critic-driven splitting. The last
// iteration only trains. In random mode the critic may be absent.
DistillResult distill(const Dataset& dataset, const std::optional<Critic>& critic,
                      const VspConfig& cfg, const DistillOptions& options = {});

}  // namespace vsp
