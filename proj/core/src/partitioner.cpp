#include "vsp/partitioner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "vsp/clustering.hpp"
#include "vsp/seeding.hpp"

namespace vsp {
namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kPolicyInitTag = 0x706f6c;
constexpr std::uint64_t kTrainTag = 0x747261;
constexpr std::uint64_t kClusterTag = 0x636c75;
constexpr std::uint64_t kRandomTag = 0x726e64;

LinearSubpolicy fresh_subpolicy(const PartitionModel& model, std::size_t codeword_index,
                                std::uint64_t seed) {
  const auto& proto = model.subpolicies().front();
  return LinearSubpolicy::arbitrary(model.state_dim(), proto.action_low(), proto.action_high(),
                                    derive_seed(seed, {kPolicyInitTag, codeword_index}));
}

std::unique_ptr<Environment> known_environment(const std::string& name) {
  try {
    return make_environment(name);
  } catch (const InvalidArgument&) {
    return nullptr;
  }
}

}  // namespace

SplitMode parse_split_mode(const std::string& s) {
  if (s == "critic") return SplitMode::kCritic;
  if (s == "random") return SplitMode::kRandom;
  throw InvalidArgument("unknown split mode '" + s + "' (expected critic or random)");
}

std::string to_string(SplitMode m) { return m == SplitMode::kCritic ? "critic" : "random"; }

void VspConfig::validate() const {
  if (!(min_codeword_distance > 0.0)) throw InvalidArgument("min_codeword_distance must be positive");
  if (!(value_ratio_threshold > 0.0 && value_ratio_threshold <= 1.0))
    throw InvalidArgument("value_ratio_threshold must lie in (0, 1]");
  if (max_codewords_region == 0) throw InvalidArgument("max_codewords_region must be at least 1");
  if (max_codewords_iteration == 0) throw InvalidArgument("max_codewords_iteration must be at least 1");
  if (n_iterations == 0) throw InvalidArgument("n_iterations must be at least 1");
  if (max_k_clusters < 2) throw InvalidArgument("max_k_clusters must be at least 2");
  if (action_low.has_value() != action_high.has_value())
    throw InvalidArgument("action_low and action_high must be given together");
  train.validate();
}

// ------------------------------------------------------------ PartitionModel

PartitionModel::PartitionModel(Quantizer quantizer, std::vector<LinearSubpolicy> subpolicies,
                               std::vector<std::optional<double>> region_losses)
    : quantizer_(std::move(quantizer)),
      subpolicies_(std::move(subpolicies)),
      losses_(std::move(region_losses)) {
  if (subpolicies_.size() != quantizer_.size())
    throw InvalidArgument("partition needs exactly one subpolicy per codeword");
  if (losses_.size() != subpolicies_.size()) throw InvalidArgument("one loss slot per region required");
  for (const auto& p : subpolicies_) {
    require_dim(Vector(p.state_dim()), quantizer_.dimension(), "subpolicy state width");
    require_dim(Vector(p.action_dim()), subpolicies_.front().action_dim(), "subpolicy action width");
  }
}

Vector PartitionModel::predict(ConstVectorView state) const {
  return subpolicies_[route(state)].predict(state);
}

void PartitionModel::add_regions(const std::vector<Vector>& codewords,
                                 std::vector<LinearSubpolicy> subpolicies) {
  if (codewords.size() != subpolicies.size())
    throw InvalidArgument("add_regions: codeword and subpolicy counts differ");
  for (const auto& p : subpolicies) require_dim(Vector(p.state_dim()), state_dim(), "subpolicy state width");
  quantizer_.add_codewords(codewords);
  for (auto& p : subpolicies) {
    subpolicies_.push_back(std::move(p));
    losses_.emplace_back();
  }
}

void PartitionModel::set_subpolicy(std::size_t region, LinearSubpolicy policy) {
  if (policy.state_dim() != state_dim() || policy.action_dim() != action_dim())
    throw DimensionMismatch(state_dim(), policy.state_dim(), "replacement subpolicy");
  subpolicies_.at(region) = std::move(policy);
}

void PartitionModel::set_region_loss(std::size_t region, std::optional<double> loss) {
  losses_.at(region) = loss;
}

Vector model_predict(const PartitionModel& model, ConstVectorView state) { return model.predict(state); }

// ------------------------------------------------------------------ steps

PartitionModel init_partition(const Dataset& dataset, const VspConfig& cfg) {
  if (dataset.episodes.empty() || dataset.episodes.front().states.empty())
    throw InvalidArgument("cannot partition an empty dataset");
  dataset.validate();
  const Vector& s0 = dataset.episodes.front().states.front();

  std::optional<Vector> scale;
  if (cfg.standardize_states) {
    const auto states = dataset.all_states();
    const std::size_t d = s0.size();
    Vector mean(d, 0.0), var(d, 0.0);
    for (const auto& s : states)
      for (std::size_t i = 0; i < d; ++i) mean[i] += s[i];
    for (double& m : mean) m /= static_cast<double>(states.size());
    for (const auto& s : states)
      for (std::size_t i = 0; i < d; ++i) var[i] += (s[i] - mean[i]) * (s[i] - mean[i]);
    scale.emplace(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double sd = std::sqrt(var[i] / static_cast<double>(states.size()));
      (*scale)[i] = sd > 0.0 ? 1.0 / sd : 1.0;
    }
  }

  const std::size_t ad = dataset.metadata.action_dim;
  Vector low, high;
  if (cfg.action_low && cfg.action_high) {
    low = *cfg.action_low;
    high = *cfg.action_high;
  } else if (auto env = known_environment(dataset.metadata.env_name); env && env->action_dim() == ad) {
    low = env->action_low();
    high = env->action_high();
  } else {
    low.assign(ad, std::numeric_limits<double>::infinity());
    high.assign(ad, -std::numeric_limits<double>::infinity());
    for (const auto& ep : dataset.episodes)
      for (const auto& a : ep.actions)
        for (std::size_t k = 0; k < ad; ++k) {
          low[k] = std::min(low[k], a[k]);
          high[k] = std::max(high[k], a[k]);
        }
    for (std::size_t k = 0; k < ad; ++k)
      if (!(low[k] < high[k])) {
        low[k] -= 1.0;
        high[k] += 1.0;
      }
  }

  Quantizer q({s0}, std::move(scale));
  std::vector<LinearSubpolicy> subs;
  subs.push_back(LinearSubpolicy::arbitrary(s0.size(), low, high, derive_seed(cfg.seed, {kPolicyInitTag, 0})));
  return PartitionModel(std::move(q), std::move(subs), {std::nullopt});
}

namespace {

std::vector<std::size_t> candidate_positions(const std::vector<Vector>& states,
                                             const std::vector<std::size_t>& bucket,
                                             ConstVectorView codeword, double min_dist,
                                             const Quantizer* metric) {
  std::vector<std::size_t> out;
  for (const std::size_t i : bucket) {
    const double d = metric ? metric->metric_distance(states[i], codeword) : distance(states[i], codeword);
    if (d > min_dist) out.push_back(i);
  }
  return out;
}

// Positions of candidates in ascending order of critic value (stable).
std::vector<std::size_t> value_order(const std::vector<Vector>& states, const std::vector<std::size_t>& positions,
                                     const LinearSubpolicy& subpolicy, const Critic& critic) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(positions.size());
  for (std::size_t j = 0; j < positions.size(); ++j) {
    const Vector& s = states[positions[j]];
    scored.emplace_back(critic(s, subpolicy.predict(s)), j);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::size_t> out;
  out.reserve(scored.size());
  for (const auto& [q, j] : scored) out.push_back(positions[j]);
  return out;
}

}  // namespace

std::vector<Vector> candidate_states(const std::vector<Vector>& states, ConstVectorView codeword,
                                     double min_dist) {
  std::vector<std::size_t> all(states.size());
  std::iota(all.begin(), all.end(), 0U);
  for (const auto& s : states) require_dim(s, codeword.size(), "candidate state");
  std::vector<Vector> out;
  for (const std::size_t i : candidate_positions(states, all, codeword, min_dist, nullptr)) out.push_back(states[i]);
  return out;
}

std::size_t selection_count(double ratio, std::size_t n) {
  if (n == 0) return 0;
  const auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

std::vector<Vector> select_low_value(const std::vector<Vector>& candidates,
                                     const LinearSubpolicy& subpolicy, const Critic& critic,
                                     double ratio) {
  std::vector<std::size_t> all(candidates.size());
  std::iota(all.begin(), all.end(), 0U);
  auto order = value_order(candidates, all, subpolicy, critic);
  order.resize(selection_count(ratio, order.size()));
  std::vector<Vector> out;
  out.reserve(order.size());
  for (const std::size_t i : order) out.push_back(candidates[i]);
  return out;
}

std::vector<Vector> split_region(const std::vector<Vector>& X, PartitionModel& model,
                                 const VspConfig& cfg, std::size_t budget,
                                 std::uint64_t cluster_seed) {
  const std::size_t cap = std::min(cfg.max_codewords_region, budget);
  if (cap == 0 || X.empty()) return {};
  const Quantizer& q = model.quantizer();
  const auto& scale = q.metric_scale();

  const KMeansOptions km{300, cfg.kmeans_restarts};
  std::vector<Vector> centroids;
  if (scale) {
    std::vector<Vector> scaled = X;
    for (auto& s : scaled)
      for (std::size_t i = 0; i < s.size(); ++i) s[i] *= (*scale)[i];
    centroids = find_clusters(scaled, cfg.max_k_clusters, cluster_seed, km);
    for (auto& c : centroids)
      for (std::size_t i = 0; i < c.size(); ++i) c[i] /= (*scale)[i];
  } else {
    centroids = find_clusters(X, cfg.max_k_clusters, cluster_seed, km);
  }

  std::vector<Vector> accepted;
  for (auto& c : centroids) {
    if (accepted.size() >= cap) break;
    const auto too_close = [&](const Vector& other) {
      return q.metric_distance(c, other) <= cfg.min_codeword_distance;
    };
    if (too_close(q.codeword(q.nearest(c)).point)) continue;
    if (std::any_of(accepted.begin(), accepted.end(), too_close)) continue;
    accepted.push_back(std::move(c));
  }
  if (accepted.empty()) return accepted;

  std::vector<LinearSubpolicy> fresh;
  for (std::size_t i = 0; i < accepted.size(); ++i)
    fresh.push_back(fresh_subpolicy(model, model.size() + i, cfg.seed));
  model.add_regions(accepted, std::move(fresh));
  return accepted;
}

std::optional<std::size_t> detect_convergence(const std::vector<IterationRecord>& history,
                                              std::size_t window) {
  if (window == 0) return history.empty() ? std::nullopt : std::optional<std::size_t>(0);
  for (std::size_t n = 0; n + window < history.size(); ++n) {
    bool stable = true;
    for (std::size_t j = 1; j <= window && stable; ++j)
      stable = history[n + j].region_count == history[n].region_count;
    if (stable) return history[n].iteration;
  }
  return std::nullopt;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace

DistillResult distill(const Dataset& dataset, const std::optional<Critic>& critic,
                      const VspConfig& cfg, const DistillOptions& options) {
  cfg.validate();
  if (cfg.mode == SplitMode::kCritic && !critic)
    throw InvalidArgument("critic-driven partitioning needs a critic");
  PartitionModel model = init_partition(dataset, cfg);
  const std::vector<Vector> states = dataset.all_states();
  const std::vector<Vector> actions = dataset.all_actions();

  std::vector<IterationRecord> history;
  for (std::size_t iter = 0; iter < cfg.n_iterations; ++iter) {
    // Distribute pairs over regions and train every non-empty region.
    const auto buckets = model.quantizer().assign_all(states);
    std::vector<std::size_t> trained;
    for (const auto& [region, positions] : buckets) trained.push_back(region);

    std::vector<std::optional<TrainResult>> results(model.size());
    parallel_for(trained.size(), cfg.threads, [&](std::size_t t) {
      const std::size_t region = trained[t];
      const auto& positions = buckets.at(region);
      std::vector<Vector> xs, ys;
      xs.reserve(positions.size());
      ys.reserve(positions.size());
      for (const std::size_t i : positions) {
        xs.push_back(states[i]);
        ys.push_back(actions[i]);
      }
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.seed, {kTrainTag, iter, region});
      results[region] = train(model.subpolicies()[region], xs, ys, tc);
    });

    IterationRecord record;
    record.iteration = iter;
    record.region_count = model.size();
    double weighted = 0.0;
    for (std::size_t r = 0; r < model.size(); ++r) {
      if (results[r]) {
        model.set_subpolicy(r, std::move(results[r]->policy));
        model.set_region_loss(r, results[r]->report.final_mean_loss);
        weighted += results[r]->report.final_mean_loss * static_cast<double>(buckets.at(r).size());
      } else {
        model.set_region_loss(r, std::nullopt);
      }
    }
    record.region_losses = model.region_losses();
    record.mean_loss = weighted / static_cast<double>(states.size());

    bool stop = iter + 1 == cfg.n_iterations;
    if (options.eval && options.eval->env) {
      auto env = options.eval->env->clone();
      const EvalSummary s = evaluate(
          *env, [&model](ConstVectorView x) { return model.predict(x); }, options.eval->n_episodes,
          options.eval->seed);
      record.eval_return = s.mean_return;
      if (options.eval->target_return && s.mean_return >= *options.eval->target_return) stop = true;
    }

    if (!stop) {
      // Worst-fit regions first; ties by region index.
      std::vector<std::size_t> order = trained;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *model.region_losses()[a] > *model.region_losses()[b];
      });

      std::size_t added = 0;
      for (const std::size_t region : order) {
        if (added >= cfg.max_codewords_iteration) break;
        const Vector codeword = model.quantizer().codeword(region).point;
        SplitEvent event;
        event.iteration = iter;
        event.region = region;
        event.candidates = candidate_positions(states, buckets.at(region), codeword,
                                               cfg.min_codeword_distance, &model.quantizer());
        if (event.candidates.empty()) {
          if (options.on_split) options.on_split(event);
          continue;
        }

        const std::size_t count = selection_count(cfg.value_ratio_threshold, event.candidates.size());
        if (cfg.mode == SplitMode::kCritic) {
          event.selected = value_order(states, event.candidates, model.subpolicies()[region], *critic);
          event.selected.resize(count);
        } else if (count == event.candidates.size()) {
          event.selected = event.candidates;
        } else {
          std::mt19937_64 rng(derive_seed(cfg.seed, {kRandomTag, iter, region}));
          std::sample(event.candidates.begin(), event.candidates.end(), std::back_inserter(event.selected),
                      count, rng);
        }
        // Clustering sees the selected set in dataset order, whatever chose it.
        std::sort(event.selected.begin(), event.selected.end());

        std::vector<Vector> X;
        X.reserve(event.selected.size());
        for (const std::size_t i : event.selected) X.push_back(states[i]);
        event.added = split_region(X, model, cfg, cfg.max_codewords_iteration - added,
                                   derive_seed(cfg.seed, {kClusterTag, iter, region}));
        added += event.added.size();
        if (options.on_split) options.on_split(event);
      }
      record.codewords_added = added;
    }

    history.push_back(std::move(record));
    if (stop) break;
  }

  DistillResult result{std::move(model), std::move(history), std::nullopt};
  result.converged_at = detect_convergence(result.history);
  return result;
}

}  // namespace vsp
