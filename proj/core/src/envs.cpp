#include "vsp/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vsp/seeding.hpp"

namespace vsp {

void Environment::set_state(ConstVectorView) {
  throw UnsupportedOperation(name() + " does not support state injection");
}

namespace {

Vector clip_action(const Environment& env, ConstVectorView action) {
  require_dim(action, env.action_dim(), "action");
  Vector out(action.begin(), action.end());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = std::clamp(out[k], env.action_low()[k], env.action_high()[k]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- SimpleGoal

SimpleGoal::SimpleGoal() = default;

bool SimpleGoal::in_goal(ConstVectorView p) { return p[0] < kGoalEdge && p[1] < kGoalEdge; }

bool SimpleGoal::in_pitfall(ConstVectorView p) {
  return p[0] > kPitLow && p[0] < kPitHigh && p[1] > kPitLow && p[1] < kPitHigh;
}

double SimpleGoal::goal_distance(ConstVectorView p) {
  return std::hypot(p[0] - kGoalCenter, p[1] - kGoalCenter);
}

Vector SimpleGoal::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  do {
    pos_[0] = u(rng);
    pos_[1] = u(rng);
  } while (in_goal(pos_) || in_pitfall(pos_));
  steps_ = 0;
  done_ = false;
  return pos_;
}

StepResult SimpleGoal::step(ConstVectorView action) {
  if (done_) throw InvalidState("SimpleGoal: step after the episode ended; call reset()");
  const Vector a = clip_action(*this, action);
  const double before = goal_distance(pos_);
  for (std::size_t i = 0; i < 2; ++i) pos_[i] = std::clamp(pos_[i] + kStepScale * a[i], 0.0, 1.0);
  ++steps_;

  StepResult r;
  r.reward = kPotentialScale * (before - goal_distance(pos_));
  if (in_pitfall(pos_)) {
    r.reward += kPitPenalty;
    r.terminated = true;
  } else if (in_goal(pos_)) {
    r.reward += kTerminalBonus;
    r.terminated = true;
    r.success = true;
  }
  r.truncated = !r.terminated && steps_ >= kMaxSteps;
  done_ = r.terminated || r.truncated;
  r.state = pos_;
  return r;
}

void SimpleGoal::set_state(ConstVectorView state) {
  require_dim(state, 2, "SimpleGoal state");
  for (std::size_t i = 0; i < 2; ++i) pos_[i] = std::clamp(state[i], 0.0, 1.0);
  steps_ = 0;
  done_ = false;
}

// ----------------------------------------------------- MountainCarContinuous

MountainCarContinuous::MountainCarContinuous() = default;

Vector MountainCarContinuous::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(kResetLow, kResetHigh);
  position_ = u(rng);
  velocity_ = 0.0;
  steps_ = 0;
  done_ = false;
  return state();
}

StepResult MountainCarContinuous::step(ConstVectorView action) {
  if (done_) throw InvalidState("MountainCarContinuous: step after the episode ended; call reset()");
  const double force = clip_action(*this, action)[0];

  velocity_ += force * kPower - kGravity * std::cos(3.0 * position_);
  velocity_ = std::clamp(velocity_, -kMaxSpeed, kMaxSpeed);
  position_ += velocity_;
  position_ = std::clamp(position_, kMinPosition, kMaxPosition);
  if (position_ == kMinPosition && velocity_ < 0.0) velocity_ = 0.0;
  ++steps_;

  StepResult r;
  r.terminated = position_ >= kGoalPosition && velocity_ >= kGoalVelocity;
  r.success = r.terminated;
  r.reward = (r.terminated ? kGoalReward : 0.0) - force * force * kActionCost;
  r.truncated = !r.terminated && steps_ >= kMaxSteps;
  done_ = r.terminated || r.truncated;
  r.state = state();
  return r;
}

void MountainCarContinuous::set_state(ConstVectorView state) {
  require_dim(state, 2, "MountainCarContinuous state");
  position_ = std::clamp(state[0], kMinPosition, kMaxPosition);
  velocity_ = std::clamp(state[1], -kMaxSpeed, kMaxSpeed);
  steps_ = 0;
  done_ = false;
}

std::unique_ptr<Environment> make_environment(const std::string& name) {
  if (name == "SimpleGoal") return std::make_unique<SimpleGoal>();
  if (name == "MountainCarContinuous" || name == "MountainCar")
    return std::make_unique<MountainCarContinuous>();
  throw InvalidArgument("unknown environment '" + name + "'");
}

// ------------------------------------------------------------------ Dataset

void Dataset::validate() const {
  if (metadata.state_dim == 0 || metadata.action_dim == 0)
    throw InvalidArgument("dataset metadata must declare positive dimensions");
  for (const auto& ep : episodes) {
    if (ep.states.size() != ep.actions.size())
      throw InvalidArgument("episode has mismatched state and action counts");
    for (const auto& s : ep.states) require_dim(s, metadata.state_dim, "dataset state");
    for (const auto& a : ep.actions) require_dim(a, metadata.action_dim, "dataset action");
  }
}

std::size_t Dataset::num_pairs() const noexcept {
  std::size_t n = 0;
  for (const auto& ep : episodes) n += ep.size();
  return n;
}

std::vector<Vector> Dataset::all_states() const {
  std::vector<Vector> out;
  out.reserve(num_pairs());
  for (const auto& ep : episodes) out.insert(out.end(), ep.states.begin(), ep.states.end());
  return out;
}

std::vector<Vector> Dataset::all_actions() const {
  std::vector<Vector> out;
  out.reserve(num_pairs());
  for (const auto& ep : episodes) out.insert(out.end(), ep.actions.begin(), ep.actions.end());
  return out;
}

// --------------------------------------------------------------- Evaluation

EvalSummary EvalSummary::from_returns(std::vector<double> returns) {
  EvalSummary s;
  s.n_episodes = returns.size();
  if (!returns.empty()) {
    const double n = static_cast<double>(returns.size());
    s.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
    double var = 0.0;
    for (const double r : returns) var += (r - s.mean_return) * (r - s.mean_return);
    s.std_return = std::sqrt(var / n);
  }
  s.per_episode_returns = std::move(returns);
  return s;
}

std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode) noexcept {
  return derive_seed(seed, {0x65706973ULL, episode});
}

namespace {

Rollout run_episodes(Environment& env, const Policy& policy, std::size_t n_episodes,
                     std::uint64_t seed, bool keep_data) {
  if (n_episodes == 0) throw InvalidArgument("n_episodes must be positive");
  Rollout out;
  out.dataset.metadata = {env.name(), env.state_dim(), env.action_dim(), {}, seed};
  std::vector<double> returns;
  std::size_t successes = 0;
  std::size_t failures = 0;
  for (std::size_t e = 0; e < n_episodes; ++e) {
    Episode ep;
    Vector s = env.reset(episode_seed(seed, e));
    double total = 0.0;
    for (;;) {
      Vector a = policy(s);
      require_dim(a, env.action_dim(), "policy output");
      StepResult r = env.step(a);
      if (keep_data) {
        ep.states.push_back(std::move(s));
        ep.actions.push_back(std::move(a));
      }
      total += r.reward;
      s = std::move(r.state);
      if (r.terminated) (r.success ? successes : failures) += 1;
      if (r.terminated || r.truncated) break;
    }
    returns.push_back(total);
    if (keep_data) out.dataset.episodes.push_back(std::move(ep));
  }
  out.summary = EvalSummary::from_returns(std::move(returns));
  out.summary.successful_episodes = successes;
  out.summary.failed_episodes = failures;
  return out;
}

}  // namespace

Rollout rollout(Environment& env, const Policy& policy, std::size_t n_episodes, std::uint64_t seed,
                const std::string& teacher_id) {
  Rollout out = run_episodes(env, policy, n_episodes, seed, true);
  out.dataset.metadata.teacher_id = teacher_id;
  return out;
}

EvalSummary evaluate(Environment& env, const Policy& policy, std::size_t n_episodes, std::uint64_t seed) {
  return run_episodes(env, policy, n_episodes, seed, false).summary;
}

}  // namespace vsp
