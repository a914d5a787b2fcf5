#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "vsp/types.hpp"

namespace vsp {

struct StepResult {
  Vector state;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  // Terminated by reaching the task goal (as opposed to a failure state).
  bool success = false;
};

// Resettable, steppable continuous-control simulation. Actions outside the
// declared bounds are clipped before being applied.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual const Vector& action_low() const = 0;
  virtual const Vector& action_high() const = 0;
  virtual const Vector& observation_low() const = 0;
  virtual const Vector& observation_high() const = 0;
  virtual std::size_t max_steps() const = 0;

  virtual Vector reset(std::uint64_t seed) = 0;
  // Throws InvalidState once the episode has terminated or been truncated.
  virtual StepResult step(ConstVectorView action) = 0;

  // Places the simulation in an arbitrary state with a fresh step counter.
  virtual void set_state(ConstVectorView state);
  virtual Vector state() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

// Unit-square navigation: reach the goal corner while avoiding the central
// pitfall. Reward is 10x the decrease in distance to the goal center each
// step, plus +10 on reaching the goal or -10 on falling into the pitfall.
class SimpleGoal final : public Environment {
 public:
  static constexpr double kStepScale = 0.1;
  static constexpr double kGoalEdge = 0.1;       // goal: x < 0.1 and y < 0.1
  static constexpr double kGoalCenter = 0.05;
  static constexpr double kPitLow = 0.4;         // pitfall: 0.4 < x,y < 0.6
  static constexpr double kPitHigh = 0.6;
  static constexpr double kTerminalBonus = 10.0;
  static constexpr double kPitPenalty = -10.0;
  static constexpr double kPotentialScale = 10.0;
  static constexpr std::size_t kMaxSteps = 50;

  SimpleGoal();

  std::string name() const override { return "SimpleGoal"; }
  std::size_t state_dim() const override { return 2; }
  std::size_t action_dim() const override { return 2; }
  const Vector& action_low() const override { return action_low_; }
  const Vector& action_high() const override { return action_high_; }
  const Vector& observation_low() const override { return obs_low_; }
  const Vector& observation_high() const override { return obs_high_; }
  std::size_t max_steps() const override { return kMaxSteps; }

  Vector reset(std::uint64_t seed) override;
  StepResult step(ConstVectorView action) override;
  void set_state(ConstVectorView state) override;
  Vector state() const override { return pos_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<SimpleGoal>(*this); }

  static bool in_goal(ConstVectorView p);
  static bool in_pitfall(ConstVectorView p);
  static double goal_distance(ConstVectorView p);

 private:
  Vector action_low_{-1.0, -1.0};
  Vector action_high_{1.0, 1.0};
  Vector obs_low_{0.0, 0.0};
  Vector obs_high_{1.0, 1.0};
  Vector pos_{0.5, 0.0};
  std::size_t steps_ = 0;
  bool done_ = false;
};

// Continuous mountain car with the canonical Gymnasium dynamics.
class MountainCarContinuous final : public Environment {
 public:
  static constexpr double kMinPosition = -1.2;
  static constexpr double kMaxPosition = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalPosition = 0.45;
  static constexpr double kGoalVelocity = 0.0;
  static constexpr double kPower = 0.0015;
  static constexpr double kGravity = 0.0025;
  static constexpr double kActionCost = 0.1;
  static constexpr double kGoalReward = 100.0;
  static constexpr double kResetLow = -0.6;
  static constexpr double kResetHigh = -0.4;
  static constexpr std::size_t kMaxSteps = 999;

  MountainCarContinuous();

  std::string name() const override { return "MountainCarContinuous"; }
  std::size_t state_dim() const override { return 2; }
  std::size_t action_dim() const override { return 1; }
  const Vector& action_low() const override { return action_low_; }
  const Vector& action_high() const override { return action_high_; }
  const Vector& observation_low() const override { return obs_low_; }
  const Vector& observation_high() const override { return obs_high_; }
  std::size_t max_steps() const override { return kMaxSteps; }

  Vector reset(std::uint64_t seed) override;
  StepResult step(ConstVectorView action) override;
  void set_state(ConstVectorView state) override;
  Vector state() const override { return {position_, velocity_}; }
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<MountainCarContinuous>(*this);
  }

 private:
  Vector action_low_{-1.0};
  Vector action_high_{1.0};
  Vector obs_low_{kMinPosition, -kMaxSpeed};
  Vector obs_high_{kMaxPosition, kMaxSpeed};
  double position_ = -0.5;
  double velocity_ = 0.0;
  std::size_t steps_ = 0;
  bool done_ = false;
};

// Known environment names: "SimpleGoal", "MountainCarContinuous" (alias "MountainCar").
std::unique_ptr<Environment> make_environment(const std::string& name);

using Policy = std::function<Vector(ConstVectorView)>;

struct Episode {
  std::vector<Vector> states;
  std::vector<Vector> actions;

  std::size_t size() const noexcept { return states.size(); }
  friend bool operator==(const Episode&, const Episode&) = default;
};

struct DatasetMetadata {
  std::string env_name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::string teacher_id;
  std::uint64_t seed = 0;

  friend bool operator==(const DatasetMetadata&, const DatasetMetadata&) = default;
};

struct Dataset {
  DatasetMetadata metadata;
  std::vector<Episode> episodes;

  // Throws DimensionMismatch/InvalidArgument if any pair disagrees with metadata.
  void validate() const;
  std::size_t num_pairs() const noexcept;
  bool empty() const noexcept { return num_pairs() == 0; }
  // All pairs flattened in episode order.
  std::vector<Vector> all_states() const;
  std::vector<Vector> all_actions() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct EvalSummary {
  double mean_return = 0.0;
  double std_return = 0.0;  // population standard deviation
  std::size_t n_episodes = 0;
  std::vector<double> per_episode_returns;
  std::size_t successful_episodes = 0;  // ended in the goal
  std::size_t failed_episodes = 0;      // terminated outside the goal

  static EvalSummary from_returns(std::vector<double> returns);
};

// Per-episode reset seeds derived from the run seed.
std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode) noexcept;

struct Rollout {
  Dataset dataset;
  EvalSummary summary;
};

// Undiscounted returns; every visited (state, action) pair is recorded.
Rollout rollout(Environment& env, const Policy& policy, std::size_t n_episodes, std::uint64_t seed,
                const std::string& teacher_id = {});

EvalSummary evaluate(Environment& env, const Policy& policy, std::size_t n_episodes, std::uint64_t seed);

}  // namespace vsp
