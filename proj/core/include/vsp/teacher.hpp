#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vsp/envs.hpp"
#include "vsp/linear_policy.hpp"
#include "vsp/types.hpp"

namespace vsp {

enum class Activation { kRelu, kTanh, kIdentity };

Activation parse_activation(const std::string& tag);  // throws FormatError
std::string to_string(Activation a);

struct DenseLayer {
  Matrix weights;  // (out x in)
  Vector bias;
  Activation activation = Activation::kIdentity;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Feed-forward network read from a weight file. When scale_output is set the
// final output is squashed to [-1, 1] (tanh, unless the last activation already
// is tanh) and mapped affinely onto [output_low, output_high].
struct NetworkWeights {
  std::vector<DenseLayer> layers;
  bool scale_output = false;
  Vector output_low;
  Vector output_high;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().weights.cols; }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().weights.rows; }
  // Throws FormatError if layer shapes do not chain.
  void validate() const;

  friend bool operator==(const NetworkWeights&, const NetworkWeights&) = default;
};

Vector mlp_forward(const NetworkWeights& net, ConstVectorView x);

struct TeacherPolicy {
  enum class Backing { kScripted, kImportedNetwork };

  std::string id;
  Backing backing = Backing::kScripted;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  Vector action_low;
  Vector action_high;
  Policy act;

  // Calls act and clips to the action bounds.
  Vector operator()(ConstVectorView state) const;
};

// Q(s, a). Only the ordering of values matters to the partitioner.
class Critic {
 public:
  using Fn = std::function<double(ConstVectorView state, ConstVectorView action)>;

  Critic(std::string description, Fn fn) : description_(std::move(description)), fn_(std::move(fn)) {}

  double operator()(ConstVectorView state, ConstVectorView action) const { return fn_(state, action); }
  const std::string& description() const noexcept { return description_; }

 private:
  std::string description_;
  Fn fn_;
};

// Weight file contents. The critic network consumes state ++ action.
struct TeacherWeights {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  Vector action_low;
  Vector action_high;
  NetworkWeights actor;
  std::optional<NetworkWeights> critic;

  void validate() const;  // throws FormatError naming the offending field
  friend bool operator==(const TeacherWeights&, const TeacherWeights&) = default;
};

TeacherWeights parse_teacher_weights(const std::string& json_text);
std::string serialize_teacher_weights(const TeacherWeights& weights);
TeacherWeights read_teacher_weights(const std::filesystem::path& path);
void write_teacher_weights(const std::filesystem::path& path, const TeacherWeights& weights);

struct LoadedTeacher {
  TeacherPolicy policy;
  std::optional<Critic> critic;
};

LoadedTeacher make_network_teacher(TeacherWeights weights, const std::string& id);
LoadedTeacher load_teacher(const std::filesystem::path& path);

// Goal-seeking controller for SimpleGoal that detours around the pitfall.
Vector scripted_simplegoal(ConstVectorView state);
// Energy-pumping bang-bang controller for MountainCarContinuous.
Vector scripted_mountaincar(ConstVectorView state);
// "SimpleGoal" or "MountainCarContinuous"/"MountainCar".
TeacherPolicy scripted_teacher(const std::string& env_name);

struct MonteCarloCriticConfig {
  double gamma = 0.99;
  std::size_t horizon = 200;
  std::size_t n_rollouts = 1;
  std::uint64_t seed = 0;
};

// Discounted return of taking `action` in `state` and following the teacher
// for up to `horizon` further steps. Episode time limits are ignored: when the
// environment truncates, the rollout continues from the same state. Throws
// UnsupportedOperation if the environment cannot be placed in `state`.
double mc_critic(const Environment& env, const Policy& teacher, ConstVectorView state,
                 ConstVectorView action, const MonteCarloCriticConfig& cfg);

Critic make_mc_critic(const Environment& env, Policy teacher, MonteCarloCriticConfig cfg);

}  // namespace vsp
