#include "vsp/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vsp {

using nlohmann::json;

Activation parse_activation(const std::string& tag) {
  if (tag == "relu") return Activation::kRelu;
  if (tag == "tanh") return Activation::kTanh;
  if (tag == "identity" || tag == "linear") return Activation::kIdentity;
  throw FormatError("unknown activation tag '" + tag + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "identity";
}

void NetworkWeights::validate() const {
  if (layers.empty()) throw FormatError("network has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string where = "layer " + std::to_string(i);
    if (l.weights.rows == 0 || l.weights.cols == 0) throw FormatError(where + ": empty weight matrix");
    if (l.weights.data.size() != l.weights.rows * l.weights.cols)
      throw FormatError(where + ": weight count does not match rows*cols");
    if (l.bias.size() != l.weights.rows) throw FormatError(where + ": bias length != rows");
    if (i > 0 && l.weights.cols != layers[i - 1].weights.rows)
      throw FormatError(where + ": input width " + std::to_string(l.weights.cols) +
                        " does not match previous output " + std::to_string(layers[i - 1].weights.rows));
  }
  if (scale_output && (output_low.size() != output_dim() || output_high.size() != output_dim()))
    throw FormatError("output scaling bounds do not match the output width");
}

Vector mlp_forward(const NetworkWeights& net, ConstVectorView x) {
  require_dim(x, net.input_dim(), "network input");
  Vector cur(x.begin(), x.end());
  for (const auto& layer : net.layers) {
    Vector next(layer.bias);
    for (std::size_t r = 0; r < layer.weights.rows; ++r)
      for (std::size_t c = 0; c < layer.weights.cols; ++c) next[r] += layer.weights(r, c) * cur[c];
    for (double& v : next) {
      switch (layer.activation) {
        case Activation::kRelu: v = std::max(v, 0.0); break;
        case Activation::kTanh: v = std::tanh(v); break;
        case Activation::kIdentity: break;
      }
    }
    cur = std::move(next);
  }
  if (net.scale_output) {
    const bool squashed = net.layers.back().activation == Activation::kTanh;
    for (std::size_t k = 0; k < cur.size(); ++k) {
      const double unit = squashed ? cur[k] : std::tanh(cur[k]);
      cur[k] = net.output_low[k] + 0.5 * (unit + 1.0) * (net.output_high[k] - net.output_low[k]);
    }
  }
  return cur;
}

Vector TeacherPolicy::operator()(ConstVectorView state) const {
  require_dim(state, state_dim, "teacher input");
  Vector a = act(state);
  require_dim(a, action_dim, "teacher output");
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::clamp(a[k], action_low[k], action_high[k]);
  return a;
}

// ------------------------------------------------------------ weight files

namespace {

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw FormatError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(path + "." + key + ": missing");
  return *it;
}

std::size_t read_size(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw FormatError(path + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

Vector read_reals(const json& v, const std::string& path) {
  if (!v.is_array()) throw FormatError(path + ": expected an array of numbers");
  Vector out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw FormatError(path + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

NetworkWeights read_network(const json& v, const std::string& path) {
  if (!v.is_array()) throw FormatError(path + ": expected a layer list");
  NetworkWeights net;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string lp = path + "[" + std::to_string(i) + "]";
    DenseLayer layer;
    layer.weights.rows = read_size(field(v[i], "rows", lp), lp + ".rows");
    layer.weights.cols = read_size(field(v[i], "cols", lp), lp + ".cols");
    layer.weights.data = read_reals(field(v[i], "weights", lp), lp + ".weights");
    if (layer.weights.data.size() != layer.weights.rows * layer.weights.cols)
      throw FormatError(lp + ".weights: expected " +
                        std::to_string(layer.weights.rows * layer.weights.cols) + " values, got " +
                        std::to_string(layer.weights.data.size()));
    layer.bias = read_reals(field(v[i], "bias", lp), lp + ".bias");
    const json& act = field(v[i], "activation", lp);
    if (!act.is_string()) throw FormatError(lp + ".activation: expected a string");
    try {
      layer.activation = parse_activation(act.get<std::string>());
    } catch (const FormatError& e) {
      throw FormatError(lp + ".activation: " + e.what());
    }
    net.layers.push_back(std::move(layer));
  }
  try {
    net.validate();
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
  return net;
}

json write_network(const NetworkWeights& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"rows", l.weights.rows},
                      {"cols", l.weights.cols},
                      {"weights", l.weights.data},
                      {"bias", l.bias},
                      {"activation", to_string(l.activation)}});
  }
  return layers;
}

}  // namespace

void TeacherWeights::validate() const {
  if (state_dim == 0 || action_dim == 0) throw FormatError("state_dim/action_dim must be positive");
  if (action_low.size() != action_dim) throw FormatError("action_low: length != action_dim");
  if (action_high.size() != action_dim) throw FormatError("action_high: length != action_dim");
  for (std::size_t k = 0; k < action_dim; ++k)
    if (!(action_low[k] < action_high[k])) throw FormatError("action_low must be below action_high");
  actor.validate();
  if (actor.input_dim() != state_dim) throw FormatError("actor: input width != state_dim");
  if (actor.output_dim() != action_dim) throw FormatError("actor: output width != action_dim");
  if (critic) {
    critic->validate();
    if (critic->input_dim() != state_dim + action_dim)
      throw FormatError("critic: input width != state_dim + action_dim");
    if (critic->output_dim() != 1) throw FormatError("critic: output width must be 1");
  }
}

TeacherWeights parse_teacher_weights(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("weight file is not valid JSON: ") + e.what());
  }
  TeacherWeights w;
  w.state_dim = read_size(field(doc, "state_dim", "$"), "$.state_dim");
  w.action_dim = read_size(field(doc, "action_dim", "$"), "$.action_dim");
  w.action_low = read_reals(field(doc, "action_low", "$"), "$.action_low");
  w.action_high = read_reals(field(doc, "action_high", "$"), "$.action_high");
  w.actor = read_network(field(doc, "actor", "$"), "$.actor");
  w.actor.scale_output = doc.value("actor_scale_output", true);
  w.actor.output_low = w.action_low;
  w.actor.output_high = w.action_high;
  if (doc.contains("critic") && !doc["critic"].is_null()) w.critic = read_network(doc["critic"], "$.critic");
  try {
    w.validate();
  } catch (const FormatError& e) {
    throw FormatError(std::string("$: ") + e.what());
  }
  return w;
}

std::string serialize_teacher_weights(const TeacherWeights& w) {
  w.validate();
  json doc = {{"format", "vsp-weights"},
              {"version", 1},
              {"state_dim", w.state_dim},
              {"action_dim", w.action_dim},
              {"action_low", w.action_low},
              {"action_high", w.action_high},
              {"actor_scale_output", w.actor.scale_output},
              {"actor", write_network(w.actor)}};
  if (w.critic) doc["critic"] = write_network(*w.critic);
  return doc.dump(1);
}

TeacherWeights read_teacher_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open weight file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_teacher_weights(buf.str());
}

void write_teacher_weights(const std::filesystem::path& path, const TeacherWeights& weights) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_teacher_weights(weights) << '\n';
}

LoadedTeacher make_network_teacher(TeacherWeights weights, const std::string& id) {
  weights.validate();
  LoadedTeacher out;
  out.policy.id = id;
  out.policy.backing = TeacherPolicy::Backing::kImportedNetwork;
  out.policy.state_dim = weights.state_dim;
  out.policy.action_dim = weights.action_dim;
  out.policy.action_low = weights.action_low;
  out.policy.action_high = weights.action_high;
  out.policy.act = [actor = weights.actor](ConstVectorView s) { return mlp_forward(actor, s); };
  if (weights.critic) {
    const std::size_t sd = weights.state_dim;
    const std::size_t ad = weights.action_dim;
    out.critic = Critic("network:" + id, [net = *weights.critic, sd, ad](ConstVectorView s, ConstVectorView a) {
      require_dim(s, sd, "critic state");
      require_dim(a, ad, "critic action");
      Vector input(s.begin(), s.end());
      input.insert(input.end(), a.begin(), a.end());
      return mlp_forward(net, input)[0];
    });
  }
  return out;
}

LoadedTeacher load_teacher(const std::filesystem::path& path) {
  return make_network_teacher(read_teacher_weights(path), path.filename().string());
}

// --------------------------------------------------------- scripted teachers

Vector scripted_simplegoal(ConstVectorView state) {
  require_dim(state, 2, "SimpleGoal state");
  constexpr double kMargin = 0.05;
  constexpr double kLow = SimpleGoal::kPitLow - kMargin;
  constexpr double kHigh = SimpleGoal::kPitHigh + kMargin;
  constexpr double kCorner = 0.15;  // clearance beyond the inflated box
  const double gx = SimpleGoal::kGoalCenter;
  const double gy = SimpleGoal::kGoalCenter;
  const double x = state[0];
  const double y = state[1];

  // Liang-Barsky clip of the segment (x, y) -> goal against the inflated box.
  const auto blocked = [&]() {
    const double dx = gx - x;
    const double dy = gy - y;
    double t0 = 0.0;
    double t1 = 1.0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {x - kLow, kHigh - x, y - kLow, kHigh - y};
    for (int i = 0; i < 4; ++i) {
      if (p[i] == 0.0) {
        if (q[i] < 0.0) return false;
        continue;
      }
      const double t = q[i] / p[i];
      if (p[i] < 0.0) t0 = std::max(t0, t);
      else t1 = std::min(t1, t);
      if (t0 > t1) return false;
    }
    return true;
  };

  double tx = gx;
  double ty = gy;
  if (blocked()) {
    // Go around the side nearer to the current position: over the top-left
    // corner when above the diagonal, else past the bottom-right corner.
    if (y > x) {
      tx = kLow - kCorner;
      ty = kHigh + kCorner;
    } else {
      tx = kHigh + kCorner;
      ty = kLow - kCorner;
    }
  }

  Vector a{(tx - x) / SimpleGoal::kStepScale, (ty - y) / SimpleGoal::kStepScale};
  const double norm = std::hypot(a[0], a[1]);
  if (norm > 1.0) {
    a[0] /= norm;
    a[1] /= norm;
  }
  return a;
}

Vector scripted_mountaincar(ConstVectorView state) {
  require_dim(state, 2, "MountainCar state");
  using MC = MountainCarContinuous;
  const double x = state[0];
  const double v = state[1];
  // Mechanical energy per unit mass in step units; the slope term
  // kGravity*cos(3x) integrates to kGravity/3*sin(3x).
  const auto potential = [](double p) { return MC::kGravity / 3.0 * std::sin(3.0 * p); };
  const double energy = 0.5 * v * v + potential(x);
  // Under full throttle the hardest point is where thrust and slope cancel.
  // Past it the car accelerates all the way to the goal. The margin absorbs
  // the integration error of the discrete dynamics.
  constexpr double kMargin = 5e-4;
  const double hump = std::acos(MC::kPower / MC::kGravity) / 3.0;
  const bool enough =
      energy + MC::kPower * (hump - x) >= potential(hump) + kMargin;
  if (v >= 0.0) return {1.0};
  return {enough ? 1.0 : -1.0};
}

TeacherPolicy scripted_teacher(const std::string& env_name) {
  TeacherPolicy t;
  t.backing = TeacherPolicy::Backing::kScripted;
  if (env_name == "SimpleGoal") {
    t.id = "scripted:simplegoal";
    t.state_dim = 2;
    t.action_dim = 2;
    t.action_low = {-1.0, -1.0};
    t.action_high = {1.0, 1.0};
    t.act = [](ConstVectorView s) { return scripted_simplegoal(s); };
  } else if (env_name == "MountainCarContinuous" || env_name == "MountainCar") {
    t.id = "scripted:mountaincar";
    t.state_dim = 2;
    t.action_dim = 1;
    t.action_low = {-1.0};
    t.action_high = {1.0};
    t.act = [](ConstVectorView s) { return scripted_mountaincar(s); };
  } else {
    throw InvalidArgument("no scripted teacher for environment '" + env_name + "'");
  }
  return t;
}

// ------------------------------------------------------- Monte-Carlo critic

double mc_critic(const Environment& env, const Policy& teacher, ConstVectorView state,
                 ConstVectorView action, const MonteCarloCriticConfig& cfg) {
  if (cfg.n_rollouts == 0) throw InvalidArgument("n_rollouts must be positive");
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
  const auto sim = env.clone();
  double total = 0.0;
  for (std::size_t r = 0; r < cfg.n_rollouts; ++r) {
    sim->set_state(state);
    StepResult step = sim->step(action);
    double q = step.reward;
    double discount = 1.0;
    for (std::size_t t = 0; t < cfg.horizon && !step.terminated; ++t) {
      if (step.truncated) sim->set_state(step.state);
      discount *= cfg.gamma;
      if (discount == 0.0) break;
      const Vector a = teacher(step.state);
      step = sim->step(a);
      q += discount * step.reward;
    }
    total += q;
  }
  return total / static_cast<double>(cfg.n_rollouts);
}

Critic make_mc_critic(const Environment& env, Policy teacher, MonteCarloCriticConfig cfg) {
  std::shared_ptr<const Environment> proto = env.clone();
  return Critic("monte-carlo:" + env.name(),
                [proto, teacher = std::move(teacher), cfg](ConstVectorView s, ConstVectorView a) {
                  return mc_critic(*proto, teacher, s, a, cfg);
                });
}

}  // namespace vsp
