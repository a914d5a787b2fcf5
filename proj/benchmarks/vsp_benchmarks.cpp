#include <benchmark/benchmark.h>

#include <random>

#include "vsp/clustering.hpp"
#include "vsp/envs.hpp"
#include "vsp/geometry.hpp"
#include "vsp/linear_policy.hpp"
#include "vsp/partitioner.hpp"
#include "vsp/teacher.hpp"

namespace {

std::vector<vsp::Vector> random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<vsp::Vector> out(n, vsp::Vector(dim));
  for (auto& p : out)
    for (auto& x : p) x = u(rng);
  return out;
}

void BM_QuantizerNearest(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const vsp::Quantizer q(random_points(n, dim, 1));
  const auto queries = random_points(1024, dim, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(q.nearest(queries[i++ & 1023]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_QuantizerNearest)->ArgsProduct({{16, 256, 4096}, {2, 8, 24}});

void BM_QuantizerLinear(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const vsp::Quantizer q(random_points(n, dim, 1));
  const auto queries = random_points(1024, dim, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(q.nearest_linear(queries[i++ & 1023]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_QuantizerLinear)->ArgsProduct({{16, 256, 4096}, {2, 8, 24}});

void BM_QuantizerBuild(benchmark::State& state) {
  const auto points = random_points(static_cast<std::size_t>(state.range(0)), 8, 3);
  for (auto _ : state) {
    vsp::Quantizer q(points);
    benchmark::DoNotOptimize(q.size());
  }
}
BENCHMARK(BM_QuantizerBuild)->Arg(256)->Arg(4096);

void BM_TrainSubpolicy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto states = random_points(n, 2, 4);
  std::vector<vsp::Vector> actions;
  actions.reserve(n);
  for (const auto& s : states) actions.push_back({0.3 * s[0] - 0.7 * s[1] + 0.1});
  const auto init = vsp::LinearSubpolicy::arbitrary(2, {-1.0}, {1.0}, 0);
  vsp::TrainConfig cfg;
  cfg.n_epochs = 20;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vsp::train(init, states, actions, cfg).report.final_mean_loss);
  }
}
BENCHMARK(BM_TrainSubpolicy)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FindClusters(benchmark::State& state) {
  const auto points = random_points(static_cast<std::size_t>(state.range(0)), 2, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vsp::find_clusters(points, 8, 0).size());
  }
}
BENCHMARK(BM_FindClusters)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_DistillSimpleGoal(benchmark::State& state) {
  vsp::SimpleGoal env;
  const auto teacher = vsp::scripted_teacher("SimpleGoal");
  const auto data = vsp::rollout(env, teacher.act, 50, 0, teacher.id).dataset;
  const vsp::Critic critic("distance", [](vsp::ConstVectorView s, vsp::ConstVectorView) {
    return -std::hypot(s[0], s[1]);
  });
  vsp::VspConfig cfg;
  cfg.min_codeword_distance = 0.2;
  cfg.n_iterations = static_cast<std::size_t>(state.range(0));
  cfg.train.n_epochs = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vsp::distill(data, critic, cfg).model.size());
  }
}
BENCHMARK(BM_DistillSimpleGoal)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
