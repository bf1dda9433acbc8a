// Compares the serial reference kernels against the optimized and
// OpenMP-parallel paths used in training.

#include <chrono>
#include <cstdio>
#include <vector>

#include "evopipe/coevo.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace evopipe;
namespace chrono = std::chrono;

namespace {

double seconds_per_call(const auto& fn, int iterations) {
  const auto t0 = chrono::steady_clock::now();
  for (int i = 0; i < iterations; ++i) fn();
  const auto t1 = chrono::steady_clock::now();
  return chrono::duration<double>(t1 - t0).count() / iterations;
}

ProcessedFrame random_frame(Rng& rng, int size, double sparsity) {
  ProcessedFrame f = ProcessedFrame::zeros(size, size);
  for (double& v : f.data) v = rng.uniform() < sparsity ? rng.uniform() : 0.0;
  return f;
}

Kernel random_kernel(Rng& rng, int size) {
  Kernel k = Kernel::zeros(size, size);
  for (double& w : k.weights) w = rng.normal(0.0, 0.1);
  return k;
}

void bench_convolution() {
  Rng rng(7);
  std::printf("convolution, 96x96x3 image, 5x5x3 kernel (ms per call)\n");
  std::printf("%-28s %10s %10s %8s\n", "image", "reference", "optimized", "speedup");
  for (const auto& [label, sparsity] : {std::pair{"dense", 1.0}, std::pair{"game-like (5% nonzero)", 0.05}}) {
    const ProcessedFrame img = random_frame(rng, kImageSize, sparsity);
    const Kernel k = random_kernel(rng, 5);
    volatile double sink = 0.0;
    const double ref = seconds_per_call([&] { sink = sink + convolve2d_reference(img, k).data[0]; }, 20);
    const double opt = seconds_per_call([&] { sink = sink + convolve2d(img, k).data[0]; }, 200);
    std::printf("%-28s %10.3f %10.3f %7.1fx\n", label, ref * 1e3, opt * 1e3, ref / opt);
  }
  std::printf("\n");
}

void bench_episode_throughput() {
  EnvConfig env;
  Rng rng(11);
  std::vector<double> params(150);
  for (double& p : params) p = rng.normal(0.0, 0.1);
  const VisionModule vm = from_parameters(params, 2, 5, 5);
  const auto tree = TreeNode::make_condition(
      Comparison::make(CmpOp::Less, Expr::variable(3), Expr::variable(1)), TreeNode::make_leaf(2),
      TreeNode::make_leaf(3));

  MiniPong pong(env, 3);
  const int ticks = 400;
  const double per_step = seconds_per_call(
      [&] {
        if (pong.done()) pong.reset(3);
        const ProcessedFrame processed = preprocess(pong.observation());
        const int action = evaluate(*tree, coordinates_to_inputs(locate(vm, processed)));
        pong.step(action);
      },
      ticks);
  std::printf("full pipeline step (render + preprocess + 2 kernels + tree): %.1f us, %.0f steps/s\n\n",
              per_step * 1e6, 1.0 / per_step);
}

void bench_parallel_evaluation() {
  CoevoConfig cfg;
  cfg.generations = 1;
  cfg.episodes = 1;
  cfg.cma_population = 8;
  cfg.gp.population_size = 8;
  cfg.gp.tournament_size = 4;
  cfg.clustering_enabled = false;
  cfg.env.points_to_win = 3;
  cfg.master_seed = 5;

  std::printf("one generation, 8x8 pairings, 1 episode each (s)\n");
#ifdef _OPENMP
  const int max_threads = omp_get_max_threads();
#else
  const int max_threads = 1;
#endif
  for (int workers : {1, max_threads}) {
    cfg.workers = workers;
    Coevolution evo(cfg);
    const double t = seconds_per_call([&] { evo.generation_step(); }, 1);
    std::printf("  workers=%-2d %8.2f\n", workers, t);
    if (max_threads == 1) break;
  }
}

}  // namespace

int main() {
  bench_convolution();
  bench_episode_throughput();
  bench_parallel_evaluation();
  return 0;
}
