#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "evopipe/checkpoint.hpp"
#include "evopipe/config.hpp"
#include "evopipe/run.hpp"
#include "evopipe/stats.hpp"

namespace fs = std::filesystem;
using namespace evopipe;

namespace {

std::string output_root() {
  if (const char* env = std::getenv("EVOPIPE_OUT")) return env;
  return ".";
}

std::string default_run_dir(const std::string& config_path, std::uint64_t seed) {
  const std::string stem = fs::path(config_path).stem().string();
  return (fs::path(output_root()) / "runs" / (stem + "-seed" + std::to_string(seed))).string();
}

EnvConfig apply_frameskip_override(EnvConfig env, const std::string& mode) {
  if (mode.empty()) return env;
  if (mode == "none") {
    env.stochastic_frameskip = false;
    return env;
  }
  if (mode == "stochastic") {
    env.stochastic_frameskip = true;
    return env;
  }
  int lo = 0, hi = 0;
  if (std::sscanf(mode.c_str(), "%d:%d", &lo, &hi) == 2) {
    env.stochastic_frameskip = true;
    env.frameskip_min = lo;
    env.frameskip_max = hi;
    return env;
  }
  throw std::runtime_error("eval: --frame-skip must be none, stochastic or MIN:MAX");
}

std::vector<std::string> pipeline_variable_names(int kernel_count) {
  std::vector<std::string> names;
  for (int i = 0; i < kernel_count; ++i) {
    names.push_back("x_" + std::to_string(i + 1));
    names.push_back("y_" + std::to_string(i + 1));
  }
  return names;
}

int cmd_eval(const std::string& pipeline_path, int episodes, std::uint64_t seed, const std::string& frameskip,
             int workers) {
  if (episodes < 1) throw std::runtime_error("eval: --episodes must be >= 1");
  PipelineArtifact artifact = load_pipeline(pipeline_path);
  const EnvConfig env = apply_frameskip_override(artifact.env, frameskip);
  const VisionModule vm =
      from_parameters(artifact.vision_params, artifact.kernel_count, artifact.kernel_size, artifact.kernel_size);
  const auto seeds = Coevolution::heldout_seeds(seed, episodes);
  const std::vector<double> scores = evaluate_episodes_parallel(vm, *artifact.tree, env, seeds, workers);

  std::printf("pipeline: %s\n", pipeline_path.c_str());
  std::printf("episodes: %d\n", episodes);
  std::printf("frame_skip: %s\n", env.stochastic_frameskip ? "stochastic" : "none");
  std::printf("mean: %.6f\n", mean(scores));
  std::printf("stddev: %.6f\n", sample_stddev(scores));
  std::printf("ci95: %.6f\n", ci95_halfwidth(scores));
  return 0;
}

int cmd_inspect(const std::string& pipeline_path, const std::string& out_dir) {
  PipelineArtifact artifact = load_pipeline(pipeline_path);
  const auto var_names = pipeline_variable_names(artifact.kernel_count);
  const auto& act_names = MiniPong::action_names();

  const int extent = response_extent(kImageSize, artifact.kernel_size);
  std::vector<VariableDomain> domain(static_cast<std::size_t>(2 * artifact.kernel_count),
                                     VariableDomain{0, extent - 1});
  const auto simplified = simplify(*artifact.tree, domain);
  const ComplexityProfile profile = complexity_profile(*simplified);

  std::printf("pipeline: %s (fitness %.4f at generation %d)\n", pipeline_path.c_str(), artifact.fitness,
              artifact.generation);
  std::printf("\ndecision tree (simplified over coordinates in [0, %d]):\n%s\n", extent - 1,
              render_text(*simplified, var_names, {act_names.begin(), act_names.end()}).c_str());
  std::printf("\ncomplexity: symbols=%d operations=%d non_arith=%d max_nesting=%d\n", profile.symbols,
              profile.operations, profile.non_arith_operations, profile.max_condition_nesting);
  std::printf("M' = %.4f (0 is best)\nM  = %.4f\n", m_prime(profile), m_score(profile));

  const VisionModule vm =
      from_parameters(artifact.vision_params, artifact.kernel_count, artifact.kernel_size, artifact.kernel_size);
  std::printf("\nkernels:\n");
  for (int i = 0; i < vm.kernel_count(); ++i) {
    const auto& w = vm.kernels[static_cast<std::size_t>(i)].weights;
    double lo = w[0], hi = w[0], sum = 0.0, sq = 0.0;
    for (double v : w) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
      sq += v * v;
    }
    std::printf("  kernel %d: %zu weights, min %.4f, max %.4f, mean %.4f, l2 %.4f\n", i + 1, w.size(), lo, hi,
                sum / static_cast<double>(w.size()), std::sqrt(sq));
  }

  std::printf("\nargmax positions on sample frames (x,y per kernel):\n");
  MiniPong pong(artifact.env, 0);
  Rng actions(0x13EC7u);
  for (int f = 0; f < 5; ++f) {
    const CoordinateList coords = locate(vm, preprocess(pong.observation()));
    std::printf("  frame %d:", f);
    for (const Coordinate& c : coords) std::printf(" (%d,%d)", c.x, c.y);
    std::printf("\n");
    for (int s = 0; s < 40 && !pong.done(); ++s)
      pong.step(static_cast<int>(actions.uniform_int(0, MiniPong::kActionCount - 1)));
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream text(fs::path(out_dir) / "tree.txt");
    text << render_text(*simplified, var_names, {act_names.begin(), act_names.end()}) << "\n";
    std::ofstream dot(fs::path(out_dir) / "tree.dot");
    dot << render_dot(*simplified, var_names, {act_names.begin(), act_names.end()});
    std::printf("\nwrote %s/tree.txt and %s/tree.dot\n", out_dir.c_str(), out_dir.c_str());
  }
  return 0;
}

int cmd_render(std::uint64_t seed, int steps, const std::string& out_dir, const std::string& policy,
               const std::string& pipeline_path, const std::string& trace_path) {
  EnvConfig env;
  VisionModule vm;
  std::unique_ptr<TreeNode> tree;
  if (policy == "pipeline") {
    if (pipeline_path.empty()) throw std::runtime_error("render: --policy pipeline requires --pipeline");
    PipelineArtifact artifact = load_pipeline(pipeline_path);
    env = artifact.env;
    vm = from_parameters(artifact.vision_params, artifact.kernel_count, artifact.kernel_size,
                         artifact.kernel_size);
    tree = std::move(artifact.tree);
  } else if (policy != "random" && policy != "tracker") {
    throw std::runtime_error("render: --policy must be random, tracker or pipeline");
  }

  fs::create_directories(out_dir);
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    trace << "step,ball_x,ball_y,ball_vx,ball_vy,agent_y,opponent_y,agent_score,opponent_score,action,reward\n";
  }

  MiniPong pong(env, seed);
  Rng random_actions(derive_seed({seed, 0xAC710u}));
  char name[64];
  for (int s = 0; s < steps && !pong.done(); ++s) {
    const RawFrame& frame = pong.observation();
    std::snprintf(name, sizeof(name), "raw_%04d.ppm", s);
    write_ppm(frame, (fs::path(out_dir) / name).string());
    std::snprintf(name, sizeof(name), "proc_%04d.ppm", s);
    write_ppm(preprocess(frame), (fs::path(out_dir) / name).string());

    int action = 0;
    if (policy == "random") {
      action = static_cast<int>(random_actions.uniform_int(0, MiniPong::kActionCount - 1));
    } else if (policy == "tracker") {
      action = pong.ball_y() < pong.agent_y() ? 2 : 3;
    } else {
      action = evaluate(*tree, coordinates_to_inputs(locate(vm, preprocess(frame))));
    }
    if (trace.is_open())
      trace << s << "," << pong.ball_x() << "," << pong.ball_y() << "," << pong.ball_vx() << ","
            << pong.ball_vy() << "," << pong.agent_y() << "," << pong.opponent_y() << "," << pong.agent_score()
            << "," << pong.opponent_score() << "," << action << ",";
    const auto r = pong.step(action);
    if (trace.is_open()) trace << r.reward << "\n";
  }
  std::printf("wrote frames for %s policy to %s\n", policy.c_str(), out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evopipe: co-evolved interpretable vision+decision pipelines on a Pong-like environment"};
  app.require_subcommand(1);

  // train
  std::string train_config, train_out;
  bool train_resume = false;
  int train_workers = -1;
  auto* train = app.add_subcommand("train", "run the co-evolutionary training loop");
  train->add_option("--config", train_config, "config JSON path")->required();
  train->add_flag("--resume", train_resume, "resume from the latest checkpoint in the output directory");
  train->add_option("--workers", train_workers, "evaluation threads (default: config value)");
  train->add_option("--out", train_out, "output directory (default: runs/<config>-seed<S>)");

  // eval
  std::string eval_pipeline, eval_frameskip;
  int eval_episodes = 100;
  int eval_workers = 0;
  std::uint64_t eval_seed = 1;
  auto* eval = app.add_subcommand("eval", "evaluate a trained pipeline on held-out episodes");
  eval->add_option("--pipeline", eval_pipeline, "pipeline artifact path")->required();
  eval->add_option("--episodes", eval_episodes, "number of episodes")->required();
  eval->add_option("--seed", eval_seed, "base seed for the held-out episode set");
  eval->add_option("--frame-skip", eval_frameskip, "override: none, stochastic or MIN:MAX");
  eval->add_option("--workers", eval_workers, "evaluation threads");

  // inspect
  std::string inspect_pipeline, inspect_out;
  auto* inspect = app.add_subcommand("inspect", "interpretability report for a trained pipeline");
  inspect->add_option("--pipeline", inspect_pipeline, "pipeline artifact path")->required();
  inspect->add_option("--out", inspect_out, "directory for tree.txt / tree.dot");

  // plot
  std::vector<std::string> plot_dirs;
  std::string plot_out = "plots";
  auto* plot = app.add_subcommand("plot", "fitness and evaluation charts from run logs");
  plot->add_option("dirs", plot_dirs, "run directories")->required();
  plot->add_option("--out", plot_out, "output directory for the SVG files");

  // render
  std::uint64_t render_seed = 0;
  int render_steps = 50;
  std::string render_out = "frames", render_policy = "random", render_pipeline, render_trace;
  auto* render = app.add_subcommand("render", "dump episode frames as PPM (raw and preprocessed)");
  render->add_option("--seed", render_seed, "episode seed");
  render->add_option("--steps", render_steps, "steps to run");
  render->add_option("--out", render_out, "output directory");
  render->add_option("--policy", render_policy, "random, tracker or pipeline");
  render->add_option("--pipeline", render_pipeline, "pipeline artifact for --policy pipeline");
  render->add_option("--trace", render_trace, "write a per-step CSV trace to this path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      CoevoConfig cfg = load_config(train_config);
      if (train_workers >= 0) cfg.workers = train_workers;
      const std::string out = train_out.empty() ? default_run_dir(train_config, cfg.master_seed) : train_out;
      run_training(cfg, out, train_resume);
      return 0;
    }
    if (*eval) return cmd_eval(eval_pipeline, eval_episodes, eval_seed, eval_frameskip, eval_workers);
    if (*inspect) return cmd_inspect(inspect_pipeline, inspect_out);
    if (*plot) {
      write_plots(plot_dirs, plot_out);
      std::printf("wrote %s/fitness.svg and %s/evaluations.svg\n", plot_out.c_str(), plot_out.c_str());
      return 0;
    }
    if (*render)
      return cmd_render(render_seed, render_steps, render_out, render_policy, render_pipeline, render_trace);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
