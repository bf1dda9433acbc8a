#include <doctest.h>

#include <stdexcept>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "evopipe/checkpoint.hpp"
#include "evopipe/config.hpp"
#include "evopipe/run.hpp"
#include "evopipe/stats.hpp"
#include "evopipe/svgplot.hpp"

using namespace evopipe;
namespace fs = std::filesystem;

TEST_CASE("config round-trip is idempotent") {
  CoevoConfig cfg;
  cfg.master_seed = 42;
  cfg.generations = 30;
  cfg.cma_population = 16;
  cfg.gp.population_size = 16;
  cfg.env.stochastic_frameskip = true;
  finalize_config(cfg);

  const auto j1 = config_to_json(cfg);
  const CoevoConfig back = config_from_json(j1);
  const auto j2 = config_to_json(back);
  CHECK(j1.dump() == j2.dump());
}

TEST_CASE("config rejects unknown keys naming the offender") {
  nlohmann::json j;
  j["p_c"] = 10;
  j["p_q"] = 10;  // typo
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("p_q"), std::invalid_argument);

  nlohmann::json env;
  env["env"] = nlohmann::json{{"points_to_win", 5}, {"paddle_velocity", 1.0}};
  CHECK_THROWS_WITH_AS(config_from_json(env), doctest::Contains("paddle_velocity"), std::invalid_argument);
}

TEST_CASE("config file loading errors") {
  CHECK_THROWS(load_config("does_not_exist.json"));
  const std::string path = "bad_config.json";
  {
    std::ofstream f(path);
    f << "{ not json";
  }
  CHECK_THROWS(load_config(path));
  std::remove(path.c_str());
}

TEST_CASE("frame_skip config forms") {
  nlohmann::json j;
  j["env"] = nlohmann::json{{"frame_skip", "none"}};
  CHECK_FALSE(config_from_json(j).env.stochastic_frameskip);

  j["env"] = nlohmann::json{{"frame_skip", nlohmann::json{{"min", 2}, {"max", 4}}}};
  const CoevoConfig fs = config_from_json(j);
  CHECK(fs.env.stochastic_frameskip);
  CHECK(fs.env.frameskip_min == 2);
  CHECK(fs.env.frameskip_max == 4);

  j["env"] = nlohmann::json{{"frame_skip", 3}};
  CHECK_THROWS(config_from_json(j));
}

TEST_CASE("checkpoint save/load round-trip") {
  CoevoConfig cfg;
  cfg.generations = 2;
  cfg.episodes = 1;
  cfg.cma_population = 4;
  cfg.gp.population_size = 4;
  cfg.gp.tournament_size = 2;
  cfg.n_vm = 4;
  cfg.n_dm = 4;
  cfg.env.points_to_win = 1;
  cfg.master_seed = 3;
  cfg.workers = 1;

  Coevolution evo(cfg);
  evo.generation_step();
  const std::string path = "test_ckpt.json";
  save_checkpoint(evo.config(), evo.snapshot(), path);

  const LoadedCheckpoint loaded = load_checkpoint(path);
  CHECK(config_to_json(loaded.config).dump() == config_to_json(evo.config()).dump());
  CHECK(loaded.snapshot.generation == 1);
  CHECK(loaded.snapshot.cma.mean == evo.cma().mean());
  CHECK(loaded.snapshot.rng_cma == evo.snapshot().rng_cma);
  CHECK(loaded.snapshot.gp_trees.size() == 4);
  CHECK(loaded.snapshot.history.size() == 1);

  // Restored run continues identically to the original object.
  Coevolution resumed = Coevolution::restore(loaded.config, loaded.snapshot);
  evo.generation_step();
  resumed.generation_step();
  CHECK(evo.history().back().best_fitness == resumed.history().back().best_fitness);
  std::remove(path.c_str());

  CHECK_THROWS(load_checkpoint("missing_ckpt.json"));
}

TEST_CASE("checkpoint magic header is enforced") {
  const std::string path = "not_a_ckpt.json";
  {
    std::ofstream f(path);
    f << "{\"magic\": \"SOMETHING\", \"version\": 1}";
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("magic"), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("pipeline artifact round-trip and corruption diagnostics") {
  PipelineArtifact a;
  a.kernel_count = 2;
  a.kernel_size = 5;
  a.vision_params.assign(150, 0.25);
  a.tree = TreeNode::make_condition(Comparison::make(CmpOp::Less, Expr::variable(1), Expr::variable(3)),
                                    TreeNode::make_leaf(2), TreeNode::make_leaf(3));
  a.fitness = 12.5;
  a.generation = 7;

  const std::string path = "test_pipeline.json";
  save_pipeline(a, path);
  const PipelineArtifact b = load_pipeline(path);
  CHECK(b.kernel_count == 2);
  CHECK(b.vision_params == a.vision_params);
  CHECK(equal(*a.tree, *b.tree));
  CHECK(b.fitness == 12.5);
  std::remove(path.c_str());

  {
    std::ofstream f(path);
    f << "{\"magic\": \"EVOPIPE-PIPELINE\", \"version\": 1, \"k\": 2}";
  }
  CHECK_THROWS_WITH_AS(load_pipeline(path), doctest::Contains("corrupt"), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("ci95 matches the worked 5-value example") {
  const std::vector<double> scores{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(mean(scores) == doctest::Approx(3.0));
  CHECK(sample_stddev(scores) == doctest::Approx(1.5811).epsilon(1e-3));
  // t_{4, 0.025} = 2.7764; CI = 2.7764 * 1.5811 / sqrt(5) ~= 1.963.
  CHECK(ci95_halfwidth(scores) == doctest::Approx(1.963).epsilon(1e-3));
}

TEST_CASE("csv log rows round-trip through the reader") {
  GenerationLog g;
  g.generation = 3;
  g.best_fitness = 1.5;
  g.mean_fitness = -0.25;
  g.best_so_far = 2.0;
  g.vision_clusters = 2;
  g.vision_noise = 1;
  g.decision_clusters = 3;
  g.decision_noise = 4;
  g.actual_evaluations = 60;
  g.theoretical_evaluations = 768;
  g.wall_seconds = 0.125;

  const std::string path = "test_log.csv";
  {
    std::ofstream f(path);
    f << log_csv_header() << "\n" << log_csv_row(g) << "\n";
  }
  const auto rows = read_log_csv(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].generation == 3);
  CHECK(rows[0].best_fitness == 1.5);
  CHECK(rows[0].theoretical_evaluations == 768);
  std::remove(path.c_str());
}

TEST_CASE("svg chart writer emits well-formed files") {
  PlotSpec spec;
  spec.title = "demo";
  spec.x_label = "x";
  spec.y_label = "y";
  PlotSeries s;
  s.label = "series";
  s.x = {0, 1, 2, 3};
  s.y = {1.0, 2.0, 1.5, 3.0};
  s.band_lo = {0.5, 1.5, 1.0, 2.5};
  s.band_hi = {1.5, 2.5, 2.0, 3.5};
  spec.series.push_back(s);
  const std::string path = "test_chart.svg";
  write_svg_chart(spec, path);
  std::ifstream f(path);
  std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(content.find("<svg") != std::string::npos);
  CHECK(content.find("polyline") != std::string::npos);
  CHECK(content.find("polygon") != std::string::npos);
  CHECK(content.find("</svg>") == content.size() - 7);
  std::remove(path.c_str());

  PlotSpec empty;
  CHECK_THROWS(write_svg_chart(empty, path));
}
