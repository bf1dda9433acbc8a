#include "evopipe/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace evopipe {

namespace {

using nlohmann::json;

// Records consumed keys so leftovers can be reported as errors.
class Reader {
 public:
  Reader(const json& j, std::string scope) : j_(j), scope_(std::move(scope)) {
    if (!j_.is_object()) throw std::invalid_argument("config: " + scope_ + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: bad value type for key '" + scope_ + key + "'");
    }
  }

  bool has(const char* key) {
    used_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.contains(key)) throw std::invalid_argument("config: unknown key '" + scope_ + key + "'");
  }

 private:
  const json& j_;
  std::string scope_;
  std::set<std::string> used_;
};

json color_to_json(Color3 c) { return json::array({c.r, c.g, c.b}); }

Color3 color_from_json(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument(std::string("config: ") + key + " must be [r,g,b]");
  Color3 c;
  c.r = j[0].get<std::uint8_t>();
  c.g = j[1].get<std::uint8_t>();
  c.b = j[2].get<std::uint8_t>();
  return c;
}

}  // namespace

json env_to_json(const EnvConfig& env) {
  json j;
  j["points_to_win"] = env.points_to_win;
  j["max_timesteps"] = env.max_timesteps;
  if (env.stochastic_frameskip)
    j["frame_skip"] = json{{"min", env.frameskip_min}, {"max", env.frameskip_max}};
  else
    j["frame_skip"] = "none";
  j["ball_speed"] = env.ball_speed_x;
  j["ball_vy_max"] = env.ball_vy_max;
  j["ball_vy_min"] = env.ball_vy_min;
  j["paddle_spin"] = env.paddle_spin;
  j["paddle_speed"] = env.paddle_speed;
  j["opponent_speed"] = env.opponent_speed;
  j["opponent_idle_speed"] = env.opponent_idle_speed;
  j["background"] = color_to_json(env.background);
  j["ball_color"] = color_to_json(env.ball_color);
  j["agent_color"] = color_to_json(env.agent_color);
  j["opponent_color"] = color_to_json(env.opponent_color);
  return j;
}

EnvConfig env_from_json(const json& j) {
  EnvConfig env;
  Reader r(j, "env.");
  r.get("points_to_win", env.points_to_win);
  r.get("max_timesteps", env.max_timesteps);
  if (r.has("frame_skip")) {
    const json& fs = r.raw("frame_skip");
    if (fs.is_string() && fs.get<std::string>() == "none") {
      env.stochastic_frameskip = false;
    } else if (fs.is_object()) {
      Reader fr(fs, "env.frame_skip.");
      env.stochastic_frameskip = true;
      fr.get("min", env.frameskip_min);
      fr.get("max", env.frameskip_max);
      fr.finish();
    } else {
      throw std::invalid_argument("config: env.frame_skip must be \"none\" or {min, max}");
    }
  }
  r.get("ball_speed", env.ball_speed_x);
  r.get("ball_vy_max", env.ball_vy_max);
  r.get("ball_vy_min", env.ball_vy_min);
  r.get("paddle_spin", env.paddle_spin);
  r.get("paddle_speed", env.paddle_speed);
  r.get("opponent_speed", env.opponent_speed);
  r.get("opponent_idle_speed", env.opponent_idle_speed);
  if (r.has("background")) env.background = color_from_json(r.raw("background"), "env.background");
  if (r.has("ball_color")) env.ball_color = color_from_json(r.raw("ball_color"), "env.ball_color");
  if (r.has("agent_color")) env.agent_color = color_from_json(r.raw("agent_color"), "env.agent_color");
  if (r.has("opponent_color")) env.opponent_color = color_from_json(r.raw("opponent_color"), "env.opponent_color");
  r.finish();
  validate_config(env);
  return env;
}

CoevoConfig config_from_json(const json& j) {
  CoevoConfig cfg;
  Reader r(j, "");
  r.get("master_seed", cfg.master_seed);
  r.get("g", cfg.generations);
  r.get("e", cfg.episodes);
  r.get("k", cfg.kernel_count);
  r.get("kernel_size", cfg.kernel_size);
  if (r.has("image_size")) {
    const int image_size = r.raw("image_size").get<int>();
    if (image_size != kImageSize)
      throw std::invalid_argument("config: image_size is fixed to 96 by the preprocessing pipeline");
  }
  r.get("workers", cfg.workers);
  r.get("clustering_enabled", cfg.clustering_enabled);
  if (r.has("fitness_aggregation")) {
    const std::string agg = r.raw("fitness_aggregation").get<std::string>();
    if (agg == "max")
      cfg.mean_aggregation = false;
    else if (agg == "mean")
      cfg.mean_aggregation = true;
    else
      throw std::invalid_argument("config: fitness_aggregation must be \"max\" or \"mean\"");
  }

  r.get("p_c", cfg.cma_population);
  r.get("cma_initial_mean", cfg.cma_initial_mean);
  r.get("cma_initial_sigma", cfg.cma_initial_sigma);

  r.get("p_g", cfg.gp.population_size);
  r.get("gp_crossover_probability", cfg.gp.crossover_probability);
  r.get("gp_mutation_probability", cfg.gp.mutation_probability);
  r.get("gp_tournament_size", cfg.gp.tournament_size);
  r.get("gp_elites", cfg.gp.elites);
  r.get("max_tree_depth", cfg.gp.max_tree_depth);
  r.get("max_condition_depth", cfg.gp.max_condition_depth);
  if (r.has("constant_range")) {
    const json& range = r.raw("constant_range");
    if (!range.is_array() || range.size() != 2)
      throw std::invalid_argument("config: constant_range must be [min, max]");
    cfg.gp.constant_min = range[0].get<double>();
    cfg.gp.constant_max = range[1].get<double>();
  }

  r.get("n_vm", cfg.n_vm);
  r.get("n_dm", cfg.n_dm);
  r.get("dbscan_min_pts", cfg.min_pts);
  r.get("epsilon0_vision", cfg.eps_vision.epsilon0);
  r.get("epsilon0_decision", cfg.eps_decision.epsilon0);
  if (r.has("epsilon_gamma")) {
    const double gamma = r.raw("epsilon_gamma").get<double>();
    cfg.eps_vision.gamma = gamma;
    cfg.eps_decision.gamma = gamma;
  }

  if (r.has("env")) cfg.env = env_from_json(r.raw("env"));
  r.finish();
  finalize_config(cfg);
  return cfg;
}

json config_to_json(const CoevoConfig& cfg) {
  json j;
  j["master_seed"] = cfg.master_seed;
  j["g"] = cfg.generations;
  j["e"] = cfg.episodes;
  j["k"] = cfg.kernel_count;
  j["kernel_size"] = cfg.kernel_size;
  j["image_size"] = kImageSize;
  j["workers"] = cfg.workers;
  j["clustering_enabled"] = cfg.clustering_enabled;
  j["fitness_aggregation"] = cfg.mean_aggregation ? "mean" : "max";
  j["p_c"] = cfg.cma_population;
  j["cma_initial_mean"] = cfg.cma_initial_mean;
  j["cma_initial_sigma"] = cfg.cma_initial_sigma;
  j["p_g"] = cfg.gp.population_size;
  j["gp_crossover_probability"] = cfg.gp.crossover_probability;
  j["gp_mutation_probability"] = cfg.gp.mutation_probability;
  j["gp_tournament_size"] = cfg.gp.tournament_size;
  j["gp_elites"] = cfg.gp.elites;
  j["max_tree_depth"] = cfg.gp.max_tree_depth;
  j["max_condition_depth"] = cfg.gp.max_condition_depth;
  j["constant_range"] = json::array({cfg.gp.constant_min, cfg.gp.constant_max});
  j["n_vm"] = cfg.n_vm;
  j["n_dm"] = cfg.n_dm;
  j["dbscan_min_pts"] = cfg.min_pts;
  j["epsilon0_vision"] = cfg.eps_vision.epsilon0;
  j["epsilon0_decision"] = cfg.eps_decision.epsilon0;
  j["epsilon_gamma"] = cfg.eps_vision.gamma;
  j["env"] = env_to_json(cfg.env);
  return j;
}

CoevoConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config: " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const CoevoConfig& cfg, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("config: cannot write " + path);
  f << config_to_json(cfg).dump(2) << "\n";
}

}  // namespace evopipe
