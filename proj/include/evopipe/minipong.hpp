#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "evopipe/imaging.hpp"
#include "evopipe/rng.hpp"

namespace evopipe {

struct Color3 {
  std::uint8_t r = 0, g = 0, b = 0;
};

struct EnvConfig {
  int points_to_win = 21;
  long max_timesteps = 100000;

  // Frame-skipping: when enabled each chosen action repeats for a number of
  // internal ticks drawn uniformly from [min, max] out of the episode
  // stream; rewards accumulate over the repeats.
  bool stochastic_frameskip = false;
  int frameskip_min = 2;
  int frameskip_max = 4;

  double ball_speed_x = 8.0;     // horizontal speed, px per tick
  double ball_vy_max = 3.0;      // vertical speed cap after a paddle contact
  double ball_vy_min = 1.0;      // rebounds never flatter than this
  double paddle_spin = 0.75;     // fraction of the paddle's tick velocity added to the rebound
  double paddle_speed = 6.0;     // agent paddle, px per tick
  double opponent_speed = 1.6;   // tracking cap while the ball approaches
  double opponent_idle_speed = 1.0;  // drift toward court center otherwise

  Color3 background{0, 0, 0};
  Color3 ball_color{236, 236, 236};
  Color3 agent_color{92, 186, 92};
  Color3 opponent_color{213, 130, 74};
};

void validate_config(const EnvConfig& cfg);

// Pong-like court rendered into 210x160x3 frames. The agent controls the
// right paddle; actions 0 and 1 are NOPs, 2 moves up, 3 moves down. Points
// give +1/-1 reward and the episode ends at points_to_win or max_timesteps.
// Fully deterministic given (config, seed, action sequence).
class MiniPong {
 public:
  static constexpr int kActionCount = 4;
  static constexpr int kCourtHeight = kRawHeight - kCropRows;  // 175
  static constexpr int kCourtWidth = kRawWidth;                // 160
  static constexpr double kBallHalf = 2.0;
  static constexpr double kPaddleHalfHeight = 8.0;
  static constexpr double kPaddleHalfWidth = 2.0;
  static constexpr double kAgentFaceX = 140.0;    // inner face of the right paddle
  static constexpr double kOpponentFaceX = 20.0;  // inner face of the left paddle

  struct StepResult {
    int reward = 0;
    bool done = false;
  };

  MiniPong(const EnvConfig& cfg, std::uint64_t seed);

  const RawFrame& reset(std::uint64_t seed);
  StepResult step(int action);

  const RawFrame& observation() const { return frame_; }
  void render_into(RawFrame& frame) const;  // pure rasterization of the current state

  bool done() const { return done_; }
  double ball_x() const { return ball_x_; }
  double ball_y() const { return ball_y_; }
  double ball_vx() const { return ball_vx_; }
  double ball_vy() const { return ball_vy_; }
  double agent_y() const { return agent_y_; }
  double opponent_y() const { return opponent_y_; }
  int agent_score() const { return agent_score_; }
  int opponent_score() const { return opponent_score_; }
  long timestep() const { return timestep_; }

  static const std::array<std::string, kActionCount>& action_names();

 private:
  int tick(int action);  // one physics step, returns the reward
  void serve();

  EnvConfig cfg_;
  Rng rng_;
  RawFrame frame_;
  double ball_x_ = 0.0, ball_y_ = 0.0;
  double ball_vx_ = 0.0, ball_vy_ = 0.0;
  double agent_y_ = 0.0, opponent_y_ = 0.0;
  int agent_score_ = 0, opponent_score_ = 0;
  long timestep_ = 0;
  bool done_ = false;
};

}  // namespace evopipe
