#include "evopipe/minipong.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evopipe {

void validate_config(const EnvConfig& cfg) {
  if (cfg.points_to_win < 1) throw std::invalid_argument("env: points_to_win must be >= 1");
  if (cfg.max_timesteps < 1) throw std::invalid_argument("env: max_timesteps must be >= 1");
  if (cfg.frameskip_min < 1 || cfg.frameskip_min > cfg.frameskip_max)
    throw std::invalid_argument("env: need 1 <= frameskip_min <= frameskip_max");
  if (!(cfg.ball_speed_x > 0.0) || !(cfg.paddle_speed > 0.0))
    throw std::invalid_argument("env: speeds must be positive");
  if (!(cfg.ball_vy_min > 0.0) || cfg.ball_vy_min > cfg.ball_vy_max)
    throw std::invalid_argument("env: need 0 < ball_vy_min <= ball_vy_max");
  if (cfg.opponent_speed < 0.0 || cfg.opponent_idle_speed < 0.0)
    throw std::invalid_argument("env: opponent speeds must be non-negative");
}

namespace {

constexpr double kCourtCenterY = MiniPong::kCourtHeight / 2.0;
constexpr double kCourtCenterX = MiniPong::kCourtWidth / 2.0;

double fold(double y, double lo, double hi) {
  // Reflects y into [lo, hi]; one reflection suffices for per-tick speeds.
  if (y < lo) return 2.0 * lo - y;
  if (y > hi) return 2.0 * hi - y;
  return y;
}

void fill_rect(RawFrame& f, long y0, long y1, long x0, long x1, Color3 c) {
  y0 = std::clamp<long>(y0, 0, f.height);
  y1 = std::clamp<long>(y1, 0, f.height);
  x0 = std::clamp<long>(x0, 0, f.width);
  x1 = std::clamp<long>(x1, 0, f.width);
  for (long y = y0; y < y1; ++y) {
    std::uint8_t* row = f.data.data() + (static_cast<std::size_t>(y) * f.width + static_cast<std::size_t>(x0)) * 3;
    for (long x = x0; x < x1; ++x) {
      *row++ = c.r;
      *row++ = c.g;
      *row++ = c.b;
    }
  }
}

}  // namespace

const std::array<std::string, MiniPong::kActionCount>& MiniPong::action_names() {
  static const std::array<std::string, kActionCount> names{"NOP", "NOP2", "UP", "DOWN"};
  return names;
}

MiniPong::MiniPong(const EnvConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  validate_config(cfg_);
  frame_ = RawFrame::zeros(kRawHeight, kRawWidth);
  reset(seed);
}

const RawFrame& MiniPong::reset(std::uint64_t seed) {
  rng_.reseed(seed);
  agent_score_ = 0;
  opponent_score_ = 0;
  timestep_ = 0;
  done_ = false;
  serve();
  render_into(frame_);
  return frame_;
}

void MiniPong::serve() {
  ball_x_ = kCourtCenterX;
  ball_y_ = kCourtCenterY;
  agent_y_ = kCourtCenterY;
  opponent_y_ = kCourtCenterY;
  ball_vx_ = rng_.bernoulli(0.5) ? cfg_.ball_speed_x : -cfg_.ball_speed_x;
  // Serve angle: one of +-1/3 and +-2/3 of the full contact speed.
  static constexpr double kServeFractions[4] = {-2.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0};
  ball_vy_ = cfg_.ball_vy_max * kServeFractions[rng_.uniform_int(0, 3)];
}

int MiniPong::tick(int action) {
  const double paddle_lo = kPaddleHalfHeight;
  const double paddle_hi = kCourtHeight - kPaddleHalfHeight;

  const double agent_before = agent_y_;
  if (action == 2) agent_y_ -= cfg_.paddle_speed;
  if (action == 3) agent_y_ += cfg_.paddle_speed;
  agent_y_ = std::clamp(agent_y_, paddle_lo, paddle_hi);
  const double agent_dy = agent_y_ - agent_before;

  // The opponent tracks the ball only while it approaches, and drifts back
  // toward the court center otherwise.
  const bool incoming = ball_vx_ < 0.0;
  const double target = incoming ? ball_y_ : kCourtCenterY;
  const double cap = incoming ? cfg_.opponent_speed : cfg_.opponent_idle_speed;
  const double opponent_dy = std::clamp(target - opponent_y_, -cap, cap);
  opponent_y_ = std::clamp(opponent_y_ + opponent_dy, paddle_lo, paddle_hi);

  const double y_lo = kBallHalf;
  const double y_hi = kCourtHeight - kBallHalf;
  const double vy_in = ball_vy_;
  double nx = ball_x_ + ball_vx_;
  double ny = fold(ball_y_ + vy_in, y_lo, y_hi);
  bool wall_bounced = ny != ball_y_ + vy_in;

  // Swept paddle test: reflect if the ball face crosses the paddle plane
  // within this tick while vertically overlapping the paddle. The rebound
  // angle follows the contact offset plus spin from the paddle's own
  // motion, capped at ball_vy_max and never flatter than ball_vy_min.
  const auto paddle_bounce = [&](double plane, double paddle_y, double paddle_dy) {
    const double t = (plane - ball_x_) / ball_vx_;
    const double ycross = fold(ball_y_ + vy_in * t, y_lo, y_hi);
    if (std::abs(ycross - paddle_y) > kPaddleHalfHeight + kBallHalf) return false;
    double offset = (ycross - paddle_y) / (kPaddleHalfHeight + kBallHalf);
    offset = std::clamp(offset, -1.0, 1.0);
    double vy = std::clamp(cfg_.ball_vy_max * offset + cfg_.paddle_spin * paddle_dy, -cfg_.ball_vy_max,
                           cfg_.ball_vy_max);
    if (std::abs(vy) < cfg_.ball_vy_min) {
      const double sign = vy > 0.0    ? 1.0
                          : vy < 0.0  ? -1.0
                          : offset > 0.0 ? 1.0
                          : offset < 0.0 ? -1.0
                                         : (vy_in >= 0.0 ? 1.0 : -1.0);
      vy = cfg_.ball_vy_min * sign;
    }
    ball_vy_ = vy;
    ball_vx_ = -ball_vx_;
    nx = 2.0 * plane - nx;
    const double ny_straight = ycross + ball_vy_ * (1.0 - t);
    ny = fold(ny_straight, y_lo, y_hi);
    wall_bounced = ny != ny_straight;
    return true;
  };

  if (ball_vx_ > 0.0) {
    const double plane = kAgentFaceX - kBallHalf;
    if (ball_x_ <= plane && nx >= plane) (void)paddle_bounce(plane, agent_y_, agent_dy);
  } else if (ball_vx_ < 0.0) {
    const double plane = kOpponentFaceX + kBallHalf;
    if (ball_x_ >= plane && nx <= plane) (void)paddle_bounce(plane, opponent_y_, opponent_dy);
  }
  if (wall_bounced) ball_vy_ = -ball_vy_;

  ball_x_ = nx;
  ball_y_ = ny;

  int reward = 0;
  if (ball_x_ < 0.0) {
    ++agent_score_;
    reward = 1;
    if (agent_score_ >= cfg_.points_to_win)
      done_ = true;
    else
      serve();
  } else if (ball_x_ > kCourtWidth) {
    ++opponent_score_;
    reward = -1;
    if (opponent_score_ >= cfg_.points_to_win)
      done_ = true;
    else
      serve();
  }

  ++timestep_;
  if (timestep_ >= cfg_.max_timesteps) done_ = true;
  return reward;
}

MiniPong::StepResult MiniPong::step(int action) {
  if (done_) throw std::logic_error("minipong: step called after episode end");
  if (action < 0 || action >= kActionCount) throw std::invalid_argument("minipong: action must be in {0,1,2,3}");

  int repeats = 1;
  if (cfg_.stochastic_frameskip)
    repeats = static_cast<int>(rng_.uniform_int(cfg_.frameskip_min, cfg_.frameskip_max));

  StepResult result;
  for (int r = 0; r < repeats && !done_; ++r) result.reward += tick(action);
  result.done = done_;
  render_into(frame_);
  return result;
}

void MiniPong::render_into(RawFrame& frame) const {
  if (frame.height != kRawHeight || frame.width != kRawWidth)
    frame = RawFrame::zeros(kRawHeight, kRawWidth);
  fill_rect(frame, 0, kRawHeight, 0, kRawWidth, cfg_.background);

  // Score band in the top rows; preprocessing crops it away, as the Atari
  // status bar would be.
  fill_rect(frame, 10, 24, 76 - 3L * opponent_score_, 76, cfg_.opponent_color);
  fill_rect(frame, 10, 24, 84, 84 + 3L * agent_score_, cfg_.agent_color);

  const auto court_rect = [&](double cy, double cx, double half_h, double half_w, Color3 c) {
    const long y0 = std::lround(cy - half_h) + kCropRows;
    const long y1 = std::lround(cy + half_h) + kCropRows;
    const long x0 = std::lround(cx - half_w);
    const long x1 = std::lround(cx + half_w);
    fill_rect(frame, y0, y1, x0, x1, c);
  };
  court_rect(opponent_y_, kOpponentFaceX - kPaddleHalfWidth, kPaddleHalfHeight, kPaddleHalfWidth,
             cfg_.opponent_color);
  court_rect(agent_y_, kAgentFaceX + kPaddleHalfWidth, kPaddleHalfHeight, kPaddleHalfWidth, cfg_.agent_color);
  // The ball is always drawn; on the terminal frame of a point it is held
  // at the court edge rather than clipped away.
  const double shown_x = std::clamp(ball_x_, kBallHalf, kCourtWidth - kBallHalf);
  court_rect(ball_y_, shown_x, kBallHalf, kBallHalf, cfg_.ball_color);
}

}  // namespace evopipe
