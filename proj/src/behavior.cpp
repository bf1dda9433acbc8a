#include "evopipe/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace evopipe {

ProbeSet make_probe_set(const EnvConfig& env, int n_vm, int n_dm, int kernel_count, int kernel_size,
                        std::uint64_t seed) {
  if (n_vm < 1 || n_dm < 1) throw std::invalid_argument("probe set: n_vm and n_dm must be >= 1");
  ProbeSet probes;

  // Frames come from one scripted random-policy episode. Two passes over
  // the same seeded episode: the first counts frames, the second keeps a
  // random sample of n_vm of them.
  const std::uint64_t episode_seed = derive_seed({seed, 0x5052u});  // probe episode stream
  constexpr long kMaxProbeFrames = 4096;
  const auto play = [&](auto&& on_frame) {
    MiniPong pong(env, episode_seed);
    Rng actions(derive_seed({seed, 0xAC7Eu}));
    long t = 0;
    on_frame(pong.observation(), t++);
    while (!pong.done() && t < kMaxProbeFrames) {
      const auto r = pong.step(static_cast<int>(actions.uniform_int(0, MiniPong::kActionCount - 1)));
      on_frame(pong.observation(), t++);
      if (r.done) break;
    }
    return t;
  };

  long total = 0;
  play([&](const RawFrame&, long) { ++total; });

  Rng pick(derive_seed({seed, 0x51C4u}));
  std::vector<long> chosen;
  if (total <= n_vm) {
    for (long i = 0; i < total; ++i) chosen.push_back(i);
    while (static_cast<int>(chosen.size()) < n_vm) chosen.push_back(total - 1);  // degenerate short episode
  } else {
    std::vector<long> all(static_cast<std::size_t>(total));
    for (long i = 0; i < total; ++i) all[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < n_vm; ++i) {  // partial Fisher-Yates
      const auto j = static_cast<std::size_t>(pick.uniform_int(i, total - 1));
      std::swap(all[static_cast<std::size_t>(i)], all[j]);
      chosen.push_back(all[static_cast<std::size_t>(i)]);
    }
    std::sort(chosen.begin(), chosen.end());
  }

  probes.vision_probes.reserve(static_cast<std::size_t>(n_vm));
  std::size_t next = 0;
  play([&](const RawFrame& frame, long t) {
    while (next < chosen.size() && chosen[next] == t) {
      probes.vision_probes.push_back(preprocess(frame));
      ++next;
    }
  });

  // Decision probes are uniform integer coordinates over the response-map
  // extent of each entity.
  const int extent = response_extent(kImageSize, kernel_size);
  Rng coords(derive_seed({seed, 0xD0C5u}));
  probes.decision_probes.reserve(static_cast<std::size_t>(n_dm));
  for (int i = 0; i < n_dm; ++i) {
    std::vector<double> probe(static_cast<std::size_t>(2 * kernel_count));
    for (int e = 0; e < kernel_count; ++e) {
      probe[static_cast<std::size_t>(2 * e)] = static_cast<double>(coords.uniform_int(0, extent - 1));
      probe[static_cast<std::size_t>(2 * e + 1)] = static_cast<double>(coords.uniform_int(0, extent - 1));
    }
    probes.decision_probes.push_back(std::move(probe));
  }
  return probes;
}

BehaviorSignature vision_signature(const VisionModule& vm, const std::vector<ProcessedFrame>& probes) {
  BehaviorSignature sig;
  sig.reserve(probes.size() * vm.kernels.size() * 2);
  for (const ProcessedFrame& frame : probes) {
    const CoordinateList coords = locate(vm, frame);
    for (const Coordinate& c : coords) {
      sig.push_back(static_cast<double>(c.x));
      sig.push_back(static_cast<double>(c.y));
    }
  }
  return sig;
}

BehaviorSignature decision_signature(const TreeNode& tree, const std::vector<std::vector<double>>& probes,
                                     int action_count) {
  BehaviorSignature sig(probes.size() * static_cast<std::size_t>(action_count), 0.0);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const int action = evaluate(tree, probes[i]);
    sig[i * static_cast<std::size_t>(action_count) + static_cast<std::size_t>(action)] = 1.0;
  }
  return sig;
}

namespace {

double squared_distance(const BehaviorSignature& a, const BehaviorSignature& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

std::vector<int> dbscan(const std::vector<BehaviorSignature>& points, double eps, int min_pts) {
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan: eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
  const std::size_t n = points.size();
  for (std::size_t i = 1; i < n; ++i)
    if (points[i].size() != points[0].size())
      throw std::invalid_argument("dbscan: signatures must share one length");

  const double eps_sq = eps * eps;
  std::vector<std::vector<int>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (squared_distance(points[i], points[j]) <= eps_sq) neighbors[i].push_back(static_cast<int>(j));

  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = static_cast<int>(neighbors[i].size()) >= min_pts;

  std::vector<int> labels(n, kNoiseLabel);
  int next_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || labels[i] != kNoiseLabel) continue;
    const int label = next_label++;
    std::deque<int> queue{static_cast<int>(i)};
    labels[i] = label;
    while (!queue.empty()) {
      const int p = queue.front();
      queue.pop_front();
      if (!core[static_cast<std::size_t>(p)]) continue;  // border points do not expand
      for (int q : neighbors[static_cast<std::size_t>(p)]) {
        if (labels[static_cast<std::size_t>(q)] != kNoiseLabel) continue;
        labels[static_cast<std::size_t>(q)] = label;
        queue.push_back(q);
      }
    }
  }
  return labels;
}

void validate_schedule(const EpsilonSchedule& s) {
  if (!(s.epsilon0 > 0.0)) throw std::invalid_argument("epsilon schedule: epsilon0 must be > 0");
  if (s.gamma < 0.0 || s.gamma >= 1.0) throw std::invalid_argument("epsilon schedule: gamma must be in [0, 1)");
}

double epsilon_at(const EpsilonSchedule& s, int generation) {
  if (generation < 0) throw std::invalid_argument("epsilon schedule: generation must be >= 0");
  return s.epsilon0 * std::pow(s.gamma, generation);
}

ClusterAssignment select_representatives(const std::vector<BehaviorSignature>& points,
                                         const std::vector<int>& labels) {
  if (points.size() != labels.size())
    throw std::invalid_argument("select_representatives: labels/points size mismatch");
  const std::size_t n = points.size();
  ClusterAssignment out;
  out.labels = labels;
  out.representative.assign(n, 0);

  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);

  std::vector<std::vector<int>> members(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] != kNoiseLabel) members[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));

  std::vector<int> medoid(static_cast<std::size_t>(max_label + 1), -1);
  for (std::size_t l = 0; l < members.size(); ++l) {
    const auto& m = members[l];
    double best = std::numeric_limits<double>::infinity();
    for (int cand : m) {
      double sum = 0.0;
      for (int other : m)
        sum += std::sqrt(squared_distance(points[static_cast<std::size_t>(cand)],
                                          points[static_cast<std::size_t>(other)]));
      if (sum < best) {  // strict: ties keep the lowest index (members ascend)
        best = sum;
        medoid[l] = cand;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    out.representative[i] =
        labels[i] == kNoiseLabel ? static_cast<int>(i) : medoid[static_cast<std::size_t>(labels[i])];

  out.representatives = out.representative;
  std::sort(out.representatives.begin(), out.representatives.end());
  out.representatives.erase(std::unique(out.representatives.begin(), out.representatives.end()),
                            out.representatives.end());
  return out;
}

ClusterAssignment identity_assignment(int count) {
  ClusterAssignment out;
  out.labels.assign(static_cast<std::size_t>(count), kNoiseLabel);
  out.representative.resize(static_cast<std::size_t>(count));
  out.representatives.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.representative[static_cast<std::size_t>(i)] = i;
    out.representatives[static_cast<std::size_t>(i)] = i;
  }
  return out;
}

std::vector<double> broadcast_fitness(const ClusterAssignment& assignment,
                                      const std::vector<double>& rep_fitness) {
  if (rep_fitness.size() != assignment.representatives.size())
    throw std::invalid_argument("broadcast_fitness: one fitness per representative required");
  std::vector<double> out(assignment.representative.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int rep = assignment.representative[i];
    const auto it = std::lower_bound(assignment.representatives.begin(), assignment.representatives.end(), rep);
    if (it == assignment.representatives.end() || *it != rep)
      throw std::logic_error("broadcast_fitness: individual mapped to an unknown representative");
    out[i] = rep_fitness[static_cast<std::size_t>(it - assignment.representatives.begin())];
  }
  return out;
}

}  // namespace evopipe
