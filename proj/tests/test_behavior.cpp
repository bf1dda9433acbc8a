#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <map>

#include "evopipe/behavior.hpp"
#include "evopipe/gp.hpp"

using namespace evopipe;

namespace {

// Independent density-connectivity oracle. Core points are found from the
// full pairwise distance matrix; clusters are the connected components of
// the core-core adjacency; a border point joins the candidate cluster whose
// first (lowest-index) core point is smallest, matching the index-ordered
// expansion of the implementation.
std::vector<int> dbscan_oracle(const std::vector<BehaviorSignature>& pts, double eps, int min_pts) {
  const std::size_t n = pts.size();
  const auto dist_sq = [&](std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pts[a].size(); ++i) {
      const double d = pts[a][i] - pts[b][i];
      acc += d * d;
    }
    return acc;
  };
  const double eps_sq = eps * eps;

  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (dist_sq(i, j) <= eps_sq) ++count;
    core[i] = count >= min_pts;
  }

  // Union-find over core points.
  std::vector<int> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  const auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (core[i] && core[j] && dist_sq(i, j) <= eps_sq) parent[static_cast<std::size_t>(find(static_cast<int>(i)))] = find(static_cast<int>(j));

  // Component id = lowest core index in the component.
  std::map<int, int> first_core;
  for (std::size_t i = 0; i < n; ++i)
    if (core[i]) {
      const int root = find(static_cast<int>(i));
      if (!first_core.contains(root)) first_core[root] = static_cast<int>(i);
    }

  std::vector<int> labels(n, kNoiseLabel);
  std::map<int, int> label_of_first;  // first core index -> dense label
  std::vector<int> firsts;
  for (const auto& [root, first] : first_core) firsts.push_back(first);
  std::sort(firsts.begin(), firsts.end());
  for (int f : firsts) label_of_first[f] = static_cast<int>(label_of_first.size());

  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      labels[i] = label_of_first.at(first_core.at(find(static_cast<int>(i))));
      continue;
    }
    int best_first = -1;
    for (std::size_t j = 0; j < n; ++j)
      if (core[j] && dist_sq(i, j) <= eps_sq) {
        const int f = first_core.at(find(static_cast<int>(j)));
        if (best_first < 0 || f < best_first) best_first = f;
      }
    if (best_first >= 0) labels[i] = label_of_first.at(best_first);
  }
  return labels;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd, bwd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] == kNoiseLabel) != (b[i] == kNoiseLabel)) return false;
    if (a[i] == kNoiseLabel) continue;
    if (fwd.contains(a[i]) && fwd[a[i]] != b[i]) return false;
    if (bwd.contains(b[i]) && bwd[b[i]] != a[i]) return false;
    fwd[a[i]] = b[i];
    bwd[b[i]] = a[i];
  }
  return true;
}

EnvConfig fast_env() {
  EnvConfig env;
  env.points_to_win = 2;
  return env;
}

}  // namespace

TEST_CASE("vision signatures: length, purity and the all-zero module") {
  const ProbeSet probes = make_probe_set(fast_env(), 10, 10, 2, 5, 77);
  REQUIRE(probes.vision_probes.size() == 10);
  REQUIRE(probes.decision_probes.size() == 10);

  Rng rng(51);
  std::vector<double> params(150);
  for (auto& p : params) p = rng.normal(0.0, 0.1);
  const VisionModule vm = from_parameters(params, 2, 5, 5);

  const BehaviorSignature sig = vision_signature(vm, probes.vision_probes);
  CHECK(sig.size() == 2u * 2u * 10u);  // 2k * n_vm

  const VisionModule twin = from_parameters(params, 2, 5, 5);
  CHECK(vision_signature(twin, probes.vision_probes) == sig);

  const VisionModule zeros = from_parameters(std::vector<double>(150, 0.0), 2, 5, 5);
  for (double v : vision_signature(zeros, probes.vision_probes)) CHECK(v == 0.0);
}

TEST_CASE("decision signatures: one-hot blocks and pair distances") {
  const ProbeSet probes = make_probe_set(fast_env(), 5, 100, 2, 5, 78);
  const auto constant = TreeNode::make_leaf(2);
  const BehaviorSignature sig = decision_signature(*constant, probes.decision_probes, 4);
  CHECK(sig.size() == 400);
  for (std::size_t i = 0; i < 100; ++i)
    for (std::size_t a = 0; a < 4; ++a) CHECK(sig[i * 4 + a] == (a == 2 ? 1.0 : 0.0));

  // Trees differing on exactly m probes sit at squared distance 2m.
  const auto other = TreeNode::make_condition(
      Comparison::make(CmpOp::Less, Expr::variable(0), Expr::constant(45.0)), TreeNode::make_leaf(2),
      TreeNode::make_leaf(1));
  const BehaviorSignature sig2 = decision_signature(*other, probes.decision_probes, 4);
  int differing = 0;
  for (const auto& probe : probes.decision_probes)
    if (evaluate(*other, probe) != 2) ++differing;
  double d2 = 0.0;
  for (std::size_t i = 0; i < sig.size(); ++i) d2 += (sig[i] - sig2[i]) * (sig[i] - sig2[i]);
  CHECK(d2 == doctest::Approx(2.0 * differing));
  CHECK(differing > 0);
}

TEST_CASE("dbscan base cases") {
  const std::vector<BehaviorSignature> identical(5, BehaviorSignature{1.0, 2.0});
  const auto one_cluster = dbscan(identical, 0.5, 2);
  for (int l : one_cluster) CHECK(l == 0);

  // Two tight groups of 3 and one isolated point.
  std::vector<BehaviorSignature> grouped{{0.0, 0.0}, {0.1, 0.0}, {0.0, 0.1},
                                         {10.0, 10.0}, {10.1, 10.0}, {10.0, 10.1},
                                         {100.0, -50.0}};
  const auto labels = dbscan(grouped, 0.5, 2);
  CHECK(labels[0] == labels[1]);
  CHECK(labels[1] == labels[2]);
  CHECK(labels[3] == labels[4]);
  CHECK(labels[4] == labels[5]);
  CHECK(labels[0] != labels[3]);
  CHECK(labels[6] == kNoiseLabel);

  // eps -> 0+ with distinct points: everything is noise under min_pts 2.
  const auto all_noise = dbscan(grouped, 1e-12, 2);
  for (int l : all_noise) CHECK(l == kNoiseLabel);
}

TEST_CASE("dbscan equals the brute-force density-connectivity oracle") {
  Rng rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(2, 40));
    const int dim = static_cast<int>(rng.uniform_int(1, 8));
    std::vector<BehaviorSignature> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) {
      p.resize(static_cast<std::size_t>(dim));
      // Clumpy data: integers in a small box so neighborhoods overlap.
      for (auto& v : p) v = static_cast<double>(rng.uniform_int(0, 6));
    }
    const double eps = rng.uniform(0.5, 3.5);
    const int min_pts = static_cast<int>(rng.uniform_int(1, 4));
    CHECK(same_partition(dbscan(pts, eps, min_pts), dbscan_oracle(pts, eps, min_pts)));
  }
}

TEST_CASE("epsilon schedule") {
  const EpsilonSchedule s{1.0, 0.5};
  CHECK(epsilon_at(s, 0) == 1.0);
  CHECK(epsilon_at(s, 2) == doctest::Approx(0.25));

  const EpsilonSchedule zero{1.0, 0.0};
  CHECK(epsilon_at(zero, 1) == 0.0);
  CHECK(epsilon_at(zero, 5) == 0.0);

  const EpsilonSchedule decay{4.0, 0.9};
  double prev = epsilon_at(decay, 0);
  for (int i = 1; i <= 50; ++i) {
    const double cur = epsilon_at(decay, i);
    CHECK(cur <= prev);
    prev = cur;
  }

  CHECK_THROWS_AS(validate_schedule(EpsilonSchedule{0.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule(EpsilonSchedule{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("medoid representatives") {
  // 1-D cluster {0, 1, 2}: the middle point has the least distance sum.
  const std::vector<BehaviorSignature> line{{0.0}, {1.0}, {2.0}};
  const auto assign = select_representatives(line, {0, 0, 0});
  CHECK(assign.representative == std::vector<int>{1, 1, 1});
  CHECK(assign.representatives == std::vector<int>{1});

  // All noise: identity mapping.
  const auto noise = select_representatives(line, {kNoiseLabel, kNoiseLabel, kNoiseLabel});
  CHECK(noise.representative == std::vector<int>{0, 1, 2});

  // Identical points: lowest index wins the tie.
  const std::vector<BehaviorSignature> same(4, BehaviorSignature{3.0, 3.0});
  const auto tie = select_representatives(same, {0, 0, 0, 0});
  CHECK(tie.representative == std::vector<int>{0, 0, 0, 0});

  // Representative belongs to its own cluster.
  const std::vector<BehaviorSignature> mixed{{0.0}, {0.2}, {5.0}, {5.1}, {99.0}};
  const auto multi = select_representatives(mixed, {0, 0, 1, 1, kNoiseLabel});
  CHECK(multi.representative[0] == multi.representative[1]);
  CHECK(multi.representative[2] == multi.representative[3]);
  CHECK((multi.representative[0] == 0 || multi.representative[0] == 1));
  CHECK((multi.representative[2] == 2 || multi.representative[2] == 3));
  CHECK(multi.representative[4] == 4);
}

TEST_CASE("broadcast_fitness expands representative values") {
  const std::vector<BehaviorSignature> pts(5, BehaviorSignature{0.0});
  const auto assign = select_representatives(pts, {0, 0, 0, 0, 0});
  const auto fitness = broadcast_fitness(assign, {3.0});
  CHECK(fitness == std::vector<double>(5, 3.0));

  const auto identity = identity_assignment(3);
  CHECK(broadcast_fitness(identity, {1.0, 2.0, 3.0}) == std::vector<double>{1.0, 2.0, 3.0});

  // Hand-built mixed case over 7 points: clusters {0,2,4}, {1,5}, noise 3, 6.
  const std::vector<BehaviorSignature> seven{{0.0}, {10.0}, {0.1}, {50.0}, {0.2}, {10.1}, {70.0}};
  const auto labels = dbscan(seven, 0.5, 2);
  const auto mixed = select_representatives(seven, labels);
  REQUIRE(mixed.representatives.size() == 4);  // two medoids + two noise points
  std::vector<double> rep_fit(4);
  for (std::size_t r = 0; r < 4; ++r) rep_fit[r] = static_cast<double>(mixed.representatives[r]) * 10.0;
  const auto full = broadcast_fitness(mixed, rep_fit);
  for (std::size_t i = 0; i < 7; ++i) CHECK(full[i] == mixed.representative[i] * 10.0);
}

TEST_CASE("probe sets are frozen by seed") {
  const ProbeSet a = make_probe_set(fast_env(), 8, 8, 2, 5, 123);
  const ProbeSet b = make_probe_set(fast_env(), 8, 8, 2, 5, 123);
  REQUIRE(a.vision_probes.size() == b.vision_probes.size());
  for (std::size_t i = 0; i < a.vision_probes.size(); ++i)
    CHECK(a.vision_probes[i].data == b.vision_probes[i].data);
  CHECK(a.decision_probes == b.decision_probes);

  const int extent = response_extent(kImageSize, 5);
  for (const auto& probe : a.decision_probes) {
    REQUIRE(probe.size() == 4);
    for (double v : probe) {
      CHECK(v >= 0.0);
      CHECK(v <= extent - 1);
      CHECK(v == static_cast<double>(static_cast<int>(v)));
    }
  }
}
