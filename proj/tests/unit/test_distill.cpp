#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "helpers/testing.hpp"
#include "svsp/core/error.hpp"
#include "svsp/core/parallel.hpp"
#include "svsp/core/random.hpp"
#include "svsp/distill/distill.hpp"
#include "svsp/distill/inspect.hpp"
#include "svsp/distill/labeling.hpp"
#include "svsp/distill/policy.hpp"
#include "svsp/envs/piecewise.hpp"
#include "svsp/eval/fidelity.hpp"

using namespace svsp;

namespace {

// Hand-written critic: Q(s,a) = -(a - 2s)², V(s) = q at the given value.
class ToyCritic final : public nn::CriticOracle {
 public:
  explicit ToyCritic(double v) : v_(v) {}
  double q_value(std::span<const double> s, std::span<const double> a) const override {
    const double e = a[0] - 2.0 * s[0];
    return -e * e;
  }
  double state_value(std::span<const double>, std::span<const double>) const override { return v_; }
  void check_dims(std::size_t, std::size_t) const override {}

 private:
  double v_;
};

class ThrowingCritic final : public nn::CriticOracle {
 public:
  double q_value(std::span<const double> s, std::span<const double>) const override {
    if (s[0] > 0.5) throw NumericError("boom");
    return 1.0;
  }
  double state_value(std::span<const double>, std::span<const double>) const override { return 1.0; }
  void check_dims(std::size_t, std::size_t) const override {}
};

struct Problem {
  std::shared_ptr<const PiecewiseTeacher> teacher;
  TransitionDataset data;
  std::shared_ptr<const AnalyticCritic> critic;
};

Problem problem(std::size_t regions, std::size_t dims, std::uint64_t seed, std::size_t episodes = 50) {
  auto teacher = std::make_shared<const PiecewiseTeacher>(make_piecewise_teacher(regions, dims, seed));
  auto data = synth_dataset(*teacher, episodes, seed);
  return {teacher, std::move(data), std::make_shared<const AnalyticCritic>(teacher)};
}

DistillConfig gated_config() {
  DistillConfig cfg;
  cfg.value_threshold = 0.95;
  return cfg;
}

// Fraction of uniform probes on which the first gate agrees with the teacher's first region.
double gate_agreement(const DistilledPolicy& policy, const PiecewiseTeacher& teacher, std::size_t probes) {
  Rng rng(404);
  std::size_t agree = 0;
  Vector s(teacher.state_dim());
  for (std::size_t i = 0; i < probes; ++i) {
    for (double& v : s) v = rng.uniform(-1, 1);
    agree += (policy.nodes[0].gate->predict(s) == 1) == (teacher.region(s) == 0);
  }
  return static_cast<double>(agree) / static_cast<double>(probes);
}

DistilledPolicy two_node_policy() {
  DistilledPolicy p;
  p.state_dim = 1;
  p.action_dim = 1;
  p.action_low = {-5};
  p.action_high = {5};
  p.config.n_iteration = 2;
  PartitionNode a;
  a.index = 0;
  a.subpolicy = LinearSubpolicy{Matrix{{1}}, {0}, {-5}, {5}};
  a.gate = SvmGate{{1.0}, 0.0, Standardizer::identity(1)};
  a.train_size = 10;
  a.positive_fraction = 0.5;
  PartitionNode b;
  b.index = 1;
  b.subpolicy = LinearSubpolicy{Matrix{{-1}}, {0}, {-5}, {5}};
  b.train_size = 5;
  b.positive_fraction = 0.0;
  p.nodes = {a, b};
  return p;
}

}  // namespace

TEST_SUITE("distill") {
  TEST_CASE("relative-advantage labeling examples") {
    CHECK(relative_advantage_label(0.98, 1.0, 0.95));
    CHECK_FALSE(relative_advantage_label(0.90, 1.0, 0.95));
    CHECK(relative_advantage_label(-1.04, -1.0, 0.95));
    CHECK_FALSE(relative_advantage_label(-1.10, -1.0, 0.95));
    CHECK(relative_advantage_label(1.0, 1.0, 1.0));
    CHECK_FALSE(relative_advantage_label(0.999999, 1.0, 1.0));
    CHECK(relative_advantage_label(0.0, 0.0, 0.95));
    // Negative values: the raw ratio -50 / -100 = 0.5 would say 0.
    CHECK(relative_advantage_label(-50.0, -100.0, 1.0));
    CHECK_FALSE(relative_advantage_label(-100.0, -50.0, 1.0));
  }

  TEST_CASE("property: labeling matches the ratio rule for positive V") {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
      const double v = rng.uniform(1e-3, 10.0);
      const double q = rng.uniform(-10.0, 10.0);
      const double tau = rng.uniform(0.5, 1.0);
      const double margin = q / v - tau;
      if (std::abs(margin) < 1e-9) continue;
      CHECK(relative_advantage_label(q, v, tau) == (margin > 0));
    }
  }

  TEST_CASE("property: labeling is monotone in q") {
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
      const double v = rng.uniform(-10.0, 10.0);
      const double tau = rng.uniform(0.5, 1.0);
      const double q1 = rng.uniform(-10.0, 10.0);
      const double q2 = q1 + rng.uniform(0.0, 5.0);
      if (relative_advantage_label(q1, v, tau)) CHECK(relative_advantage_label(q2, v, tau));
    }
  }

  TEST_CASE("label_region: parallel equals serial and tallies non-finite rows") {
    const ToyCritic critic(-0.01);
    Rng rng(5);
    Matrix s(6000, 1), a(6000, 1), d(6000, 1);
    for (std::size_t r = 0; r < 6000; ++r) {
      s(r, 0) = rng.uniform(-1, 1);
      a(r, 0) = 2.0 * s(r, 0) + rng.normal() * 0.1;
      d(r, 0) = 2.0 * s(r, 0);
    }
    s(7, 0) = std::nan("");
    ScopedThreads t(4);
    const auto par = label_region(critic, s, a, d, 0.95);
    const auto ser = serial::label_region(critic, s, a, d, 0.95);
    CHECK(par.labels.labels() == ser.labels.labels());
    CHECK(par.non_finite == 1);
    CHECK(ser.non_finite == 1);
    CHECK_FALSE(par.labels[7]);
  }

  TEST_CASE("label_region reports the failing row") {
    const ThrowingCritic critic;
    const Matrix s{{0.0}, {0.1}, {0.9}, {0.2}};
    try {
      (void)label_region(critic, s, s, s, 1.0);
      FAIL("expected an exception");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }

  TEST_CASE("single-region teacher distills to one node") {
    const auto pb = problem(1, 2, 0, 20);
    // Every row is within tolerance of the single affine fit, so the root is all-positive.
    const auto policy = distill(pb.data, *pb.critic, gated_config());
    CHECK(policy.node_count() == 1);
    CHECK_FALSE(policy.nodes[0].gate.has_value());
    CHECK(fidelity(policy, pb.data).global_mse < 1e-8);
  }

  TEST_CASE("two-region teacher: a gate recovers the first region") {
    const auto pb = problem(2, 2, 0);
    const auto policy = distill(pb.data, *pb.critic, gated_config());
    REQUIRE(policy.node_count() >= 2);
    REQUIRE(policy.nodes[0].gate.has_value());
    CHECK(gate_agreement(policy, *pb.teacher, 20000) >= 0.95);
  }

  TEST_CASE("regions are nested and shrink") {
    const auto pb = problem(3, 2, 1);
    DistillTrace trace;
    const auto policy = distill_with_trace(pb.data, *pb.critic, gated_config(), trace);
    REQUIRE(trace.region_rows.size() == policy.node_count());
    CHECK(trace.region_rows[0].size() == pb.data.size());
    for (std::size_t i = 1; i < trace.region_rows.size(); ++i) {
      const auto& parent = trace.region_rows[i - 1];
      const auto& child = trace.region_rows[i];
      CHECK(child.size() < parent.size());
      std::vector<std::size_t> zeros;
      for (std::size_t k = 0; k < parent.size(); ++k)
        if (!trace.labels[i - 1][k]) zeros.push_back(parent[k]);
      CHECK(child == zeros);
    }
    for (std::size_t i = 0; i < policy.node_count(); ++i) {
      CHECK(policy.nodes[i].train_size == trace.region_rows[i].size());
      CHECK(policy.nodes[i].gate.has_value() == (i + 1 < policy.node_count()));
    }
  }

  TEST_CASE("property: a chain shorter than n_iteration ends on a stop condition") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const auto pb = problem(2 + seed % 3, 1 + seed % 4, seed, 20);
      auto cfg = gated_config();
      cfg.value_threshold = seed % 2 ? 0.95 : 0.99;
      cfg.n_iteration = 2 + static_cast<int>(seed % 5);
      DistillTrace trace;
      const auto policy = distill_with_trace(pb.data, *pb.critic, cfg, trace);
      REQUIRE(trace.labels.size() == policy.node_count());
      if (policy.node_count() == static_cast<std::size_t>(cfg.n_iteration)) continue;
      const auto& last = trace.labels.back();
      const bool all_one = last.negative_count() == 0;
      const bool all_zero = last.positive_count() == 0;
      const bool too_small = last.negative_count() < cfg.min_region_size;
      CHECK((all_one || all_zero || too_small));
    }
  }

  TEST_CASE("iteration cap limits the node count") {
    const auto pb = problem(3, 2, 1);
    auto cfg = gated_config();
    cfg.n_iteration = 1;
    CHECK(distill(pb.data, *pb.critic, cfg).node_count() == 1);
    cfg.n_iteration = 2;
    CHECK(distill(pb.data, *pb.critic, cfg).node_count() <= 2);
  }

  TEST_CASE("min_region_size stops the chain") {
    const auto pb = problem(2, 2, 0);
    auto cfg = gated_config();
    cfg.min_region_size = pb.data.size() + 1;
    CHECK(distill(pb.data, *pb.critic, cfg).node_count() == 1);
  }

  TEST_CASE("distill is deterministic across runs and thread counts") {
    const auto pb = problem(3, 3, 2);
    std::string first;
    {
      ScopedThreads t(1);
      first = policy_to_json(distill(pb.data, *pb.critic, gated_config()));
    }
    ScopedThreads t(4);
    CHECK(policy_to_json(distill(pb.data, *pb.critic, gated_config())) == first);
  }

  TEST_CASE("routed actions stay close to the teacher") {
    const auto pb = problem(2, 2, 0);
    const auto policy = distill(pb.data, *pb.critic, gated_config());
    Rng rng(9);
    double sum = 0;
    const std::size_t n = 10000;
    Vector s(2);
    for (std::size_t i = 0; i < n; ++i) {
      for (double& v : s) v = rng.uniform(-1, 1);
      sum += squared_distance(route(policy, s).action, pb.teacher->action(s));
    }
    CHECK(sum / n < 0.05);
  }

  TEST_CASE("route examples") {
    const auto p = two_node_policy();
    CHECK(route_node(p, Vector{1.0}) == 0);
    CHECK(route(p, Vector{1.0}).action == Vector{1.0});
    CHECK(route_node(p, Vector{-2.0}) == 1);
    CHECK(route(p, Vector{-2.0}).action == Vector{2.0});
    CHECK(route_node(p, Vector{0.0}) == 1);
    CHECK_THROWS_AS(route(p, Vector{1.0, 2.0}), InputError);
  }

  TEST_CASE("policy save/load is byte-identical and replays routing") {
    const auto pb = problem(3, 2, 3);
    const auto policy = distill(pb.data, *pb.critic, gated_config());
    svsp::testing::TempDir dir;
    save_policy(policy, dir / "a.json");
    const auto loaded = load_policy(dir / "a.json");
    save_policy(loaded, dir / "b.json");
    CHECK(svsp::testing::read_file(dir / "a.json") == svsp::testing::read_file(dir / "b.json"));
    Rng rng(11);
    Vector s(2);
    for (int i = 0; i < 2000; ++i) {
      for (double& v : s) v = rng.uniform(-1.5, 1.5);
      const auto x = route(policy, s);
      const auto y = route(loaded, s);
      CHECK(x.node == y.node);
      CHECK(x.action == y.action);
    }
  }

  TEST_CASE("policy loading rejects malformed documents") {
    const auto p = two_node_policy();
    auto doc = nlohmann::json::parse(policy_to_json(p));
    auto broken = doc;
    broken["nodes"].erase(1);
    CHECK_THROWS_WITH_AS(policy_from_json(broken.dump()), doctest::Contains("terminal"), InputError);
    broken = doc;
    broken["version"] = 99;
    CHECK_THROWS_AS(policy_from_json(broken.dump()), InputError);
    broken = doc;
    broken["nodes"][0]["subpolicy"]["W"] = nlohmann::json::array({nlohmann::json::array({1, 2})});
    CHECK_THROWS_AS(policy_from_json(broken.dump()), InputError);
    CHECK_THROWS_AS(policy_from_json("{"), InputError);
  }

  TEST_CASE("config validation") {
    DistillConfig cfg;
    CHECK_NOTHROW(cfg.validate(2));
    cfg.value_threshold = 0.0;
    CHECK_THROWS_AS(cfg.validate(2), InputError);
    cfg.value_threshold = std::nan("");
    CHECK_THROWS_AS(cfg.validate(2), InputError);
    cfg = {};
    cfg.min_region_size = 2;
    CHECK_THROWS_AS(cfg.validate(2), InputError);
    cfg = {};
    cfg.n_iteration = 0;
    CHECK_THROWS_AS(cfg.validate(2), InputError);
    cfg = {};
    cfg.svm_c = -1;
    CHECK_THROWS_AS(cfg.validate(2), InputError);
    cfg = {};
    cfg.ridge_lambda = -1e-3;
    CHECK_THROWS_AS(cfg.validate(2), InputError);
  }

  TEST_CASE("rank_by_magnitude and dominant feature") {
    CHECK(rank_by_magnitude(Vector{0.1, -3.0, 2.0, 3.0}) == std::vector<std::size_t>{1, 3, 2, 0});
    const SvmGate g{{0.2, -1.5, 0.7}, 0.0, Standardizer{{0, 0, 0}, {100.0, 1.0, 1.0}}};
    CHECK(dominant_gate_feature(g) == 1);
  }

  TEST_CASE("dominant gate feature is the true partitioning dimension") {
    for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
      const auto pb = problem(2, 3, seed);
      const auto policy = distill(pb.data, *pb.critic, gated_config());
      REQUIRE(policy.nodes[0].gate.has_value());
      const auto& truth = pb.teacher->gates[0].weight;
      CHECK(dominant_gate_feature(*policy.nodes[0].gate) == rank_by_magnitude(truth)[0]);
      const std::string text = inspect(policy);
      CHECK(text.find("dominant feature: s" + std::to_string(rank_by_magnitude(truth)[0])) != std::string::npos);
    }
  }

  TEST_CASE("inspect report lists every node") {
    const auto p = two_node_policy();
    const std::string text = inspect(p, {"pos"}, {"push"});
    CHECK(text.find("node 0") != std::string::npos);
    CHECK(text.find("node 1") != std::string::npos);
    CHECK(text.find("(terminal)") != std::string::npos);
    CHECK(text.find("dominant feature: pos") != std::string::npos);
    CHECK(text.find("push") != std::string::npos);
    CHECK(inspect(p).find("s0") != std::string::npos);
    CHECK_THROWS_AS(inspect(p, {"a", "b"}), InputError);
  }
}
