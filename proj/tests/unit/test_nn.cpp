#include <doctest.h>

#include <cmath>
#include <cstring>
#include <memory>

#include "helpers/testing.hpp"
#include "svsp/core/error.hpp"
#include "svsp/core/random.hpp"
#include "svsp/envs/piecewise.hpp"
#include "svsp/nn/critic.hpp"
#include "svsp/nn/mlp.hpp"

using namespace svsp;
using namespace svsp::nn;

namespace {

const std::filesystem::path kFixtures = SVSP_FIXTURE_DIR "/td3_lunar";

MlpNetwork constant_critic(double value, std::size_t inputs) {
  DenseLayer layer{Matrix(1, inputs, 0.0), Vector{value}, Activation::kLinear};
  return MlpNetwork({layer}, InputKind::kStateAction);
}

// Q(s, a) = a for 1-D state and action.
MlpNetwork action_critic() {
  return parse_network(R"({"input":"state_action","layers":[{"w":[[0,1]],"b":[0],"act":"linear"}]})");
}

MlpNetwork identity_actor() {
  return parse_network(R"({"input":"state","layers":[{"w":[[1]],"b":[0],"act":"linear"}]})");
}

double replay_max_error(const MlpNetwork& net, const std::vector<ForwardFixture>& pairs) {
  double worst = 0.0;
  for (const auto& p : pairs) {
    const Vector out = net.forward(p.input);
    REQUIRE(out.size() == p.output.size());
    for (std::size_t i = 0; i < out.size(); ++i) worst = std::max(worst, std::abs(out[i] - p.output[i]));
  }
  return worst;
}

}  // namespace

TEST_SUITE("nn") {
  TEST_CASE("identity network") {
    const auto net = parse_network(R"({"input":"state","layers":[{"w":[[1]],"b":[0],"act":"linear"}]})");
    CHECK(net.input_size() == 1);
    CHECK(net.forward(Vector{3.5}) == Vector{3.5});
  }

  TEST_CASE("one relu layer by hand") {
    const auto net = parse_network(R"({"input":"state","layers":[{"w":[[1,-1]],"b":[-1],"act":"relu"}]})");
    CHECK(net.forward(Vector{2, 0}) == Vector{1});
    CHECK(net.forward(Vector{0, 2}) == Vector{0});
  }

  TEST_CASE("tanh layer and output scale") {
    const auto net = parse_network(
        R"({"input":"state","output_scale":[2,3],"layers":[{"w":[[1],[0]],"b":[0,0.5],"act":"tanh"}]})");
    const Vector out = net.forward(Vector{0.25});
    CHECK(out[0] == doctest::Approx(2.0 * std::tanh(0.25)));
    CHECK(out[1] == doctest::Approx(3.0 * std::tanh(0.5)));
  }

  TEST_CASE("malformed weight documents are rejected") {
    CHECK_THROWS_AS(parse_network(R"({"input":"state","layers":[{"w":[[1,1,1],[1,1,1],[1,1,1],[1,1,1]],"b":[0,0,0,0],"act":"relu"},{"w":[[1,1,1]],"b":[0],"act":"linear"}]})"),
                    InputError);
    CHECK_THROWS_AS(parse_network(R"({"input":"state","layers":[{"w":[[1]],"b":[0],"act":"gelu"}]})"), InputError);
    CHECK_THROWS_AS(parse_network(R"({"input":"state","layers":[{"w":[[1]],"b":[0,1],"act":"relu"}]})"), InputError);
    CHECK_THROWS_AS(parse_network(R"({"input":"pixels","layers":[{"w":[[1]],"b":[0],"act":"relu"}]})"), InputError);
    CHECK_THROWS_AS(parse_network(R"({"input":"state","layers":[]})"), InputError);
    CHECK_THROWS_AS(parse_network(R"({"input":"state","layers":[{"w":[[1],[1,2]],"b":[0,0],"act":"relu"}]})"), InputError);
    CHECK_THROWS_AS(parse_network(R"({"input":"state_action","layers":[{"w":[[1],[1]],"b":[0,0],"act":"relu"}]})"),
                    InputError);
    CHECK_THROWS_AS(parse_network(R"({"input":"state","output_scale":[1,2],"layers":[{"w":[[1]],"b":[0],"act":"relu"}]})"),
                    InputError);
    CHECK_THROWS_AS(parse_network("{not json"), InputError);
    CHECK_THROWS_AS(load_network("/nonexistent/net.json"), InputError);
  }

  TEST_CASE("chain break message names both layers") {
    try {
      parse_network(R"({"input":"state","layers":[{"w":[[1],[1],[1],[1]],"b":[0,0,0,0],"act":"relu"},{"w":[[1,1,1]],"b":[0],"act":"linear"}]})");
      FAIL("expected an error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("layer 0 outputs 4, layer 1 expects 3") != std::string::npos);
    }
  }

  TEST_CASE("forward rejects the wrong input length") {
    CHECK_THROWS_AS(identity_actor().forward(Vector{1, 2}), InputError);
  }

  TEST_CASE("forward is bit-deterministic") {
    const auto net = load_network(kFixtures / "critic_q1.json");
    Rng rng(1);
    Vector x(10);
    for (double& v : x) v = rng.normal();
    const Vector a = net.forward(x);
    const Vector b = net.forward(x);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double)) == 0);
  }

  TEST_CASE("all-zero weights produce the bias chain") {
    const auto net = parse_network(R"({"input":"state","layers":[
      {"w":[[0,0],[0,0]],"b":[1,-2],"act":"relu"},
      {"w":[[0,0]],"b":[0.5],"act":"tanh"}]})");
    CHECK(net.forward(Vector{7, -3}) == Vector{std::tanh(0.5)});
  }

  TEST_CASE("save and reload preserves the forward pass") {
    svsp::testing::TempDir dir;
    const auto net = load_network(kFixtures / "actor.json");
    save_network(net, dir / "a.json");
    const auto back = load_network(dir / "a.json");
    CHECK(back.output_scale() == net.output_scale());
    Vector x(net.input_size(), 0.3);
    CHECK(back.forward(x) == net.forward(x));
  }

  TEST_CASE("exported TD3 networks load with the recorded shapes") {
    const auto actor = load_network(kFixtures / "actor.json");
    const auto q1 = load_network(kFixtures / "critic_q1.json");
    const auto q2 = load_network(kFixtures / "critic_q2.json");
    CHECK(actor.input_kind() == InputKind::kState);
    CHECK(actor.input_size() == 8);
    CHECK(actor.output_size() == 2);
    CHECK(actor.layers().size() == 3);
    CHECK(actor.layers()[1].weight.rows() == 64);
    CHECK(q1.input_size() == 10);
    CHECK(q1.output_size() == 1);
    CHECK(q2.input_size() == 10);
  }

  TEST_CASE("fixture pairs replay to 1e-5") {
    for (const char* name : {"actor", "critic_q1", "critic_q2"}) {
      CAPTURE(name);
      const auto net = load_network(kFixtures / (std::string(name) + ".json"));
      const auto pairs = load_fixtures(kFixtures / (std::string(name) + "_fixtures.json"));
      CHECK(pairs.size() >= 100);
      CHECK(replay_max_error(net, pairs) <= 1e-5);
    }
  }

  TEST_CASE("q_value: constant critic and twin minimum") {
    const NetworkCritic one(constant_critic(5.0, 2));
    CHECK(one.q_value(Vector{0.1}, Vector{0.2}) == 5.0);
    const NetworkCritic twin(constant_critic(5.0, 2), constant_critic(3.0, 2), std::nullopt, CriticMode::kMinTwin);
    CHECK(twin.q_value(Vector{0.1}, Vector{0.2}) == 3.0);
    const NetworkCritic q1_only(constant_critic(5.0, 2), constant_critic(3.0, 2));
    CHECK(q1_only.q_value(Vector{0.1}, Vector{0.2}) == 5.0);
  }

  TEST_CASE("min_twin never exceeds either twin") {
    const auto q1 = load_network(kFixtures / "critic_q1.json");
    const auto q2 = load_network(kFixtures / "critic_q2.json");
    const NetworkCritic twin(q1, q2, std::nullopt, CriticMode::kMinTwin);
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
      Vector s(8), a(2), sa;
      for (double& v : s) v = rng.uniform(-1, 1);
      for (double& v : a) v = rng.uniform(-1, 1);
      sa = s;
      sa.insert(sa.end(), a.begin(), a.end());
      const double m = twin.q_value(s, a);
      CHECK(m <= q1.forward(sa)[0]);
      CHECK(m <= q2.forward(sa)[0]);
    }
  }

  TEST_CASE("min_twin needs a second critic") {
    CHECK_THROWS_AS(NetworkCritic(constant_critic(1.0, 2), std::nullopt, std::nullopt, CriticMode::kMinTwin),
                    InputError);
    CHECK(parse_critic_mode("min_twin") == CriticMode::kMinTwin);
    CHECK(parse_critic_mode("q1_only") == CriticMode::kQ1Only);
    CHECK_THROWS_AS(parse_critic_mode("mean"), InputError);
  }

  TEST_CASE("state_value uses the actor, else the fallback action") {
    const NetworkCritic with_actor(action_critic(), std::nullopt, identity_actor());
    CHECK(with_actor.state_value(Vector{2}, Vector{}) == 2.0);
    const NetworkCritic without(action_critic());
    CHECK(without.state_value(Vector{2}, Vector{0.5}) == 0.5);
    CHECK_THROWS_AS(without.state_value(Vector{2}, Vector{}), InputError);
  }

  TEST_CASE("critic dimension checks") {
    const NetworkCritic c(load_network(kFixtures / "critic_q1.json"), std::nullopt,
                          load_network(kFixtures / "actor.json"));
    CHECK_NOTHROW(c.check_dims(8, 2));
    CHECK_THROWS_AS(c.check_dims(7, 2), InputError);
    CHECK_THROWS_AS(NetworkCritic(action_critic(), std::nullopt, load_network(kFixtures / "actor.json")), InputError);
    CHECK_THROWS_AS(NetworkCritic{identity_actor()}, InputError);
  }

  TEST_CASE("closed-form synthetic critic: Q(s,a) = 1 - (a - 2s)^2") {
    auto teacher = std::make_shared<PiecewiseTeacher>();
    teacher->maps.push_back(LinearSubpolicy{Matrix{{2.0}}, Vector{0.0}, Vector{-5.0}, Vector{5.0}});
    const AnalyticCritic critic(teacher);
    CHECK(critic.q_value(Vector{1}, Vector{2}) == 1.0);
    CHECK(critic.q_value(Vector{1}, Vector{1}) == 0.0);
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
      const double s = rng.uniform(-2, 2);
      CHECK(critic.state_value(Vector{s}, Vector{}) == 1.0);
    }
  }
}
