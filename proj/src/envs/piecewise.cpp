#include "svsp/envs/piecewise.hpp"

#include <algorithm>
#include <cmath>

#include "core/json_util.hpp"
#include "svsp/core/error.hpp"
#include "svsp/core/random.hpp"
#include "svsp/envs/pointmass.hpp"

namespace svsp {
namespace {

constexpr std::size_t kProbePoints = 8192;
constexpr double kCapFraction = 0.1;    // share of the remaining space each new region claims
constexpr double kSlopeL1 = 0.3;        // shared slope, per-row l1 norm
constexpr double kPerturbL1 = 0.05;     // per-region slope perturbation
constexpr double kInterceptJump = 0.5;  // distance between consecutive region intercepts
constexpr double kInterceptBox = 0.6;   // keeps |π*(s)| < 1 so the teacher never clamps

// numpy-style linear-interpolated quantile.
double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

Matrix random_rows_with_l1(Rng& rng, std::size_t d, double l1) {
  Matrix m(d, d);
  for (std::size_t r = 0; r < d; ++r) {
    double norm = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      m(r, c) = rng.uniform(-1.0, 1.0);
      norm += std::abs(m(r, c));
    }
    for (std::size_t c = 0; c < d; ++c) m(r, c) *= l1 / norm;
  }
  return m;
}

std::shared_ptr<const PiecewiseTeacher> checked(std::shared_ptr<const PiecewiseTeacher> teacher) {
  if (!teacher) throw InputError("piecewise: null teacher");
  teacher->validate();
  return teacher;
}

}  // namespace

void PiecewiseTeacher::validate() const {
  if (maps.empty()) throw InputError("piecewise teacher needs at least one map");
  if (gates.size() + 1 != maps.size()) throw InputError("piecewise teacher needs exactly regions - 1 gates");
  for (const auto& m : maps) {
    m.validate();
    if (m.state_dim() != state_dim() || m.action_dim() != action_dim())
      throw InputError("piecewise teacher maps have inconsistent shapes");
  }
  for (const auto& g : gates) {
    g.validate();
    if (g.dim() != state_dim()) throw InputError("piecewise teacher gate has the wrong dimension");
  }
}

std::size_t PiecewiseTeacher::region(std::span<const double> state) const {
  for (std::size_t k = 0; k < gates.size(); ++k)
    if (gates[k].predict(state) == 1) return k;
  return maps.size() - 1;
}

Vector PiecewiseTeacher::action(std::span<const double> state) const { return maps[region(state)].predict(state); }

PiecewiseTeacher make_piecewise_teacher(std::size_t regions, std::size_t dims, std::uint64_t seed) {
  if (regions < 1) throw InputError("piecewise: regions must be >= 1");
  if (dims < 1) throw InputError("piecewise: dims must be >= 1");
  Rng rng(seed);
  PiecewiseTeacher t;
  t.seed = seed;

  Matrix probe(kProbePoints, dims);
  for (double& x : probe.flat()) x = rng.uniform(-1.0, 1.0);
  std::vector<std::size_t> alive(kProbePoints);
  for (std::size_t i = 0; i < kProbePoints; ++i) alive[i] = i;

  for (std::size_t k = 0; k + 1 < regions; ++k) {
    Vector normal(dims);
    double norm = 0.0;
    do {
      for (double& v : normal) v = rng.normal();
      norm = std::sqrt(dot(normal, normal));
    } while (norm < 1e-12);
    for (double& v : normal) v /= norm;
    if (alive.size() < 2) throw NumericError("piecewise: ran out of probe points; use fewer regions");

    std::vector<double> proj;
    proj.reserve(alive.size());
    for (std::size_t i : alive) proj.push_back(dot(normal, probe.row(i)));
    const double offset = quantile(proj, 1.0 - kCapFraction);

    // Serve here when n·s < offset; the cap n·s >= offset descends.
    SvmGate gate;
    gate.weight = normal;
    for (double& v : gate.weight) v = -v;
    gate.bias = offset;
    gate.standardizer = Standardizer::identity(dims);
    std::erase_if(alive, [&](std::size_t i) { return gate.predict(probe.row(i)) == 1; });
    t.gates.push_back(std::move(gate));
  }

  const Matrix slope = random_rows_with_l1(rng, dims, kSlopeL1);
  Vector intercept(dims);
  for (double& c : intercept) c = rng.uniform(-0.15, 0.15);
  const Vector low(dims, -1.0), high(dims, 1.0);
  for (std::size_t k = 0; k < regions; ++k) {
    if (k > 0) {
      for (int attempt = 0;; ++attempt) {
        if (attempt == 100000) throw NumericError("piecewise: could not place region intercept");
        Vector u(dims);
        for (double& v : u) v = rng.normal();
        const double n = std::sqrt(dot(u, u));
        if (n < 1e-12) continue;
        Vector next = intercept;
        bool inside = true;
        for (std::size_t j = 0; j < dims; ++j) {
          next[j] += kInterceptJump * u[j] / n;
          inside = inside && std::abs(next[j]) <= kInterceptBox;
        }
        if (inside) {
          intercept = next;
          break;
        }
      }
    }
    const Matrix perturb = random_rows_with_l1(rng, dims, kPerturbL1);
    LinearSubpolicy map{Matrix(dims, dims), intercept, low, high};
    for (std::size_t i = 0; i < dims * dims; ++i) map.weight.flat()[i] = slope.flat()[i] + perturb.flat()[i];
    t.maps.push_back(std::move(map));
  }
  t.validate();
  return t;
}

AnalyticCritic::AnalyticCritic(std::shared_ptr<const PiecewiseTeacher> teacher) : teacher_(checked(std::move(teacher))) {}

double AnalyticCritic::q_value(std::span<const double> state, std::span<const double> action) const {
  if (action.size() != teacher_->action_dim()) throw InputError("analytic critic: action length mismatch");
  const Vector best = teacher_->action(state);
  return 1.0 - squared_distance(action, best);
}

double AnalyticCritic::state_value(std::span<const double> state, std::span<const double>) const {
  return q_value(state, teacher_->action(state));
}

void AnalyticCritic::check_dims(std::size_t state_dim, std::size_t action_dim) const {
  if (state_dim != teacher_->state_dim() || action_dim != teacher_->action_dim())
    throw InputError("analytic critic is " + std::to_string(teacher_->state_dim()) + "x" +
                     std::to_string(teacher_->action_dim()) + ", dataset is " + std::to_string(state_dim) + "x" +
                     std::to_string(action_dim));
}

PiecewiseEnv::PiecewiseEnv(std::shared_ptr<const PiecewiseTeacher> teacher, std::size_t max_steps)
    : teacher_(checked(std::move(teacher))) {
  const std::size_t d = teacher_->state_dim();
  if (teacher_->action_dim() != d) throw InputError("piecewise env needs one action per state dimension");
  spec_.state_dim = d;
  spec_.action_dim = d;
  spec_.action_low.assign(d, -1.0);
  spec_.action_high.assign(d, 1.0);
  spec_.max_steps = max_steps;
  spec_.kind = "builtin:piecewise";
  spec_.validate();
}

Vector PiecewiseEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  state_.resize(spec_.state_dim);
  for (double& x : state_) x = rng.uniform(-1.0, 1.0);
  t_ = 0;
  running_ = true;
  return state_;
}

StepResult PiecewiseEnv::step(std::span<const double> action) {
  if (!running_) throw InputError("piecewise: step called before reset or after the episode ended");
  const Vector a = clamp_action(spec_, action);
  StepResult out;
  out.reward = 1.0 - squared_distance(a, teacher_->action(state_));
  state_ = point_mass_next(state_, a);
  ++t_;
  out.observation = state_;
  out.truncated = t_ >= spec_.max_steps;
  running_ = !out.done();
  return out;
}

PiecewiseInstance instantiate(std::shared_ptr<const PiecewiseTeacher> teacher) {
  teacher = checked(std::move(teacher));
  return {teacher, std::make_unique<PiecewiseEnv>(teacher), std::make_shared<const AnalyticCritic>(teacher)};
}

PiecewiseInstance make_piecewise_env(std::size_t regions, std::size_t dims, std::uint64_t seed) {
  return instantiate(std::make_shared<const PiecewiseTeacher>(make_piecewise_teacher(regions, dims, seed)));
}

TransitionDataset synth_dataset(const PiecewiseTeacher& teacher, std::size_t episodes, std::uint64_t seed,
                                std::size_t steps) {
  if (episodes == 0 || steps == 0) throw InputError("synth_dataset: episodes and steps must be positive");
  const std::size_t d = teacher.state_dim();
  Matrix states(episodes * steps, d);
  Matrix actions(episodes * steps, teacher.action_dim());
  std::size_t row = 0;
  Vector behavior(d);
  for (std::size_t e = 0; e < episodes; ++e) {
    Rng rng(derive_seed(seed, e));
    Vector x(d);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    for (std::size_t t = 0; t < steps; ++t, ++row) {
      const Vector a = teacher.action(x);
      std::copy(x.begin(), x.end(), states.row(row).begin());
      std::copy(a.begin(), a.end(), actions.row(row).begin());
      for (double& b : behavior) b = rng.uniform(-1.0, 1.0);
      x = point_mass_next(x, behavior);
    }
  }
  const auto& m = teacher.maps.front();
  return make_dataset(std::move(states), std::move(actions), m.action_low, m.action_high);
}

void save_piecewise(const PiecewiseTeacher& teacher, const std::filesystem::path& path) {
  teacher.validate();
  detail::ordered_json doc;
  doc["kind"] = "piecewise";
  doc["regions"] = teacher.regions();
  doc["state_dim"] = teacher.state_dim();
  doc["seed"] = teacher.seed;
  auto gates = detail::ordered_json::array();
  for (const auto& g : teacher.gates) gates.push_back({{"w", g.raw_weight()}, {"b", g.raw_bias()}});
  doc["gates"] = std::move(gates);
  auto maps = detail::ordered_json::array();
  for (const auto& m : teacher.maps) maps.push_back({{"W", detail::from_matrix(m.weight)}, {"b", m.bias}});
  doc["maps"] = std::move(maps);
  detail::write_text(path, doc.dump(2) + "\n", "piecewise descriptor");
}

PiecewiseTeacher load_piecewise(const std::filesystem::path& path) {
  const std::string text = detail::read_text(path, "piecewise descriptor");
  try {
    const auto doc = detail::json::parse(text);
    if (!doc.is_object() || !doc.contains("kind") || doc["kind"] != "piecewise")
      throw InputError("not a piecewise descriptor (missing \"kind\": \"piecewise\")");
    PiecewiseTeacher t;
    t.seed = detail::to_count(detail::field(doc, "seed"), "seed");
    const std::size_t d = detail::to_count(detail::field(doc, "state_dim"), "state_dim");
    const Vector low(d, -1.0), high(d, 1.0);
    for (const auto& jm : detail::field(doc, "maps")) {
      LinearSubpolicy m{detail::to_matrix(detail::field(jm, "W"), "map W"),
                        detail::to_vector(detail::field(jm, "b"), "map b"), low, high};
      t.maps.push_back(std::move(m));
    }
    for (const auto& jg : detail::field(doc, "gates")) {
      SvmGate g;
      g.weight = detail::to_vector(detail::field(jg, "w"), "gate w");
      g.bias = detail::to_double(detail::field(jg, "b"), "gate b");
      g.standardizer = Standardizer::identity(g.weight.size());
      t.gates.push_back(std::move(g));
    }
    if (detail::to_count(detail::field(doc, "regions"), "regions") != t.maps.size())
      throw InputError("'regions' does not match the number of maps");
    t.validate();
    if (t.state_dim() != d) throw InputError("'state_dim' does not match the maps");
    return t;
  } catch (const detail::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

bool is_piecewise_descriptor(const std::filesystem::path& path) {
  const auto doc = detail::json::parse(detail::read_text(path, "file"), nullptr, /*allow_exceptions=*/false);
  return doc.is_object() && doc.contains("kind") && doc["kind"] == "piecewise";
}

}  // namespace svsp
