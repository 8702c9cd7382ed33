#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers/testing.hpp"
#include "svsp/core/dataset.hpp"
#include "svsp/core/error.hpp"
#include "svsp/core/labels.hpp"
#include "svsp/core/parallel.hpp"
#include "svsp/core/random.hpp"
#include "svsp/core/ridge.hpp"

using namespace svsp;
using svsp::testing::TempDir;
using svsp::testing::write_file;

namespace {

// Independent oracle: Gaussian elimination with partial pivoting in long
// double on the explicitly formed (XᵀX + λP)W = XᵀY.
Matrix ridge_oracle(const Matrix& x, const Matrix& y, double lambda, bool intercept_last) {
  const std::size_t p = x.cols(), q = y.cols();
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + q, 0.0L));
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) a[i][j] += static_cast<long double>(x(r, i)) * x(r, j);
      for (std::size_t k = 0; k < q; ++k) a[i][p + k] += static_cast<long double>(x(r, i)) * y(r, k);
    }
  for (std::size_t i = 0; i < p; ++i)
    if (!(intercept_last && i + 1 == p)) a[i][i] += lambda;
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const long double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < p + q; ++k) a[r][k] -= f * a[c][k];
    }
  }
  Matrix w(p, q);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < q; ++k) w(i, k) = static_cast<double>(a[i][p + k] / a[i][i]);
  return w;
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = rng.uniform(-1.0, 1.0);
  return m;
}

double coef_norm(const Matrix& w) { return frobenius_norm(w); }

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("matrix basics") {
    Matrix m{{1, 2, 3}, {4, 5, 6}};
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m(1, 2) == 6);
    const Matrix t = transpose(m);
    CHECK(t(2, 1) == 6);
    CHECK(matvec(m, Vector{1, 1, 1}) == Vector{6, 15});
    const std::vector<std::size_t> idx{1};
    CHECK(gather_rows(m, idx) == Matrix{{4, 5, 6}});
    CHECK(dot(Vector{1, 2}, Vector{3, 4}) == 11);
    CHECK(squared_distance(Vector{1, 2}, Vector{3, 4}) == 8);
    CHECK_FALSE(all_finite(Vector{1.0, NAN}));
  }

  TEST_CASE("region labels count positives") {
    RegionLabels labels({1, 0, 1, 1});
    CHECK(labels.positive_count() == 3);
    CHECK(labels.negative_count() == 1);
    CHECK_THROWS_AS(RegionLabels({0, 2}), InputError);
  }

  TEST_CASE("rng is deterministic and derive_seed separates streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    Rng c(1);
    for (int i = 0; i < 1000; ++i) {
      const double u = c.uniform(-2.0, 3.0);
      CHECK(u >= -2.0);
      CHECK(u < 3.0);
      CHECK(c.below(7) < 7);
    }
    std::set<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 100; ++s) seeds.insert(derive_seed(5, s));
    CHECK(seeds.size() == 100);
    std::vector<std::size_t> v{0, 1, 2, 3, 4, 5};
    Rng r1(3), r2(3);
    auto w = v;
    shuffle(v, r1);
    shuffle(w, r2);
    CHECK(v == w);
    CHECK(std::set<std::size_t>(v.begin(), v.end()).size() == 6);
  }

  TEST_CASE("load_dataset: identity ingestion") {
    TempDir dir;
    write_file(dir / "d.csv", "s0,a0\n0,0\n1,2\n");
    write_file(dir / "m.json",
               R"({"state_dim":1,"action_dim":1,"action_low":[-5],"action_high":[5],"episode_count":1})");
    const auto ds = load_dataset(dir / "d.csv", dir / "m.json");
    CHECK(ds.size() == 2);
    CHECK(ds.states == Matrix{{0}, {1}});
    CHECK(ds.actions == Matrix{{0}, {2}});
  }

  TEST_CASE("load_dataset: out-of-bound action is clamped") {
    TempDir dir;
    write_file(dir / "d.csv", "s0,a0\n0.5,7.0\n0.25,-9\n");
    write_file(dir / "m.json", R"({"state_dim":1,"action_dim":1,"action_low":[-5],"action_high":[5],"episode_count":0})");
    const auto ds = load_dataset(dir / "d.csv", dir / "m.json");
    CHECK(ds.actions(0, 0) == 5.0);
    CHECK(ds.actions(1, 0) == -5.0);
  }

  TEST_CASE("load_dataset: header and manifest disagree") {
    TempDir dir;
    write_file(dir / "d.csv", "s0,s1,a0\n1,2,3\n");
    write_file(dir / "m.json", R"({"state_dim":1,"action_dim":1,"action_low":[-5],"action_high":[5],"episode_count":0})");
    CHECK_THROWS_AS(load_dataset(dir / "d.csv", dir / "m.json"), InputError);
  }

  TEST_CASE("load_dataset: bad cells name the file and line") {
    TempDir dir;
    write_file(dir / "m.json", R"({"state_dim":1,"action_dim":1,"action_low":[-5],"action_high":[5],"episode_count":0})");
    write_file(dir / "bad.csv", "s0,a0\n1,2\n3,abc\n");
    try {
      load_dataset(dir / "bad.csv", dir / "m.json");
      FAIL("expected an error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
    }
    write_file(dir / "inf.csv", "s0,a0\n1,inf\n");
    CHECK_THROWS_AS(load_dataset(dir / "inf.csv", dir / "m.json"), InputError);
    write_file(dir / "nan.csv", "s0,a0\nnan,1\n");
    CHECK_THROWS_AS(load_dataset(dir / "nan.csv", dir / "m.json"), InputError);
    write_file(dir / "empty.csv", "");
    CHECK_THROWS_AS(load_dataset(dir / "empty.csv", dir / "m.json"), InputError);
    write_file(dir / "header_only.csv", "s0,a0\n");
    CHECK_THROWS_AS(load_dataset(dir / "header_only.csv", dir / "m.json"), InputError);
    write_file(dir / "short.csv", "s0,a0\n1\n");
    CHECK_THROWS_AS(load_dataset(dir / "short.csv", dir / "m.json"), InputError);
    write_file(dir / "names.csv", "x,a0\n1,1\n");
    CHECK_THROWS_AS(load_dataset(dir / "names.csv", dir / "m.json"), InputError);
  }

  TEST_CASE("load_dataset tolerates BOM, CRLF and blank lines") {
    TempDir dir;
    write_file(dir / "m.json", R"({"state_dim":1,"action_dim":1,"action_low":[-5],"action_high":[5],"episode_count":0})");
    write_file(dir / "d.csv", "\xEF\xBB\xBFs0,a0\r\n1,2\r\n\r\n3,4\r\n");
    const auto ds = load_dataset(dir / "d.csv", dir / "m.json");
    CHECK(ds.actions == Matrix{{2}, {4}});
  }

  TEST_CASE("manifest validation") {
    TempDir dir;
    write_file(dir / "names.json",
               R"({"state_dim":2,"action_dim":1,"action_low":[-1],"action_high":[1],"episode_count":0,"feature_names":["x"]})");
    CHECK_THROWS_AS(load_manifest(dir / "names.json"), InputError);
    write_file(dir / "bounds.json", R"({"state_dim":1,"action_dim":2,"action_low":[-1],"action_high":[1]})");
    CHECK_THROWS_AS(load_manifest(dir / "bounds.json"), InputError);
    write_file(dir / "ok.json",
               R"({"state_dim":2,"action_dim":1,"action_low":[-1],"action_high":[1],"episode_count":3,"feature_names":["x","v"],"action_names":["f"]})");
    const auto m = load_manifest(dir / "ok.json");
    CHECK(m.feature_names == std::vector<std::string>{"x", "v"});
    CHECK(m.episode_count == 3);
    save_manifest(m, dir / "again.json");
    const auto m2 = load_manifest(dir / "again.json");
    CHECK(m2.action_names == m.action_names);
    CHECK(m2.action_low == m.action_low);
  }

  TEST_CASE("dataset write/read round-trips bit-identically") {
    TempDir dir;
    Rng rng(9);
    Matrix s(50, 3), a(50, 2);
    for (double& v : s.flat()) v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    for (double& v : a.flat()) v = rng.uniform(-1, 1);
    s(0, 0) = -0.0;
    s(1, 1) = 5e-324;
    const auto ds = make_dataset(s, a, {-1, -1}, {1, 1});
    save_dataset(ds, dir / "d.csv");
    save_manifest(manifest_for(ds, 2), dir / "m.json");
    const auto back = load_dataset(dir / "d.csv", dir / "m.json");
    for (std::size_t i = 0; i < s.flat().size(); ++i)
      CHECK(std::bit_cast<std::uint64_t>(back.states.flat()[i]) == std::bit_cast<std::uint64_t>(s.flat()[i]));
    CHECK(back.actions == ds.actions);
  }

  TEST_CASE("make_dataset enforces invariants") {
    CHECK_THROWS_AS(make_dataset(Matrix(0, 1), Matrix(0, 1), {-1}, {1}), InputError);
    CHECK_THROWS_AS(make_dataset(Matrix(2, 1), Matrix(1, 1), {-1}, {1}), InputError);
    CHECK_THROWS_AS(make_dataset(Matrix{{NAN}}, Matrix{{0}}, {-1}, {1}), InputError);
  }

  TEST_CASE("solve_ridge: exact linear data") {
    const Matrix w = solve_ridge(Matrix{{1}, {2}}, Matrix{{2}, {4}}, 0.0);
    CHECK(w(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  }

  TEST_CASE("solve_ridge: intercept column gives the mean of the targets") {
    // Slope and intercept columns coincide, so a tiny slope penalty picks the
    // intercept-only solution.
    const Matrix w = solve_ridge(Matrix{{1, 1}, {1, 1}}, Matrix{{1}, {3}}, 1e-9, true);
    CHECK(w(0, 0) + w(1, 0) == doctest::Approx(2.0).epsilon(1e-6));
  }

  TEST_CASE("solve_ridge: lambda = 1 matches the hand-evaluated closed form") {
    // XᵀX = 5, XᵀY = 10, so W = 10 / (5 + 1).
    const Matrix w = solve_ridge(Matrix{{1}, {2}}, Matrix{{2}, {4}}, 1.0);
    CHECK(std::abs(w(0, 0) - 10.0 / 6.0) < 1e-12);
  }

  TEST_CASE("solve_ridge: singular without penalty") {
    CHECK_THROWS_AS(solve_ridge(Matrix{{1, 1}, {2, 2}}, Matrix{{1}, {2}}, 0.0), NumericError);
    CHECK_THROWS_AS(solve_ridge(Matrix{{1}}, Matrix{{1}}, -1.0), InputError);
    CHECK_THROWS_AS(solve_ridge(Matrix(0, 1), Matrix(0, 1), 1.0), InputError);
  }

  TEST_CASE("solve_ridge matches the elimination oracle on random systems") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 5 + rng.below(60), p = 1 + rng.below(5), q = 1 + rng.below(3);
      const Matrix x = random_matrix(rng, n, p);
      const Matrix y = random_matrix(rng, n, q);
      const double lambda = trial % 3 == 0 ? 0.0 : rng.uniform(0.0, 2.0);
      const bool intercept = trial % 2 == 1;
      CHECK(max_abs_diff(solve_ridge(x, y, lambda, intercept), ridge_oracle(x, y, lambda, intercept)) < 1e-8);
    }
  }

  TEST_CASE("property: lambda = 0 recovers the generating matrix") {
    Rng rng(3);
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t p = 1 + rng.below(6), q = 1 + rng.below(4), n = p + 10 + rng.below(200);
      const Matrix x = random_matrix(rng, n, p);
      const Matrix w = random_matrix(rng, p, q);
      Matrix y(n, q);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < q; ++k)
          for (std::size_t i = 0; i < p; ++i) y(r, k) += x(r, i) * w(i, k);
      CHECK(max_abs_diff(solve_ridge(x, y, 0.0), w) < 1e-8);
    }
  }

  TEST_CASE("property: coefficient norm is non-increasing in lambda") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix x = random_matrix(rng, 40, 4);
      const Matrix y = random_matrix(rng, 40, 2);
      double previous = INFINITY;
      for (double lambda : {0.0, 1e-4, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e4}) {
        const double norm = coef_norm(solve_ridge(x, y, lambda));
        CHECK(norm <= previous * (1.0 + 1e-12));
        previous = norm;
      }
    }
  }

  TEST_CASE("parallel gram matches the serial reference for any thread count") {
    Rng rng(11);
    const Matrix x = random_matrix(rng, 9000, 5);
    const Matrix y = random_matrix(rng, 9000, 2);
    const auto reference = serial::gram(x, y);
    NormalEquations one, many;
    {
      ScopedThreads t(1);
      one = gram(x, y);
    }
    {
      ScopedThreads t(4);
      many = gram(x, y);
    }
    CHECK(one.xtx == many.xtx);
    CHECK(one.xty == many.xty);
    CHECK(max_abs_diff(one.xtx, reference.xtx) < 1e-9);
    CHECK(max_abs_diff(one.xty, reference.xty) < 1e-9);
  }
}
