#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "shapetest/lp.hpp"
#include "shapetest/sampling.hpp"

using namespace shapetest;

namespace {

// Bands around log q plus concavity rows Q_{i-1} + Q_{i+1} <= 2 Q_i.
LinConstraintSystem log_concave_system(const std::vector<double>& q, double band) {
  LinConstraintSystem sys(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    sys.lower[i] = std::log(q[i]) - band;
    sys.upper[i] = std::log(q[i]) + band;
  }
  for (std::size_t i = 1; i + 1 < q.size(); ++i) sys.add({{i - 1, 1.0}, {i + 1, 1.0}, {i, -2.0}}, Relation::LessEq, 0.0);
  return sys;
}

// Best vertex of a 2-variable LP min c.x s.t. A x <= b, by enumerating
// pairwise intersections of the constraint lines.
double vertex_optimum(const std::vector<std::array<double, 3>>& rows, double c0, double c1) {
  double best = INFINITY;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      double det = rows[a][0] * rows[b][1] - rows[a][1] * rows[b][0];
      if (std::abs(det) < 1e-12) continue;
      double x = (rows[a][2] * rows[b][1] - rows[a][1] * rows[b][2]) / det;
      double y = (rows[a][0] * rows[b][2] - rows[a][2] * rows[b][0]) / det;
      bool ok = true;
      for (const auto& r : rows) ok &= r[0] * x + r[1] * y <= r[2] + 1e-9;
      if (ok) best = std::min(best, c0 * x + c1 * y);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("feasibility examples") {
  LinConstraintSystem a(1);
  a.add({{0, 1.0}}, Relation::LessEq, 1.0);
  a.add({{0, -1.0}}, Relation::LessEq, 0.0);
  auto x = solve_feasibility(a);
  REQUIRE(x.has_value());
  CHECK((*x)[0] >= -1e-8);
  CHECK((*x)[0] <= 1.0 + 1e-8);
  CHECK(max_violation(a, *x) <= 1e-8);

  LinConstraintSystem b(1);
  b.add({{0, 1.0}}, Relation::LessEq, 0.0);
  b.add({{0, -1.0}}, Relation::LessEq, -1.0);
  CHECK_FALSE(solve_feasibility(b).has_value());

  LinConstraintSystem eq(3);
  eq.add({{0, 1.0}, {1, 1.0}, {2, 1.0}}, Relation::Eq, 1.0);
  eq.add({{0, 1.0}, {1, -1.0}}, Relation::Eq, 0.25);
  for (std::size_t i = 0; i < 3; ++i) eq.lower[i] = 0.0;
  auto y = solve_feasibility(eq);
  REQUIRE(y.has_value());
  CHECK(max_violation(eq, *y) <= 1e-8);
}

TEST_CASE("self-witness: log-concave systems are feasible") {
  for (auto q : {gen_triangular(40), gen_discrete_gaussian(60, 25, 7), gen_geometric(50, 0.9)}) {
    auto sys = log_concave_system(q.mass, 1e-6);
    auto x = solve_feasibility(sys);
    REQUIRE(x.has_value());
    CHECK(max_violation(sys, *x) <= 1e-8);
  }
  // a bimodal sequence cannot be fit with tight bands
  std::vector<double> bi{0.3, 0.05, 0.3, 0.05, 0.3};
  CHECK_FALSE(solve_feasibility(log_concave_system(bi, 0.01)).has_value());
}

TEST_CASE("lp optimum matches vertex enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int solved = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<std::array<double, 3>> rows{{1, 0, 5}, {-1, 0, 5}, {0, 1, 5}, {0, -1, 5}};
    for (int k = 0; k < 4; ++k) rows.push_back({u(rng), u(rng), u(rng) + 0.5});
    double c0 = u(rng), c1 = u(rng);
    LinConstraintSystem sys(2);
    for (const auto& r : rows) sys.add({{0, r[0]}, {1, r[1]}}, Relation::LessEq, r[2]);
    auto res = solve_lp(sys, {c0, c1});
    double ref = vertex_optimum(rows, c0, c1);
    if (!std::isfinite(ref)) {
      CHECK(res.status == LpStatus::Infeasible);
      continue;
    }
    REQUIRE(res.status == LpStatus::Optimal);
    CHECK(res.objective == doctest::Approx(ref).epsilon(1e-7));
    ++solved;
  }
  CHECK(solved > 150);
}

TEST_CASE("unbounded and bounded variables") {
  LinConstraintSystem sys(1);
  sys.add({{0, -1.0}}, Relation::LessEq, 0.0);
  CHECK(solve_lp(sys, {-1.0}).status == LpStatus::Unbounded);
  LinConstraintSystem box(2);
  box.lower = {1.0, -2.0};
  box.upper = {3.0, 2.0};
  auto r = solve_lp(box, {1.0, -1.0});
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0 - 2.0));
}

TEST_CASE("degenerate systems terminate") {
  // many redundant rows through the same vertex
  LinConstraintSystem sys(3);
  for (std::size_t i = 0; i < 3; ++i) sys.lower[i] = 0.0;
  for (int k = 1; k <= 30; ++k)
    sys.add({{0, 1.0 * k}, {1, 1.0}, {2, 1.0 / k}}, Relation::LessEq, 0.0);
  auto r = solve_lp(sys, {-1.0, -1.0, -1.0});
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(0.0));
}
