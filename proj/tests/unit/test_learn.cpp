#include <doctest.h>

#include <numeric>
#include <random>

#include "common/oracles.hpp"
#include "shapetest/learn.hpp"
#include "shapetest/sampling.hpp"

using namespace shapetest;

namespace {

double chi2_on(const Pmf& p, const Pmf& q, const IndexSet& S) {
  double s = 0.0;
  for (auto i : S) s += (p.mass[i] - q.mass[i]) * (p.mass[i] - q.mass[i]) / q.mass[i];
  return s;
}

}  // namespace

TEST_CASE("add-1 learner examples") {
  auto part = birge_partition(40, 0.2);
  auto q0 = add1_learn(make_counts(std::vector<std::uint64_t>(40, 0)), part);
  auto masses = cell_masses(q0.mass, part);
  for (double x : masses) CHECK(x == doctest::Approx(1.0 / static_cast<double>(masses.size())));

  auto q = add1_learn(make_counts({1, 1, 0}), partition_from_cells(3, {{0, 0}, {1, 2}}));
  CHECK(q.mass[0] == doctest::Approx(0.5));
  CHECK(q.mass[1] == doctest::Approx(0.25));
  CHECK(q.mass[2] == doctest::Approx(0.25));
}

TEST_CASE("add-1 output sums to one") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    auto p = make_pmf(oracle::random_simplex(300, rng));
    auto c = draw(p, static_cast<std::uint64_t>(t * 37), t);
    auto q = add1_learn(c, birge_partition(300, 0.05 + 0.02 * (t % 10)));
    CHECK(std::accumulate(q.mass.begin(), q.mass.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("add-1 expected chi-squared bound") {
  auto p = gen_zipf(500, 1.0);
  auto part = birge_partition(500, 0.1);
  const double b = static_cast<double>(part.num_cells());
  const std::uint64_t m = 2000;
  double mean = 0.0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) mean += chi2_distance(p, add1_learn(draw(p, m, 500 + t), part));
  mean /= trials;
  double bar = chi2_distance(p, flatten(p, part));
  double bound = (m + b) / (m + 1.0) * bar + b / (m + 1.0);
  CHECK(mean <= 1.1 * bound);
}

TEST_CASE("product learner") {
  auto grid = make_counts({1, 0, 1, 0}, {2, 2});
  auto axes = axis_counts(grid);
  REQUIRE(axes.size() == 2);
  CHECK(axes[0].counts == std::vector<std::uint64_t>{1, 1});
  CHECK(axes[1].counts == std::vector<std::uint64_t>{2, 0});
  auto q = product_learn(axes);
  auto want = tensor_product({make_pmf({0.5, 0.5}), make_pmf({0.75, 0.25})});
  for (std::size_t i = 0; i < 4; ++i) CHECK(q.mass[i] == doctest::Approx(want.mass[i]));

  auto one = make_counts({3, 1, 0, 2});
  CHECK(product_learn({one}).mass == add1_learn(one, singleton_partition(4)).mass);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    auto p = tensor_product({make_pmf(oracle::random_simplex(5, rng)), make_pmf(oracle::random_simplex(7, rng)),
                             make_pmf(oracle::random_simplex(3, rng))});
    auto c = draw(p, 400, t);
    auto ax = axis_counts(c);
    std::vector<Pmf> est;
    for (const auto& a : ax) est.push_back(add1_learn(a, singleton_partition(a.n())));
    auto direct = tensor_product(est);
    auto got = product_learn(ax);
    for (std::size_t i = 0; i < p.n(); ++i) CHECK(got.mass[i] == doctest::Approx(direct.mass[i]).epsilon(1e-14));
  }
  auto bad = axes;
  bad[1].m_actual = 7;
  CHECK_THROWS(product_learn(bad));
}

TEST_CASE("product learner chi-squared on a 10x10 product") {
  auto p = tensor_product({gen_zipf(10, 1.0), gen_triangular(10)});
  const double eps = 0.25;
  const auto m = static_cast<std::uint64_t>(10.0 * 20.0 / (eps * eps));
  double mean = 0.0;
  for (int t = 0; t < 200; ++t) mean += chi2_distance(p, product_learn(axis_counts(draw(p, m, t))));
  mean /= 200;
  CHECK(mean <= 2.0 * 20.0 / (m + 1.0) * 1.1);
  CHECK(mean <= eps * eps);
}

TEST_CASE("log-concave learner") {
  const double eps = 0.2;
  auto p = gen_triangular(1000);
  const auto m = lcd_sample_budget(eps);
  int close = 0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    auto out = lcd_learn(draw(p, m, 40 + t), eps);
    REQUIRE_FALSE(out.rejected);
    CHECK(is_member(ClassId::log_concave(), out.q));
    CHECK(std::is_sorted(out.support.begin(), out.support.end()));
    close += chi2_on(p, out.q, out.support) <= eps * eps / 500.0;
  }
  CHECK(close >= 8);
  CHECK_THROWS_AS(lcd_learn(draw(p, m / 2, 1), eps), std::invalid_argument);
}

TEST_CASE("log-concave learner on a far instance") {
  const double eps = 0.2;
  auto far = gen_paninski({200, 0.1, 4.0, random_signs(100, 3)});
  for (int t = 0; t < 5; ++t) {
    auto out = lcd_learn(draw(far, lcd_sample_budget(eps), t), eps);
    if (!out.rejected) CHECK(is_member(ClassId::log_concave(), out.q));
  }
}

TEST_CASE("mhr learner") {
  const double eps = 0.2;
  auto u = uniform_pmf(200);
  for (int t = 0; t < 5; ++t) {
    auto out = mhr_learn(draw(u, mhr_sample_budget(200, eps), t), eps);
    REQUIRE_FALSE(out.rejected);
    CHECK(is_member(ClassId::mhr(), out.q));
  }
  // the closeness claim holds once eps is rescaled by a constant
  auto g = gen_geometric(200, 0.98);
  const double learn_eps = eps / 2;
  int close = 0;
  for (int t = 0; t < 5; ++t) {
    auto out = mhr_learn(draw(g, mhr_sample_budget(200, learn_eps), 70 + t), learn_eps);
    REQUIRE_FALSE(out.rejected);
    CHECK(is_member(ClassId::mhr(), out.q));
    close += chi2_on(g, out.q, out.support) <= eps * eps / 500.0;
  }
  CHECK(close >= 4);
  CHECK_THROWS_AS(mhr_learn(draw(u, 10, 1), eps), std::invalid_argument);
}

TEST_CASE("learner outputs stay in class on arbitrary inputs") {
  std::mt19937_64 rng(8);
  const double eps = 0.3;
  LcdConfig lc;
  lc.budget_constant = 1.0;
  for (int t = 0; t < 10; ++t) {
    auto p = make_pmf(oracle::random_simplex(150, rng));
    auto a = lcd_learn(draw(p, lcd_sample_budget(eps, lc), t), eps, lc);
    if (!a.rejected) CHECK(is_member(ClassId::log_concave(), a.q));
    auto b = mhr_learn(draw(p, mhr_sample_budget(150, eps), t), eps);
    if (!b.rejected) CHECK(is_member(ClassId::mhr(), b.q));
  }
}
