#include <doctest.h>

#include <cmath>
#include <numeric>

#include "common/oracles.hpp"
#include "shapetest/classdist.hpp"
#include "shapetest/sampling.hpp"

using namespace shapetest;

TEST_CASE("draw examples") {
  auto c = draw(uniform_pmf(7), 0, 1);
  CHECK(c.m_actual == 0);
  CHECK(std::all_of(c.counts.begin(), c.counts.end(), [](auto x) { return x == 0; }));
  auto pm = draw(point_mass(5, 3), 10, 2);
  CHECK(pm.counts[3] == 10);
  CHECK(pm.m_nominal == 10);
  int good = 0;
  for (int s = 0; s < 20; ++s) {
    auto u = draw(uniform_pmf(2), 1000000, 100 + s);
    good += std::abs(static_cast<double>(u.counts[0]) - 5e5) <= 5e3;
    CHECK(u.counts[0] + u.counts[1] == 1000000);
  }
  CHECK(good == 20);
}

TEST_CASE("draws are reproducible") {
  auto p = gen_zipf(50, 1.0);
  CHECK(draw(p, 5000, 42).counts == draw(p, 5000, 42).counts);
  CHECK(poissonized_draw(p, 5000, 42).counts == poissonized_draw(p, 5000, 42).counts);
  CHECK(draw(p, 5000, 42).counts != draw(p, 5000, 43).counts);
}

TEST_CASE("poissonized counts: zeros, moments, independence") {
  auto p = make_pmf({0.5, 0.0, 0.3, 0.2});
  const double m = 40.0;
  const int trials = 10000;
  std::vector<double> sum(4, 0.0), sq(4, 0.0);
  double cross = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto c = poissonized_draw(p, 40, 1000 + t);
    CHECK(c.counts[1] == 0);
    CHECK(c.m_nominal == 40);
    for (int i = 0; i < 4; ++i) {
      double x = static_cast<double>(c.counts[i]);
      sum[i] += x;
      sq[i] += x * x;
    }
    cross += static_cast<double>(c.counts[0]) * static_cast<double>(c.counts[2]);
  }
  for (int i : {0, 2, 3}) {
    double lambda = m * p.mass[i];
    double mean = sum[i] / trials, var = sq[i] / trials - mean * mean;
    CHECK(std::abs(mean - lambda) <= 5.0 * std::sqrt(lambda / trials));
    CHECK(std::abs(var - lambda) <= 5.0 * lambda * std::sqrt(2.0 / trials) + 0.05 * lambda);
  }
  double cov = cross / trials - (sum[0] / trials) * (sum[2] / trials);
  CHECK(std::abs(cov) <= 5.0 * std::sqrt(m * 0.5 * m * 0.3 / trials));
}

TEST_CASE("poissonized mean for uniform") {
  const std::size_t n = 10;
  const int trials = 10000;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) total += static_cast<double>(poissonized_draw(uniform_pmf(n), 200, t).counts[4]);
  double sigma = std::sqrt(20.0 / trials);
  CHECK(std::abs(total / trials - 20.0) <= 3.0 * sigma);
}

TEST_CASE("empirical pmf") {
  auto e = empirical_pmf(make_counts({5, 5}));
  CHECK(e.mass == std::vector<double>{0.5, 0.5});
  CHECK(empirical_pmf(make_counts({10, 0})).mass == std::vector<double>{1.0, 0.0});
  int ok = 0;
  for (int t = 0; t < 100; ++t) ok += kolmogorov_distance(empirical_pmf(draw(uniform_pmf(100), 100000, t)),
                                                        uniform_pmf(100)) <= 0.01;
  CHECK(ok >= 95);
}

TEST_CASE("paninski instance") {
  auto p = gen_paninski({4, 0.1, 4.0, {+1, -1}});
  std::vector<double> want{0.35, 0.15, 0.15, 0.35};
  for (int i = 0; i < 4; ++i) CHECK(p.mass[i] == doctest::Approx(want[i]));
  for (std::size_t n : {4u, 10u, 100u, 1000u}) {
    for (double c : {1.0, 4.0, 8.0}) {
      auto q = gen_paninski({n, 0.1, c, random_signs(n / 2, n)});
      CHECK(tv_distance(q, uniform_pmf(n)) == doctest::Approx(c * 0.1 / 2.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS(gen_paninski({5, 0.1, 4.0, {1, 1}}));
  CHECK_THROWS(gen_paninski({4, 0.3, 4.0, {1, 1}}));
}

TEST_CASE("paninski instances are far from monotone at small n") {
  for (std::size_t n : {4u, 6u, 8u}) {
    for (RngSeed s = 0; s < 4; ++s) {
      auto q = gen_paninski({n, 0.1, 4.0, random_signs(n / 2, s)});
      CHECK(dist_to_monotone(q) >= 0.1 - 1e-9);
      CHECK(brute_force_dist(ClassId::monotone(1), q, 1e-3) >= 4.0 * 0.1 / 4.0);
    }
  }
}

TEST_CASE("paninski grid") {
  auto p = gen_paninski_grid(2, 2, 0.05, 4.0, 7);
  REQUIRE(p.n() == 4);
  CHECK(p.dims == std::vector<std::size_t>{2, 2});
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(std::abs(p.mass[r] - 0.25) == doctest::Approx(0.2 / 4));
    CHECK(p.mass[r] + p.mass[2 + r] == doctest::Approx(0.5));
  }
  auto big = gen_paninski_grid(20, 3, 0.1, 6.0, 3);
  CHECK(std::accumulate(big.mass.begin(), big.mass.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zipf") {
  auto u = gen_zipf(6, 0.0);
  for (double x : u.mass) CHECK(x == doctest::Approx(1.0 / 6));
  auto z = gen_zipf(3, 1.0);
  CHECK(z.mass[0] == doctest::Approx(6.0 / 11));
  CHECK(z.mass[1] == doctest::Approx(3.0 / 11));
  CHECK(z.mass[2] == doctest::Approx(2.0 / 11));
  for (double s : {0.3, 1.0, 2.5}) CHECK(oracle::non_increasing(gen_zipf(500, s).mass));
}

TEST_CASE("instance families are valid and in their classes") {
  CHECK(is_member(ClassId::log_concave(), gen_triangular(101)));
  CHECK(is_member(ClassId::log_concave(), gen_discrete_gaussian(200, 80, 20)));
  CHECK(is_member(ClassId::monotone(1), gen_geometric(300, 0.98)));
  CHECK(is_member(ClassId::mhr(), gen_geometric(300, 0.98)));
  auto b = gen_blocks(100, {0, 60}, {20, 40}, {0.5, 0.5});
  CHECK(b.mass[10] == doctest::Approx(0.5 / 20));
  CHECK(b.mass[30] == 0.0);
}

TEST_CASE("perturbations reach the requested distance") {
  auto z = gen_zipf(400, 1.0);
  CHECK(perturb_far_from_monotone(z, 0.0, 1).mass == z.mass);
  auto far = perturb_far_from_monotone(z, 0.07, 3);
  CHECK(dist_to_monotone(far) >= 0.07);
  CHECK(dist_to_monotone(far) <= 0.07 * 1.05 + 1e-12);
  auto far_u = perturb_far_from_unimodal(gen_triangular(400), 0.1, 4);
  CHECK(dist_to_unimodal(far_u) >= 0.1);
  auto pan = perturb_far_from_monotone(uniform_pmf(64), 0.1, 5);
  CHECK(dist_to_monotone(pan) >= 0.1);
  CHECK_THROWS(perturb_far_from_monotone(z, 1.0, 1));
}

TEST_CASE("sample sources") {
  auto p = gen_zipf(30, 1.0);
  PmfSampleSource a(p, 9), b(p, 9);
  auto a1 = a.take(1000, false), a2 = a.take(1000, false);
  CHECK(a1.counts != a2.counts);
  CHECK(b.take(1000, false).counts == a1.counts);
  auto base = draw(p, 500, 1);
  CountsSampleSource src(base, 2);
  auto first = src.take(300, true);
  CHECK(first.m_actual == 300);
  auto rest = src.take(1000, false);
  CHECK(rest.m_actual == 200);
  for (std::size_t i = 0; i < p.n(); ++i) CHECK(first.counts[i] + rest.counts[i] == base.counts[i]);
  CHECK(src.remaining() == 0);
}
