// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria (capped at 1).

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "common/oracles.hpp"
#include "shapetest/classdist.hpp"
#include "shapetest/experiment.hpp"
#include "shapetest/learn.hpp"
#include "shapetest/tester.hpp"

using namespace shapetest;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

struct Outcome {
  bool pass;
  std::string detail;
};

void run(const char* id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  auto t0 = Clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double s = std::chrono::duration<double>(Clock::now() - t0).count();
  bool in_time = limit_s <= 0.0 || s <= limit_s;
  bool pass = o.pass && in_time;
  failures += !pass;
  std::printf("%s %-4s %-40s %8.2fs  %s%s\n", pass ? "PASS" : "FAIL", id, title, s, o.detail.c_str(),
              in_time ? "" : " (over time limit)");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

IndexSet all_of(std::size_t n) {
  IndexSet s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

Outcome moments() {
  const std::size_t n = 100;
  const double eps = 0.25;
  const double m = 50.0 * std::sqrt(static_cast<double>(n)) / (eps * eps);
  const int trials = 10000;
  std::mt19937_64 rng(2024);
  std::vector<std::pair<Pmf, Pmf>> pairs{
      {uniform_pmf(n), uniform_pmf(n)},
      {gen_zipf(n, 1.0), uniform_pmf(n)},
      {gen_paninski({n, eps, 2.0, random_signs(n / 2, 5)}), uniform_pmf(n)},
      {gen_zipf(n, 0.8), gen_zipf(n, 0.5)},
      {make_pmf(oracle::random_simplex(n, rng)), make_pmf(oracle::random_simplex(n, rng))},
  };
  bool ok = true;
  double worst_se = 0.0, worst_ratio = 1.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [p, q] = pairs[k];
    auto A = all_of(n);
    double s = 0.0, s2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      double z = chi2_statistic(poissonized_draw(p, static_cast<std::uint64_t>(m), derive_seed(77, k * trials + t)), q, A);
      s += z;
      s2 += z * z;
    }
    double mean = s / trials, var = s2 / trials - mean * mean;
    double em = oracle::z_mean(p.mass, q.mass, A, m), ev = oracle::z_var(p.mass, q.mass, A, m);
    double se = std::abs(mean - em) / std::sqrt(ev / trials);
    double ratio = std::max(var / ev, ev / var);
    worst_se = std::max(worst_se, se);
    worst_ratio = std::max(worst_ratio, ratio);
    ok &= se <= 3.0 && ratio <= 1.5;
  }
  return {ok, fmt("worst mean offset %.2f SE (<= 3), worst variance ratio %.3f (<= 1.5)", worst_se, worst_ratio)};
}

Outcome separation() {
  bool ok = true;
  double slack_lo = INFINITY, slack_hi = INFINITY;
  for (double n : {1e2, 1e4}) {
    for (double eps : {0.1, 0.25}) {
      const double m = 20000.0 * std::sqrt(n) / (eps * eps), me2 = m * eps * eps;
      // the upper deviation grows with E, so the boundary is the worst case
      double e = me2 / 500.0;
      double gap = me2 / 200.0 - (e + std::sqrt(3.0 * oracle::z_var_bound(n, e)));
      slack_lo = std::min(slack_lo, gap / me2);
      ok &= gap >= 0.0;
      for (double f = 1.0; f <= 1e6; f *= 1.01) {
        double big = f * me2 / 5.0;
        double g = big - std::sqrt(3.0 * oracle::z_var_bound(n, big)) - 3.0 * me2 / 20.0;
        slack_hi = std::min(slack_hi, g / me2);
        ok &= g >= 0.0;
      }
      TestConfig cfg = TestConfig::paper(eps);
      double thr = chi2_threshold(cfg, m, static_cast<std::size_t>(n));
      ok &= thr > me2 / 200.0 && thr < 3.0 * me2 / 20.0;
    }
  }
  return {ok, fmt("min relative slack %.4f (near) and %.4f (far)", slack_lo, slack_hi)};
}

Outcome birge_bound() {
  const double eps = 0.25;
  std::mt19937_64 rng(314);
  double worst1 = 0.0, worst2 = 0.0;
  auto p1 = birge_partition(1024, birge_gamma_for(eps * eps, 1));
  for (int t = 0; t < 200; ++t) {
    auto p = make_pmf(oracle::random_monotone(1024, rng));
    worst1 = std::max(worst1, oracle::plain_chi2(p.mass, flatten(p, p1).mass));
  }
  // at 64 per axis the d=2 partition is all singletons, so 1024 per axis is checked too
  double worst3 = 0.0;
  std::size_t cells64 = 0, cells1024 = 0;
  for (std::size_t k : {64u, 1024u}) {
    auto p2 = birge_grid_partition({k, k}, birge_gamma_for(eps * eps, 2));
    (k == 64 ? cells64 : cells1024) = p2.axis_cells[0].size();
    double& w = k == 64 ? worst2 : worst3;
    for (int t = 0; t < 200; ++t) {
      auto p = make_pmf(oracle::random_monotone_grid(k, rng), {k, k});
      w = std::max(w, oracle::plain_chi2(p.mass, flatten(p, p2).mass));
    }
  }
  return {worst1 <= eps * eps && worst2 <= eps * eps && worst3 <= eps * eps,
          fmt("max chi2 %.5f (d=1), %.5f (d=2, 64), %.5f (d=2, 1024)", worst1, worst2, worst3) +
              fmt(", cells per axis %g and %g of 64 and 1024, bound %.4f", static_cast<double>(cells64),
                  static_cast<double>(cells1024), eps * eps)};
}

Outcome add1_bound() {
  struct Config {
    Pmf p;
    IntervalPartition part;
    std::uint64_t m;
  };
  std::mt19937_64 rng(8);
  std::vector<Config> cfgs{
      {gen_zipf(500, 1.0), birge_partition(500, 0.1), 2000},
      {uniform_pmf(100), singleton_partition(100), 500},
      {make_pmf(oracle::random_simplex(50, rng)), singleton_partition(50), 100},
      {gen_triangular(1000), birge_partition(1000, 0.05), 5000},
      {gen_geometric(200, 0.98), birge_partition(200, 0.2), 300},
  };
  bool ok = true;
  double worst = 0.0;
  for (std::size_t k = 0; k < cfgs.size(); ++k) {
    const auto& c = cfgs[k];
    const double b = static_cast<double>(c.part.num_cells()), m = static_cast<double>(c.m);
    double mean = 0.0;
    for (int t = 0; t < 1000; ++t)
      mean += oracle::plain_chi2(c.p.mass, add1_learn(draw(c.p, c.m, derive_seed(41, k * 1000 + t)), c.part).mass);
    mean /= 1000.0;
    double bound = (m + b) / (m + 1.0) * oracle::plain_chi2(c.p.mass, flatten(c.p, c.part).mass) + b / (m + 1.0);
    worst = std::max(worst, mean / bound);
    ok &= mean <= 1.1 * bound;
  }
  return {ok, fmt("worst mean/bound %.4f (<= 1.1)", worst)};
}

Outcome tensorization() {
  std::mt19937_64 rng(55);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::size_t d = 2 + t % 2;
    std::vector<Pmf> ps, qs;
    double prod = 1.0;
    for (std::size_t a = 0; a < d; ++a) {
      std::size_t k = 2 + rng() % 6;
      ps.push_back(make_pmf(oracle::random_simplex(k, rng)));
      qs.push_back(make_pmf(oracle::random_simplex(k, rng)));
      prod *= 1.0 + oracle::plain_chi2(ps.back().mass, qs.back().mass);
    }
    double direct = chi2_distance(tensor_product(ps), tensor_product(qs));
    worst = std::max(worst, std::abs(direct - (prod - 1.0)) / std::max(1.0, prod - 1.0));
  }
  return {worst <= 1e-10, fmt("max relative error %.2e (<= 1e-10)", worst)};
}

Outcome exact_vs_brute() {
  std::mt19937_64 rng(66);
  const double step = 1e-3;
  double worst = 0.0;
  bool ok = true;
  for (int t = 0; t < 50; ++t) {
    std::size_t n = 2 + t % 5;
    auto q = make_pmf(oracle::random_simplex(n, rng));
    double tol = static_cast<double>(n) * step;
    double em = std::abs(dist_to_monotone(q) - brute_force_dist(ClassId::monotone(1), q, step));
    double eu = std::abs(dist_to_unimodal(q) - brute_force_dist(ClassId::unimodal(), q, step));
    worst = std::max({worst, em / tol, eu / tol});
    ok &= em <= tol && eu <= tol;
  }
  return {ok, fmt("worst error %.3f of n*step", worst)};
}

Outcome paninski_far() {
  const double c = 4.0;
  bool ok = true;
  double min_margin = INFINITY, tv_err = 0.0;
  for (double eps : {0.1, 0.2}) {
    for (std::size_t n : {4u, 6u, 8u}) {
      auto p = gen_paninski({n, eps, c, random_signs(n / 2, n)});
      double d = brute_force_dist(ClassId::monotone(1), p, 1e-3);
      min_margin = std::min(min_margin, d - eps);
      tv_err = std::max(tv_err, std::abs(oracle::plain_tv(p.mass, uniform_pmf(n).mass) - c * eps / 2.0));
      ok &= d >= eps;
    }
  }
  ok &= tv_err <= 1e-12;
  return {ok, fmt("min (distance - eps) %.4f, TV error %.1e", min_margin, tv_err)};
}

struct Instance {
  std::string name;
  Pmf p;
  bool in;
};

// Far instances are certified independently before the testers see them.
double certificate(const ClassId& id, const Pmf& p) {
  switch (id.kind) {
    case ClassKind::Monotone:
      return dist_to_monotone(p);
    case ClassKind::Unimodal:
    case ClassKind::LogConcave:
      return dist_to_unimodal(p);
    case ClassKind::MHR:
      return oracle::mhr_distance_lower_bound(p);
    case ClassKind::Product:
      return oracle::independence_lower_bound(p);
    default:
      return 0.0;
  }
}

Outcome testers() {
  const std::size_t n = 10000;
  const double eps = 0.1;
  const int reps = 200;
  auto cfg = TestConfig::experiment(eps);
  auto tri = gen_triangular(n), gau = gen_discrete_gaussian(n, 5000, 1200), geo = gen_geometric(n, 0.9995);
  auto uni = uniform_pmf(n), zipf = gen_zipf(n, 1.0);
  auto u100 = uniform_pmf(100);
  std::vector<double> diag(10000), blk(10000);
  for (std::size_t i = 0; i < 100; ++i)
    for (std::size_t j = 0; j < 100; ++j) {
      diag[i * 100 + j] = 0.65 / 10000 + (i == j ? 0.35 / 100 : 0.0);
      blk[i * 100 + j] = ((i < 50) == (j < 50)) ? 1.7 : 0.3;
    }

  std::vector<std::pair<ClassId, std::vector<Instance>>> suites{
      {ClassId::monotone(1),
       {{"uniform", uni, true},
        {"zipf", zipf, true},
        {"geometric", geo, true},
        {"paninski", gen_paninski({n, eps, 4.0, random_signs(n / 2, 11)}), false},
        {"zipf-far", perturb_far_from_monotone(zipf, eps, 5), false},
        {"geometric-far", perturb_far_from_monotone(geo, eps, 6), false}}},
      {ClassId::unimodal(),
       {{"triangular", tri, true},
        {"gaussian", gau, true},
        {"zipf", zipf, true},
        {"triangular-far", perturb_far_from_unimodal(tri, eps, 7), false},
        {"gaussian-far", perturb_far_from_unimodal(gau, eps, 8), false},
        {"uniform-far", perturb_far_from_unimodal(uni, eps, 9), false}}},
      {ClassId::log_concave(),
       {{"triangular", tri, true},
        {"gaussian", gau, true},
        {"geometric", geo, true},
        {"triangular-far", perturb_far_from_unimodal(tri, eps, 7), false},
        {"gaussian-far", perturb_far_from_unimodal(gau, eps, 8), false},
        {"geometric-far", perturb_far_from_unimodal(geo, eps, 10), false}}},
      {ClassId::mhr(),
       {{"uniform", uni, true},
        {"geometric", geo, true},
        {"gaussian", gau, true},
        {"two-blocks", gen_blocks(n, {0, 6000}, {2000, 4000}, {0.5, 0.5}), false},
        {"three-blocks", gen_blocks(n, {0, 4000, 8000}, {1000, 1000, 2000}, {0.4, 0.3, 0.3}), false},
        {"bump", gen_blocks(n, {0, 8000}, {2000, 500}, {0.7, 0.3}), false}}},
      {ClassId::product({100, 100}),
       {{"uniform", tensor_product({u100, u100}), true},
        {"zipf x geometric", tensor_product({gen_zipf(100, 1.0), gen_geometric(100, 0.97)}), true},
        {"gaussian x triangular", tensor_product({gen_discrete_gaussian(100, 50, 15), gen_triangular(100)}), true},
        {"diagonal", make_pmf(diag, {100, 100}), false},
        {"blocks", renormalized(blk, {100, 100}), false},
        {"paninski grid", gen_paninski_grid(100, 2, eps, 8.0, 3), false}}},
  };

  bool ok = true;
  double worst = 1.0;
  std::string where;
  for (const auto& [id, cases] : suites) {
    for (const auto& c : cases) {
      if (c.in && !is_member(id, c.p)) {
        std::printf("     %-12s %-22s not in class\n", class_name(id).c_str(), c.name.c_str());
        ok = false;
        continue;
      }
      double cert = c.in ? 0.0 : certificate(id, c.p);
      if (!c.in && cert < eps) {
        std::printf("     %-12s %-22s certificate %.4f below eps\n", class_name(id).c_str(), c.name.c_str(), cert);
        ok = false;
        continue;
      }
      int correct = 0;
      for (int r = 0; r < reps; ++r) {
        PmfSampleSource src(c.p, derive_seed(1000, static_cast<std::uint64_t>(r)));
        correct += run_test(id, src, cfg).accepted() == c.in;
      }
      double rate = correct / static_cast<double>(reps);
      std::printf("     %-12s %-22s %s rate %.3f\n", class_name(id).c_str(), c.name.c_str(), c.in ? "in " : "far", rate);
      if (rate <= worst) {
        worst = rate;
        where = class_name(id) + "/" + c.name;
      }
      ok &= rate >= 0.8;
    }
  }
  return {ok, fmt("worst correct rate %.3f (>= 0.8) at ", worst) + where};
}

Outcome experiment_comparison() {
  ExperimentConfig cfg;
  cfg.n = 50000;
  cfg.eps = 0.05;
  cfg.reps = 400;
  cfg.sample_grid = {30000};
  auto chi = experiment_accuracy(cfg);
  cfg.tester = TesterKind::BKR;
  auto bkr = experiment_accuracy(cfg);
  double a = chi[0].accuracy, b = bkr[0].accuracy;
  return {a >= 0.85 && b < a, fmt("chi2 accuracy %.4f (>= 0.85), bkr %.4f", a, b)};
}

Outcome learners_in_class() {
  std::mt19937_64 rng(77);
  const double eps = 0.2;
  int bad = 0, kept_lcd = 0, kept_mhr = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 200 + 50 * (t % 5);
    Pmf p;
    switch (t % 4) {
      case 0: p = gen_discrete_gaussian(n, n / 2.0, n / 8.0); break;
      case 1: p = gen_geometric(n, 0.99); break;
      case 2: p = make_pmf(oracle::random_simplex(n, rng)); break;
      default: p = perturb_far_from_unimodal(gen_triangular(n), 0.2, t); break;
    }
    auto a = lcd_learn(draw(p, lcd_sample_budget(eps), derive_seed(3, t)), eps);
    if (!a.rejected) {
      ++kept_lcd;
      bad += !is_member(ClassId::log_concave(), a.q);
    }
    auto b = mhr_learn(draw(p, mhr_sample_budget(n, eps), derive_seed(4, t)), eps);
    if (!b.rejected) {
      ++kept_mhr;
      bad += !is_member(ClassId::mhr(), b.q);
    }
  }
  return {bad == 0, fmt("%g outputs out of class (lcd kept %g, mhr kept %g)", bad, kept_lcd, kept_mhr)};
}

}  // namespace

int main() {
  run("C1", "statistic moments", 60.0, moments);
  run("C2", "separation arithmetic", 1.0, separation);
  run("C3", "flattening chi-squared bound", 0.0, birge_bound);
  run("C4", "add-1 expected chi-squared", 0.0, add1_bound);
  run("C5", "chi-squared tensorization", 0.0, tensorization);
  run("C6", "exact distances vs brute force", 0.0, exact_vs_brute);
  run("C7", "perturbed instances are far", 0.0, paninski_far);
  run("C8", "end-to-end testers", 600.0, testers);
  run("C9", "chi-squared vs local collisions", 0.0, experiment_comparison);
  run("C10", "learner outputs stay in class", 0.0, learners_in_class);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
