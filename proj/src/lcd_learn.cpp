#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "concave_slopes.hpp"
#include "shapetest/learn.hpp"
#include "shapetest/lp.hpp"

namespace shapetest {

namespace {

struct Piece {
  std::size_t lo, hi;
  double mass;
};

struct Candidate {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> log_q;  // over [lo_s, hi_s]
  IndexSet support;
  double guess = -1.0;
};

}  // namespace

std::uint64_t lcd_sample_budget(double eps, const LcdConfig& cfg) {
  if (!(eps > 0.0) || eps >= 1.0) throw std::invalid_argument("lcd: eps must lie in (0, 1)");
  return static_cast<std::uint64_t>(std::ceil(cfg.budget_constant / std::pow(eps, 5.0)));
}

LearnOutcome lcd_learn(const SampleCounts& counts, double eps, const LcdConfig& cfg) {
  if (counts.dims.size() > 1) throw std::invalid_argument("lcd_learn: one axis expected");
  const std::uint64_t need = lcd_sample_budget(eps, cfg);
  if (counts.m_nominal < need || counts.m_actual == 0)
    throw std::invalid_argument("lcd_learn: sample budget below the minimum of " + std::to_string(need));
  const std::size_t n = counts.n();
  const double m = static_cast<double>(counts.m_actual);
  std::vector<double> ph(n);
  for (std::size_t i = 0; i < n; ++i) ph[i] = static_cast<double>(counts.counts[i]) / m;

  std::size_t lo_s = 0, hi_s = n - 1;
  while (counts.counts[lo_s] == 0) ++lo_s;
  while (counts.counts[hi_s] == 0) --hi_s;

  LearnOutcome out;
  if (lo_s == hi_s) {
    out.q = point_mass(n, lo_s);
    out.support = {lo_s};
    return out;
  }

  const double e15 = std::pow(eps, 1.5);
  const double heavy = e15 / 5.0;
  const double cap = 0.9 * e15;

  // Heavy run M = [a, b].
  bool has_m = false;
  std::size_t a = 0, b = 0;
  for (std::size_t i = lo_s; i <= hi_s; ++i) {
    if (ph[i] >= heavy) {
      if (!has_m) a = i;
      has_m = true;
      b = i;
    }
  }

  // Greedy pieces of empirical mass at most cap, skipping M.
  std::vector<Piece> pieces;
  std::size_t jstar = SIZE_MAX;
  for (std::size_t i = lo_s; i <= hi_s;) {
    if (has_m && i == a) {
      i = b + 1;
      continue;
    }
    std::size_t r = i;
    double mass = ph[i];
    while (r + 1 <= hi_s && !(has_m && r + 1 == a) && mass + ph[r + 1] <= cap) mass += ph[++r];
    if (has_m && r + 1 == a) jstar = pieces.size();
    pieces.push_back({i, r, mass});
    i = r + 1;
  }
  const std::size_t t = pieces.size();

  // Pull blocks: each piece split into up to pull_blocks equal-width blocks,
  // each pulled toward its empirical log-density at its midpoint.
  struct Block {
    std::size_t piece, at;
    double target, weight;
  };
  std::vector<Block> blocks;
  const std::size_t nb = std::max<std::size_t>(1, cfg.pull_blocks);
  for (std::size_t idx = 0; idx < pieces.size(); ++idx) {
    const auto& p = pieces[idx];
    const std::size_t width = p.hi - p.lo + 1, k = std::min(nb, width);
    for (std::size_t s = 0; s < k; ++s) {
      std::size_t lo = p.lo + s * width / k, hi = p.lo + (s + 1) * width / k - 1;
      double mass = 0.0;
      for (std::size_t i = lo; i <= hi; ++i) mass += ph[i];
      if (mass > 0.0) blocks.push_back({idx, lo + (hi - lo) / 2, std::log(mass / static_cast<double>(hi - lo + 1)), mass});
    }
  }

  // Knots: ends and midpoint of every piece, block midpoints, each element of M.
  std::vector<std::size_t> knots;
  for (const auto& p : pieces) {
    knots.push_back(p.lo);
    knots.push_back(p.lo + (p.hi - p.lo) / 2);
    knots.push_back(p.hi);
  }
  for (const auto& bl : blocks) knots.push_back(bl.at);
  if (has_m)
    for (std::size_t i = a; i <= b; ++i) knots.push_back(i);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  auto var_of = [&](std::size_t pos) {
    return static_cast<std::size_t>(std::lower_bound(knots.begin(), knots.end(), pos) - knots.begin());
  };
  const std::size_t K = knots.size();

  std::vector<std::size_t> guesses;
  if (has_m) {
    guesses.push_back(SIZE_MAX);
  } else {
    std::size_t step = static_cast<std::size_t>(std::ceil(1.0 / std::sqrt(eps)));
    for (std::size_t g = 0; g < t; g += step) guesses.push_back(g);
    if (guesses.back() != t - 1) guesses.push_back(t - 1);
  }

  const double jmin = 1.0 / std::sqrt(eps);
  const double log_norm = std::log1p(cfg.norm_slack * eps);
  Candidate best;
  int feasible = 0, solver_failures = 0;
  for (auto g : guesses) {
    LinConstraintSystem sys;
    for (std::size_t k = 0; k < K; ++k) sys.add_var(-kInf, 0.0);
    IndexSet support;
    bool empty_band = false;
    auto band = [&](std::size_t var, double lo, double hi) {
      sys.lower[var] = std::max(sys.lower[var], lo);
      sys.upper[var] = std::min(sys.upper[var], hi);
      if (sys.lower[var] > sys.upper[var]) empty_band = true;
    };
    for (std::size_t idx = 0; idx < t; ++idx) {
      const auto& p = pieces[idx];
      if (idx == jstar || idx == g || !(p.mass > 0.0)) continue;
      bool left = has_m ? p.hi < a : idx < g;
      double j = left ? static_cast<double>(idx + 1) : static_cast<double>(t - idx);
      if (j < jmin) continue;
      double c = 22.0 / (3.0 * j);
      double f = std::log(p.mass / static_cast<double>(p.hi - p.lo + 1));
      double lo = c < 1.0 ? f + std::log1p(-c) : -kInf;
      double hi = f + std::log1p(c);
      for (std::size_t k = var_of(p.lo); k < K && knots[k] <= p.hi; ++k) band(k, lo, hi);
      for (std::size_t i = p.lo; i <= p.hi; ++i) support.push_back(i);
    }
    if (has_m) {
      for (std::size_t i = a; i <= b; ++i) {
        if (!(ph[i] > 0.0)) continue;
        double f = std::log(ph[i]);
        band(var_of(i), f - std::log1p(eps), f + std::log1p(eps));
        support.push_back(i);
      }
    }
    if (empty_band) continue;
    // Concavity over unevenly spaced knots.
    for (std::size_t k = 1; k + 1 < K; ++k) {
      double h1 = static_cast<double>(knots[k] - knots[k - 1]);
      double h2 = static_cast<double>(knots[k + 1] - knots[k]);
      double s = h1 + h2;
      sys.add({{k - 1, h2 / s}, {k + 1, h1 / s}, {k, -1.0}}, Relation::LessEq, 0.0);
    }
    // Mass-weighted L1 pull of Q toward the empirical log-masses.
    std::vector<double> obj(K, 0.0);
    auto pull = [&](std::size_t var, double target, double weight) {
      std::size_t tv = sys.add_var(0.0, kInf);
      obj.push_back(weight);
      sys.add({{var, 1.0}, {tv, -1.0}}, Relation::LessEq, target);
      sys.add({{var, -1.0}, {tv, -1.0}}, Relation::LessEq, -target);
    };
    for (const auto& bl : blocks) pull(var_of(bl.at), bl.target, bl.weight);
    if (has_m)
      for (std::size_t i = a; i <= b; ++i)
        if (ph[i] > 0.0) pull(var_of(i), std::log(ph[i]), ph[i]);

    LpResult res;
    try {
      res = solve_lp(sys, obj);
    } catch (const SolverFailure&) {
      ++solver_failures;
      continue;
    }
    if (res.status != LpStatus::Optimal) continue;

    std::vector<double> x(K), y(K);
    for (std::size_t k = 0; k < K; ++k) {
      x[k] = static_cast<double>(knots[k]);
      y[k] = res.x[k];
    }
    auto slopes = detail::concave_slopes(x, y);
    std::vector<double> log_q(hi_s - lo_s + 1);
    log_q[0] = y[0];
    std::size_t seg = 0;
    for (std::size_t i = lo_s + 1; i <= hi_s; ++i) {
      while (knots[seg + 1] < i) ++seg;
      log_q[i - lo_s] = log_q[i - lo_s - 1] + slopes[seg];
    }
    double z = 0.0;
    for (double v : log_q) z += std::exp(v);
    if (std::abs(std::log(z)) > log_norm) continue;
    ++feasible;
    if (res.objective < best.objective) {
      std::sort(support.begin(), support.end());
      double lz = std::log(z);
      for (auto& v : log_q) v -= lz;
      best = {res.objective, std::move(log_q), std::move(support), g == SIZE_MAX ? -1.0 : static_cast<double>(g)};
    }
  }

  out.detail["intervals"] = static_cast<double>(t);
  out.detail["heavy"] = has_m ? static_cast<double>(b - a + 1) : 0.0;
  out.detail["lps"] = static_cast<double>(guesses.size());
  out.detail["feasible"] = feasible;
  if (feasible == 0) {
    if (solver_failures > 0 && solver_failures == static_cast<int>(guesses.size()))
      throw SolverFailure("lcd_learn: every LP failed numerically");
    out.rejected = true;
    return out;
  }
  out.detail["mode_guess"] = best.guess;
  out.q = Pmf{std::vector<double>(n, 0.0), {}};
  for (std::size_t i = lo_s; i <= hi_s; ++i) out.q.mass[i] = std::exp(best.log_q[i - lo_s]);
  double total = 0.0;
  for (double v : out.q.mass) total += v;
  for (double& v : out.q.mass) v /= total;
  out.support = std::move(best.support);
  return out;
}

}  // namespace shapetest
