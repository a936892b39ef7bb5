#include "shapetest/classdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "shapetest/lp.hpp"
#include "shapetest/shape_fit.hpp"

namespace shapetest {

namespace {

constexpr double kCellTolerance = 1e-9;

void normalize_values(std::vector<double>& v, const std::vector<double>& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += v[i] * w[i];
  if (!(total > 0.0)) throw std::invalid_argument("class distance: zero total mass");
  for (auto& x : v) x /= total;
}

// Generic cell values for grids; cells numbered as in IntervalPartition.
void grid_cell_values(const Pmf& q, const IntervalPartition& part, std::vector<double>& values,
                      std::vector<double>& sizes) {
  if (!part.covers) throw std::invalid_argument("class distance: partition does not cover the domain");
  if (q.n() != part.n()) throw std::invalid_argument("class distance: size mismatch");
  auto map = part.cell_map();
  const std::size_t L = part.num_cells();
  values.assign(L, 0.0);
  sizes.assign(L, 0.0);
  std::vector<double> lo(L, std::numeric_limits<double>::infinity()), hi(L, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < q.n(); ++i) {
    auto c = map[i];
    values[c] += q.mass[i];
    sizes[c] += 1.0;
    lo[c] = std::min(lo[c], q.mass[i]);
    hi[c] = std::max(hi[c], q.mass[i]);
  }
  for (std::size_t c = 0; c < L; ++c) {
    if (hi[c] - lo[c] > kCellTolerance) throw std::invalid_argument("class distance: q is not constant on a cell");
    values[c] /= sizes[c];
  }
  normalize_values(values, sizes);
}

struct MonotoneLp {
  LinConstraintSystem sys;
  std::vector<double> objective;
  std::size_t L = 0;
};

// f_c >= 0 per cell plus t_c >= |f_c - v_c|, normalization sum size_c f_c = 1.
MonotoneLp base_lp(const std::vector<double>& v, const std::vector<double>& w) {
  MonotoneLp lp;
  lp.L = v.size();
  for (std::size_t c = 0; c < lp.L; ++c) lp.sys.add_var(0.0, kInf);
  for (std::size_t c = 0; c < lp.L; ++c) lp.sys.add_var(0.0, kInf);
  std::vector<std::pair<std::size_t, double>> norm;
  for (std::size_t c = 0; c < lp.L; ++c) {
    lp.sys.add({{c, 1.0}, {lp.L + c, -1.0}}, Relation::LessEq, v[c]);
    lp.sys.add({{c, -1.0}, {lp.L + c, -1.0}}, Relation::LessEq, -v[c]);
    norm.push_back({c, w[c]});
  }
  lp.sys.add(norm, Relation::Eq, 1.0);
  lp.objective.assign(2 * lp.L, 0.0);
  for (std::size_t c = 0; c < lp.L; ++c) lp.objective[lp.L + c] = 0.5 * w[c];
  return lp;
}

// f_a >= f_b.
void add_order(MonotoneLp& lp, std::size_t a, std::size_t b) { lp.sys.add({{b, 1.0}, {a, -1.0}}, Relation::LessEq, 0.0); }

double solve_distance(const MonotoneLp& lp) {
  auto r = solve_lp(lp.sys, lp.objective);
  if (r.status != LpStatus::Optimal) throw SolverFailure("class distance: LP did not reach an optimum");
  return std::clamp(r.objective, 0.0, 1.0);
}

double grid_monotone_lp(const std::vector<double>& v, const std::vector<double>& w, const IntervalPartition& part) {
  auto lp = base_lp(v, w);
  const std::size_t d = part.num_axes();
  std::vector<std::size_t> counts(d), stride(d);
  std::size_t s = 1;
  for (std::size_t a = d; a-- > 0;) {
    counts[a] = part.axis_cells[a].size();
    stride[a] = s;
    s *= counts[a];
  }
  for (std::size_t c = 0; c < lp.L; ++c) {
    for (std::size_t a = 0; a < d; ++a) {
      std::size_t coord = (c / stride[a]) % counts[a];
      if (coord + 1 < counts[a]) add_order(lp, c, c + stride[a]);
    }
  }
  return solve_distance(lp);
}

// Runs of equal consecutive masses as (value, length) cells.
void run_cells(const Pmf& q, std::vector<double>& values, std::vector<double>& sizes) {
  values.clear();
  sizes.clear();
  for (std::size_t i = 0; i < q.n();) {
    std::size_t j = i + 1;
    while (j < q.n() && std::abs(q.mass[j] - q.mass[i]) <= 0.0) ++j;
    values.push_back(q.mass[i]);
    sizes.push_back(static_cast<double>(j - i));
    i = j;
  }
  normalize_values(values, sizes);
}

}  // namespace

void cell_values(const Pmf& q, const IntervalPartition& part, std::vector<double>& values,
                 std::vector<double>& sizes) {
  if (part.num_axes() != 1) throw std::invalid_argument("cell values: one axis expected");
  grid_cell_values(q, part, values, sizes);
}

double dist_to_monotone(const Pmf& q, const IntervalPartition& part) {
  validate(q);
  std::vector<double> v, w;
  grid_cell_values(q, part, v, w);
  if (part.num_axes() == 1) return std::clamp(project_non_increasing(v, w).distance, 0.0, 1.0);
  if (part.num_axes() > 3) throw std::invalid_argument("dist_to_monotone: grids with more than 3 axes are unsupported");
  return grid_monotone_lp(v, w, part);
}

double dist_to_monotone(const Pmf& q) {
  validate(q);
  if (q.num_axes() == 1) {
    std::vector<double> v, w;
    run_cells(q, v, w);
    return std::clamp(project_non_increasing(v, w).distance, 0.0, 1.0);
  }
  IntervalPartition part;
  part.dims = q.dims;
  for (auto n : q.dims) part.axis_cells.push_back(singleton_partition(n).cells());
  return dist_to_monotone(q, part);
}

double dist_to_unimodal(const Pmf& q) {
  validate(q);
  if (q.num_axes() != 1) throw std::invalid_argument("dist_to_unimodal: one axis expected");
  if (q.n() <= 2) return 0.0;
  std::vector<double> v, w;
  run_cells(q, v, w);
  return std::clamp(project_unimodal(v, w).distance, 0.0, 1.0);
}

double dist_to_monotone_lp(const Pmf& q, const IntervalPartition& part) {
  validate(q);
  std::vector<double> v, w;
  grid_cell_values(q, part, v, w);
  if (part.num_axes() != 1) return grid_monotone_lp(v, w, part);
  auto lp = base_lp(v, w);
  for (std::size_t c = 0; c + 1 < lp.L; ++c) add_order(lp, c, c + 1);
  return solve_distance(lp);
}

double dist_to_unimodal_lp(const Pmf& q, const IntervalPartition& part) {
  validate(q);
  std::vector<double> v, w;
  cell_values(q, part, v, w);
  double best = 1.0;
  for (std::size_t mode = 0; mode < v.size(); ++mode) {
    auto lp = base_lp(v, w);
    for (std::size_t c = 0; c + 1 < lp.L; ++c) {
      if (c < mode)
        add_order(lp, c + 1, c);
      else
        add_order(lp, c, c + 1);
    }
    best = std::min(best, solve_distance(lp));
  }
  return best;
}

namespace {

std::size_t grid_steps(double step) {
  if (!(step >= 1e-3) || step > 1.0) throw std::invalid_argument("brute force: step must lie in [1e-3, 1]");
  double k = std::round(1.0 / step);
  if (std::abs(k * step - 1.0) > 1e-9) throw std::invalid_argument("brute force: 1/step must be an integer");
  return static_cast<std::size_t>(k);
}

// Dynamic program over grid points k_0..k_{n-1} with sum K. Unimodal allows one
// switch from the rising to the falling phase.
double shape_dp(const Pmf& q, std::size_t K, double step, bool unimodal) {
  const std::size_t n = q.n();
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t W = K + 1;
  // up/down[s * W + k]: best cost with partial sum s and last value k.
  std::vector<double> up(W * W, inf), down(W * W, inf), nup(W * W), ndown(W * W);
  std::vector<double> cost(W);
  auto fill_cost = [&](std::size_t i) {
    for (std::size_t k = 0; k <= K; ++k) cost[k] = std::abs(static_cast<double>(k) * step - q.mass[i]);
  };
  fill_cost(0);
  for (std::size_t k = 0; k <= K; ++k) {
    down[k * W + k] = cost[k];
    if (unimodal) up[k * W + k] = cost[k];
  }
  std::vector<double> pre(W), suf_up(W), suf_down(W);
  for (std::size_t i = 1; i < n; ++i) {
    fill_cost(i);
    std::fill(nup.begin(), nup.end(), inf);
    std::fill(ndown.begin(), ndown.end(), inf);
    for (std::size_t s_prev = 0; s_prev <= K; ++s_prev) {
      const double* u = &up[s_prev * W];
      const double* dn = &down[s_prev * W];
      // Prefix minimum of up over k' <= k; suffix minima over k' >= k.
      double run = inf;
      for (std::size_t k = 0; k <= K; ++k) pre[k] = run = std::min(run, u[k]);
      double ru = inf, rd = inf;
      for (std::size_t k = K + 1; k-- > 0;) {
        suf_up[k] = ru = std::min(ru, u[k]);
        suf_down[k] = rd = std::min(rd, dn[k]);
      }
      for (std::size_t k = 0; s_prev + k <= K; ++k) {
        std::size_t s = s_prev + k;
        if (unimodal) nup[s * W + k] = std::min(nup[s * W + k], cost[k] + pre[k]);
        double fall = std::min(suf_down[k], unimodal ? suf_up[k] : inf);
        ndown[s * W + k] = std::min(ndown[s * W + k], cost[k] + fall);
      }
    }
    std::swap(up, nup);
    std::swap(down, ndown);
  }
  double best = inf;
  for (std::size_t k = 0; k <= K; ++k) best = std::min({best, up[K * W + k], down[K * W + k]});
  return 0.5 * best;
}

double enumerate_grid(const ClassId& c, const Pmf& q, std::size_t K, double step) {
  const std::size_t n = q.n();
  // Number of compositions of K into n parts.
  double count = 1.0;
  for (std::size_t j = 1; j < n; ++j) count = count * static_cast<double>(K + j) / static_cast<double>(j);
  if (count > 5e7) throw std::invalid_argument("brute force: grid too large for enumeration");
  std::vector<std::size_t> k(n, 0);
  Pmf f{std::vector<double>(n), q.dims};
  double best = std::numeric_limits<double>::infinity();
  auto fill = [&](auto&& self, std::size_t i, std::size_t remaining) -> void {
    if (i + 1 == n) {
      k[i] = remaining;
      for (std::size_t j = 0; j < n; ++j) f.mass[j] = static_cast<double>(k[j]) * step;
      if (is_member(c, f)) best = std::min(best, tv_distance(f, q));
      return;
    }
    for (std::size_t x = 0; x <= remaining; ++x) {
      k[i] = x;
      self(self, i + 1, remaining - x);
    }
  };
  fill(fill, 0, K);
  return best;
}

}  // namespace

double brute_force_dist(const ClassId& c, const Pmf& q, double step) {
  validate(q);
  if (q.n() > 8) throw std::invalid_argument("brute force: n must be at most 8");
  std::size_t K = grid_steps(step);
  bool one_axis = q.num_axes() == 1;
  if (c.kind == ClassKind::Monotone && c.d == 1 && one_axis) return shape_dp(q, K, step, false);
  if (c.kind == ClassKind::Unimodal && one_axis) return shape_dp(q, K, step, true);
  return enumerate_grid(c, q, K, step);
}

}  // namespace shapetest
