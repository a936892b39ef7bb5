#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "concave_slopes.hpp"
#include "shapetest/learn.hpp"
#include "shapetest/lp.hpp"

namespace shapetest {

namespace {

enum class CellKind { Tail, Heavy, Light, Pruned, Last };

struct Cell {
  std::size_t lo, hi;
  double mass;
  CellKind kind;
};

double log_ratio(std::size_t n, double eps) { return std::log(static_cast<double>(n) / eps); }

}  // namespace

std::size_t mhr_cell_budget(std::size_t n, double eps, const MhrConfig& cfg) {
  if (!(eps > 0.0) || eps >= 1.0) throw std::invalid_argument("mhr: eps must lie in (0, 1)");
  double denom = cfg.b_over_eps_squared ? eps * eps : eps;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.b_constant * log_ratio(n, eps) / denom)));
}

std::uint64_t mhr_sample_budget(std::size_t n, double eps, const MhrConfig& cfg) {
  const double b = static_cast<double>(mhr_cell_budget(n, eps, cfg));
  return static_cast<std::uint64_t>(std::ceil(cfg.budget_constant * b * std::max(1.0, std::log(b)) / (eps * eps)));
}

LearnOutcome mhr_learn(const SampleCounts& counts, double eps, const MhrConfig& cfg) {
  if (counts.dims.size() > 1) throw std::invalid_argument("mhr_learn: one axis expected");
  const std::size_t n = counts.n();
  const std::uint64_t need = mhr_sample_budget(n, eps, cfg);
  if (counts.m_nominal < need || counts.m_actual == 0)
    throw std::invalid_argument("mhr_learn: sample budget below the minimum of " + std::to_string(need));
  const double m = static_cast<double>(counts.m_actual);
  std::vector<double> ph(n);
  for (std::size_t i = 0; i < n; ++i) ph[i] = static_cast<double>(counts.counts[i]) / m;
  std::size_t last = n - 1;
  while (counts.counts[last] == 0) --last;

  LearnOutcome out;
  if (last == 0) {
    out.q = point_mass(n, 0);
    out.support = {0};
    return out;
  }

  const std::size_t b = mhr_cell_budget(n, eps, cfg);
  const double heavy = 1.0 / static_cast<double>(b);
  const double cap = 2.0 / static_cast<double>(b);
  const double tail = cfg.tail_constant * eps;

  // Cells over [0, last - 1]; `last` is a final singleton that absorbs the
  // remaining survival mass.
  std::vector<Cell> cells;
  std::size_t pos = 0;
  double acc = 0.0;
  std::size_t left_end = SIZE_MAX;
  for (std::size_t i = 0; i < last; ++i) {
    if (acc + ph[i] > tail) break;
    acc += ph[i];
    left_end = i;
  }
  if (left_end != SIZE_MAX) {
    cells.push_back({0, left_end, acc, CellKind::Tail});
    pos = left_end + 1;
  }
  std::size_t right_start = last;
  double racc = ph[last];
  while (right_start > pos && racc + ph[right_start - 1] <= tail) racc += ph[--right_start];

  // Greedy middle: heavy singletons, otherwise cells closed once they reach 1/b.
  {
    bool open = false;
    std::size_t start = pos;
    double cm = 0.0;
    auto close = [&](std::size_t hi) {
      cells.push_back({start, hi, cm, CellKind::Light});
      open = false;
      cm = 0.0;
    };
    for (std::size_t i = pos; i < right_start; ++i) {
      if (ph[i] >= heavy) {
        if (open) close(i - 1);
        cells.push_back({i, i, ph[i], CellKind::Heavy});
        continue;
      }
      if (open && cm + ph[i] > cap) close(i - 1);
      if (!open) {
        open = true;
        start = i;
      }
      cm += ph[i];
      if (cm >= heavy) close(i);
    }
    if (open) close(right_start - 1);
  }
  if (right_start < last) {
    double mass = 0.0;
    for (std::size_t i = right_start; i < last; ++i) mass += ph[i];
    cells.push_back({right_start, last - 1, mass, CellKind::Tail});
  }
  cells.push_back({last, last, ph[last], CellKind::Last});

  // Neighbour-ratio pruning on per-element values.
  auto per_element = [&](const Cell& c) { return c.mass / static_cast<double>(c.hi - c.lo + 1); };
  const double r = cfg.ratio_constant * eps;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cells[c].kind != CellKind::Light) continue;
    double v = per_element(cells[c]);
    bool ok = v > 0.0;
    for (std::size_t nb : {c - 1, c + 1}) {
      if (!ok || nb >= cells.size()) continue;  // c - 1 wraps for the first cell
      double u = per_element(cells[nb]);
      ok = u >= (1.0 - r) * v && u <= (1.0 + r) * v;
    }
    if (!ok) cells[c].kind = CellKind::Pruned;
  }

  // Knot k sits at the right end of cell k (every cell but the final one);
  // the virtual knot at -1 has log-survival 0.
  const std::size_t K = cells.size() - 1;
  std::vector<double> cdf_before(cells.size() + 1, 0.0);  // empirical F at lo - 1
  for (std::size_t c = 0; c < cells.size(); ++c) cdf_before[c + 1] = cdf_before[c] + cells[c].mass;

  LinConstraintSystem sys;
  for (std::size_t k = 0; k < K; ++k) sys.add_var(-kInf, 0.0);
  bool empty_band = false;
  auto band = [&](std::size_t k, double lo, double hi) {
    sys.lower[k] = std::max(sys.lower[k], lo);
    sys.upper[k] = std::min(sys.upper[k], hi);
    if (sys.lower[k] > sys.upper[k]) empty_band = true;
  };
  auto xpos = [&](std::ptrdiff_t k) { return k < 0 ? -1.0 : static_cast<double>(cells[k].hi); };

  IndexSet support;
  const double delta = cfg.heavy_band_scale * eps / (2.0 * static_cast<double>(b));
  // Kolmogorov-distance bound on the empirical survival, failure 1/6.
  const double dkw = std::sqrt(std::log(12.0) / (2.0 * m));
  const double kappa = cfg.kappa_constant * eps;
  for (std::size_t c = 0; c < K; ++c) {
    const Cell& cell = cells[c];
    if (cell.kind == CellKind::Heavy) {
      double s_before = 1.0 - cdf_before[c];
      double s_after = 1.0 - cdf_before[c + 1];
      if (!(s_after > 0.0)) continue;
      auto survival_band = [&](std::size_t k, double s) {
        double w = delta * s + dkw;
        band(k, s > w ? std::log(s - w) : -kInf, std::log(std::min(1.0, s + w)));
      };
      survival_band(c, s_after);
      if (c > 0) survival_band(c - 1, s_before);
      support.push_back(cell.lo);
    } else if (cell.kind == CellKind::Light) {
      double width = static_cast<double>(cell.hi - cell.lo + 1);
      double v = cell.mass / width;
      double s_first = 1.0 - cdf_before[c];              // 1 - Q_{lo-1}
      double s_last = 1.0 - cdf_before[c] - (width - 1) * v;  // 1 - Q_{hi-1}
      if (!(s_last > 0.0)) continue;
      double lo = (1.0 - kappa) * v / s_last * width;
      double hi = (1.0 + kappa) * v / s_first * width;
      if (lo > hi) continue;
      // lo <= f_{k-1} - f_k <= hi, with f_{-1} = 0.
      if (c > 0) {
        sys.add({{c - 1, 1.0}, {c, -1.0}}, Relation::LessEq, hi);
        sys.add({{c - 1, -1.0}, {c, 1.0}}, Relation::LessEq, -lo);
      } else {
        band(c, -hi, -lo);
      }
      for (std::size_t i = cell.lo; i <= cell.hi; ++i) support.push_back(i);
    }
  }
  if (empty_band) {
    out.rejected = true;
    out.detail["cells"] = static_cast<double>(cells.size());
    return out;
  }

  // Non-increasing and concave log-survival across the knots.
  for (std::size_t k = 1; k < K; ++k) sys.add({{k, 1.0}, {k - 1, -1.0}}, Relation::LessEq, 0.0);
  for (std::size_t k = 0; k + 1 < K; ++k) {
    double h1 = xpos(static_cast<std::ptrdiff_t>(k)) - xpos(static_cast<std::ptrdiff_t>(k) - 1);
    double h2 = xpos(static_cast<std::ptrdiff_t>(k) + 1) - xpos(static_cast<std::ptrdiff_t>(k));
    double s = h1 + h2;
    std::vector<std::pair<std::size_t, double>> row{{k + 1, h1 / s}, {k, -1.0}};
    if (k > 0) row.push_back({k - 1, h2 / s});
    sys.add(row, Relation::LessEq, 0.0);
  }
  std::vector<double> obj(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double s = 1.0 - cdf_before[k + 1];
    if (!(s > 0.0)) continue;
    std::size_t tv = sys.add_var(0.0, kInf);
    obj.push_back(1.0);
    sys.add({{k, 1.0}, {tv, -1.0}}, Relation::LessEq, std::log(s));
    sys.add({{k, -1.0}, {tv, -1.0}}, Relation::LessEq, -std::log(s));
  }

  out.detail["cells"] = static_cast<double>(cells.size());
  out.detail["b"] = static_cast<double>(b);
  LpResult res = solve_lp(sys, obj);
  if (res.status != LpStatus::Optimal) {
    out.rejected = true;
    return out;
  }

  std::vector<double> x(K + 1), y(K + 1);
  x[0] = -1.0;
  y[0] = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    x[k + 1] = xpos(static_cast<std::ptrdiff_t>(k));
    y[k + 1] = res.x[k];
  }
  auto slopes = detail::concave_slopes(x, y);
  for (auto& s : slopes) s = std::min(s, 0.0);

  out.q = Pmf{std::vector<double>(n, 0.0), {}};
  double surv = 1.0;
  std::size_t seg = 0;
  for (std::size_t i = 0; i < last; ++i) {
    while (x[seg + 1] < static_cast<double>(i)) ++seg;
    double f = surv * -std::expm1(slopes[seg]);
    out.q.mass[i] = f;
    surv *= std::exp(slopes[seg]);
  }
  out.q.mass[last] = surv;
  double total = 0.0;
  for (double v : out.q.mass) total += v;
  for (double& v : out.q.mass) v /= total;
  std::sort(support.begin(), support.end());
  out.support = std::move(support);
  return out;
}

}  // namespace shapetest
