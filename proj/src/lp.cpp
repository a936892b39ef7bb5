#include "shapetest/lp.hpp"

#include <algorithm>
#include <cmath>

namespace shapetest {

std::size_t LinConstraintSystem::add_var(double lo, double hi) {
  lower.push_back(lo);
  upper.push_back(hi);
  return num_vars++;
}

void LinConstraintSystem::add(std::vector<std::pair<std::size_t, double>> coeffs, Relation rel, double rhs) {
  constraints.push_back({std::move(coeffs), rel, rhs});
}

double max_violation(const LinConstraintSystem& sys, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < sys.num_vars; ++j) {
    worst = std::max(worst, sys.lower[j] - x[j]);
    worst = std::max(worst, x[j] - sys.upper[j]);
  }
  for (const auto& c : sys.constraints) {
    double lhs = 0.0, scale = 1.0;
    for (auto [j, a] : c.coeffs) {
      lhs += a * x[j];
      scale = std::max(scale, std::abs(a));
    }
    double v = (lhs - c.rhs) / scale;
    worst = std::max(worst, c.rel == Relation::Eq ? std::abs(v) : v);
  }
  return worst;
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;
constexpr std::size_t kStallLimit = 50;

// x_j = offset + sum(sign * column).
struct VarMap {
  double offset = 0.0;
  std::vector<std::pair<std::size_t, double>> cols;
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_((rows + 1) * (cols + 1), 0.0), basis_(rows) {}

  double& at(std::size_t r, std::size_t c) { return a_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double& cost(std::size_t c) { return at(m_, c); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    double piv = at(pr, pc);
    double* prow = &a_[pr * (n_ + 1)];
    nz_.clear();
    for (std::size_t c = 0; c <= n_; ++c) {
      if (prow[c] != 0.0) {
        prow[c] /= piv;
        nz_.push_back(c);
      }
    }
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      double* row = &a_[r * (n_ + 1)];
      double f = row[pc];
      if (f == 0.0) continue;
      for (auto c : nz_) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  // One pivot restricted to columns < limit. Dantzig pricing by default;
  // Bland's rule while `bland` is set, which rules out cycling.
  enum class Step { Pivoted, Optimal, Unbounded };
  Step step(std::size_t limit, bool bland, bool& degenerate) {
    std::size_t enter = limit;
    double most = -kCostTol;
    for (std::size_t c = 0; c < limit; ++c) {
      if (cost(c) < most) {
        enter = c;
        if (bland) break;
        most = cost(c);
      }
    }
    if (enter == limit) return Step::Optimal;
    std::size_t leave = m_;
    double best = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      double v = at(r, enter);
      if (v <= kPivotTol) continue;
      double ratio = rhs(r) / v;
      if (leave == m_ || ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis_[r] < basis_[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave == m_) return Step::Unbounded;
    degenerate = best <= 1e-12;
    pivot(leave, enter);
    return Step::Pivoted;
  }

 private:
  std::size_t m_, n_;
  std::vector<double> a_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nz_;
};

}  // namespace

LpResult solve_lp(const LinConstraintSystem& sys, const std::vector<double>& objective) {
  const std::size_t nv = sys.num_vars;
  if (sys.lower.size() != nv || sys.upper.size() != nv) throw std::invalid_argument("lp: bounds size mismatch");
  if (!objective.empty() && objective.size() != nv) throw std::invalid_argument("lp: objective size mismatch");

  // Map each variable onto nonnegative structural columns.
  std::vector<VarMap> vars(nv);
  std::size_t ncol = 0;
  struct BoundRow {
    std::size_t col;
    double cap;
  };
  std::vector<BoundRow> bound_rows;
  for (std::size_t j = 0; j < nv; ++j) {
    double lo = sys.lower[j], hi = sys.upper[j];
    if (lo > hi) return {LpStatus::Infeasible, {}, 0.0};
    if (std::isfinite(lo)) {
      vars[j].offset = lo;
      vars[j].cols.push_back({ncol, 1.0});
      if (std::isfinite(hi)) bound_rows.push_back({ncol, hi - lo});
      ++ncol;
    } else if (std::isfinite(hi)) {
      vars[j].offset = hi;
      vars[j].cols.push_back({ncol++, -1.0});
    } else {
      vars[j].cols.push_back({ncol++, 1.0});
      vars[j].cols.push_back({ncol++, -1.0});
    }
  }

  struct Row {
    std::vector<std::pair<std::size_t, double>> coeffs;
    bool eq;
    double rhs;
  };
  std::vector<Row> rows;
  rows.reserve(sys.constraints.size() + bound_rows.size());
  for (const auto& c : sys.constraints) {
    Row r{{}, c.rel == Relation::Eq, c.rhs};
    double scale = 0.0;
    for (auto [j, a] : c.coeffs) {
      if (j >= nv) throw std::invalid_argument("lp: coefficient index out of range");
      if (!std::isfinite(a)) throw std::invalid_argument("lp: non-finite coefficient");
      if (a == 0.0) continue;
      r.rhs -= a * vars[j].offset;
      for (auto [col, s] : vars[j].cols) r.coeffs.push_back({col, a * s});
      scale = std::max(scale, std::abs(a));
    }
    if (!std::isfinite(r.rhs)) throw std::invalid_argument("lp: non-finite right-hand side");
    if (scale == 0.0) {
      bool ok = r.eq ? std::abs(r.rhs) <= kFeasTolerance : r.rhs >= -kFeasTolerance;
      if (!ok) return {LpStatus::Infeasible, {}, 0.0};
      continue;
    }
    for (auto& [col, a] : r.coeffs) a /= scale;
    r.rhs /= scale;
    rows.push_back(std::move(r));
  }
  for (auto br : bound_rows) rows.push_back({{{br.col, 1.0}}, false, br.cap});

  const std::size_t m = rows.size();
  // Columns: structural, one slack per inequality, one artificial per row that needs it.
  std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX);
  std::size_t total = ncol;
  for (std::size_t r = 0; r < m; ++r)
    if (!rows[r].eq) slack_col[r] = total++;
  const std::size_t first_art = total;
  for (std::size_t r = 0; r < m; ++r) {
    bool slack_basic = !rows[r].eq && rows[r].rhs >= 0.0;
    if (!slack_basic) art_col[r] = total++;
  }

  Tableau t(m, total);
  for (std::size_t r = 0; r < m; ++r) {
    double sign = rows[r].rhs < 0.0 ? -1.0 : 1.0;
    for (auto [col, a] : rows[r].coeffs) t.at(r, col) += sign * a;
    if (slack_col[r] != SIZE_MAX) t.at(r, slack_col[r]) = sign;
    t.rhs(r) = sign * rows[r].rhs;
    if (art_col[r] != SIZE_MAX) {
      t.at(r, art_col[r]) = 1.0;
      t.basis()[r] = art_col[r];
    } else {
      t.basis()[r] = slack_col[r];
    }
  }

  const std::size_t max_iter = 50 * (m + total) + 20000;
  auto run = [&](std::size_t limit) {
    std::size_t stalled = 0;
    for (std::size_t it = 0; it < max_iter; ++it) {
      bool degenerate = false;
      auto s = t.step(limit, stalled >= kStallLimit, degenerate);
      if (s != Tableau::Step::Pivoted) return s;
      stalled = degenerate ? stalled + 1 : 0;
    }
    throw SolverFailure("lp: iteration limit reached");
  };

  // Phase I.
  if (first_art < total) {
    for (std::size_t r = 0; r < m; ++r) {
      if (art_col[r] == SIZE_MAX) continue;
      for (std::size_t c = 0; c <= total; ++c) t.at(m, c) -= t.at(r, c);
      t.cost(art_col[r]) = 0.0;
    }
    run(total);
    double infeas = -t.at(m, total);
    if (infeas > 1e-9 * std::max<double>(1.0, static_cast<double>(m))) return {LpStatus::Infeasible, {}, 0.0};
    // Drive remaining artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      if (t.basis()[r] < first_art) continue;
      std::size_t best = first_art;
      double mag = 1e-7;
      for (std::size_t c = 0; c < first_art; ++c) {
        if (std::abs(t.at(r, c)) > mag) {
          mag = std::abs(t.at(r, c));
          best = c;
        }
      }
      if (best < first_art) t.pivot(r, best);
    }
  }

  // Phase II over structural and slack columns only.
  for (std::size_t c = 0; c <= total; ++c) t.cost(c) = 0.0;
  std::vector<double> col_cost(total, 0.0);
  if (!objective.empty()) {
    for (std::size_t j = 0; j < nv; ++j) {
      for (auto [col, s] : vars[j].cols) col_cost[col] += objective[j] * s;
    }
    for (std::size_t c = 0; c < total; ++c) t.cost(c) = col_cost[c];
    for (std::size_t r = 0; r < m; ++r) {
      double cb = col_cost[t.basis()[r]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c <= total; ++c) t.at(m, c) -= cb * t.at(r, c);
    }
  }
  auto status = run(first_art);
  if (status == Tableau::Step::Unbounded) return {LpStatus::Unbounded, {}, 0.0};

  std::vector<double> colval(total, 0.0);
  for (std::size_t r = 0; r < m; ++r) colval[t.basis()[r]] = t.rhs(r);
  LpResult res;
  res.status = LpStatus::Optimal;
  res.x.assign(nv, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    double v = vars[j].offset;
    for (auto [col, s] : vars[j].cols) v += s * colval[col];
    res.x[j] = v;
  }
  for (std::size_t r = 0; r < m; ++r)
    if (t.basis()[r] >= first_art && std::abs(t.rhs(r)) > kFeasTolerance)
      throw SolverFailure("lp: artificial variable left at a nonzero level");
  // Clamp round-off at finite bounds before verifying.
  for (std::size_t j = 0; j < nv; ++j) res.x[j] = std::clamp(res.x[j], sys.lower[j], sys.upper[j]);
  if (max_violation(sys, res.x) > kFeasTolerance) throw SolverFailure("lp: solution violates constraints beyond tolerance");
  if (!objective.empty())
    for (std::size_t j = 0; j < nv; ++j) res.objective += objective[j] * res.x[j];
  return res;
}

std::optional<std::vector<double>> solve_feasibility(const LinConstraintSystem& sys) {
  auto r = solve_lp(sys, {});
  if (r.status == LpStatus::Infeasible) return std::nullopt;
  return r.x;
}

}  // namespace shapetest
