#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace shapetest {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEq, Eq };

struct LinConstraint {
  std::vector<std::pair<std::size_t, double>> coeffs;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

// Variables default to the free range (-inf, +inf).
struct LinConstraintSystem {
  std::size_t num_vars = 0;
  std::vector<LinConstraint> constraints;
  std::vector<double> lower;
  std::vector<double> upper;

  explicit LinConstraintSystem(std::size_t nv = 0) : num_vars(nv), lower(nv, -kInf), upper(nv, kInf) {}
  std::size_t add_var(double lo = -kInf, double hi = kInf);
  void add(std::vector<std::pair<std::size_t, double>> coeffs, Relation rel, double rhs);
};

// Raised when the simplex cannot produce a trustworthy answer.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

inline constexpr double kFeasTolerance = 1e-8;

// Dense two-phase simplex (Dantzig pricing, Bland fallback on stalls).
// Minimizes objective . x.
LpResult solve_lp(const LinConstraintSystem& sys, const std::vector<double>& objective);

// A point satisfying every constraint within 1e-8, or nullopt when infeasible.
std::optional<std::vector<double>> solve_feasibility(const LinConstraintSystem& sys);

// Largest violation of sys at x (0 when feasible).
double max_violation(const LinConstraintSystem& sys, const std::vector<double>& x);

}  // namespace shapetest
