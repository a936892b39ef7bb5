#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace shapetest {

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kMemberTolerance = 1e-12;

// Probability mass function over [n] or a row-major grid with the given dims.
struct Pmf {
  std::vector<double> mass;
  std::vector<std::size_t> dims;  // empty for a plain 1-d domain

  std::size_t n() const { return mass.size(); }
  std::size_t num_axes() const { return dims.empty() ? 1 : dims.size(); }
  std::vector<std::size_t> shape() const;
};

// Throws std::invalid_argument when p breaks the Pmf invariants.
void validate(const Pmf& p);
Pmf make_pmf(std::vector<double> mass, std::vector<std::size_t> dims = {});
Pmf uniform_pmf(std::size_t n);
Pmf point_mass(std::size_t n, std::size_t at);
// Divides by the total; throws if the total is not positive.
Pmf renormalized(std::vector<double> mass, std::vector<std::size_t> dims = {});

struct SampleCounts {
  std::vector<std::uint64_t> counts;
  std::uint64_t m_nominal = 0;
  std::uint64_t m_actual = 0;
  std::vector<std::size_t> dims;

  std::size_t n() const { return counts.size(); }
};

SampleCounts make_counts(std::vector<std::uint64_t> counts, std::vector<std::size_t> dims = {});

enum class ClassKind { Monotone, Unimodal, LogConcave, MHR, Product, SingleTarget };

struct ClassId {
  ClassKind kind = ClassKind::Monotone;
  int d = 1;
  std::vector<std::size_t> dims;
  std::shared_ptr<const Pmf> target;

  static ClassId monotone(int d = 1);
  static ClassId unimodal() { return {ClassKind::Unimodal, 1, {}, nullptr}; }
  static ClassId log_concave() { return {ClassKind::LogConcave, 1, {}, nullptr}; }
  static ClassId mhr() { return {ClassKind::MHR, 1, {}, nullptr}; }
  static ClassId product(std::vector<std::size_t> dims);
  static ClassId single_target(Pmf q);
};

std::string class_name(const ClassId& c);

enum class Decision { Accept, Reject };

struct TestVerdict {
  Decision decision = Decision::Accept;
  double statistic = std::numeric_limits<double>::quiet_NaN();
  double threshold = std::numeric_limits<double>::quiet_NaN();
  double excluded_mass = 0.0;
  std::string stage;
  std::map<std::string, double> detail;

  bool accepted() const { return decision == Decision::Accept; }
};

using IndexSet = std::vector<std::size_t>;

double tv_distance(const Pmf& p, const Pmf& q);
double chi2_distance(const Pmf& p, const Pmf& q, const std::optional<IndexSet>& subset = std::nullopt);
double kolmogorov_distance(const Pmf& p, const Pmf& q);
double chi2_tensor(const std::vector<double>& axis_chi2);
bool is_member(const ClassId& c, const Pmf& p);

// Marginal of a grid pmf along one axis.
std::vector<double> marginal(const Pmf& p, std::size_t axis);
// Outer product of per-axis pmfs, row-major.
Pmf tensor_product(const std::vector<Pmf>& axes);

}  // namespace shapetest
