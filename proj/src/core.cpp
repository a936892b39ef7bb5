#include "shapetest/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shapetest {

std::vector<std::size_t> Pmf::shape() const {
  if (dims.empty()) return {mass.size()};
  return dims;
}

void validate(const Pmf& p) {
  if (p.mass.empty()) throw std::invalid_argument("pmf: empty domain");
  if (!p.dims.empty()) {
    std::size_t prod = 1;
    for (auto d : p.dims) {
      if (d == 0) throw std::invalid_argument("pmf: zero-length axis");
      prod *= d;
    }
    if (prod != p.mass.size()) throw std::invalid_argument("pmf: dims do not match mass length");
  }
  double total = 0.0;
  for (double x : p.mass) {
    if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("pmf: negative or non-finite mass");
    total += x;
  }
  if (std::abs(total - 1.0) > kNormTolerance) throw std::invalid_argument("pmf: masses do not sum to 1");
}

Pmf make_pmf(std::vector<double> mass, std::vector<std::size_t> dims) {
  Pmf p{std::move(mass), std::move(dims)};
  validate(p);
  return p;
}

Pmf uniform_pmf(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_pmf: n must be positive");
  return Pmf{std::vector<double>(n, 1.0 / static_cast<double>(n)), {}};
}

Pmf point_mass(std::size_t n, std::size_t at) {
  if (at >= n) throw std::invalid_argument("point_mass: index out of range");
  Pmf p{std::vector<double>(n, 0.0), {}};
  p.mass[at] = 1.0;
  return p;
}

Pmf renormalized(std::vector<double> mass, std::vector<std::size_t> dims) {
  double total = 0.0;
  for (double x : mass) {
    if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("renormalize: negative or non-finite mass");
    total += x;
  }
  if (!(total > 0.0)) throw std::invalid_argument("renormalize: zero total mass");
  for (double& x : mass) x /= total;
  return make_pmf(std::move(mass), std::move(dims));
}

SampleCounts make_counts(std::vector<std::uint64_t> counts, std::vector<std::size_t> dims) {
  SampleCounts s;
  s.m_actual = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  s.m_nominal = s.m_actual;
  s.counts = std::move(counts);
  s.dims = std::move(dims);
  return s;
}

ClassId ClassId::monotone(int d) {
  if (d < 1) throw std::invalid_argument("Monotone(d) requires d >= 1");
  return {ClassKind::Monotone, d, {}, nullptr};
}

ClassId ClassId::product(std::vector<std::size_t> dims) {
  if (dims.size() < 2) throw std::invalid_argument("Product requires at least two axes");
  return {ClassKind::Product, static_cast<int>(dims.size()), std::move(dims), nullptr};
}

ClassId ClassId::single_target(Pmf q) {
  validate(q);
  return {ClassKind::SingleTarget, 1, {}, std::make_shared<const Pmf>(std::move(q))};
}

std::string class_name(const ClassId& c) {
  switch (c.kind) {
    case ClassKind::Monotone: return "monotone";
    case ClassKind::Unimodal: return "unimodal";
    case ClassKind::LogConcave: return "logconcave";
    case ClassKind::MHR: return "mhr";
    case ClassKind::Product: return "independence";
    case ClassKind::SingleTarget: return "identity";
  }
  return "unknown";
}

namespace {

void require_same_size(const Pmf& p, const Pmf& q) {
  if (p.n() != q.n()) throw std::invalid_argument("dimension mismatch");
}

}  // namespace

double tv_distance(const Pmf& p, const Pmf& q) {
  require_same_size(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) s += std::abs(p.mass[i] - q.mass[i]);
  return 0.5 * s;
}

double chi2_distance(const Pmf& p, const Pmf& q, const std::optional<IndexSet>& subset) {
  require_same_size(p, q);
  auto term = [&](std::size_t i) {
    if (i >= q.n()) throw std::invalid_argument("chi2: index out of range");
    if (!(q.mass[i] > 0.0)) throw std::invalid_argument("chi2: zero q inside the summation set");
    double d = p.mass[i] - q.mass[i];
    return d * d / q.mass[i];
  };
  double s = 0.0;
  if (subset) {
    for (auto i : *subset) s += term(i);
  } else {
    for (std::size_t i = 0; i < p.n(); ++i) s += term(i);
  }
  return s;
}

double kolmogorov_distance(const Pmf& p, const Pmf& q) {
  require_same_size(p, q);
  double fp = 0.0, fq = 0.0, best = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    fp += p.mass[i];
    fq += q.mass[i];
    best = std::max(best, std::abs(fp - fq));
  }
  return best;
}

double chi2_tensor(const std::vector<double>& axis_chi2) {
  double prod = 1.0;
  for (double x : axis_chi2) {
    if (!(x >= 0.0)) throw std::invalid_argument("chi2_tensor: negative input");
    prod *= 1.0 + x;
  }
  return prod - 1.0;
}

std::vector<double> marginal(const Pmf& p, std::size_t axis) {
  auto shape = p.shape();
  if (axis >= shape.size()) throw std::invalid_argument("marginal: axis out of range");
  std::size_t stride = 1;
  for (std::size_t a = axis + 1; a < shape.size(); ++a) stride *= shape[a];
  std::vector<double> out(shape[axis], 0.0);
  for (std::size_t i = 0; i < p.n(); ++i) out[(i / stride) % shape[axis]] += p.mass[i];
  return out;
}

Pmf tensor_product(const std::vector<Pmf>& axes) {
  if (axes.empty()) throw std::invalid_argument("tensor_product: no axes");
  std::vector<double> mass{1.0};
  std::vector<std::size_t> dims;
  for (const auto& a : axes) {
    std::vector<double> next;
    next.reserve(mass.size() * a.n());
    for (double x : mass)
      for (double y : a.mass) next.push_back(x * y);
    mass = std::move(next);
    dims.push_back(a.n());
  }
  if (dims.size() == 1) dims.clear();
  return Pmf{std::move(mass), std::move(dims)};
}

namespace {

bool is_monotone_grid(const Pmf& p, int d) {
  auto shape = p.shape();
  if (d > 1 && static_cast<int>(shape.size()) != d)
    throw std::invalid_argument("is_member: Monotone(d) needs a pmf with d axes");
  std::size_t stride = 1;
  for (std::size_t axis = shape.size(); axis-- > 0;) {
    for (std::size_t i = 0; i < p.n(); ++i) {
      if ((i / stride) % shape[axis] + 1 == shape[axis]) continue;
      if (p.mass[i + stride] > p.mass[i] + kMemberTolerance) return false;
    }
    stride *= shape[axis];
  }
  return true;
}

bool is_unimodal(const std::vector<double>& f) {
  bool descending = false;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    if (!descending) {
      if (f[i + 1] < f[i] - kMemberTolerance) descending = true;
    } else if (f[i + 1] > f[i] + kMemberTolerance) {
      return false;
    }
  }
  return true;
}

bool is_log_concave(const std::vector<double>& f) {
  std::size_t lo = 0, hi = f.size();
  while (lo < hi && f[lo] <= 0.0) ++lo;
  while (hi > lo && f[hi - 1] <= 0.0) --hi;
  for (std::size_t i = lo; i < hi; ++i)
    if (f[i] <= 0.0) return false;
  for (std::size_t i = lo + 1; i + 1 < hi; ++i)
    if (f[i - 1] * f[i + 1] > f[i] * f[i] + kMemberTolerance) return false;
  return is_unimodal(f);
}

bool is_mhr(const std::vector<double>& f) {
  // Survival S_i = sum_{j>i} f_j from a suffix sum; hazard f_i / S_i.
  std::size_t n = f.size();
  std::vector<double> surv(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    surv[i] = acc;
    acc += f[i];
  }
  double prev = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (surv[i] <= kMemberTolerance) break;
    double h = f[i] / surv[i];
    if (h < prev - kMemberTolerance) return false;
    prev = h;
  }
  return true;
}

bool is_product(const Pmf& p, const std::vector<std::size_t>& dims) {
  auto shape = p.shape();
  if (shape.size() < 2) throw std::invalid_argument("is_member: Product needs a grid pmf");
  if (!dims.empty() && dims != shape) throw std::invalid_argument("is_member: Product dims mismatch");
  std::vector<Pmf> margs;
  for (std::size_t a = 0; a < shape.size(); ++a) margs.push_back(Pmf{marginal(p, a), {}});
  Pmf prod = tensor_product(margs);
  for (std::size_t i = 0; i < p.n(); ++i)
    if (std::abs(prod.mass[i] - p.mass[i]) > kMemberTolerance) return false;
  return true;
}

}  // namespace

bool is_member(const ClassId& c, const Pmf& p) {
  validate(p);
  switch (c.kind) {
    case ClassKind::Monotone:
      if (c.d > 1 && p.dims.empty()) throw std::invalid_argument("is_member: dims missing for Monotone(d>1)");
      return is_monotone_grid(p, c.d);
    case ClassKind::Unimodal: return is_unimodal(p.mass);
    case ClassKind::LogConcave: return is_log_concave(p.mass);
    case ClassKind::MHR: return is_mhr(p.mass);
    case ClassKind::Product:
      if (p.dims.empty()) throw std::invalid_argument("is_member: dims missing for Product");
      return is_product(p, c.dims);
    case ClassKind::SingleTarget:
      if (!c.target) throw std::invalid_argument("is_member: SingleTarget without a target");
      return tv_distance(p, *c.target) <= kMemberTolerance;
  }
  return false;
}

}  // namespace shapetest
