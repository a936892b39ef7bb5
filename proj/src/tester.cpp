#include "shapetest/tester.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "shapetest/classdist.hpp"

namespace shapetest {

namespace {

constexpr std::size_t kBlock = 4096;
constexpr double kGateTolerance = 1e-9;

double term(std::uint64_t count, double mq) {
  double c = static_cast<double>(count);
  double d = c - mq;
  return (d * d - c) / mq;
}

void check_statistic_inputs(const SampleCounts& counts, const Pmf& q, const IndexSet& A) {
  if (counts.n() != q.n()) throw std::invalid_argument("chi2: counts and q differ in size");
  for (auto i : A) {
    if (i >= q.n()) throw std::invalid_argument("chi2: index out of range");
    if (!(q.mass[i] > 0.0)) throw std::invalid_argument("chi2: q vanishes on A");
  }
}

double q_mass(const Pmf& q, const IndexSet& A) {
  double s = 0.0;
  for (auto i : A) s += q.mass[i];
  return s;
}

TestVerdict verdict_from(double z, double threshold, const std::string& stage) {
  TestVerdict v;
  v.statistic = z;
  v.threshold = threshold;
  v.decision = z <= threshold ? Decision::Accept : Decision::Reject;
  v.stage = stage;
  return v;
}

TestVerdict reject_at(const std::string& stage) {
  TestVerdict v;
  v.decision = Decision::Reject;
  v.stage = stage;
  return v;
}

std::size_t domain_axes(const SampleSource& source) {
  auto dims = source.dims();
  return dims.empty() ? 1 : dims.size();
}

}  // namespace

TestConfig TestConfig::paper(double eps) {
  TestConfig cfg;
  cfg.eps = eps;
  return cfg;
}

TestConfig TestConfig::experiment(double eps) {
  TestConfig cfg;
  cfg.eps = eps;
  cfg.m_constant = 4.0;
  cfg.threshold_rule = ThresholdRule::Experiment;
  cfg.birge_constant = 1.0;
  cfg.learn_constant = 10.0;
  cfg.unimodal.removal_constant = 0.5;
  cfg.lcd.budget_constant = 1.0;
  cfg.lcd.pull_blocks = 2;
  cfg.mhr.b_over_eps_squared = false;
  cfg.mhr.budget_constant = 2.0;
  return cfg;
}

void TestConfig::validate() const {
  if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("test config: eps must lie in (0, 1]");
  for (double c : {m_constant, threshold_constant, cutoff_constant, birge_constant, learn_constant,
                   unimodal.b_constant, unimodal.partition_constant, unimodal.estimate_constant,
                   unimodal.ratio_constant, unimodal.removal_constant})
    if (!(c > 0.0)) throw std::invalid_argument("test config: constants must be positive");
}

std::uint64_t chi2_budget(std::size_t n, const TestConfig& cfg) {
  if (cfg.chi2_samples > 0) return cfg.chi2_samples;
  return static_cast<std::uint64_t>(
      std::ceil(cfg.m_constant * std::sqrt(static_cast<double>(n)) / (cfg.eps * cfg.eps)));
}

double chi2_threshold(const TestConfig& cfg, double m, std::size_t n) {
  double me2 = m * cfg.eps * cfg.eps;
  if (cfg.threshold_rule == ThresholdRule::Experiment) return 2.0 * me2 + std::sqrt(2.0 * static_cast<double>(n));
  return cfg.threshold_constant * me2;
}

IndexSet cutoff_set(const Pmf& q, const TestConfig& cfg) {
  const double cut = cfg.cutoff_constant * cfg.eps / static_cast<double>(q.n());
  IndexSet A;
  for (std::size_t i = 0; i < q.n(); ++i)
    if (q.mass[i] >= cut && q.mass[i] > 0.0) A.push_back(i);
  return A;
}

double chi2_statistic_serial(const SampleCounts& counts, const Pmf& q, const IndexSet& A) {
  check_statistic_inputs(counts, q, A);
  const double m = static_cast<double>(counts.m_nominal);
  if (m == 0.0) return -static_cast<double>(A.size());
  double z = 0.0;
  for (auto i : A) z += term(counts.counts[i], m * q.mass[i]);
  return z;
}

double chi2_statistic(const SampleCounts& counts, const Pmf& q, const IndexSet& A) {
  check_statistic_inputs(counts, q, A);
  const double m = static_cast<double>(counts.m_nominal);
  if (m == 0.0) return -static_cast<double>(A.size());
  const std::size_t blocks = (A.size() + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    std::size_t hi = std::min(A.size(), lo + kBlock);
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += term(counts.counts[A[k]], m * q.mass[A[k]]);
    partial[static_cast<std::size_t>(b)] = s;
  }
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

std::vector<double> chi2_cell_statistics(const SampleCounts& counts, const Pmf& q, const IndexSet& A,
                                         const IntervalPartition& cells) {
  check_statistic_inputs(counts, q, A);
  if (cells.num_axes() != 1 || cells.n() != q.n()) throw std::invalid_argument("chi2 cells: 1-d partition of q expected");
  auto map = cells.cell_map();
  const double m = static_cast<double>(counts.m_nominal);
  std::vector<double> z(cells.num_cells(), 0.0);
  for (auto i : A) {
    auto c = map[i];
    if (c == SIZE_MAX) continue;
    z[c] += m == 0.0 ? -1.0 : term(counts.counts[i], m * q.mass[i]);
  }
  return z;
}

TestVerdict base_test(const SampleCounts& counts, const Pmf& q, const TestConfig& cfg) {
  cfg.validate();
  auto A = cutoff_set(q, cfg);
  const double m = static_cast<double>(counts.m_nominal);
  auto v = verdict_from(chi2_statistic(counts, q, A), chi2_threshold(cfg, m, q.n()), "chi2");
  v.excluded_mass = std::max(0.0, 1.0 - q_mass(q, A));
  v.detail["m"] = m;
  v.detail["support"] = static_cast<double>(A.size());
  if (counts.m_nominal < chi2_budget(q.n(), cfg)) v.detail["under_budget"] = 1.0;
  return v;
}

TestVerdict robust_identity_test(const SampleCounts& counts, const Pmf& q, double eps, const TestConfig& cfg) {
  TestConfig c = cfg;
  c.eps = eps;
  auto v = base_test(counts, q, c);
  v.stage = "identity";
  return v;
}

TestVerdict restricted_test(const SampleCounts& counts, const Pmf& q, const IndexSet& S, const TestConfig& cfg) {
  cfg.validate();
  if (S.empty()) throw std::invalid_argument("restricted test: empty S");
  if (!std::is_sorted(S.begin(), S.end())) throw std::invalid_argument("restricted test: S must be sorted");
  if (!(q_mass(q, S) > 0.0)) throw std::invalid_argument("restricted test: q(S) must be positive");
  auto full = cutoff_set(q, cfg);
  IndexSet A;
  std::set_intersection(full.begin(), full.end(), S.begin(), S.end(), std::back_inserter(A));
  const double m = static_cast<double>(counts.m_nominal);
  auto v = verdict_from(chi2_statistic(counts, q, A), chi2_threshold(cfg, m, q.n()), "chi2");
  v.excluded_mass = std::max(0.0, 1.0 - q_mass(q, A));
  v.detail["m"] = m;
  v.detail["support"] = static_cast<double>(A.size());
  if (counts.m_nominal < chi2_budget(q.n(), cfg)) v.detail["under_budget"] = 1.0;
  return v;
}

TestVerdict max_removal_test(const SampleCounts& counts, const Pmf& q, const IntervalPartition& cells, int t,
                             const TestConfig& cfg) {
  cfg.validate();
  if (t < 0) throw std::invalid_argument("max removal: t must be non-negative");
  const std::size_t L = cells.num_cells();
  if (L < static_cast<std::size_t>(t) + 1) throw std::invalid_argument("max removal: fewer than t + 1 cells");
  auto A = cutoff_set(q, cfg);
  auto z = chi2_cell_statistics(counts, q, A, cells);
  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z[a] > z[b]; });
  std::vector<char> dropped(L, 0);
  for (int k = 0; k < t; ++k) dropped[order[static_cast<std::size_t>(k)]] = 1;
  double sum = 0.0;
  for (std::size_t c = 0; c < L; ++c)
    if (!dropped[c]) sum += z[c];
  const double m = static_cast<double>(counts.m_nominal);
  auto v = verdict_from(sum, chi2_threshold(cfg, m, q.n()), "max_removal");
  auto map = cells.cell_map();
  double kept = 0.0;
  for (auto i : A)
    if (map[i] != SIZE_MAX && !dropped[map[i]]) kept += q.mass[i];
  v.excluded_mass = std::max(0.0, 1.0 - kept);
  v.detail["m"] = m;
  v.detail["cells"] = static_cast<double>(L);
  if (t > 0) {
    v.detail["dropped_cell"] = static_cast<double>(order[0]);
    v.detail["dropped_statistic"] = z[order[0]];
  }
  return v;
}

TestVerdict test_monotone(SampleSource& source, const TestConfig& cfg) {
  cfg.validate();
  const std::size_t d = domain_axes(source);
  if (d > 3) throw std::invalid_argument("test_monotone: only d in {1, 2, 3} is supported");
  const std::size_t n = source.n();
  const double gamma = birge_gamma_for(cfg.birge_constant * cfg.eps * cfg.eps, d);
  auto part = d == 1 ? birge_partition(n, gamma) : birge_grid_partition(source.dims(), gamma);
  const std::size_t L = part.num_cells();
  const auto m_learn =
      static_cast<std::uint64_t>(std::ceil(cfg.learn_constant * static_cast<double>(L) / (cfg.eps * cfg.eps)));
  Pmf q = add1_learn(source.take(m_learn, false), part);
  const double dist = dist_to_monotone(q, part);
  TestVerdict v;
  if (dist >= cfg.eps / 2.0 - kGateTolerance) {
    v = reject_at("property");
  } else {
    v = base_test(source.take(chi2_budget(n, cfg), cfg.poissonized), q, cfg);
  }
  v.detail["cells"] = static_cast<double>(L);
  v.detail["m_learn"] = static_cast<double>(m_learn);
  v.detail["dist"] = dist;
  return v;
}

TestVerdict test_unimodal(SampleSource& source, const TestConfig& cfg) {
  cfg.validate();
  if (domain_axes(source) != 1) throw std::invalid_argument("test_unimodal: one axis expected");
  const std::size_t n = source.n();
  const double eps = cfg.eps;
  if (!(eps >= std::pow(static_cast<double>(n), -0.25) * (1.0 - 1e-12)))
    throw std::invalid_argument("test_unimodal: eps must be at least n^(-1/4)");
  const auto& uc = cfg.unimodal;
  const double ln_n = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  const auto b = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(uc.b_constant * ln_n / (eps * eps))));
  const double blogb = static_cast<double>(b) * std::log(static_cast<double>(std::max<std::size_t>(b, 2)));
  const auto m_part = static_cast<std::uint64_t>(std::ceil(uc.partition_constant * blogb));
  const auto m_est = static_cast<std::uint64_t>(std::ceil(uc.estimate_constant * blogb / (eps * eps)));

  auto part = adaptive_mass_partition(source.take(m_part, false), b);
  Pmf q = add1_learn(source.take(m_est, false), part);
  const double dist = dist_to_unimodal(q);
  const auto& cells = part.cells();
  const std::size_t L = cells.size();

  auto finish = [&](TestVerdict v) {
    v.detail["b"] = static_cast<double>(b);
    v.detail["cells"] = static_cast<double>(L);
    v.detail["dist"] = dist;
    return v;
  };
  if (dist >= eps / 2.0 - kGateTolerance) return finish(reject_at("property"));

  std::vector<double> mass(L), value(L);
  for (std::size_t j = 0; j < L; ++j) {
    mass[j] = 0.0;
    for (std::size_t i = cells[j].lo; i <= cells[j].hi; ++i) mass[j] += q.mass[i];
    value[j] = mass[j] / static_cast<double>(cells[j].size());
  }
  const double r = uc.ratio_constant * eps;
  const double light = 1.0 / (2.0 * static_cast<double>(b));
  const double low = cfg.cutoff_constant * eps / static_cast<double>(n);
  std::vector<Interval> kept;
  double kept_mass = 0.0;
  for (std::size_t j = 0; j < L; ++j) {
    bool remove = mass[j] <= light || value[j] < low;
    for (std::size_t nb : {j - 1, j + 1}) {
      if (remove || nb >= L || cells[j].size() == 1) continue;  // j - 1 wraps for the first cell
      remove = !(value[j] > (1.0 - r) * value[nb] && value[j] < (1.0 + r) * value[nb]);
    }
    if (remove) continue;
    kept.push_back(cells[j]);
    kept_mass += mass[j];
  }
  if (kept.empty() || kept_mass < 1.0 - uc.removal_constant * eps) {
    auto v = reject_at("removal");
    v.excluded_mass = 1.0 - kept_mass;
    return finish(v);
  }
  auto kept_part = partition_from_cells(n, kept);
  int t = kept.size() > 1 ? 1 : 0;
  auto v = max_removal_test(source.take(chi2_budget(n, cfg), cfg.poissonized), q, kept_part, t, cfg);
  v.detail["kept_cells"] = static_cast<double>(kept.size());
  return finish(v);
}

namespace {

TestVerdict learned_restricted(SampleSource& source, const TestConfig& cfg, const LearnOutcome& out,
                               std::uint64_t m_learn) {
  TestVerdict v;
  if (out.rejected || out.support.empty()) {
    v = reject_at("learner");
  } else {
    v = restricted_test(source.take(chi2_budget(source.n(), cfg), cfg.poissonized), out.q, out.support, cfg);
  }
  for (const auto& [k, x] : out.detail) v.detail["learner_" + k] = x;
  v.detail["m_learn"] = static_cast<double>(m_learn);
  return v;
}

}  // namespace

TestVerdict test_logconcave(SampleSource& source, const TestConfig& cfg) {
  cfg.validate();
  if (domain_axes(source) != 1) throw std::invalid_argument("test_logconcave: one axis expected");
  const auto m_learn = lcd_sample_budget(cfg.eps, cfg.lcd);
  auto out = lcd_learn(source.take(m_learn, false), cfg.eps, cfg.lcd);
  return learned_restricted(source, cfg, out, m_learn);
}

TestVerdict test_mhr(SampleSource& source, const TestConfig& cfg) {
  cfg.validate();
  if (domain_axes(source) != 1) throw std::invalid_argument("test_mhr: one axis expected");
  const auto m_learn = mhr_sample_budget(source.n(), cfg.eps, cfg.mhr);
  auto out = mhr_learn(source.take(m_learn, false), cfg.eps, cfg.mhr);
  return learned_restricted(source, cfg, out, m_learn);
}

TestVerdict test_independence(SampleSource& source, const TestConfig& cfg) {
  cfg.validate();
  auto dims = source.dims();
  if (dims.size() < 2) throw std::invalid_argument("test_independence: at least two axes expected");
  for (auto d : dims)
    if (d == 0) throw std::invalid_argument("test_independence: empty axis");
  const double sum_n = std::accumulate(dims.begin(), dims.end(), 0.0,
                                       [](double s, std::size_t d) { return s + static_cast<double>(d); });
  const auto m_learn = static_cast<std::uint64_t>(std::ceil(cfg.learn_constant * sum_n / (cfg.eps * cfg.eps)));
  Pmf q = product_learn(axis_counts(source.take(m_learn, false)));
  auto v = base_test(source.take(chi2_budget(source.n(), cfg), cfg.poissonized), q, cfg);
  v.detail["m_learn"] = static_cast<double>(m_learn);
  return v;
}

TestVerdict run_test(const ClassId& c, SampleSource& source, const TestConfig& cfg) {
  switch (c.kind) {
    case ClassKind::Monotone: {
      if (static_cast<std::size_t>(c.d) != domain_axes(source))
        throw std::invalid_argument("run_test: Monotone(d) does not match the sample dimensions");
      return test_monotone(source, cfg);
    }
    case ClassKind::Unimodal: return test_unimodal(source, cfg);
    case ClassKind::LogConcave: return test_logconcave(source, cfg);
    case ClassKind::MHR: return test_mhr(source, cfg);
    case ClassKind::Product: return test_independence(source, cfg);
    case ClassKind::SingleTarget: {
      if (!c.target) throw std::invalid_argument("run_test: identity test needs a target");
      cfg.validate();
      if (c.target->n() != source.n()) throw std::invalid_argument("run_test: target and samples differ in size");
      return robust_identity_test(source.take(chi2_budget(source.n(), cfg), cfg.poissonized), *c.target, cfg.eps,
                                  cfg);
    }
  }
  throw std::invalid_argument("run_test: unknown class");
}

}  // namespace shapetest
