#pragma once

#include "shapetest/core.hpp"
#include "shapetest/learn.hpp"
#include "shapetest/partition.hpp"
#include "shapetest/rng.hpp"
#include "shapetest/sampling.hpp"

namespace shapetest {

// Scaled: Accept iff Z <= threshold_constant * m * eps^2.
// Experiment: Accept iff Z <= 2 m eps^2 + sqrt(2 n).
enum class ThresholdRule { Scaled, Experiment };

struct UnimodalConfig {
  double b_constant = 1.0;          // b = b_constant * ln(n) / eps^2
  double partition_constant = 10.0;  // partition_constant * b ln b samples
  double estimate_constant = 12.0;  // estimate_constant * b ln b / eps^2 samples
  double ratio_constant = 1.0;      // neighbour window (1 +- ratio_constant * eps)
  double removal_constant = 1.0 / 25.0;  // Reject if kept mass < 1 - removal_constant * eps
};

struct TestConfig {
  double eps = 0.1;
  double m_constant = 20000.0;       // m = m_constant * sqrt(n) / eps^2
  double threshold_constant = 0.1;
  double cutoff_constant = 1.0 / 50.0;  // A = {i : q_i >= cutoff_constant * eps / n}
  RngSeed seed = 0;
  bool poissonized = true;
  std::uint64_t chi2_samples = 0;  // when nonzero, replaces the chi-squared budget
  ThresholdRule threshold_rule = ThresholdRule::Scaled;
  double birge_constant = 1e-3;   // Birge flattening target birge_constant * eps^2
  double learn_constant = 1000.0;  // add-1 budgets learn_constant * cells / eps^2
  UnimodalConfig unimodal;
  LcdConfig lcd;
  MhrConfig mhr;

  static TestConfig paper(double eps);
  static TestConfig experiment(double eps);
  void validate() const;
};

// Samples for the chi-squared stage over a domain of size n.
std::uint64_t chi2_budget(std::size_t n, const TestConfig& cfg);
double chi2_threshold(const TestConfig& cfg, double m, std::size_t n);
// Indices with q_i >= cutoff_constant * eps / n.
IndexSet cutoff_set(const Pmf& q, const TestConfig& cfg);

// Z = sum_{i in A} ((N_i - m q_i)^2 - N_i) / (m q_i) with m = counts.m_nominal.
// The parallel version sums fixed-size blocks, so the result does not depend
// on the thread count.
double chi2_statistic(const SampleCounts& counts, const Pmf& q, const IndexSet& A);
double chi2_statistic_serial(const SampleCounts& counts, const Pmf& q, const IndexSet& A);
// Per-cell statistics over A restricted to each cell of a 1-d partition.
std::vector<double> chi2_cell_statistics(const SampleCounts& counts, const Pmf& q, const IndexSet& A,
                                         const IntervalPartition& cells);

TestVerdict base_test(const SampleCounts& counts, const Pmf& q, const TestConfig& cfg);
TestVerdict robust_identity_test(const SampleCounts& counts, const Pmf& q, double eps, const TestConfig& cfg);
TestVerdict restricted_test(const SampleCounts& counts, const Pmf& q, const IndexSet& S, const TestConfig& cfg);
// Drops the t largest per-cell statistics (lowest index first on ties).
TestVerdict max_removal_test(const SampleCounts& counts, const Pmf& q, const IntervalPartition& cells, int t,
                             const TestConfig& cfg);

// End-to-end testers. Each stage draws fresh samples from the source.
TestVerdict test_monotone(SampleSource& source, const TestConfig& cfg);
TestVerdict test_unimodal(SampleSource& source, const TestConfig& cfg);
TestVerdict test_logconcave(SampleSource& source, const TestConfig& cfg);
TestVerdict test_mhr(SampleSource& source, const TestConfig& cfg);
TestVerdict test_independence(SampleSource& source, const TestConfig& cfg);
// Dispatch on the class; SingleTarget runs the robust identity test.
TestVerdict run_test(const ClassId& c, SampleSource& source, const TestConfig& cfg);

}  // namespace shapetest
