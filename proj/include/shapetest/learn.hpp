#pragma once

#include <map>
#include <string>

#include "shapetest/core.hpp"
#include "shapetest/partition.hpp"

namespace shapetest {

struct LearnOutcome {
  Pmf q;
  IndexSet support;  // sorted
  bool rejected = false;
  std::map<std::string, double> detail;
};

// Laplace smoothing per cell, spread evenly within the cell.
Pmf add1_learn(const SampleCounts& counts, const IntervalPartition& part);

// Marginal counts of a grid sample along every axis.
std::vector<SampleCounts> axis_counts(const SampleCounts& grid);
// Per-axis add-1 estimates with singleton cells, tensored.
Pmf product_learn(const std::vector<SampleCounts>& axes);

struct LcdConfig {
  double budget_constant = 124.3;  // m >= budget_constant / eps^5
  double norm_slack = 4.0;       // accept |log Z| <= log(1 + norm_slack * eps)
  std::size_t pull_blocks = 4;   // fitting blocks per interval
};

std::uint64_t lcd_sample_budget(double eps, const LcdConfig& cfg = {});
LearnOutcome lcd_learn(const SampleCounts& counts, double eps, const LcdConfig& cfg = {});

struct MhrConfig {
  double budget_constant = 1.0;  // m >= budget_constant * b ln(b) / eps^2
  double b_constant = 1.0;
  bool b_over_eps_squared = true;  // b = C ln(n/eps)/eps^2, else C ln(n/eps)/eps
  double tail_constant = 1.0;      // each ignored tail carries tail_constant * eps
  double heavy_band_scale = 1.0;   // heavy survival band (1 +- scale * eps / 2b), widened by the DKW radius
  double kappa_constant = 2.0;     // light difference band (1 +- kappa_constant * eps)
  double ratio_constant = 1.0;     // neighbour ratio window (1 +- ratio_constant * eps)
};

std::uint64_t mhr_sample_budget(std::size_t n, double eps, const MhrConfig& cfg = {});
std::size_t mhr_cell_budget(std::size_t n, double eps, const MhrConfig& cfg = {});
LearnOutcome mhr_learn(const SampleCounts& counts, double eps, const MhrConfig& cfg = {});

}  // namespace shapetest
