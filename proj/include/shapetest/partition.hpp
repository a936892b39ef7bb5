#pragma once

#include "shapetest/core.hpp"

namespace shapetest {

struct Interval {
  std::size_t lo = 0;  // inclusive
  std::size_t hi = 0;  // inclusive
  std::size_t size() const { return hi - lo + 1; }
  bool operator==(const Interval&) const = default;
};

// Ordered partition of [n] (one axis) or of a grid into products of per-axis
// intervals. Grid cells are numbered row-major over the per-axis cell lists.
struct IntervalPartition {
  std::vector<std::size_t> dims;                 // per-axis domain sizes
  std::vector<std::vector<Interval>> axis_cells;  // one list per axis
  bool covers = true;

  std::size_t n() const;
  std::size_t num_axes() const { return dims.size(); }
  std::size_t num_cells() const;
  const std::vector<Interval>& cells() const { return axis_cells.at(0); }
  // Number of domain points in cell c.
  std::size_t cell_size(std::size_t c) const;
  // Cell id of every domain point (row-major), or SIZE_MAX outside the cells.
  std::vector<std::size_t> cell_map() const;
};

IntervalPartition partition_from_cells(std::size_t n, std::vector<Interval> cells);
IntervalPartition singleton_partition(std::size_t n);
void validate(const IntervalPartition& part);

// Number of Birge cells b for the given gamma (even, >= 2 unless n == 1).
std::size_t birge_cell_budget(std::size_t n, double gamma);
// Unclipped Birge lengths for budget b and gamma.
std::vector<std::size_t> birge_lengths(std::size_t b, double gamma);
IntervalPartition birge_partition(std::size_t n, double gamma);
IntervalPartition birge_grid_partition(const std::vector<std::size_t>& dims, double gamma);
// gamma with (1 + 2 gamma)^d - 1 = target_chi2.
double birge_gamma_for(double target_chi2, std::size_t d);

IntervalPartition adaptive_mass_partition(const SampleCounts& counts, std::size_t b);

Pmf flatten(const Pmf& p, const IntervalPartition& part);
// Per-cell masses p(cell).
std::vector<double> cell_masses(const std::vector<double>& mass, const IntervalPartition& part);

}  // namespace shapetest
