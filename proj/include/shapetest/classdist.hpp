#pragma once

#include "shapetest/core.hpp"
#include "shapetest/partition.hpp"

namespace shapetest {

// TV distance from q (cellwise constant on part) to the monotone class.
// One axis uses the exact projection; grids solve an LP over cells.
double dist_to_monotone(const Pmf& q, const IntervalPartition& part);
double dist_to_monotone(const Pmf& q);

// TV distance from a 1-d q to the unimodal class, computed over the runs of
// constant mass in q.
double dist_to_unimodal(const Pmf& q);

// Reference LP formulations over cells (one LP per mode for unimodal).
double dist_to_monotone_lp(const Pmf& q, const IntervalPartition& part);
double dist_to_unimodal_lp(const Pmf& q, const IntervalPartition& part);

// Minimum TV from q to a class member on the simplex grid with spacing step.
// Monotone(1) and Unimodal use a dynamic program over the grid; other classes
// enumerate grid points and filter by is_member.
double brute_force_dist(const ClassId& c, const Pmf& q, double step);

// Cell values q(cell)/|cell| and sizes of a 1-d partition; throws when q is
// not constant on a cell within 1e-9.
void cell_values(const Pmf& q, const IntervalPartition& part, std::vector<double>& values,
                 std::vector<double>& sizes);

}  // namespace shapetest
