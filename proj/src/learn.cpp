#include "shapetest/learn.hpp"

#include <limits>
#include <stdexcept>

namespace shapetest {

Pmf add1_learn(const SampleCounts& counts, const IntervalPartition& part) {
  if (!part.covers) throw std::invalid_argument("add1_learn: partition does not cover the domain");
  if (counts.n() != part.n()) throw std::invalid_argument("add1_learn: size mismatch");
  auto map = part.cell_map();
  const std::size_t b = part.num_cells();
  std::vector<std::uint64_t> cell(b, 0);
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < counts.n(); ++i) {
    cell[map[i]] += counts.counts[i];
    m += counts.counts[i];
  }
  const double denom = static_cast<double>(m) + static_cast<double>(b);
  Pmf q{std::vector<double>(counts.n()), part.num_axes() > 1 ? part.dims : std::vector<std::size_t>{}};
  for (std::size_t i = 0; i < counts.n(); ++i) {
    auto c = map[i];
    q.mass[i] = (static_cast<double>(cell[c]) + 1.0) / (denom * static_cast<double>(part.cell_size(c)));
  }
  return q;
}

std::vector<SampleCounts> axis_counts(const SampleCounts& grid) {
  if (grid.dims.size() < 2) throw std::invalid_argument("axis_counts: grid counts expected");
  std::vector<SampleCounts> out;
  std::size_t stride = grid.n();
  for (std::size_t a = 0; a < grid.dims.size(); ++a) {
    stride /= grid.dims[a];
    SampleCounts s;
    s.counts.assign(grid.dims[a], 0);
    for (std::size_t i = 0; i < grid.n(); ++i) s.counts[(i / stride) % grid.dims[a]] += grid.counts[i];
    s.m_nominal = grid.m_nominal;
    s.m_actual = grid.m_actual;
    out.push_back(std::move(s));
  }
  return out;
}

Pmf product_learn(const std::vector<SampleCounts>& axes) {
  if (axes.empty()) throw std::invalid_argument("product_learn: no axes");
  std::vector<Pmf> est;
  for (const auto& a : axes) {
    if (a.m_actual != axes[0].m_actual) throw std::invalid_argument("product_learn: axes disagree on m");
    est.push_back(add1_learn(a, singleton_partition(a.n())));
  }
  return tensor_product(est);
}

}  // namespace shapetest
