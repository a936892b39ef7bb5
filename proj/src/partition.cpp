#include "shapetest/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shapetest {

std::size_t IntervalPartition::n() const {
  std::size_t prod = 1;
  for (auto d : dims) prod *= d;
  return dims.empty() ? 0 : prod;
}

std::size_t IntervalPartition::num_cells() const {
  std::size_t prod = 1;
  for (const auto& a : axis_cells) prod *= a.size();
  return axis_cells.empty() ? 0 : prod;
}

std::size_t IntervalPartition::cell_size(std::size_t c) const {
  std::size_t size = 1;
  for (std::size_t a = axis_cells.size(); a-- > 0;) {
    const auto& cells = axis_cells[a];
    size *= cells[c % cells.size()].size();
    c /= cells.size();
  }
  return size;
}

std::vector<std::size_t> IntervalPartition::cell_map() const {
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> axis_map(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a) {
    axis_map[a].assign(dims[a], none);
    for (std::size_t c = 0; c < axis_cells[a].size(); ++c)
      for (std::size_t i = axis_cells[a][c].lo; i <= axis_cells[a][c].hi; ++i) axis_map[a][i] = c;
  }
  std::vector<std::size_t> out(n(), none);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    std::size_t rem = idx, cell = 0, mult = 1;
    bool inside = true;
    for (std::size_t a = dims.size(); a-- > 0;) {
      std::size_t coord = rem % dims[a];
      rem /= dims[a];
      std::size_t ac = axis_map[a][coord];
      if (ac == none) {
        inside = false;
        break;
      }
      cell += ac * mult;
      mult *= axis_cells[a].size();
    }
    if (inside) out[idx] = cell;
  }
  return out;
}

IntervalPartition partition_from_cells(std::size_t n, std::vector<Interval> cells) {
  IntervalPartition part;
  part.dims = {n};
  part.axis_cells = {std::move(cells)};
  std::size_t covered = 0;
  for (const auto& c : part.axis_cells[0]) covered += c.size();
  part.covers = covered == n;
  validate(part);
  return part;
}

IntervalPartition singleton_partition(std::size_t n) {
  std::vector<Interval> cells(n);
  for (std::size_t i = 0; i < n; ++i) cells[i] = {i, i};
  return partition_from_cells(n, std::move(cells));
}

void validate(const IntervalPartition& part) {
  if (part.dims.empty() || part.dims.size() != part.axis_cells.size())
    throw std::invalid_argument("partition: axis lists do not match dims");
  for (std::size_t a = 0; a < part.dims.size(); ++a) {
    std::size_t next = 0, covered = 0;
    for (const auto& c : part.axis_cells[a]) {
      if (c.lo > c.hi || c.hi >= part.dims[a]) throw std::invalid_argument("partition: bad interval");
      if (c.lo < next) throw std::invalid_argument("partition: intervals overlap or are out of order");
      next = c.hi + 1;
      covered += c.size();
    }
    if (part.covers && covered != part.dims[a]) throw std::invalid_argument("partition: does not cover its axis");
  }
}

std::size_t birge_cell_budget(std::size_t n, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("birge: gamma must be positive");
  if (n <= 1) return 1;
  double raw = std::ceil(2.0 * std::log(static_cast<double>(n)) / gamma);
  // Budgets beyond 2n only add singletons, so cap before converting.
  raw = std::min(raw, 2.0 * static_cast<double>(n) + 2.0);
  auto b = static_cast<std::size_t>(raw);
  if (b % 2) ++b;
  return std::max<std::size_t>(b, 2);
}

std::vector<std::size_t> birge_lengths(std::size_t b, double gamma) {
  std::vector<std::size_t> len;
  len.reserve(b);
  for (std::size_t j = 1; j <= b; ++j) {
    if (j <= b / 2) {
      len.push_back(1);
    } else {
      double x = 2.0 * std::pow(1.0 + gamma, static_cast<double>(j - b / 2));
      len.push_back(static_cast<std::size_t>(std::floor(x)));
    }
  }
  return len;
}

IntervalPartition birge_partition(std::size_t n, double gamma) {
  if (n == 0) throw std::invalid_argument("birge: n must be positive");
  std::size_t b = birge_cell_budget(n, gamma);
  double g = n > 1 ? 2.0 * std::log(static_cast<double>(n)) / static_cast<double>(b) : gamma;
  std::vector<Interval> cells;
  std::size_t pos = 0;
  for (std::size_t j = 1; pos < n; ++j) {
    std::size_t len = 1;
    if (j > b / 2) {
      len = static_cast<std::size_t>(std::floor(2.0 * std::pow(1.0 + g, static_cast<double>(j - b / 2))));
      len = std::max<std::size_t>(len, 1);
    }
    // Past the budget the final cell absorbs whatever remains.
    if (j >= b) len = n - pos;
    len = std::min(len, n - pos);
    cells.push_back({pos, pos + len - 1});
    pos += len;
  }
  return partition_from_cells(n, std::move(cells));
}

IntervalPartition birge_grid_partition(const std::vector<std::size_t>& dims, double gamma) {
  if (dims.empty()) throw std::invalid_argument("birge grid: no axes");
  for (auto d : dims)
    if (d != dims[0]) throw std::invalid_argument("birge grid: unequal axis sizes are not supported");
  auto axis = birge_partition(dims[0], gamma);
  IntervalPartition part;
  part.dims = dims;
  part.axis_cells.assign(dims.size(), axis.axis_cells[0]);
  return part;
}

double birge_gamma_for(double target_chi2, std::size_t d) {
  if (!(target_chi2 > 0.0) || d == 0) throw std::invalid_argument("birge gamma: bad target");
  return 0.5 * (std::pow(1.0 + target_chi2, 1.0 / static_cast<double>(d)) - 1.0);
}

IntervalPartition adaptive_mass_partition(const SampleCounts& counts, std::size_t b) {
  if (b < 1) throw std::invalid_argument("adaptive partition: b must be >= 1");
  if (counts.n() == 0 || counts.m_actual == 0) throw std::invalid_argument("adaptive partition: empty counts");
  const std::size_t n = counts.n();
  const double m = static_cast<double>(counts.m_actual);
  const double heavy = 1.0 / static_cast<double>(b);
  const double cap = 2.0 / static_cast<double>(b);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = static_cast<double>(counts.counts[i]) / m;

  std::vector<Interval> cells;
  bool open = false;
  std::size_t start = 0;
  double acc = 0.0;
  auto close = [&](std::size_t hi) {
    cells.push_back({start, hi});
    open = false;
    acc = 0.0;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (e[i] >= heavy) {
      if (open) close(i - 1);
      cells.push_back({i, i});
      continue;
    }
    if (open && acc + e[i] > cap) close(i - 1);
    if (!open) {
      open = true;
      start = i;
    }
    acc += e[i];
    if (acc >= heavy) close(i);
  }
  if (open) close(n - 1);
  return partition_from_cells(n, std::move(cells));
}

std::vector<double> cell_masses(const std::vector<double>& mass, const IntervalPartition& part) {
  if (mass.size() != part.n()) throw std::invalid_argument("cell masses: size mismatch");
  auto map = part.cell_map();
  std::vector<double> out(part.num_cells(), 0.0);
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (map[i] != std::numeric_limits<std::size_t>::max()) out[map[i]] += mass[i];
  return out;
}

Pmf flatten(const Pmf& p, const IntervalPartition& part) {
  if (!part.covers) throw std::invalid_argument("flatten: partition does not cover the domain");
  if (p.n() != part.n()) throw std::invalid_argument("flatten: size mismatch");
  auto map = part.cell_map();
  std::vector<double> cm(part.num_cells(), 0.0);
  for (std::size_t i = 0; i < p.n(); ++i) cm[map[i]] += p.mass[i];
  Pmf out{std::vector<double>(p.n()), p.dims};
  for (std::size_t i = 0; i < p.n(); ++i) out.mass[i] = cm[map[i]] / static_cast<double>(part.cell_size(map[i]));
  return out;
}

}  // namespace shapetest
