#include "shapetest/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "shapetest/classdist.hpp"

namespace shapetest {

namespace {

// Inverse-CDF draws; cheaper than one binomial per symbol when m is small.
void categorical_fill(const Pmf& p, std::uint64_t m, Rng& rng, std::vector<std::uint64_t>& counts) {
  const std::size_t n = p.n();
  std::vector<double> cdf(n);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += p.mass[i];
    cdf[i] = acc;
    if (p.mass[i] > 0.0) last = i;
  }
  std::uniform_real_distribution<double> unif(0.0, acc);
  for (std::uint64_t s = 0; s < m; ++s) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), unif(rng));
    std::size_t idx = it == cdf.end() ? last : static_cast<std::size_t>(it - cdf.begin());
    ++counts[idx];
  }
}

// Sequential conditional binomials.
void binomial_fill(const Pmf& p, std::uint64_t m, Rng& rng, std::vector<std::uint64_t>& counts) {
  const std::size_t n = p.n();
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + p.mass[i];
  std::uint64_t left = m;
  for (std::size_t i = 0; i < n && left > 0; ++i) {
    if (p.mass[i] <= 0.0) continue;
    double ratio = suffix[i] > 0.0 ? std::min(1.0, p.mass[i] / suffix[i]) : 1.0;
    std::uint64_t k = left;
    if (ratio < 1.0) {
      std::binomial_distribution<std::uint64_t> bin(left, ratio);
      k = bin(rng);
    }
    counts[i] = k;
    left -= k;
  }
  // Round-off can leave a remainder; give it to the last supported symbol.
  if (left > 0) {
    for (std::size_t i = n; i-- > 0;) {
      if (p.mass[i] > 0.0) {
        counts[i] += left;
        break;
      }
    }
  }
}

void multinomial_fill(const Pmf& p, std::uint64_t m, Rng& rng, std::vector<std::uint64_t>& counts) {
  if (m < 8 * static_cast<std::uint64_t>(p.n()))
    categorical_fill(p, m, rng, counts);
  else
    binomial_fill(p, m, rng, counts);
}

}  // namespace

SampleCounts draw(const Pmf& p, std::uint64_t m, RngSeed seed) {
  validate(p);
  SampleCounts out;
  out.counts.assign(p.n(), 0);
  out.dims = p.dims;
  out.m_nominal = m;
  out.m_actual = m;
  if (m == 0) return out;
  Rng rng = make_rng(seed);
  multinomial_fill(p, m, rng, out.counts);
  return out;
}

SampleCounts poissonized_draw(const Pmf& p, std::uint64_t m, RngSeed seed) {
  validate(p);
  if (m < 1) throw std::invalid_argument("poissonized_draw: m must be at least 1");
  Rng rng = make_rng(seed);
  std::poisson_distribution<std::uint64_t> pois(static_cast<double>(m));
  std::uint64_t total = pois(rng);
  SampleCounts out;
  out.counts.assign(p.n(), 0);
  out.dims = p.dims;
  out.m_nominal = m;
  out.m_actual = total;
  multinomial_fill(p, total, rng, out.counts);
  return out;
}

Pmf empirical_pmf(const SampleCounts& counts) {
  if (counts.n() == 0 || counts.m_actual == 0) throw std::invalid_argument("empirical_pmf: empty counts");
  Pmf out{std::vector<double>(counts.n()), counts.dims};
  const double m = static_cast<double>(counts.m_actual);
  for (std::size_t i = 0; i < counts.n(); ++i) out.mass[i] = static_cast<double>(counts.counts[i]) / m;
  return out;
}

std::vector<int> random_signs(std::size_t k, RngSeed seed) {
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> s(k);
  for (auto& z : s) z = coin(rng) ? 1 : -1;
  return s;
}

Pmf gen_paninski(const PaninskiSpec& spec) {
  if (spec.n == 0 || spec.n % 2) throw std::invalid_argument("paninski: n must be even and positive");
  if (!(spec.c > 0.0) || !(spec.eps > 0.0) || !(spec.c * spec.eps < 1.0))
    throw std::invalid_argument("paninski: need c > 0, eps > 0 and c * eps < 1");
  if (spec.signs.size() != spec.n / 2) throw std::invalid_argument("paninski: need n/2 signs");
  const double n = static_cast<double>(spec.n);
  Pmf out{std::vector<double>(spec.n), {}};
  for (std::size_t l = 0; l < spec.n / 2; ++l) {
    int z = spec.signs[l];
    if (z != 1 && z != -1) throw std::invalid_argument("paninski: signs must be +1 or -1");
    out.mass[2 * l] = (1.0 + z * spec.c * spec.eps) / n;
    out.mass[2 * l + 1] = (1.0 - z * spec.c * spec.eps) / n;
  }
  return out;
}

Pmf gen_paninski_grid(std::size_t n, std::size_t d, double eps, double c, RngSeed seed) {
  if (d < 1) throw std::invalid_argument("paninski grid: d must be at least 1");
  if (n == 0 || n % 2) throw std::invalid_argument("paninski grid: n must be even and positive");
  if (!(c > 0.0) || !(eps > 0.0) || !(c * eps < 1.0)) throw std::invalid_argument("paninski grid: need c * eps < 1");
  std::size_t rest = 1;
  for (std::size_t a = 1; a < d; ++a) rest *= n;
  const std::size_t total = n * rest;
  auto signs = random_signs(total / 2, seed);
  const double base = 1.0 / static_cast<double>(total);
  Pmf out{std::vector<double>(total), d == 1 ? std::vector<std::size_t>{} : std::vector<std::size_t>(d, n)};
  for (std::size_t l = 0; l < n / 2; ++l) {
    for (std::size_t r = 0; r < rest; ++r) {
      int z = signs[l * rest + r];
      out.mass[(2 * l) * rest + r] = base * (1.0 + z * c * eps);
      out.mass[(2 * l + 1) * rest + r] = base * (1.0 - z * c * eps);
    }
  }
  return out;
}

Pmf gen_zipf(std::size_t n, double s) {
  if (n < 1 || s < 0.0) throw std::invalid_argument("zipf: need n >= 1 and s >= 0");
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = std::pow(static_cast<double>(i + 1), -s);
  return renormalized(std::move(m));
}

Pmf gen_triangular(std::size_t n) {
  if (n < 1) throw std::invalid_argument("triangular: n must be positive");
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = static_cast<double>(std::min(i + 1, n - i));
  return renormalized(std::move(m));
}

Pmf gen_geometric(std::size_t n, double ratio) {
  if (n < 1 || !(ratio > 0.0)) throw std::invalid_argument("geometric: need n >= 1 and ratio > 0");
  std::vector<double> m(n);
  double lr = std::log(ratio);
  for (std::size_t i = 0; i < n; ++i) m[i] = std::exp(lr * static_cast<double>(i));
  return renormalized(std::move(m));
}

Pmf gen_discrete_gaussian(std::size_t n, double mean, double sd) {
  if (n < 1 || !(sd > 0.0)) throw std::invalid_argument("gaussian: need n >= 1 and sd > 0");
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = (static_cast<double>(i) - mean) / sd;
    m[i] = std::exp(-0.5 * z * z);
  }
  return renormalized(std::move(m));
}

Pmf gen_blocks(std::size_t n, const std::vector<std::size_t>& starts, const std::vector<std::size_t>& widths,
               const std::vector<double>& weights) {
  if (starts.size() != widths.size() || starts.size() != weights.size() || starts.empty())
    throw std::invalid_argument("blocks: mismatched block lists");
  std::vector<double> m(n, 0.0);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (widths[k] == 0 || starts[k] + widths[k] > n) throw std::invalid_argument("blocks: block out of range");
    if (weights[k] < 0.0) throw std::invalid_argument("blocks: negative weight");
    for (std::size_t i = starts[k]; i < starts[k] + widths[k]; ++i)
      m[i] += weights[k] / static_cast<double>(widths[k]);
  }
  return renormalized(std::move(m));
}

Pmf apply_paired_swaps(const Pmf& p, const std::vector<int>& signs, double delta) {
  if (!(delta >= 0.0) || !(delta < 1.0)) throw std::invalid_argument("paired swaps: delta must lie in [0, 1)");
  if (signs.size() < p.n() / 2) throw std::invalid_argument("paired swaps: too few signs");
  Pmf out = p;
  for (std::size_t l = 0; 2 * l + 1 < p.n(); ++l) {
    double t = delta * std::min(p.mass[2 * l], p.mass[2 * l + 1]);
    double z = signs[l] >= 0 ? 1.0 : -1.0;
    out.mass[2 * l] += z * t;
    out.mass[2 * l + 1] -= z * t;
  }
  return out;
}

namespace {

template <class Dist>
Pmf perturb_far(const Pmf& p, double eps, RngSeed seed, Dist dist, const char* what) {
  validate(p);
  if (p.num_axes() != 1) throw std::invalid_argument(std::string(what) + ": one axis expected");
  if (!(eps >= 0.0) || eps >= 1.0) throw std::invalid_argument(std::string(what) + ": eps must lie in [0, 1)");
  if (eps == 0.0) return p;
  if (p.n() < 2) throw std::invalid_argument(std::string(what) + ": domain too small");
  auto signs = random_signs(p.n() / 2, seed);
  constexpr double kMaxDelta = 0.999;
  constexpr double kOvershoot = 1.05;
  // Grow delta until the distance reaches eps, then bisect back toward eps.
  double delta = std::min(4.0 * eps, kMaxDelta);
  double lo = 0.0, hi = -1.0;
  std::optional<Pmf> best;
  for (int attempt = 0; attempt < 20; ++attempt) {
    Pmf out = apply_paired_swaps(p, signs, delta);
    double d = dist(out);
    if (d >= eps) {
      best = std::move(out);
      hi = delta;
      if (d <= kOvershoot * eps) break;
    } else {
      lo = delta;
    }
    if (hi < 0.0) {
      if (delta >= kMaxDelta) break;
      double grow = d > 0.0 ? std::max(1.25, 1.05 * eps / d) : 4.0;
      delta = std::min(delta * grow, kMaxDelta);
    } else {
      delta = 0.5 * (lo + hi);
    }
  }
  if (best) return *best;
  throw std::runtime_error(std::string(what) + ": cannot reach the requested distance");
}

}  // namespace

Pmf perturb_far_from_monotone(const Pmf& p, double eps, RngSeed seed) {
  return perturb_far(p, eps, seed, [](const Pmf& q) { return dist_to_monotone(q); }, "perturb_far_from_monotone");
}

Pmf perturb_far_from_unimodal(const Pmf& p, double eps, RngSeed seed) {
  return perturb_far(p, eps, seed, [](const Pmf& q) { return dist_to_unimodal(q); }, "perturb_far_from_unimodal");
}

PmfSampleSource::PmfSampleSource(Pmf p, RngSeed seed) : p_(std::move(p)), seed_(seed) { validate(p_); }

SampleCounts PmfSampleSource::take(std::uint64_t m, bool poissonized) {
  RngSeed s = derive_seed(seed_, stream_++);
  if (poissonized && m > 0) return poissonized_draw(p_, m, s);
  return draw(p_, m, s);
}

CountsSampleSource::CountsSampleSource(const SampleCounts& counts, RngSeed seed)
    : n_(counts.n()), dims_(counts.dims) {
  if (n_ == 0) throw std::invalid_argument("counts source: empty domain");
  order_.reserve(counts.m_actual);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::uint64_t k = 0; k < counts.counts[i]; ++k) order_.push_back(static_cast<std::uint32_t>(i));
  Rng rng = make_rng(seed);
  std::shuffle(order_.begin(), order_.end(), rng);
}

SampleCounts CountsSampleSource::take(std::uint64_t m, bool) {
  std::uint64_t k = std::min<std::uint64_t>(m, remaining());
  SampleCounts out;
  out.counts.assign(n_, 0);
  out.dims = dims_;
  for (std::uint64_t j = 0; j < k; ++j) ++out.counts[order_[pos_ + j]];
  pos_ += k;
  out.m_nominal = k;
  out.m_actual = k;
  return out;
}

}  // namespace shapetest
