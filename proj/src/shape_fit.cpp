#include "shapetest/shape_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace shapetest {

namespace {

// Persistent segment tree over value ranks. Version i holds cells [0, i), so a
// range [a, b] is the difference of versions b + 1 and a.
class RangeQuantile {
 public:
  struct Fit {
    double x = 0.0;     // weighted quantile of the range
    double cost = 0.0;  // sum w |x - v| over the range
    double weight = 0.0;
  };

  RangeQuantile(const std::vector<double>& v, const std::vector<double>& w) : w_(w) {
    const std::size_t n = v.size();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    sorted_.resize(n);
    std::vector<std::uint32_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) {
      sorted_[r] = v[order[r]];
      rank[order[r]] = static_cast<std::uint32_t>(r);
    }
    size_ = static_cast<std::uint32_t>(n);
    nodes_.reserve(n * (std::size_t(std::log2(std::max<std::size_t>(n, 2))) + 3) + 1);
    nodes_.push_back({0, 0, 0.0, 0.0});
    roots_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i)
      roots_[i + 1] = insert(roots_[i], 0, size_ - 1, rank[i], w[i], w[i] * v[i]);
  }

  // tau = 0 gives the range minimum, tau = 1 the maximum, otherwise the
  // smallest value whose cumulative weight reaches tau of the total.
  Fit fit(std::size_t a, std::size_t b, double tau) const {
    std::uint32_t hi = roots_[b + 1], lo = roots_[a];
    const double total_w = nodes_[hi].w - nodes_[lo].w;
    const double total_wv = nodes_[hi].wv - nodes_[lo].wv;
    double target = tau * total_w;
    double below_w = 0.0, below_wv = 0.0;
    std::uint32_t l = 0, r = size_ - 1;
    while (l < r) {
      std::uint32_t mid = l + (r - l) / 2;
      const Node& h = nodes_[hi];
      const Node& o = nodes_[lo];
      double lw = nodes_[h.left].w - nodes_[o.left].w;
      double rw = nodes_[h.right].w - nodes_[o.right].w;
      bool go_left;
      if (tau <= 0.0) {
        go_left = lw > 0.0;
      } else if (tau >= 1.0) {
        go_left = !(rw > 0.0);
      } else {
        go_left = lw > 0.0 && lw >= target;
        if (!go_left && !(rw > 0.0)) go_left = true;
      }
      if (go_left) {
        hi = h.left;
        lo = o.left;
        r = mid;
      } else {
        target -= lw;
        below_w += lw;
        below_wv += nodes_[h.left].wv - nodes_[o.left].wv;
        hi = h.right;
        lo = o.right;
        l = mid + 1;
      }
    }
    double leaf_w = nodes_[hi].w - nodes_[lo].w;
    double leaf_wv = nodes_[hi].wv - nodes_[lo].wv;
    Fit f;
    f.x = sorted_[l];
    f.weight = total_w;
    double above_w = total_w - below_w - leaf_w;
    double above_wv = total_wv - below_wv - leaf_wv;
    f.cost = (f.x * below_w - below_wv) + (above_wv - f.x * above_w);
    f.cost = std::max(f.cost, 0.0);
    return f;
  }

  double weight(std::size_t i) const { return w_[i]; }

 private:
  struct Node {
    std::uint32_t left, right;
    double w, wv;
  };

  std::uint32_t insert(std::uint32_t prev, std::uint32_t l, std::uint32_t r, std::uint32_t pos, double w, double wv) {
    Node n = nodes_[prev];
    n.w += w;
    n.wv += wv;
    if (l < r) {
      std::uint32_t mid = l + (r - l) / 2;
      if (pos <= mid)
        n.left = insert(n.left, l, mid, pos, w, wv);
      else
        n.right = insert(n.right, mid + 1, r, pos, w, wv);
    }
    nodes_.push_back(n);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  std::vector<double> w_;
  std::vector<double> sorted_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> roots_;
  std::uint32_t size_ = 0;
};

struct Block {
  std::size_t a, b;
  double x, cost, weight;
};

// Totals after each step of a one-directional PAVA pass.
struct PassTotals {
  std::vector<double> cost, sum;
};

// Non-decreasing fit on [0, k) for every k when forward, or non-increasing fit
// on [k, L) for every k when backward. cost/sum are indexed by k.
PassTotals pava_pass(const RangeQuantile& rq, const std::vector<double>& v, double tau, bool forward,
                     std::vector<Block>* blocks_out = nullptr, std::size_t stop = SIZE_MAX) {
  const std::size_t L = v.size();
  PassTotals out;
  out.cost.assign(L + 1, 0.0);
  out.sum.assign(L + 1, 0.0);
  std::vector<Block> st;
  st.reserve(L);
  double cost = 0.0, sum = 0.0;
  for (std::size_t step = 0; step < L; ++step) {
    std::size_t i = forward ? step : L - 1 - step;
    if (blocks_out && ((forward && i >= stop) || (!forward && i < stop))) break;
    double w = rq.weight(i);
    st.push_back({i, i, v[i], 0.0, w});
    sum += w * v[i];
    while (st.size() >= 2 && st[st.size() - 2].x > st.back().x) {
      Block top = st.back();
      st.pop_back();
      Block& prev = st.back();
      cost -= prev.cost + top.cost;
      sum -= prev.x * prev.weight + top.x * top.weight;
      std::size_t a = std::min(prev.a, top.a);
      std::size_t b = std::max(prev.b, top.b);
      auto f = rq.fit(a, b, tau);
      prev = {a, b, f.x, f.cost, f.weight};
      cost += f.cost;
      sum += f.x * f.weight;
    }
    std::size_t k = forward ? i + 1 : i;
    out.cost[k] = cost;
    out.sum[k] = sum;
  }
  if (blocks_out) *blocks_out = std::move(st);
  return out;
}

// Per-cell values of the split-k fit at level tau.
std::vector<double> fit_values(const RangeQuantile& rq, const std::vector<double>& v, double tau, std::size_t k) {
  std::vector<double> f(v.size(), 0.0);
  std::vector<Block> blocks;
  if (k > 0) {
    pava_pass(rq, v, tau, true, &blocks, k);
    for (const auto& bl : blocks)
      for (std::size_t i = bl.a; i <= bl.b; ++i) f[i] = bl.x;
  }
  if (k < v.size()) {
    pava_pass(rq, v, tau, false, &blocks, k);
    for (const auto& bl : blocks)
      for (std::size_t i = bl.a; i <= bl.b; ++i) f[i] = bl.x;
  }
  return f;
}

struct Bracket {
  double tau_lo = 0.0, cost_lo = 0.0, sum_lo = 0.0;
  double tau_hi = 1.0, cost_hi = 0.0, sum_hi = 0.0;
  double lower = -std::numeric_limits<double>::infinity();

  double upper() const {
    double span = sum_hi - sum_lo;
    if (span <= 1e-15) return std::min(cost_lo, cost_hi);
    double theta = std::clamp((sum_hi - 1.0) / span, 0.0, 1.0);
    return theta * cost_lo + (1.0 - theta) * cost_hi;
  }
};

void check_input(const std::vector<double>& v, const std::vector<double>& w) {
  if (v.empty() || v.size() != w.size()) throw std::invalid_argument("shape fit: bad input sizes");
  if (v.size() >= std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("shape fit: input too large");
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) throw std::invalid_argument("shape fit: weights must be positive");
    if (!(v[i] >= 0.0) || !std::isfinite(v[i])) throw std::invalid_argument("shape fit: values must be nonnegative");
    total += w[i] * v[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("shape fit: values do not sum to one");
}

ShapeFitResult project(const std::vector<double>& v, const std::vector<double>& w, bool unimodal, bool want_fit) {
  check_input(v, w);
  const std::size_t L = v.size();
  RangeQuantile rq(v, w);
  // Split k: cells [0, k) non-decreasing, [k, L) non-increasing.
  const std::size_t num_k = unimodal ? L + 1 : 1;
  std::vector<Bracket> br(num_k);

  auto evaluate = [&](double tau) {
    PassTotals inc;
    if (unimodal) inc = pava_pass(rq, v, tau, true);
    PassTotals dec = pava_pass(rq, v, tau, false);
    const double lambda = 1.0 - 2.0 * tau;
    for (std::size_t k = 0; k < num_k; ++k) {
      double cost = dec.cost[k] + (unimodal ? inc.cost[k] : 0.0);
      double sum = dec.sum[k] + (unimodal ? inc.sum[k] : 0.0);
      Bracket& b = br[k];
      b.lower = std::max(b.lower, cost + lambda * (sum - 1.0));
      if (sum <= 1.0 && tau >= b.tau_lo) {
        b.tau_lo = tau;
        b.cost_lo = cost;
        b.sum_lo = sum;
      }
      if (sum >= 1.0 && tau <= b.tau_hi) {
        b.tau_hi = tau;
        b.cost_hi = cost;
        b.sum_hi = sum;
      }
    }
  };
  evaluate(0.0);
  evaluate(1.0);

  constexpr int kMaxRounds = 200;
  constexpr std::size_t kMaxProbes = 8;
  for (int round = 0; round < kMaxRounds; ++round) {
    double best_ub = std::numeric_limits<double>::infinity();
    double best_lb = std::numeric_limits<double>::infinity();
    for (const auto& b : br) {
      best_ub = std::min(best_ub, b.upper());
      best_lb = std::min(best_lb, b.lower);
    }
    const double tol = 1e-12 + 1e-10 * best_ub;
    if (best_ub - best_lb <= tol) break;
    // Probe the brackets of the splits that might still win, lowest bound first.
    std::vector<std::size_t> cand;
    for (std::size_t k = 0; k < num_k; ++k)
      if (br[k].lower < best_ub - tol && br[k].tau_hi - br[k].tau_lo > 1e-15) cand.push_back(k);
    if (cand.empty()) break;
    std::sort(cand.begin(), cand.end(), [&](auto a, auto b) { return br[a].lower < br[b].lower; });
    std::vector<double> probes;
    for (auto k : cand) {
      double mid = 0.5 * (br[k].tau_lo + br[k].tau_hi);
      if (std::find(probes.begin(), probes.end(), mid) == probes.end()) probes.push_back(mid);
      if (probes.size() >= kMaxProbes) break;
    }
    for (double t : probes) evaluate(t);
  }

  ShapeFitResult res;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < num_k; ++k) {
    double ub = br[k].upper();
    if (ub < best) {
      best = ub;
      res.split = unimodal ? k : 0;
    }
  }
  res.distance = 0.5 * std::max(best, 0.0);
  if (want_fit) {
    const Bracket& b = br[res.split];
    auto lo = fit_values(rq, v, b.tau_lo, res.split);
    auto hi = fit_values(rq, v, b.tau_hi, res.split);
    double span = b.sum_hi - b.sum_lo;
    double theta = span <= 1e-15 ? 1.0 : std::clamp((b.sum_hi - 1.0) / span, 0.0, 1.0);
    res.fit.resize(L);
    for (std::size_t i = 0; i < L; ++i) res.fit[i] = theta * lo[i] + (1.0 - theta) * hi[i];
  }
  return res;
}

}  // namespace

ShapeFitResult project_non_increasing(const std::vector<double>& v, const std::vector<double>& w, bool want_fit) {
  return project(v, w, false, want_fit);
}

ShapeFitResult project_unimodal(const std::vector<double>& v, const std::vector<double>& w, bool want_fit) {
  return project(v, w, true, want_fit);
}

}  // namespace shapetest
