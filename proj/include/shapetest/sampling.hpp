#pragma once

#include <memory>

#include "shapetest/core.hpp"
#include "shapetest/rng.hpp"

namespace shapetest {

SampleCounts draw(const Pmf& p, std::uint64_t m, RngSeed seed);
SampleCounts poissonized_draw(const Pmf& p, std::uint64_t m, RngSeed seed);
Pmf empirical_pmf(const SampleCounts& counts);

struct PaninskiSpec {
  std::size_t n = 0;
  double eps = 0.0;
  double c = 4.0;
  std::vector<int> signs;  // n/2 entries in {-1,+1}
};

std::vector<int> random_signs(std::size_t k, RngSeed seed);

// 0-based pairs (2l, 2l+1); the + perturbation sits on the even slot.
Pmf gen_paninski(const PaninskiSpec& spec);
// Perturbation along the first axis of [n]^d.
Pmf gen_paninski_grid(std::size_t n, std::size_t d, double eps, double c, RngSeed seed);
Pmf gen_zipf(std::size_t n, double s);

// Instance families used by tests and the experiment harness.
Pmf gen_triangular(std::size_t n);
Pmf gen_geometric(std::size_t n, double ratio);
Pmf gen_discrete_gaussian(std::size_t n, double mean, double sd);
// Uniform blocks [starts[k], starts[k]+widths[k]) with the given weights.
Pmf gen_blocks(std::size_t n, const std::vector<std::size_t>& starts, const std::vector<std::size_t>& widths,
               const std::vector<double>& weights);

// Paired +/- mass swaps scaled until the exact distance reaches eps.
Pmf perturb_far_from_monotone(const Pmf& p, double eps, RngSeed seed);
Pmf perturb_far_from_unimodal(const Pmf& p, double eps, RngSeed seed);
// One application of the swap pattern with relative strength delta in [0,1).
Pmf apply_paired_swaps(const Pmf& p, const std::vector<int>& signs, double delta);

// Stream of samples consumed stage by stage; never reuses a sample.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::size_t n() const = 0;
  virtual std::vector<std::size_t> dims() const = 0;
  virtual SampleCounts take(std::uint64_t m, bool poissonized) = 0;
};

class PmfSampleSource final : public SampleSource {
 public:
  PmfSampleSource(Pmf p, RngSeed seed);
  std::size_t n() const override { return p_.n(); }
  std::vector<std::size_t> dims() const override { return p_.dims; }
  SampleCounts take(std::uint64_t m, bool poissonized) override;
  const Pmf& pmf() const { return p_; }

 private:
  Pmf p_;
  RngSeed seed_;
  std::uint64_t stream_ = 0;
};

// Replays a fixed sample multiset in a seeded random order. Requests beyond
// the remaining supply return what is left.
class CountsSampleSource final : public SampleSource {
 public:
  CountsSampleSource(const SampleCounts& counts, RngSeed seed);
  std::size_t n() const override { return n_; }
  std::vector<std::size_t> dims() const override { return dims_; }
  SampleCounts take(std::uint64_t m, bool poissonized) override;
  std::uint64_t remaining() const { return order_.size() - pos_; }

 private:
  std::size_t n_;
  std::vector<std::size_t> dims_;
  std::vector<std::uint32_t> order_;
  std::size_t pos_ = 0;
};

}  // namespace shapetest
