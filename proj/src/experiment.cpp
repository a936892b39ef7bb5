#include "shapetest/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "shapetest/io.hpp"
#include "shapetest/partition.hpp"
#include "shapetest/sampling.hpp"

namespace shapetest {

BkrResult bkr_statistic(const SampleCounts& counts, double eps) {
  if (counts.dims.size() > 1) throw std::invalid_argument("bkr: one axis expected");
  if (!(eps > 0.0) || eps >= 1.0) throw std::invalid_argument("bkr: eps must lie in (0, 1)");
  const std::size_t n = counts.n();
  if (n == 0) throw std::invalid_argument("bkr: empty domain");
  auto part = birge_partition(n, eps);
  BkrResult r;
  for (const auto& cell : part.cells()) {
    double total = 0.0, collisions = 0.0;
    for (std::size_t i = cell.lo; i <= cell.hi; ++i) {
      double c = static_cast<double>(counts.counts[i]);
      total += c;
      collisions += 0.5 * c * (c - 1.0);
    }
    double flat = 0.5 * total * (total - 1.0) / static_cast<double>(cell.size());
    r.statistic += std::max(0.0, collisions - flat);
  }
  double ln_n = std::log(static_cast<double>(n));
  r.threshold = 0.6 * ln_n * ln_n / eps;
  return r;
}

TestVerdict bkr_test(const SampleCounts& counts, double eps) {
  auto r = bkr_statistic(counts, eps);
  TestVerdict v;
  v.statistic = r.statistic;
  v.threshold = r.threshold;
  v.decision = r.statistic <= r.threshold ? Decision::Accept : Decision::Reject;
  v.stage = "bkr";
  v.detail["m"] = static_cast<double>(counts.m_nominal);
  return v;
}

std::string tester_name(TesterKind t) { return t == TesterKind::ChiSq ? "chisq" : "bkr"; }

TesterKind tester_from_name(const std::string& s) {
  if (s == "chisq" || s == "ChiSq") return TesterKind::ChiSq;
  if (s == "bkr" || s == "BKR") return TesterKind::BKR;
  throw std::invalid_argument("unknown tester: " + s);
}

InstanceKind instance_from_name(const std::string& s) {
  if (s == "uniform" || s == "UniformPerturbed") return InstanceKind::UniformPerturbed;
  if (s == "zipf" || s == "ZipfPerturbed") return InstanceKind::ZipfPerturbed;
  if (s == "custom" || s == "Custom") return InstanceKind::Custom;
  throw std::invalid_argument("unknown instance: " + s);
}

void ExperimentConfig::validate() const {
  if (reps < 1) throw std::invalid_argument("experiment: reps must be >= 1");
  if (sample_grid.empty()) throw std::invalid_argument("experiment: empty sample grid");
  for (std::size_t k = 0; k < sample_grid.size(); ++k) {
    if (sample_grid[k] == 0) throw std::invalid_argument("experiment: grid values must be positive");
    if (k > 0 && sample_grid[k] <= sample_grid[k - 1])
      throw std::invalid_argument("experiment: sample grid must be ascending");
  }
  if (!(eps > 0.0) || eps >= 1.0) throw std::invalid_argument("experiment: eps must lie in (0, 1)");
  if (instance != InstanceKind::Custom && n < 2) throw std::invalid_argument("experiment: n must be >= 2");
  if (instance == InstanceKind::Custom && (in_path.empty() || far_path.empty()))
    throw std::invalid_argument("experiment: custom instances need both pmf paths");
}

std::pair<Pmf, Pmf> experiment_instances(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.instance) {
    case InstanceKind::UniformPerturbed: {
      PaninskiSpec spec{cfg.n, cfg.eps, cfg.paninski_c, random_signs(cfg.n / 2, derive_seed(cfg.seed, 0xfa7))};
      return {uniform_pmf(cfg.n), gen_paninski(spec)};
    }
    case InstanceKind::ZipfPerturbed: {
      Pmf in = gen_zipf(cfg.n, cfg.zipf_exponent);
      Pmf far = perturb_far_from_monotone(in, cfg.eps, derive_seed(cfg.seed, 0xfa7));
      return {std::move(in), std::move(far)};
    }
    case InstanceKind::Custom: {
      Pmf in = load_pmf(cfg.in_path);
      Pmf far = load_pmf(cfg.far_path);
      if (in.n() != far.n()) throw std::invalid_argument("experiment: custom instances differ in size");
      return {std::move(in), std::move(far)};
    }
  }
  throw std::invalid_argument("experiment: unknown instance");
}

std::vector<ExperimentRow> experiment_accuracy(const ExperimentConfig& cfg) {
  auto [in, far] = experiment_instances(cfg);
  return experiment_accuracy(cfg, in, far);
}

std::vector<ExperimentRow> experiment_accuracy(const ExperimentConfig& cfg, const Pmf& in, const Pmf& far) {
  cfg.validate();
  if (in.n() != far.n() || in.num_axes() != 1 || far.num_axes() != 1)
    throw std::invalid_argument("experiment: instances must share a 1-d domain");
  std::vector<ExperimentRow> rows;
  const auto reps = static_cast<std::size_t>(cfg.reps);
  for (std::size_t g = 0; g < cfg.sample_grid.size(); ++g) {
    const std::uint64_t m = cfg.sample_grid[g];
    TestConfig tc = cfg.test;
    tc.eps = cfg.eps;
    tc.chi2_samples = m;
    tc.poissonized = false;
    std::vector<char> accept_in(reps, 0), accept_far(reps, 0);
    std::string error;
    auto t0 = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(reps); ++r) {
      try {
        auto trial = [&](const Pmf& p, std::uint64_t stream) {
          PmfSampleSource src(p, derive_seed(cfg.seed, stream));
          if (cfg.tester == TesterKind::BKR) return bkr_test(src.take(m, false), cfg.eps).accepted();
          return test_monotone(src, tc).accepted();
        };
        const std::uint64_t base = 2 * (g * reps + static_cast<std::size_t>(r));
        accept_in[static_cast<std::size_t>(r)] = trial(in, base);
        accept_far[static_cast<std::size_t>(r)] = trial(far, base + 1);
      } catch (const std::exception& e) {
#pragma omp critical
        if (error.empty()) error = e.what();
      }
    }
    if (!error.empty()) throw std::runtime_error("experiment: " + error);
    double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    double ain = 0.0, rfar = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      ain += accept_in[r];
      rfar += !accept_far[r];
    }
    ain /= static_cast<double>(reps);
    rfar /= static_cast<double>(reps);
    rows.push_back({m, tester_name(cfg.tester), in.n(), cfg.eps, 0.5 * (ain + rfar), ain, rfar, cfg.seed, wall});
  }
  return rows;
}

std::string csv_header() { return "m,tester,n,eps,accuracy,accept_in,reject_far,seed,wall_ms"; }

std::string csv_row(const ExperimentRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%llu,%s,%zu,%.6g,%.6f,%.6f,%.6f,%llu,%.1f", static_cast<unsigned long long>(r.m),
                r.tester.c_str(), r.n, r.eps, r.accuracy, r.accept_in, r.reject_far,
                static_cast<unsigned long long>(r.seed), r.wall_ms);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << csv_header() << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
}

}  // namespace shapetest
