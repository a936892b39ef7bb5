#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "shapetest/core.hpp"
#include "shapetest/tester.hpp"

namespace shapetest {

struct BkrResult {
  double statistic = 0.0;
  double threshold = 0.0;
};

// Local-collision statistic over Birge buckets (gamma = eps): per bucket,
// collisions minus C(N_j, 2) / |I_j|, clipped at 0, summed. Threshold
// 0.6 ln^2(n) / eps.
BkrResult bkr_statistic(const SampleCounts& counts, double eps);
TestVerdict bkr_test(const SampleCounts& counts, double eps);

enum class InstanceKind { UniformPerturbed, ZipfPerturbed, Custom };
enum class TesterKind { ChiSq, BKR };

std::string tester_name(TesterKind t);
TesterKind tester_from_name(const std::string& s);
InstanceKind instance_from_name(const std::string& s);

struct ExperimentConfig {
  std::size_t n = 50000;
  double eps = 0.05;
  int reps = 400;
  std::vector<std::uint64_t> sample_grid{30000};
  InstanceKind instance = InstanceKind::UniformPerturbed;
  TesterKind tester = TesterKind::ChiSq;
  std::string in_path, far_path;  // Custom instances
  std::string out_path;
  RngSeed seed = 1;
  double paninski_c = 4.0;
  double zipf_exponent = 1.0;
  TestConfig test = TestConfig::experiment(0.05);  // eps is overwritten by the experiment's eps

  void validate() const;
};

struct ExperimentRow {
  std::uint64_t m = 0;
  std::string tester;
  std::size_t n = 0;
  double eps = 0.0;
  double accuracy = 0.0;
  double accept_in = 0.0;
  double reject_far = 0.0;
  RngSeed seed = 0;
  double wall_ms = 0.0;
};

// In-class and far instance for the configuration.
std::pair<Pmf, Pmf> experiment_instances(const ExperimentConfig& cfg);

// Paired trials per grid point; reps run in parallel with per-trial seeds.
std::vector<ExperimentRow> experiment_accuracy(const ExperimentConfig& cfg);
std::vector<ExperimentRow> experiment_accuracy(const ExperimentConfig& cfg, const Pmf& in, const Pmf& far);

std::string csv_header();
std::string csv_row(const ExperimentRow& r);
void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);

}  // namespace shapetest
