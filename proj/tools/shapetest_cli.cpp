#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "shapetest/classdist.hpp"
#include "shapetest/experiment.hpp"
#include "shapetest/io.hpp"
#include "shapetest/learn.hpp"
#include "shapetest/sampling.hpp"
#include "shapetest/tester.hpp"

using namespace shapetest;

namespace {

struct Globals {
  RngSeed seed = 1;
  std::string out;
  std::string format = "json";
  bool renormalize = false;
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_file(g.out, text);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string pmf_output(const Globals& g, const Pmf& p) {
  return g.format == "csv" ? pmf_to_text(p) : dump(pmf_to_json(p));
}

ClassId class_from_name(const std::string& name, const std::vector<std::size_t>& dims) {
  if (name == "monotone") return ClassId::monotone(dims.empty() ? 1 : static_cast<int>(dims.size()));
  if (name == "unimodal") return ClassId::unimodal();
  if (name == "logconcave") return ClassId::log_concave();
  if (name == "mhr") return ClassId::mhr();
  if (name == "independence") return ClassId::product(dims);
  throw std::invalid_argument("unknown class: " + name);
}

TestConfig preset(const std::string& name, double eps) {
  if (name == "paper") return TestConfig::paper(eps);
  if (name == "experiment") return TestConfig::experiment(eps);
  throw std::invalid_argument("unknown constants preset: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape-restricted distribution testing"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out", g.out, "Write output to this file instead of stdout");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_flag("--renormalize", g.renormalize, "Renormalize input pmfs instead of rejecting them");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a pmf");
  std::string family = "uniform";
  std::size_t gen_n = 100, gen_d = 2;
  double gen_eps = 0.1, gen_c = 4.0, gen_s = 1.0, gen_ratio = 0.99, gen_mean = -1.0, gen_sd = -1.0;
  std::string gen_base;
  gen->add_option("--family", family, "uniform|zipf|paninski|paninski-grid|triangular|geometric|gaussian|far-monotone|far-unimodal")
      ->required();
  gen->add_option("--n", gen_n, "Domain size (per axis for grids)");
  gen->add_option("--d", gen_d, "Axes for paninski-grid");
  gen->add_option("--eps", gen_eps, "Perturbation eps");
  gen->add_option("--c", gen_c, "Paninski constant");
  gen->add_option("--s", gen_s, "Zipf exponent");
  gen->add_option("--ratio", gen_ratio, "Geometric ratio");
  gen->add_option("--mean", gen_mean, "Gaussian mean (default n/2)");
  gen->add_option("--sd", gen_sd, "Gaussian sd (default n/8)");
  gen->add_option("--pmf", gen_base, "Base pmf for far-* families (default uniform)");

  // sample
  auto* sample = app.add_subcommand("sample", "Draw samples from a pmf");
  std::string sample_pmf;
  std::uint64_t sample_m = 1000;
  bool sample_poisson = false;
  sample->add_option("--pmf", sample_pmf, "Pmf file")->required();
  sample->add_option("--m", sample_m, "Number of samples")->required();
  sample->add_flag("--poissonized", sample_poisson, "Draw Poisson(m) samples");

  // learn
  auto* learn = app.add_subcommand("learn", "Learn a class member from samples");
  std::string learn_class, learn_samples;
  double learn_eps = 0.1;
  learn->add_option("--class", learn_class, "monotone|logconcave|mhr|independence")->required();
  learn->add_option("--eps", learn_eps, "Accuracy")->required();
  learn->add_option("--samples", learn_samples, "Counts file")->required();

  // dist
  auto* dist = app.add_subcommand("dist", "Distance from a pmf to a class");
  std::string dist_class, dist_pmf;
  double dist_step = 0.0;
  dist->add_option("--class", dist_class, "monotone|unimodal")->required();
  dist->add_option("--pmf", dist_pmf, "Pmf file")->required();
  dist->add_option("--brute-step", dist_step, "Also report the grid-search distance at this step (n <= 8)");

  // test
  auto* test = app.add_subcommand("test", "Test membership in a class");
  std::string test_class, test_pmf, test_samples, test_preset = "experiment", test_target;
  double test_eps = 0.1;
  test->add_option("--class", test_class, "monotone|unimodal|logconcave|mhr|independence|identity")->required();
  test->add_option("--eps", test_eps, "Distance parameter")->required();
  auto* opt_pmf = test->add_option("--pmf", test_pmf, "Draw samples from this pmf");
  auto* opt_samples = test->add_option("--samples", test_samples, "Use this fixed sample (counts file)");
  opt_pmf->excludes(opt_samples);
  test->add_option("--constants-preset", test_preset, "paper|experiment")
      ->check(CLI::IsMember({"paper", "experiment"}))
      ->capture_default_str();
  test->add_option("--target", test_target, "Known pmf for the identity test");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Accuracy of monotonicity testers over a sample grid");
  ExperimentConfig ec;
  std::string exp_instance = "uniform", exp_tester = "chisq";
  exp->add_option("--n", ec.n, "Domain size")->capture_default_str();
  exp->add_option("--eps", ec.eps, "Farness in TV")->capture_default_str();
  exp->add_option("--reps", ec.reps, "Paired trials per grid point")->capture_default_str();
  exp->add_option("--grid", ec.sample_grid, "Sample sizes (ascending)")->delimiter(',');
  exp->add_option("--instance", exp_instance, "uniform|zipf|custom")->capture_default_str();
  exp->add_option("--tester", exp_tester, "chisq|bkr")->capture_default_str();
  exp->add_option("--in", ec.in_path, "In-class pmf (custom)");
  exp->add_option("--far", ec.far_path, "Far pmf (custom)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      Pmf p;
      if (family == "uniform") p = uniform_pmf(gen_n);
      else if (family == "zipf") p = gen_zipf(gen_n, gen_s);
      else if (family == "paninski") p = gen_paninski({gen_n, gen_eps, gen_c, random_signs(gen_n / 2, g.seed)});
      else if (family == "paninski-grid") p = gen_paninski_grid(gen_n, gen_d, gen_eps, gen_c, g.seed);
      else if (family == "triangular") p = gen_triangular(gen_n);
      else if (family == "geometric") p = gen_geometric(gen_n, gen_ratio);
      else if (family == "gaussian")
        p = gen_discrete_gaussian(gen_n, gen_mean >= 0 ? gen_mean : 0.5 * static_cast<double>(gen_n),
                                  gen_sd > 0 ? gen_sd : static_cast<double>(gen_n) / 8.0);
      else if (family == "far-monotone" || family == "far-unimodal") {
        Pmf base = gen_base.empty() ? uniform_pmf(gen_n) : load_pmf(gen_base, g.renormalize);
        p = family == "far-monotone" ? perturb_far_from_monotone(base, gen_eps, g.seed)
                                     : perturb_far_from_unimodal(base, gen_eps, g.seed);
      } else {
        throw std::invalid_argument("unknown family: " + family);
      }
      emit(g, pmf_output(g, p));
      return 0;
    }
    if (*sample) {
      Pmf p = load_pmf(sample_pmf, g.renormalize);
      SampleCounts c = sample_poisson ? poissonized_draw(p, sample_m, g.seed) : draw(p, sample_m, g.seed);
      if (g.format == "csv") {
        std::ostringstream out;
        for (auto v : c.counts) out << v << '\n';
        emit(g, out.str());
      } else {
        emit(g, dump(counts_to_json(c)));
      }
      return 0;
    }
    if (*learn) {
      SampleCounts c = load_counts(learn_samples);
      LearnOutcome o;
      if (learn_class == "logconcave") {
        o = lcd_learn(c, learn_eps);
      } else if (learn_class == "mhr") {
        o = mhr_learn(c, learn_eps);
      } else if (learn_class == "monotone") {
        std::size_t d = c.dims.empty() ? 1 : c.dims.size();
        double gamma = birge_gamma_for(learn_eps * learn_eps, d);
        auto part = d == 1 ? birge_partition(c.n(), gamma) : birge_grid_partition(c.dims, gamma);
        o.q = add1_learn(c, part);
      } else if (learn_class == "independence") {
        o.q = product_learn(axis_counts(c));
      } else {
        throw std::invalid_argument("unknown learner class: " + learn_class);
      }
      if (!o.rejected && o.support.empty())
        for (std::size_t i = 0; i < o.q.n(); ++i) o.support.push_back(i);
      emit(g, dump(outcome_to_json(o)));
      return o.rejected ? 2 : 0;
    }
    if (*dist) {
      Pmf p = load_pmf(dist_pmf, g.renormalize);
      double d;
      ClassId cid;
      if (dist_class == "monotone") {
        if (p.num_axes() == 1) {
          d = dist_to_monotone(p);
        } else {
          IntervalPartition part;
          part.dims = p.dims;
          for (auto len : p.dims) part.axis_cells.push_back(singleton_partition(len).cells());
          d = dist_to_monotone(p, part);
        }
        cid = ClassId::monotone(static_cast<int>(p.num_axes()));
      } else if (dist_class == "unimodal") {
        d = dist_to_unimodal(p);
        cid = ClassId::unimodal();
      } else {
        throw std::invalid_argument("dist supports monotone and unimodal");
      }
      Json j{{"class", dist_class}, {"distance", d}};
      if (dist_step > 0.0) j["brute_force"] = brute_force_dist(cid, p, dist_step);
      if (g.format == "csv") {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g\n", d);
        emit(g, buf);
      } else {
        emit(g, dump(j));
      }
      return 0;
    }
    if (*test) {
      TestConfig cfg = preset(test_preset, test_eps);
      cfg.seed = g.seed;
      std::unique_ptr<SampleSource> src;
      if (!test_pmf.empty()) {
        src = std::make_unique<PmfSampleSource>(load_pmf(test_pmf, g.renormalize), g.seed);
      } else if (!test_samples.empty()) {
        src = std::make_unique<CountsSampleSource>(load_counts(test_samples), g.seed);
      } else {
        throw std::invalid_argument("test needs --pmf or --samples");
      }
      ClassId cid;
      if (test_class == "identity") {
        if (test_target.empty()) throw std::invalid_argument("identity test needs --target");
        cid = ClassId::single_target(load_pmf(test_target, g.renormalize));
      } else {
        cid = class_from_name(test_class, src->dims());
      }
      TestVerdict v = run_test(cid, *src, cfg);
      emit(g, g.format == "csv" ? verdict_to_text(v) : dump(verdict_to_json(v)));
      return v.accepted() ? 0 : 2;
    }
    if (*exp) {
      ec.seed = g.seed;
      ec.instance = instance_from_name(exp_instance);
      ec.tester = tester_from_name(exp_tester);
      ec.out_path = g.out;
      ec.test = TestConfig::experiment(ec.eps);
      std::ostringstream out;
      write_csv(out, experiment_accuracy(ec));
      emit(g, out.str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
