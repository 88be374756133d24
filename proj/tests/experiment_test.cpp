#include "evtest/experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace evtest;

namespace {

SimConfig nl_config(Method m, double nu, std::size_t n, std::size_t runs, std::uint64_t seed) {
  SimConfig cfg;
  cfg.generator = Generator{NL{nu, 1.0}};
  cfg.n = n;
  cfg.runs = runs;
  cfg.seed = seed;
  cfg.method = m;
  cfg.hypothesis = Hypothesis{{0.0, 1.0}, ShapeClass::Plain, OneSidedUpper{}};
  return cfg;
}

SimConfig beta_config(Method m, double sigma, std::size_t n, std::size_t runs) {
  SimConfig cfg;
  cfg.generator = Generator{BetaMV{0.2 + sigma, sigma * sigma}};
  cfg.n = n;
  cfg.runs = runs;
  cfg.seed = 11;
  cfg.method = m;
  cfg.hypothesis = Hypothesis{{0.2, sigma}, ShapeClass::Plain, OneSidedUpper{}};
  return cfg;
}

}  // namespace

TEST(Methods, ParseRoundTrip) {
  for (Method m : {Method::EMixture, Method::EGree, Method::PFisher, Method::PSimes, Method::EBatch, Method::PBatch,
                   Method::Grapa, Method::Agrapa, Method::EGree2s, Method::EMixture2s})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("bogus"), Error);
  EXPECT_EQ(parse_rule("terminal"), DecisionRule::Terminal);
  EXPECT_THROW(parse_rule("sometimes"), Error);
}

TEST(Config, Validation) {
  SimConfig cfg = nl_config(Method::EGree, 0.0, 10, 10, 1);
  cfg.threshold = 1.0;
  EXPECT_THROW(run_rejection_experiment(cfg), Error);
  cfg = nl_config(Method::EGree, 0.0, 0, 10, 1);
  EXPECT_THROW(run_rejection_experiment(cfg), Error);
  cfg = nl_config(Method::Agrapa, 0.0, 10, 10, 1);
  EXPECT_THROW(run_rejection_experiment(cfg), Error);
  cfg = nl_config(Method::PFisher, 0.0, 10, 10, 1);
  EXPECT_THROW(replicate_trajectories(cfg), Error);
}

TEST(Experiment, Deterministic) {
  for (Method m : {Method::EMixture, Method::EGree, Method::PFisher, Method::PBatch}) {
    const SimConfig cfg = nl_config(m, 0.5, 50, 200, 42);
    const auto a = run_rejection_experiment(cfg);
    const auto b = run_rejection_experiment(cfg);
    EXPECT_EQ(a.rejection_rate, b.rejection_rate);
    EXPECT_EQ(a.standard_error, b.standard_error);
  }
}

TEST(Experiment, ParallelMatchesSerial) {
  SimConfig cfg = nl_config(Method::EGree, 0.5, 60, 150, 9);
  const auto serial = replicate_trajectories(cfg);
  cfg.jobs = 4;
  EXPECT_EQ(replicate_trajectories(cfg), serial);
  const double parallel = run_rejection_experiment(cfg).rejection_rate;
  cfg.jobs = 1;
  EXPECT_EQ(parallel, run_rejection_experiment(cfg).rejection_rate);
}

TEST(Experiment, SeedChangesData) {
  const SimConfig a = nl_config(Method::EGree, 0.0, 5, 1, 1);
  const SimConfig b = nl_config(Method::EGree, 0.0, 5, 1, 2);
  EXPECT_NE(replicate_data(a, 0), replicate_data(b, 0));
  EXPECT_NE(replicate_data(a, 0), replicate_data(a, 1));
}

TEST(Experiment, NullCalibration) {
  for (Method m : {Method::EMixture, Method::EGree, Method::EGree2s, Method::EMixture2s}) {
    const auto r = run_rejection_experiment(nl_config(m, 0.0, 100, 1000, 5));
    EXPECT_LE(r.rejection_rate, 0.05 + 3 * std::sqrt(0.05 * 0.95 / 1000.0)) << to_string(m);
  }
}

TEST(Experiment, PowerGrowsWithSampleSize) {
  double prev = -1.0;
  for (std::size_t n : {5, 20, 100, 500}) {
    const auto r = run_rejection_experiment(nl_config(Method::EGree, 1.0, n, 300, 3));
    EXPECT_GT(r.rejection_rate, prev) << "n " << n;
    prev = r.rejection_rate;
  }
  EXPECT_GT(run_rejection_experiment(nl_config(Method::EGree, 2.0, 500, 300, 3)).rejection_rate, 0.95);
}

TEST(Experiment, TerminalRuleRejectsLessOften) {
  SimConfig cfg = nl_config(Method::EMixture, 0.5, 100, 300, 7);
  const double crossing = run_rejection_experiment(cfg).rejection_rate;
  cfg.rule = DecisionRule::Terminal;
  EXPECT_LE(run_rejection_experiment(cfg).rejection_rate, crossing);
}

TEST(Experiment, DegenerateDataKeepsZeroLogWealth) {
  // Data at +-1 or 0 never exceed mu = 10, so every E is 0 and GREE never bets.
  SimConfig cfg = nl_config(Method::EGree, 0.0, 30, 20, 1);
  cfg.generator = Generator{ExtremalSymmetric{0.5}};
  cfg.hypothesis.spec.mu = 10.0;
  const auto r = run_avg_log_trajectory(cfg);
  for (double v : r.avg_log_trajectory.value()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.rejection_rate, 0.0);
}

TEST(Experiment, GreeGrowsFasterThanMixtureOnBeta) {
  for (double sigma : {0.05, 0.1}) {
    const auto gree = run_avg_log_trajectory(beta_config(Method::EGree, sigma, 50, 300));
    const auto mix = run_avg_log_trajectory(beta_config(Method::EMixture, sigma, 50, 300));
    EXPECT_GT(gree.avg_log_trajectory->back(), mix.avg_log_trajectory->back()) << "sigma " << sigma;
  }
}

TEST(Experiment, MeanWealthSummary) {
  SimConfig cfg = nl_config(Method::EMixture, 0.0, 20, 100, 2);
  const std::vector<std::size_t> times{1, 20};
  const auto w = mean_wealth_at(cfg, times);
  ASSERT_EQ(w.mean.size(), 2u);
  EXPECT_GT(w.mean[0], 0.0);
  EXPECT_GT(w.standard_error[1], 0.0);
  const std::vector<std::size_t> bad{21};
  EXPECT_THROW(mean_wealth_at(cfg, bad), Error);
}

TEST(Csv, ResultRow) {
  const SimConfig cfg = nl_config(Method::EGree, 0.5, 100, 1000, 1);
  ExperimentResult r;
  r.rejection_rate = 0.274;
  r.standard_error = std::sqrt(0.274 * 0.726 / 1000);
  std::ostringstream os;
  write_results_csv_header(os);
  write_result_csv_row(os, cfg, r);
  EXPECT_EQ(os.str(),
            "method,shape,generator,param,n,runs,threshold,rate,se\n"
            "egree,plain,NL,nu=0.5 eta2=1,100,1000,20,0.274,0.0141040419738\n");
}

TEST(Csv, Trajectory) {
  ExperimentResult a;
  a.avg_log_trajectory = std::vector<double>{0.0, 0.5};
  ExperimentResult b;
  b.avg_log_trajectory = std::vector<double>{0.25, -1.0};
  const std::vector<Method> methods{Method::EGree, Method::EMixture};
  const std::vector<ExperimentResult> results{a, b};
  std::ostringstream os;
  write_trajectory_csv(os, methods, results);
  EXPECT_EQ(os.str(), "t,mean_log_M_egree,mean_log_M_emixture\n1,0,0.25\n2,0.5,-1\n");
}
