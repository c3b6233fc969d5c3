#include <doctest.h>

#include <cmath>
#include <random>

#include "hdlss/asymptotics.hpp"
#include "hdlss/harness.hpp"

using namespace hdlss;
using doctest::Approx;

namespace {

ExperimentPlan spike_plan(std::uint64_t seed = 1) {
  ExperimentPlan plan;
  plan.model = CovarianceModel(family::SingleSpike{1.5, 1.0, 1.0});
  plan.d_grid = {100, 1000, 10000};
  plan.replicates = 60;
  plan.seed = SeedSpec{seed};
  plan.metrics = {Metric::Angles, Metric::EigenvalueRatios};
  plan.tracked = {1, 2};
  return plan;
}

}  // namespace

TEST_CASE("summarize") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto s = summarize(v);
  CHECK(s.q50 == 3.0);
  CHECK(s.q25 == 2.0);
  CHECK(s.q05 == Approx(1.2));
  CHECK(s.q95 == Approx(4.8));
  CHECK(s.mean == 3.0);
  CHECK(s.sd == Approx(std::sqrt(2.5)));
  CHECK(summarize(std::vector<double>{7}).sd == 0.0);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), Error);

  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(1 + rng() % 40);
    for (double& t : x) t = e(rng);
    const auto q = summarize(x);
    CHECK(q.q05 <= q.q25);
    CHECK(q.q25 <= q.q50);
    CHECK(q.q50 <= q.q75);
    CHECK(q.q75 <= q.q95);
  }
}

TEST_CASE("ks_statistic examples") {
  std::vector<double> ones(100, 1.0);
  CHECK(ks_statistic(ones, ChiSqOverNRef{5, 1.0}).rejected);
  CHECK(ks_statistic(ones, ones).statistic == 0.0);
  CHECK_THROWS_AS(ks_statistic(std::vector<double>(29, 1.0), ChiSqOverNRef{5, 1.0}), Error);

  int accepted = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::chi_squared_distribution<double> chi(5.0);
    std::vector<double> x(10000);
    for (double& t : x) t = chi(rng) / 5.0;
    accepted += !ks_statistic(x, ChiSqOverNRef{5, 1.0}).rejected;
  }
  CHECK(accepted >= 98);

  CHECK(chisq_over_n_cdf({2, 1.0}, 1.0) == Approx(1.0 - std::exp(-1.0)));
  CHECK(chisq_over_n_cdf({4, 2.0}, 0.0) == 0.0);
}

TEST_CASE("trend_verdict examples") {
  const Thresholds t;
  CHECK(trend_verdict(std::vector<double>{30, 12, 4}, TrendTarget::Zero, t).direction == TrendDirection::ToZero);
  CHECK(trend_verdict(std::vector<double>{60, 75, 86}, TrendTarget::RightAngle, t).direction ==
        TrendDirection::ToRightAngle);
  CHECK(trend_verdict(std::vector<double>{45, 46, 44}, TrendTarget::Zero, t).direction == TrendDirection::Flat);
  CHECK(trend_verdict(std::vector<double>{30, 12, 11}, TrendTarget::Zero, t).direction ==
        TrendDirection::Inconclusive);
  CHECK(trend_verdict(std::vector<double>{30, 32, 4}, TrendTarget::Zero, t).direction ==
        TrendDirection::Inconclusive);
  CHECK(trend_verdict(std::vector<double>{60, 75, 79}, TrendTarget::RightAngle, t).direction ==
        TrendDirection::Inconclusive);
  CHECK(trend_verdict(std::vector<double>{30, 4}, TrendTarget::Zero, t).direction == TrendDirection::Inconclusive);
  const auto d = trend_verdict(std::vector<double>{3, 2, 1}, TrendTarget::Zero, t, "angle_deg_1");
  CHECK(d.metric == "angle_deg_1");
  CHECK(d.evidence == std::vector<double>{3, 2, 1});
}

TEST_CASE("plan validation") {
  ExperimentPlan plan = spike_plan();
  plan.d_grid = {1000, 100};
  CHECK_THROWS_AS(plan.validate(), Error);
  plan.d_grid = {10, 100};
  CHECK_THROWS_AS(plan.validate(), Error);
  plan.d_grid = {100};
  plan.tracked = {11};
  CHECK_THROWS_AS(plan.validate(), Error);
  plan.tracked = {};
  CHECK(plan.tracked_for(4) == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("run_experiment: zero replicates give an empty report") {
  ExperimentPlan plan = spike_plan();
  plan.replicates = 0;
  const auto report = run_experiment(plan);
  CHECK(report.cells.empty());
  CHECK(report.to_csv() == "d,metric,q05,q25,q50,q75,q95,mean,sd,n_rep,failures\n");
}

TEST_CASE("run_experiment: spike angle shrinks and tail angles grow") {
  const auto plan = spike_plan();
  const auto report = run_experiment(plan);
  const auto a1 = report.median_series(angle_metric(1), 10, plan.d_grid);
  CHECK(a1[0] > a1[1]);
  CHECK(a1[1] > a1[2]);
  CHECK(a1[2] < 10.0);
  const auto a2 = report.median_series(angle_metric(2), 10, plan.d_grid);
  CHECK(a2[0] < a2[1]);
  CHECK(a2[1] < a2[2]);
  for (const auto& cell : report.cells) {
    CHECK(cell.replicates == plan.replicates);
    CHECK(cell.samples.size() == plan.replicates);
    CHECK(cell.summary.q05 <= cell.summary.q95);
  }
}

TEST_CASE("run_experiment: determinism across thread counts") {
  auto plan = spike_plan(5);
  plan.d_grid = {100, 1000};
  plan.replicates = 40;
  plan.metrics.insert(Metric::DistanceStats);
  plan.jobs = 1;
  const auto serial = run_experiment(plan);
  plan.jobs = 4;
  const auto parallel = run_experiment(plan);
  CHECK(serial.to_csv() == parallel.to_csv());
  CHECK(serial.to_json().dump() == parallel.to_json().dump());
  CHECK(run_experiment(plan).to_csv() == parallel.to_csv());
}

TEST_CASE("run_experiment: dual deviation decreases for the identity model") {
  ExperimentPlan plan;
  plan.n_grid = {5};
  plan.d_grid = {100, 1000, 10000};
  plan.replicates = 100;
  plan.metrics = {Metric::DualDeviation};
  const auto report = run_experiment(plan);
  const auto s = report.median_series("dual_deviation", 5, plan.d_grid);
  CHECK(s[0] > s[1]);
  CHECK(s[1] > s[2]);
}

TEST_CASE("trend decisions do not depend on the master seed") {
  std::vector<TrendDirection> first;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto plan = spike_plan(seed * 7919);
    const auto report = run_experiment(plan);
    const std::vector<TrendDirection> now{
        trend_verdict(report.median_series(angle_metric(1), 10, plan.d_grid), TrendTarget::Zero).direction,
        trend_verdict(report.median_series(angle_metric(2), 10, plan.d_grid), TrendTarget::RightAngle).direction};
    if (first.empty()) first = now;
    CHECK(now == first);
  }
  CHECK(first[0] == TrendDirection::ToZero);
}

TEST_CASE("verify_prediction: single spike passes, scale mixture control fails") {
  auto plan = spike_plan();
  plan.replicates = 100;
  const auto structure = derive_spike_structure(plan.model, 10, plan.noise);
  const auto report = verify_prediction(plan, classify(structure), predict_eigenvalue_limits(structure, true));
  for (const auto& c : report.checks) {
    INFO(c.name << ": " << c.detail);
    if (c.name.find("angle") != std::string::npos && c.name.find("_1") != std::string::npos) CHECK(c.passed);
  }

  ExperimentPlan control;
  control.noise = NoiseSpec{NoiseLaw::ScaleMixture, 3.0};
  control.d_grid = {100, 1000, 10000};
  control.replicates = 100;
  control.metrics = {Metric::DualDeviation};
  const auto cs = derive_spike_structure(control.model, 10, control.noise);
  const auto cr = verify_prediction(control, classify(cs), predict_eigenvalue_limits(cs, false));
  CHECK_FALSE(cr.passed());

  ExperimentPlan mismatched = spike_plan();
  const auto other = derive_spike_structure(CovarianceModel::identity(), 10);
  CHECK_THROWS_AS(verify_prediction(mismatched, classify(other), predict_eigenvalue_limits(other, true)), Error);
}

TEST_CASE("aggregate csv uses an n suffix for multi-n plans") {
  ExperimentPlan plan;
  plan.model = CovarianceModel(family::SingleSpike{1.5, 1.0, 1.0});
  plan.n_grid = {4, 6};
  plan.d_grid = {100};
  plan.replicates = 5;
  plan.tracked = {1};
  const auto report = run_experiment(plan);
  CHECK(report.multi_n);
  CHECK(report.to_csv().find("angle_deg_1@n6") != std::string::npos);
}
