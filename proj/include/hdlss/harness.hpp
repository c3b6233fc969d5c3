#pragma once

// Monte Carlo experiments over a dimension grid, their aggregate reports, and
// the checks that hold simulated trends against the classifier's predictions.

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdlss/asymptotics.hpp"
#include "hdlss/sampler.hpp"
#include "hdlss/spectra.hpp"

namespace hdlss {

enum class Metric { Angles, SubspaceAngles, EigenvalueRatios, DualDeviation, DistanceStats };

std::string_view to_string(Metric m) noexcept;
Metric metric_from_string(std::string_view name);

/// Finite-d stand-ins for "-> 0" and "-> pi/2". All plan-overridable.
struct Thresholds {
  double zero_ceiling_deg = 10.0;
  double right_angle_floor_deg = 80.0;
  double flat_band_deg = 2.0;
  double eigen_ratio_band = 2.0;     // medians of lambda_hat / d^alpha within this factor
  double tail_tolerance = 0.2;       // relative distance of lambda_hat / d to K
  double dual_deviation_ceiling = 0.1;

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct ExperimentPlan {
  CovarianceModel model = CovarianceModel::identity();
  NoiseSpec noise;
  std::vector<std::size_t> n_grid{10};
  std::vector<std::size_t> d_grid;
  std::size_t replicates = 100;
  SeedSpec seed;
  std::set<Metric> metrics{Metric::Angles};
  /// Index sets J (1-based) for subspace angles.
  std::vector<std::vector<std::size_t>> tracked_groups;
  /// Directions i (1-based) whose per-vector angles and eigenvalues are kept;
  /// empty means 1..n.
  std::vector<std::size_t> tracked;
  Thresholds thresholds;
  std::size_t jobs = 0;  // 0: hardware concurrency
  /// Rotate the data into ambient coordinates before decomposing.
  bool ambient = false;

  /// Grids increasing and nonempty, max(n) < min(d), tracked indices <= n.
  void validate() const;
  std::vector<std::size_t> tracked_for(std::size_t n) const;

  friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

struct Summary {
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
  double mean = 0, sd = 0;
};

/// Type-7 quantiles, mean and sample standard deviation. Empty input throws.
Summary summarize(std::span<const double> values);

struct Cell {
  std::size_t n = 0;
  std::size_t d = 0;
  std::string metric;
  Summary summary;
  std::vector<double> samples;  // in replicate order
  std::size_t replicates = 0;   // successful replicates
  std::size_t failures = 0;
};

struct AggregateReport {
  std::vector<Cell> cells;  // ordered by (n, d), metrics in first-seen order
  bool multi_n = false;

  const Cell* find(std::size_t n, std::size_t d, std::string_view metric) const;
  const Cell& at(std::size_t n, std::size_t d, std::string_view metric) const;
  std::vector<double> median_series(std::string_view metric, std::size_t n,
                                    std::span<const std::size_t> d_grid) const;

  /// Header d,metric,q05,q25,q50,q75,q95,mean,sd,n_rep,failures; metric names
  /// carry an @n<value> suffix when the plan has several sample sizes.
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Replicates run concurrently; the reduction is ordered by (n, d, replicate),
/// so the report depends on the plan alone. Rank-deficient replicates are
/// excluded and counted; more than 5% at any grid point throws.
AggregateReport run_experiment(const ExperimentPlan& plan, const ProgressFn& progress = {});

// Metric naming shared by the harness, the verifier and the CLI.
std::string angle_metric(std::size_t i);
std::string subspace_metric(std::size_t i, const std::vector<std::size_t>& group);
std::string eigenvalue_metric(std::size_t i);
std::string eig_ratio_metric(std::size_t i);
std::string eig_over_d_metric(std::size_t i);

/// c * chi^2_n / n.
struct ChiSqOverNRef {
  std::size_t n = 1;
  double scale = 1.0;
};

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;
  bool rejected = false;
};

inline constexpr double kKsCritical01 = 1.628;
inline constexpr std::size_t kKsMinSamples = 30;

double chisq_over_n_cdf(const ChiSqOverNRef& ref, double x);
KsResult ks_statistic(std::span<const double> samples, const ChiSqOverNRef& reference);
KsResult ks_statistic(std::span<const double> samples, std::span<const double> reference);

enum class TrendTarget { Zero, RightAngle };
enum class TrendDirection { ToZero, ToRightAngle, Flat, Inconclusive };

std::string_view to_string(TrendDirection d) noexcept;

struct TrendDecision {
  std::string metric;
  TrendDirection direction = TrendDirection::Inconclusive;
  std::vector<double> evidence;
};

TrendDecision trend_verdict(std::span<const double> median_series, TrendTarget target,
                            const Thresholds& thresholds = {}, std::string metric = {});

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
  std::vector<double> evidence;
};

struct VerificationReport {
  std::vector<Check> checks;
  AggregateReport aggregate;

  bool passed() const;
  nlohmann::json to_json() const;
};

/// Runs the plan (forcing the metrics the checks need) and judges every
/// predicted direction, eigenvalue law and, for kappa = 0, the dual matrix.
VerificationReport verify_prediction(const ExperimentPlan& plan, const RegimeVerdict& verdict,
                                     const std::vector<EigenvalueLimit>& limits,
                                     const ProgressFn& progress = {});

/// Same judgement on an existing report produced from `plan`.
std::vector<Check> judge(const ExperimentPlan& plan, const RegimeVerdict& verdict,
                         const std::vector<EigenvalueLimit>& limits,
                         const AggregateReport& report);

}  // namespace hdlss
