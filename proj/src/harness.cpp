#include "hdlss/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "hdlss/dualpca.hpp"

namespace hdlss {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

bool strictly_increasing(const std::vector<std::size_t>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

std::string join(const std::vector<std::size_t>& v, char sep) {
  std::string s;
  for (std::size_t t = 0; t < v.size(); ++t) {
    if (t) s += sep;
    s += std::to_string(v[t]);
  }
  return s;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::Angles: return "angles";
    case Metric::SubspaceAngles: return "subspace_angles";
    case Metric::EigenvalueRatios: return "eigenvalue_ratios";
    case Metric::DualDeviation: return "dual_deviation";
    case Metric::DistanceStats: return "distance_stats";
  }
  return "unknown";
}

Metric metric_from_string(std::string_view name) {
  for (Metric m : {Metric::Angles, Metric::SubspaceAngles, Metric::EigenvalueRatios,
                   Metric::DualDeviation, Metric::DistanceStats})
    if (to_string(m) == name) return m;
  fail(ErrorKind::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

std::string angle_metric(std::size_t i) { return "angle_deg_" + std::to_string(i); }
std::string subspace_metric(std::size_t i, const std::vector<std::size_t>& group) {
  return "subspace_angle_deg_" + std::to_string(i) + "_J" + join(group, '-');
}
std::string eigenvalue_metric(std::size_t i) { return "eigenvalue_" + std::to_string(i); }
std::string eig_ratio_metric(std::size_t i) { return "eig_ratio_pop_" + std::to_string(i); }
std::string eig_over_d_metric(std::size_t i) { return "eig_over_d_" + std::to_string(i); }

void ExperimentPlan::validate() const {
  noise.validate();
  if (n_grid.empty()) fail(ErrorKind::InvalidArgument, "plan needs at least one sample size");
  if (d_grid.empty()) fail(ErrorKind::InvalidArgument, "plan needs at least one dimension");
  if (!strictly_increasing(n_grid)) fail(ErrorKind::InvalidArgument, "n_grid must be strictly increasing");
  if (!strictly_increasing(d_grid)) fail(ErrorKind::InvalidArgument, "d_grid must be strictly increasing");
  if (n_grid.front() < 2) fail(ErrorKind::InvalidArgument, "sample sizes must be >= 2");
  if (n_grid.back() >= d_grid.front())
    fail(ErrorKind::InvalidArgument, "max(n) must be below min(d_grid)");
  if (d_grid.front() < model.min_dimension())
    fail(ErrorKind::InvalidDimension, "d_grid starts below the model's minimum dimension");
  const std::size_t n_min = n_grid.front();
  for (std::size_t i : tracked)
    if (i < 1 || i > n_min) fail(ErrorKind::InvalidIndex, "tracked direction outside 1..n");
  for (const auto& g : tracked_groups) {
    if (g.empty()) fail(ErrorKind::InvalidIndex, "tracked group is empty");
    for (std::size_t j : g)
      if (j < 1 || j > n_min) fail(ErrorKind::InvalidIndex, "tracked group index outside 1..n");
  }
  const auto& t = thresholds;
  for (double v : {t.zero_ceiling_deg, t.right_angle_floor_deg, t.flat_band_deg, t.eigen_ratio_band,
                   t.tail_tolerance, t.dual_deviation_ceiling})
    if (!(std::isfinite(v) && v > 0.0)) fail(ErrorKind::InvalidArgument, "thresholds must be positive");
}

std::vector<std::size_t> ExperimentPlan::tracked_for(std::size_t n) const {
  if (!tracked.empty()) return tracked;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{1});
  return all;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::InsufficientData, "cannot summarize an empty sample");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  auto q = [&](double p) {
    const double h = (static_cast<double>(s.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
  };
  Summary out{q(0.05), q(0.25), q(0.5), q(0.75), q(0.95), 0.0, 0.0};
  const double m = static_cast<double>(s.size());
  // Accumulate in replicate order for reproducible rounding.
  long double sum = 0.0L;
  for (double v : values) sum += v;
  out.mean = static_cast<double>(sum / m);
  if (s.size() > 1) {
    long double ss = 0.0L;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(static_cast<double>(ss / (m - 1.0)));
  }
  return out;
}

const Cell* AggregateReport::find(std::size_t n, std::size_t d, std::string_view metric) const {
  for (const auto& c : cells)
    if (c.n == n && c.d == d && c.metric == metric) return &c;
  return nullptr;
}

const Cell& AggregateReport::at(std::size_t n, std::size_t d, std::string_view metric) const {
  if (const Cell* c = find(n, d, metric)) return *c;
  fail(ErrorKind::InvalidArgument, "report has no cell for metric '" + std::string(metric) +
                                       "' at n = " + std::to_string(n) + ", d = " + std::to_string(d));
}

std::vector<double> AggregateReport::median_series(std::string_view metric, std::size_t n,
                                                   std::span<const std::size_t> d_grid) const {
  std::vector<double> out;
  out.reserve(d_grid.size());
  for (std::size_t d : d_grid) out.push_back(at(n, d, metric).summary.q50);
  return out;
}

std::string AggregateReport::to_csv() const {
  std::string out = "d,metric,q05,q25,q50,q75,q95,mean,sd,n_rep,failures\n";
  for (const auto& c : cells) {
    const auto& s = c.summary;
    out += std::to_string(c.d) + ',' + c.metric;
    if (multi_n) out += "@n" + std::to_string(c.n);
    for (double v : {s.q05, s.q25, s.q50, s.q75, s.q95, s.mean, s.sd}) out += ',' + fmt(v);
    out += ',' + std::to_string(c.replicates) + ',' + std::to_string(c.failures) + '\n';
  }
  return out;
}

nlohmann::json AggregateReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : cells) {
    const auto& s = c.summary;
    rows.push_back({{"n", c.n},
                    {"d", c.d},
                    {"metric", c.metric},
                    {"q05", s.q05},
                    {"q25", s.q25},
                    {"q50", s.q50},
                    {"q75", s.q75},
                    {"q95", s.q95},
                    {"mean", s.mean},
                    {"sd", s.sd},
                    {"n_rep", c.replicates},
                    {"failures", c.failures}});
  }
  return {{"cells", std::move(rows)}};
}

namespace {

struct Layout {
  std::vector<std::string> names;
  std::vector<std::size_t> tracked;
  std::vector<std::size_t> population;  // j's whose inner products are needed
  std::size_t retained = 0;             // sample directions to recover
};

Layout layout_for(const ExperimentPlan& plan, std::size_t n) {
  Layout l;
  l.tracked = plan.tracked_for(n);
  const auto& m = plan.metrics;
  std::set<std::size_t> pop;
  if (m.count(Metric::DualDeviation)) l.names.push_back("dual_deviation");
  if (m.count(Metric::Angles)) {
    for (std::size_t i : l.tracked) {
      l.names.push_back(angle_metric(i));
      pop.insert(i);
      l.retained = std::max(l.retained, i);
    }
  }
  if (m.count(Metric::SubspaceAngles)) {
    for (const auto& g : plan.tracked_groups)
      for (std::size_t i : g) {
        l.names.push_back(subspace_metric(i, g));
        pop.insert(g.begin(), g.end());
        l.retained = std::max(l.retained, i);
      }
  }
  if (m.count(Metric::EigenvalueRatios)) {
    for (std::size_t i : l.tracked) {
      l.names.push_back(eigenvalue_metric(i));
      l.names.push_back(eig_ratio_metric(i));
      l.names.push_back(eig_over_d_metric(i));
    }
  }
  if (m.count(Metric::DistanceStats)) {
    l.names.push_back("norm_scaled");
    l.names.push_back("pair_dist_scaled");
  }
  l.population.assign(pop.begin(), pop.end());
  return l;
}

using Sample = std::vector<std::vector<double>>;  // one entry per layout name

Sample one_replicate(const ExperimentPlan& plan, const Layout& layout, const EigenSpectrum& spec,
                     std::size_t n, std::size_t d, std::size_t rep) {
  const Matrix z = sample_z(plan.noise, d, n, plan.seed, rep);
  DataMatrix x = synthesize_x(plan.model, z);
  if (plan.ambient) x = to_ambient(x);
  const DualDecomposition dual = decompose(x);
  const auto& m = plan.metrics;

  Sample out;
  out.reserve(layout.names.size());
  if (m.count(Metric::DualDeviation)) out.push_back({scaled_dual_deviation(dual)});

  if (layout.retained > 0) {
    const PrimalDirections dirs = recover_directions(x, dual, layout.retained);
    const InnerProductRows rows = inner_products(dirs, plan.model, d, layout.population);
    if (m.count(Metric::Angles))
      for (std::size_t i : layout.tracked) out.push_back({to_degrees(angle(rows.at(i, i)))});
    if (m.count(Metric::SubspaceAngles))
      for (const auto& g : plan.tracked_groups)
        for (std::size_t i : g) out.push_back({to_degrees(subspace_angle(rows, i, g))});
  }

  if (m.count(Metric::EigenvalueRatios)) {
    const double lambda_max = dual.eigenvalues(0);
    for (std::size_t i : layout.tracked) {
      const double ev = dual.eigenvalues(static_cast<Eigen::Index>(i - 1));
      if (!(lambda_max > 0.0) || ev <= kRankThreshold * lambda_max)
        fail(ErrorKind::RankDeficiency, "sample eigenvalue " + std::to_string(i) + " is zero");
      out.push_back({ev});
      out.push_back({ev / spec.at(i - 1)});
      out.push_back({ev / static_cast<double>(d)});
    }
  }

  if (m.count(Metric::DistanceStats)) {
    DistanceStats ds = distance_stats(x);
    out.push_back(std::move(ds.scaled_norms));
    out.push_back(std::move(ds.scaled_distances));
  }
  return out;
}

std::size_t worker_count(std::size_t requested, std::size_t tasks) {
  std::size_t jobs = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(jobs, tasks));
}

}  // namespace

AggregateReport run_experiment(const ExperimentPlan& plan, const ProgressFn& progress) {
  plan.validate();
  AggregateReport report;
  report.multi_n = plan.n_grid.size() > 1;
  if (plan.replicates == 0) return report;

  for (std::size_t n : plan.n_grid) {
    const Layout layout = layout_for(plan, n);
    for (std::size_t d : plan.d_grid) {
      const EigenSpectrum spec = eigenvalues(plan.model, d);
      std::vector<std::optional<Sample>> results(plan.replicates);
      std::atomic<std::size_t> next{0};
      std::exception_ptr error;
      std::mutex error_mutex;

      auto work = [&] {
        for (std::size_t rep = next++; rep < plan.replicates; rep = next++) {
          try {
            results[rep] = one_replicate(plan, layout, spec, n, d, rep);
          } catch (const Error& e) {
            if (e.kind() == ErrorKind::RankDeficiency) continue;  // left empty: a failure
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = plan.replicates;
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = plan.replicates;
          }
        }
      };
      const std::size_t workers = worker_count(plan.jobs, plan.replicates);
      std::vector<std::thread> pool;
      for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
      work();
      for (auto& t : pool) t.join();
      if (error) std::rethrow_exception(error);

      const std::size_t failures = static_cast<std::size_t>(
          std::count_if(results.begin(), results.end(), [](const auto& r) { return !r; }));
      if (failures * 20 > plan.replicates) {
        std::ostringstream os;
        os << failures << " of " << plan.replicates << " replicates failed at n = " << n
           << ", d = " << d << " (limit 5%)";
        fail(ErrorKind::ExcessiveFailures, os.str());
      }
      for (std::size_t k = 0; k < layout.names.size(); ++k) {
        Cell cell;
        cell.n = n;
        cell.d = d;
        cell.metric = layout.names[k];
        cell.replicates = plan.replicates - failures;
        cell.failures = failures;
        for (const auto& r : results)
          if (r) cell.samples.insert(cell.samples.end(), (*r)[k].begin(), (*r)[k].end());
        cell.summary = summarize(cell.samples);
        report.cells.push_back(std::move(cell));
      }
      if (progress) {
        std::ostringstream os;
        os << "n = " << n << ", d = " << d << ": " << plan.replicates - failures << " replicates";
        if (failures) os << " (" << failures << " failed)";
        progress(os.str());
      }
    }
  }
  return report;
}

std::string_view to_string(TrendDirection d) noexcept {
  switch (d) {
    case TrendDirection::ToZero: return "to_zero";
    case TrendDirection::ToRightAngle: return "to_right_angle";
    case TrendDirection::Flat: return "flat";
    case TrendDirection::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

TrendDecision trend_verdict(std::span<const double> series, TrendTarget target,
                            const Thresholds& thresholds, std::string metric) {
  TrendDecision out;
  out.metric = std::move(metric);
  out.evidence.assign(series.begin(), series.end());
  if (series.size() < 3) return out;

  bool dec = true, inc = true;
  for (std::size_t i = 1; i < series.size(); ++i) {
    dec = dec && series[i] < series[i - 1];
    inc = inc && series[i] > series[i - 1];
  }
  const bool to_zero = dec && series.back() < thresholds.zero_ceiling_deg;
  const bool to_right = inc && series.back() > thresholds.right_angle_floor_deg;
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());

  if (target == TrendTarget::Zero && to_zero) out.direction = TrendDirection::ToZero;
  else if (target == TrendTarget::RightAngle && to_right) out.direction = TrendDirection::ToRightAngle;
  else if (to_zero) out.direction = TrendDirection::ToZero;
  else if (to_right) out.direction = TrendDirection::ToRightAngle;
  else if (*hi - *lo <= thresholds.flat_band_deg) out.direction = TrendDirection::Flat;
  return out;
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : checks)
    rows.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail},
                    {"evidence", c.evidence}});
  return {{"passed", passed()}, {"checks", std::move(rows)}};
}

namespace {

std::string series_text(const std::vector<double>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + fmt(s[i]);
  return out + ")";
}

bool strictly_decreasing(const std::vector<double>& s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] < s[i - 1])) return false;
  return true;
}

// Largest grid point at least a decade below the top, else the one before it.
std::optional<std::size_t> decade_below(const std::vector<std::size_t>& grid) {
  if (grid.size() < 2) return std::nullopt;
  const double top = static_cast<double>(grid.back());
  for (auto it = grid.rbegin() + 1; it != grid.rend(); ++it)
    if (static_cast<double>(*it) * 10.0 <= top * (1.0 + 1e-12)) return *it;
  return grid[grid.size() - 2];
}

void ensure_consistent(const ExperimentPlan& plan, const RegimeVerdict& verdict,
                       const std::vector<EigenvalueLimit>& limits) {
  const std::size_t n = plan.n_grid.front();
  if (verdict.directions.size() != n || limits.size() != n)
    fail(ErrorKind::Configuration, "verdict and limits must cover i = 1..n for n = " +
                                       std::to_string(n));
  RegimeVerdict expected;
  try {
    expected = classify(derive_spike_structure(plan.model, n, plan.noise));
  } catch (const Error& e) {
    fail(ErrorKind::Configuration, std::string("plan model has no valid structure: ") + e.what());
  }
  for (std::size_t t = 0; t < n; ++t) {
    const auto& a = verdict.directions[t];
    const auto& b = expected.directions[t];
    if (a.index != b.index || a.verdict != b.verdict || a.group != b.group)
      fail(ErrorKind::Configuration,
           "verdict for direction " + std::to_string(t + 1) + " does not match the plan's model");
  }
}

}  // namespace

std::vector<Check> judge(const ExperimentPlan& plan, const RegimeVerdict& verdict,
                         const std::vector<EigenvalueLimit>& limits,
                         const AggregateReport& report) {
  ensure_consistent(plan, verdict, limits);
  const std::size_t n = plan.n_grid.front();
  const auto& grid = plan.d_grid;
  const std::size_t d_top = grid.back();
  const bool trend = grid.size() >= 3;
  const auto& th = plan.thresholds;
  const auto tracked = plan.tracked_for(n);
  auto is_tracked = [&](std::size_t i) {
    return std::find(tracked.begin(), tracked.end(), i) != tracked.end();
  };
  std::vector<Check> checks;

  // Angle checks: the full trend when the grid allows it, else the endpoint.
  auto angle_check = [&](const std::string& name, const std::string& metric, TrendTarget target) {
    Check c;
    c.name = name;
    if (!report.find(n, d_top, metric)) {
      c.detail = "metric " + metric + " missing from the report";
      checks.push_back(std::move(c));
      return;
    }
    c.evidence = report.median_series(metric, n, grid);
    const auto want = target == TrendTarget::Zero ? TrendDirection::ToZero : TrendDirection::ToRightAngle;
    if (trend) {
      const auto td = trend_verdict(c.evidence, target, th, metric);
      c.passed = td.direction == want;
      c.detail = "median " + metric + " " + series_text(c.evidence) + " -> " +
                 std::string(to_string(td.direction));
    } else {
      const double last = c.evidence.back();
      c.passed = target == TrendTarget::Zero ? last < th.zero_ceiling_deg
                                             : last > th.right_angle_floor_deg;
      c.detail = "median " + metric + " at d = " + std::to_string(d_top) + " is " + fmt(last);
    }
    checks.push_back(std::move(c));
  };

  for (const auto& dir : verdict.directions) {
    const std::size_t i = dir.index;
    if (!is_tracked(i)) continue;
    const std::string label = "direction " + std::to_string(i) + ": ";
    switch (dir.verdict) {
      case DirectionVerdict::Consistent:
        angle_check(label + "consistent", angle_metric(i), TrendTarget::Zero);
        break;
      case DirectionVerdict::SubspaceConsistent:
        angle_check(label + "subspace_consistent to {" + join(dir.group, ',') + "}",
                    subspace_metric(i, dir.group), TrendTarget::Zero);
        break;
      case DirectionVerdict::StronglyInconsistent:
        angle_check(label + "strongly_inconsistent", angle_metric(i), TrendTarget::RightAngle);
        break;
    }
  }

  if (plan.metrics.count(Metric::EigenvalueRatios)) {
    const auto lower = decade_below(grid);
    for (const auto& lim : limits) {
      const std::size_t i = lim.index;
      if (!is_tracked(i)) continue;
      const std::string label = "eigenvalue " + std::to_string(i) + ": ";
      if (lim.law == LimitLaw::TailConstant) {
        if (!(lim.tail_constant > 0.0)) continue;
        Check c;
        c.name = label + "lambda_hat/d -> K";
        const double med = report.at(n, d_top, eig_over_d_metric(i)).summary.q50;
        const double rel = std::abs(med - lim.tail_constant) / lim.tail_constant;
        c.evidence = {med, lim.tail_constant};
        c.passed = rel <= th.tail_tolerance;
        c.detail = "median " + fmt(med) + " vs K = " + fmt(lim.tail_constant) + " (relative gap " +
                   fmt(rel) + ")";
        checks.push_back(std::move(c));
        continue;
      }
      if (lower) {
        Check c;
        c.name = label + "lambda_hat/d^alpha stable";
        const double hi = report.at(n, d_top, eigenvalue_metric(i)).summary.q50 /
                          std::pow(static_cast<double>(d_top), lim.scale_exponent);
        const double lo = report.at(n, *lower, eigenvalue_metric(i)).summary.q50 /
                          std::pow(static_cast<double>(*lower), lim.scale_exponent);
        const double ratio = hi / lo;
        c.evidence = {lo, hi};
        c.passed = ratio >= 1.0 / th.eigen_ratio_band && ratio <= th.eigen_ratio_band;
        c.detail = "medians " + fmt(lo) + " (d = " + std::to_string(*lower) + ") and " + fmt(hi) +
                   " (d = " + std::to_string(d_top) + "), ratio " + fmt(ratio);
        checks.push_back(std::move(c));
      }
      if (lim.law == LimitLaw::ChiSqOverN) {
        const auto& cell = report.at(n, d_top, eig_ratio_metric(i));
        if (cell.samples.size() < kKsMinSamples) continue;
        Check c;
        c.name = label + "lambda_hat/lambda ~ chi2_n/n";
        const auto ks = ks_statistic(cell.samples, ChiSqOverNRef{n, 1.0});
        c.evidence = {ks.statistic, ks.critical};
        c.passed = !ks.rejected;
        c.detail = "KS D = " + fmt(ks.statistic) + ", critical " + fmt(ks.critical) + " at level 0.01";
        checks.push_back(std::move(c));
      }
    }
  }

  std::size_t kappa = 0;
  for (const auto& dir : verdict.directions)
    if (dir.group_number) ++kappa;
  if (kappa == 0 && plan.metrics.count(Metric::DualDeviation)) {
    Check c;
    c.name = "dual matrix: S_D/c_d -> I";
    c.evidence = report.median_series("dual_deviation", n, grid);
    const bool shrinking = !trend || strictly_decreasing(c.evidence);
    c.passed = shrinking && c.evidence.back() < th.dual_deviation_ceiling;
    c.detail = "median max|S_D/c_d - I| " + series_text(c.evidence) + ", ceiling " +
               fmt(th.dual_deviation_ceiling);
    checks.push_back(std::move(c));
  }

  if (plan.n_grid.size() > 1 && plan.metrics.count(Metric::Angles)) {
    const auto small = plan.tracked_for(plan.n_grid.front());
    for (const auto& dir : verdict.directions) {
      if (!dir.group_number || dir.group.size() < 2 || !dir.growing_n_consistent) continue;
      if (std::find(small.begin(), small.end(), dir.index) == small.end()) continue;
      Check c;
      c.name = "direction " + std::to_string(dir.index) + ": consistent as n grows";
      for (std::size_t nn : plan.n_grid)
        c.evidence.push_back(report.at(nn, d_top, angle_metric(dir.index)).summary.q50);
      c.passed = strictly_decreasing(c.evidence);
      c.detail = "median " + angle_metric(dir.index) + " over n = {" + join(plan.n_grid, ',') +
                 "} at d = " + std::to_string(d_top) + ": " + series_text(c.evidence);
      checks.push_back(std::move(c));
    }
  }
  return checks;
}

VerificationReport verify_prediction(const ExperimentPlan& plan, const RegimeVerdict& verdict,
                                     const std::vector<EigenvalueLimit>& limits,
                                     const ProgressFn& progress) {
  plan.validate();
  ensure_consistent(plan, verdict, limits);
  ExperimentPlan run = plan;
  run.metrics.insert(Metric::Angles);
  run.metrics.insert(Metric::EigenvalueRatios);
  bool kappa_zero = true;
  for (const auto& dir : verdict.directions) {
    if (!dir.group_number) continue;
    kappa_zero = false;
    if (dir.group.size() > 1) {
      run.metrics.insert(Metric::SubspaceAngles);
      if (std::find(run.tracked_groups.begin(), run.tracked_groups.end(), dir.group) ==
          run.tracked_groups.end())
        run.tracked_groups.push_back(dir.group);
    }
  }
  if (kappa_zero) run.metrics.insert(Metric::DualDeviation);

  VerificationReport out;
  out.aggregate = run_experiment(run, progress);
  if (run.replicates == 0) fail(ErrorKind::InsufficientData, "verification needs replicates > 0");
  out.checks = judge(run, verdict, limits, out.aggregate);
  return out;
}

}  // namespace hdlss
