#include "hdlss/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hdlss/dualpca.hpp"

namespace hdlss {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

constexpr double kBoundaryTol = 1e-12;

bool at_boundary(double alpha) { return std::abs(alpha - 1.0) <= kBoundaryTol; }

// Rate of the leading equicorrelation eigenvalue, (d rho + 1 - rho)^2.
double equi_alpha(const PowerLawRule& rho) { return std::max(2.0 * (1.0 - rho.decay), 0.0); }

double equi_tail(const PowerLawRule& rho) {
  // (1 - rho_d)^2 tends to (1 - r)^2 only when rho does not decay.
  return rho.decay == 0.0 ? (1.0 - rho.scale) * (1.0 - rho.scale) : 1.0;
}

void check_alpha(double alpha, const char* what) {
  if (at_boundary(alpha)) {
    std::ostringstream os;
    os << what << ": alpha = 1 sits on the boundary between consistency and strong "
       << "inconsistency and is not covered";
    fail(ErrorKind::BoundaryUnsupported, os.str());
  }
}

struct RawSpike {
  double alpha;
  double scale;
};

const std::vector<std::size_t> kTailGrid{1000, 10000, 100000, 1000000};

}  // namespace

std::size_t SpikeStructure::kappa() const noexcept {
  std::size_t k = 0;
  for (const auto& g : groups) k += g.size();
  return k;
}

std::vector<std::size_t> SpikeStructure::group_indices(std::size_t l) const {
  if (l < 1 || l > groups.size()) fail(ErrorKind::InvalidIndex, "group number out of range");
  std::size_t start = 1;
  for (std::size_t g = 0; g + 1 < l; ++g) start += groups[g].size();
  std::vector<std::size_t> out(groups[l - 1].size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = start + t;
  return out;
}

void SpikeStructure::validate() const {
  if (n < 2) fail(ErrorKind::InvalidArgument, "sample size n must be >= 2");
  for (std::size_t l = 0; l < groups.size(); ++l) {
    const auto& g = groups[l];
    std::ostringstream where;
    where << "group " << l + 1;
    if (g.scales.empty()) fail(ErrorKind::InvalidArgument, where.str() + " is empty");
    for (double c : g.scales)
      if (!(std::isfinite(c) && c > 0.0))
        fail(ErrorKind::InvalidArgument, where.str() + ": limit constants must be positive");
    if (!std::isfinite(g.alpha)) fail(ErrorKind::InvalidArgument, where.str() + ": alpha not finite");
    check_alpha(g.alpha, where.str().c_str());
    if (g.alpha < 1.0)
      fail(ErrorKind::UnsupportedStructure,
           where.str() + ": alpha < 1 is below the spike threshold; fold these eigenvalues into the "
                         "tail and re-verify the tail epsilon-condition");
    if (l > 0 && !(g.alpha < groups[l - 1].alpha))
      fail(ErrorKind::UnsupportedStructure,
           where.str() + ": group rates must be strictly decreasing; merge equal-rate groups");
  }
  if (kappa() >= n) fail(ErrorKind::UnsupportedStructure, "spike count kappa must be < n");
  if (tail.epsilon_condition.k != kappa() + 1)
    fail(ErrorKind::InvalidArgument, "tail verdict must be evaluated at k = kappa + 1");
}

SpikeStructure derive_spike_structure(const CovarianceModel& model, std::size_t n,
                                      const NoiseSpec& noise) {
  using namespace family;
  std::vector<RawSpike> spikes;  // alpha > 1 only, in eigenvalue order
  double k_num = 1.0;            // n * K
  bool trace_linear = true;

  auto add = [&](double alpha, double scale, const char* what) {
    check_alpha(alpha, what);
    if (alpha > 1.0) spikes.push_back({alpha, scale});
  };

  if (model.get_if<Identity>()) {
  } else if (const auto* f = model.get_if<SingleSpike>()) {
    add(f->alpha, f->c1, "single_spike");
    k_num = f->base;
  } else if (const auto* f = model.get_if<MultiSpikeGroups>()) {
    std::vector<SpikeGroup> sorted = f->groups;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const SpikeGroup& a, const SpikeGroup& b) { return a.alpha > b.alpha; });
    for (std::size_t g = 0; g < sorted.size(); ++g) {
      if (g > 0 && sorted[g].alpha == sorted[g - 1].alpha && sorted[g].alpha > 1.0)
        fail(ErrorKind::UnsupportedStructure,
             "two declared groups share the rate alpha; declare them as one group");
      std::vector<double> cs = sorted[g].scales;
      std::sort(cs.begin(), cs.end(), std::greater<>());
      for (double c : cs) add(sorted[g].alpha, c, "multi_spike_groups");
    }
    k_num = f->base;
  } else if (const auto* f = model.get_if<PolynomialDecay>()) {
    k_num = f->beta == 0.0 ? 1.0 : 0.0;
  } else if (model.get_if<ExponentialDecay>()) {
    k_num = 0.0;
  } else if (const auto* f = model.get_if<GrowingSpikes>()) {
    check_alpha(f->alpha, "growing_spikes");
    if (f->beta == 0.0) {
      add(f->alpha, f->c1, "growing_spikes");
      k_num = f->c2;
    } else {
      if (f->alpha > 1.0)
        fail(ErrorKind::UnsupportedStructure,
             "growing_spikes with alpha > 1 has a spike count that grows with d; the classifier "
             "needs a fixed kappa < n");
      const double excess = f->alpha + f->beta;
      trace_linear = excess <= 1.0 + kBoundaryTol;
      k_num = excess < 1.0 - kBoundaryTol ? f->c2 : f->c1 + f->c2;
    }
  } else if (const auto* f = model.get_if<Equicorrelation>()) {
    add(equi_alpha(f->rho), f->rho.scale * f->rho.scale, "equicorrelation");
    k_num = equi_tail(f->rho);
  } else if (const auto* f = model.get_if<BlockEquicorrelation>()) {
    // Ambient dimension D = 2b: lambda ~ r^2 b^alpha = r^2 2^-alpha D^alpha.
    const double a1 = equi_alpha(f->rho1);
    const double a2 = equi_alpha(f->rho2);
    check_alpha(a1, "block_equicorrelation rho1");
    check_alpha(a2, "block_equicorrelation rho2");
    const double c1 = f->rho1.scale * f->rho1.scale * std::pow(2.0, -a1);
    const double c2 = f->rho2.scale * f->rho2.scale * std::pow(2.0, -a2);
    if (a1 > 1.0) spikes.push_back({a1, c1});
    if (a2 > 1.0) spikes.push_back({a2, c2});
    k_num = 0.5 * (equi_tail(f->rho1) + equi_tail(f->rho2));
  } else {
    fail(ErrorKind::UnsupportedStructure,
         "explicit_diagonal has no dimension index; no asymptotic structure can be derived");
  }

  SpikeStructure s;
  s.n = n;
  for (const auto& sp : spikes) {
    if (!s.groups.empty() && s.groups.back().alpha == sp.alpha)
      s.groups.back().scales.push_back(sp.scale);
    else
      s.groups.push_back({sp.alpha, {sp.scale}});
  }
  // rho2 decaying slower than rho1 would put the rates out of order.
  for (std::size_t l = 1; l < s.groups.size(); ++l)
    if (s.groups[l].alpha > s.groups[l - 1].alpha)
      fail(ErrorKind::UnsupportedStructure, "spike rates are not in eigenvalue order");

  s.tail.epsilon_condition = condition_check(model, s.kappa() + 1, kTailGrid);
  s.tail.trace_linear = trace_linear;
  if (trace_linear) s.tail.limit_constant = k_num / static_cast<double>(n);
  s.z_assumption = noise.independent_components() && model.mixing() == Mixing::IndependentComponents
                       ? ZAssumption::IndependentBounded8th
                       : ZAssumption::RhoMixingBounded4th;
  return s;
}

std::string_view to_string(DirectionVerdict v) noexcept {
  switch (v) {
    case DirectionVerdict::Consistent: return "consistent";
    case DirectionVerdict::SubspaceConsistent: return "subspace_consistent";
    case DirectionVerdict::StronglyInconsistent: return "strongly_inconsistent";
  }
  return "unknown";
}

std::string_view to_string(ConvergenceMode m) noexcept {
  return m == ConvergenceMode::AlmostSure ? "almost_sure" : "in_probability";
}

std::string_view to_string(LimitLaw law) noexcept {
  switch (law) {
    case LimitLaw::ScaledWishartEigen: return "scaled_wishart_eigen";
    case LimitLaw::ChiSqOverN: return "chisq_over_n";
    case LimitLaw::TailConstant: return "tail_constant";
  }
  return "unknown";
}

std::string_view to_string(BlockCase c) noexcept {
  switch (c) {
    case BlockCase::BothConsistent: return "both_consistent";
    case BlockCase::BothSubspaceConsistent: return "both_subspace_consistent";
    case BlockCase::FirstConsistentSecondInconsistent:
      return "first_consistent_second_strongly_inconsistent";
    case BlockCase::BothStronglyInconsistent: return "both_strongly_inconsistent";
  }
  return "unknown";
}

RegimeVerdict classify(const SpikeStructure& structure) {
  structure.validate();
  if (structure.tail.epsilon_condition.epsilon_condition != Verdict::Holds)
    fail(ErrorKind::UnsupportedStructure,
         "the tail epsilon-condition at k = kappa + 1 does not hold (verdict: " +
             std::string(to_string(structure.tail.epsilon_condition.epsilon_condition)) + ")");
  if (!structure.tail.trace_linear)
    fail(ErrorKind::UnsupportedStructure, "the tail trace grows faster than d");

  RegimeVerdict out;
  out.directions.reserve(structure.n);
  for (std::size_t l = 1; l <= structure.groups.size(); ++l) {
    const auto& g = structure.groups[l - 1];
    const auto members = structure.group_indices(l);
    std::vector<double> cs = g.scales;
    std::sort(cs.begin(), cs.end());
    const bool distinct = std::adjacent_find(cs.begin(), cs.end()) == cs.end();
    for (std::size_t i : members) {
      DirectionRegime r;
      r.index = i;
      r.verdict = members.size() == 1 ? DirectionVerdict::Consistent
                                      : DirectionVerdict::SubspaceConsistent;
      r.group = members;
      r.group_number = l;
      r.growing_n_consistent = distinct;
      out.directions.push_back(std::move(r));
    }
  }
  for (std::size_t i = structure.kappa() + 1; i <= structure.n; ++i) {
    DirectionRegime r;
    r.index = i;
    out.directions.push_back(std::move(r));
  }

  const auto& tail = structure.tail.epsilon_condition;
  const bool certified = tail.strong_epsilon_condition == Verdict::Holds && tail.basis == Basis::Analytic;
  out.mode = structure.z_assumption == ZAssumption::IndependentBounded8th && certified
                 ? ConvergenceMode::AlmostSure
                 : ConvergenceMode::InProbability;
  return out;
}

std::vector<EigenvalueLimit> predict_eigenvalue_limits(const SpikeStructure& structure,
                                                       bool gaussian) {
  structure.validate();
  std::vector<EigenvalueLimit> out;
  out.reserve(structure.n);
  for (std::size_t l = 1; l <= structure.groups.size(); ++l) {
    const auto& g = structure.groups[l - 1];
    const auto members = structure.group_indices(l);
    for (std::size_t t = 0; t < members.size(); ++t) {
      EigenvalueLimit e;
      e.index = members[t];
      e.group = l;
      e.order = t + 1;
      e.scales = g.scales;
      e.scale_exponent = g.alpha;
      e.n = structure.n;
      e.law = gaussian && members.size() == 1 ? LimitLaw::ChiSqOverN : LimitLaw::ScaledWishartEigen;
      out.push_back(std::move(e));
    }
  }
  for (std::size_t i = structure.kappa() + 1; i <= structure.n; ++i) {
    EigenvalueLimit e;
    e.index = i;
    e.law = LimitLaw::TailConstant;
    e.tail_constant = structure.tail.limit_constant.value_or(0.0);
    e.n = structure.n;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<double> sample_limit(const EigenvalueLimit& limit, std::size_t count,
                                 std::uint64_t seed) {
  std::vector<double> out(count);
  const double n = static_cast<double>(limit.n);
  std::mt19937_64 rng(seed);
  switch (limit.law) {
    case LimitLaw::TailConstant:
      std::fill(out.begin(), out.end(), limit.tail_constant);
      break;
    case LimitLaw::ChiSqOverN: {
      const double c = limit.scales.empty() ? 1.0 : limit.scales.front();
      std::chi_squared_distribution<double> chi(n);
      for (auto& v : out) v = c * chi(rng) / n;
      break;
    }
    case LimitLaw::ScaledWishartEigen: {
      const auto k = static_cast<Eigen::Index>(limit.scales.size());
      if (k == 0 || limit.order < 1 || limit.order > limit.scales.size())
        fail(ErrorKind::InvalidArgument, "Wishart limit needs scales and a valid order");
      Vector root(k);
      for (Eigen::Index t = 0; t < k; ++t) root(t) = std::sqrt(limit.scales[t]);
      std::normal_distribution<double> normal;
      Matrix g(k, static_cast<Eigen::Index>(limit.n));
      Eigen::SelfAdjointEigenSolver<Matrix> solver;
      for (auto& v : out) {
        for (Eigen::Index c = 0; c < g.cols(); ++c)
          for (Eigen::Index r = 0; r < k; ++r) g(r, c) = normal(rng);
        const Matrix half = root.asDiagonal() * g;
        const Matrix w = half * half.transpose() / n;
        solver.compute(w, Eigen::EigenvaluesOnly);
        v = solver.eigenvalues()(k - static_cast<Eigen::Index>(limit.order));
      }
      break;
    }
  }
  return out;
}

BlockCase block_regime(const PowerLawRule& rho1, const PowerLawRule& rho2) {
  for (const auto* r : {&rho1, &rho2}) {
    if (!(r->scale > 0.0) || !(r->decay >= 0.0) || (r->decay == 0.0 && r->scale >= 1.0))
      fail(ErrorKind::InvalidArgument, "rho rules must satisfy 0 < rho_d < 1");
    if (std::abs(r->decay - 0.5) <= kBoundaryTol)
      fail(ErrorKind::BoundaryUnsupported,
           "a rho decaying exactly like d^-1/2 is the boundary case and is not covered");
  }
  if (rho1.decay > rho2.decay || (rho1.decay == rho2.decay && rho1.scale < rho2.scale))
    fail(ErrorKind::InvalidArgument, "block rules must satisfy rho2_d <= rho1_d for large d");

  const bool first_strong = rho1.decay < 0.5;
  const bool second_strong = rho2.decay < 0.5;
  if (!first_strong) return BlockCase::BothStronglyInconsistent;
  if (!second_strong) return BlockCase::FirstConsistentSecondInconsistent;
  return rho1.decay == rho2.decay ? BlockCase::BothSubspaceConsistent
                                  : BlockCase::BothConsistent;
}

std::optional<BlockCase> block_case_of(const RegimeVerdict& verdict) {
  if (verdict.directions.size() < 2) return std::nullopt;
  const auto a = verdict.directions[0].verdict;
  const auto b = verdict.directions[1].verdict;
  using V = DirectionVerdict;
  if (a == V::Consistent && b == V::Consistent) return BlockCase::BothConsistent;
  if (a == V::SubspaceConsistent && b == V::SubspaceConsistent)
    return BlockCase::BothSubspaceConsistent;
  if (a == V::Consistent && b == V::StronglyInconsistent)
    return BlockCase::FirstConsistentSecondInconsistent;
  if (a == V::StronglyInconsistent && b == V::StronglyInconsistent)
    return BlockCase::BothStronglyInconsistent;
  return std::nullopt;
}

WeylReport weyl_check(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    fail(ErrorKind::Shape, "weyl_check needs two square matrices of equal size");
  const auto m = static_cast<std::size_t>(a.rows());
  if (m == 0 || m > 16) fail(ErrorKind::InvalidArgument, "weyl_check supports sizes 1..16");

  const Vector fa = eigendecompose(a).values;
  const Vector fb = eigendecompose(b).values;
  const Vector fs = eigendecompose(a + b).values;
  // phi(v, i) with 1-based i, matching the inequalities as usually written.
  auto phi = [](const Vector& v, std::size_t i) { return v(static_cast<Eigen::Index>(i - 1)); };

  WeylReport r;
  r.tolerance = 1e-10 * (fa.cwiseAbs().maxCoeff() + fb.cwiseAbs().maxCoeff());
  for (std::size_t k = 1; k <= m; ++k) {
    for (std::size_t j = 0; k + j <= m; ++j) {
      const double lower = phi(fa, k + j) + phi(fb, m - j);
      r.worst_violation = std::max(r.worst_violation, lower - phi(fs, k));
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double upper = phi(fa, k - j) + phi(fb, 1 + j);
      r.worst_violation = std::max(r.worst_violation, phi(fs, k) - upper);
    }
  }
  r.pass = r.worst_violation <= r.tolerance;
  return r;
}

nlohmann::json to_json(const RegimeVerdict& verdict) {
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& d : verdict.directions) {
    nlohmann::json row{{"i", d.index}, {"verdict", to_string(d.verdict)}, {"group", d.group}};
    if (d.group_number) {
      row["growing_n"] = d.growing_n_consistent ? "consistent" : "subspace_consistent";
    }
    dirs.push_back(std::move(row));
  }
  return {{"directions", std::move(dirs)}, {"mode", to_string(verdict.mode)}};
}

nlohmann::json to_json(const std::vector<EigenvalueLimit>& limits) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : limits) {
    nlohmann::json row{{"i", e.index}, {"law", to_string(e.law)}};
    if (e.law == LimitLaw::TailConstant) {
      row["scale_exponent"] = 1.0;
      row["K"] = e.tail_constant;
    } else {
      row["group"] = e.group;
      row["order"] = e.order;
      row["scales"] = e.scales;
      row["scale_exponent"] = e.scale_exponent;
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace hdlss
