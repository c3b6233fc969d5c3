#pragma once

// Predictive side of the laboratory: spike structures, per-direction regime
// verdicts, limiting eigenvalue laws, the block-equicorrelation regime map,
// and Weyl's eigenvalue inequalities as a checkable oracle.

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "hdlss/sampler.hpp"
#include "hdlss/spectra.hpp"

namespace hdlss {

enum class ZAssumption { RhoMixingBounded4th, IndependentBounded8th };

struct SpikeGroupSpec {
  double alpha = 1.5;
  std::vector<double> scales;  // limit constants c_i = lim lambda_i / d^alpha

  std::size_t size() const noexcept { return scales.size(); }
};

struct TailSpec {
  ConditionVerdict epsilon_condition;  // evaluated at k = kappa + 1
  bool trace_linear = true;            // sum over the tail is O(d)
  std::optional<double> limit_constant;  // K = lim (dn)^-1 sum_tail lambda_i
};

/// Spike groups with strictly decreasing rates alpha_1 > ... > alpha_p > 1,
/// kappa = sum of group sizes < n, and the tail beyond kappa.
struct SpikeStructure {
  std::vector<SpikeGroupSpec> groups;
  TailSpec tail;
  std::size_t n = 2;
  ZAssumption z_assumption = ZAssumption::RhoMixingBounded4th;

  std::size_t kappa() const noexcept;
  /// J_l for 1-based group number l, as 1-based component indices.
  std::vector<std::size_t> group_indices(std::size_t l) const;

  /// Throws BoundaryUnsupported for alpha == 1, UnsupportedStructure for any
  /// other violated hypothesis.
  void validate() const;
};

/// Re-expresses a model as a spike structure for sample size n: spikes with
/// alpha > 1 become groups, alpha < 1 spikes are folded into the tail and
/// the tail condition is re-verified.
SpikeStructure derive_spike_structure(const CovarianceModel& model, std::size_t n,
                                      const NoiseSpec& noise = {});

enum class DirectionVerdict { Consistent, SubspaceConsistent, StronglyInconsistent };
enum class ConvergenceMode { InProbability, AlmostSure };

std::string_view to_string(DirectionVerdict v) noexcept;
std::string_view to_string(ConvergenceMode m) noexcept;

struct DirectionRegime {
  std::size_t index = 1;
  DirectionVerdict verdict = DirectionVerdict::StronglyInconsistent;
  std::vector<std::size_t> group;  // J_l, empty for tail directions
  std::optional<std::size_t> group_number;
  /// Consistent once n also grows (distinct limit constants within J_l).
  bool growing_n_consistent = false;
};

struct RegimeVerdict {
  std::vector<DirectionRegime> directions;  // one per i = 1..n
  ConvergenceMode mode = ConvergenceMode::InProbability;
};

RegimeVerdict classify(const SpikeStructure& structure);

enum class LimitLaw { ScaledWishartEigen, ChiSqOverN, TailConstant };

std::string_view to_string(LimitLaw law) noexcept;

struct EigenvalueLimit {
  std::size_t index = 1;
  LimitLaw law = LimitLaw::TailConstant;
  std::size_t group = 0;             // 1-based l, 0 for the tail
  std::size_t order = 0;             // i* within the group
  std::vector<double> scales;        // diag(C_l)
  double scale_exponent = 1.0;       // alpha_l, or 1 for the tail
  double tail_constant = 0.0;        // K
  std::size_t n = 2;
};

std::vector<EigenvalueLimit> predict_eigenvalue_limits(const SpikeStructure& structure,
                                                       bool gaussian);

/// Draws from the limiting law of lambda_hat_i / d^scale_exponent. Wishart
/// draws use C^{1/2} G G' C^{1/2} / n with G a k x n standard normal matrix.
std::vector<double> sample_limit(const EigenvalueLimit& limit, std::size_t count,
                                 std::uint64_t seed);

enum class BlockCase {
  BothConsistent = 1,
  BothSubspaceConsistent = 2,
  FirstConsistentSecondInconsistent = 3,
  BothStronglyInconsistent = 4,
};

std::string_view to_string(BlockCase c) noexcept;

/// Regime of the two-block equicorrelation model from the decay exponents
/// of power-law rho rules.
BlockCase block_regime(const PowerLawRule& rho1, const PowerLawRule& rho2);

/// Maps the first two directions of a verdict onto the four block cases.
std::optional<BlockCase> block_case_of(const RegimeVerdict& verdict);

struct WeylReport {
  bool pass = true;
  double worst_violation = 0.0;
  double tolerance = 0.0;
};

/// Checks every shifted lower and upper Weyl bound for A + B.
WeylReport weyl_check(const Matrix& a, const Matrix& b);

nlohmann::json to_json(const RegimeVerdict& verdict);
nlohmann::json to_json(const std::vector<EigenvalueLimit>& limits);

}  // namespace hdlss
