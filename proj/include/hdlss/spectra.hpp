#pragma once

// Covariance-model families indexed by dimension, their population spectra,
// sphericity measures, and the epsilon-condition classifier.
//
// Component indices (k, j, l) are 1-based throughout this header, matching
// the usual lambda_1 >= lambda_2 >= ... labelling. Container access on
// EigenSpectrum::at() is 0-based.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hdlss/error.hpp"

namespace hdlss {

/// rho_d = scale * d^(-decay). The only rho rule with an analytic regime map.
struct PowerLawRule {
  double scale = 0.5;
  double decay = 0.0;

  double at(double d) const;

  friend bool operator==(const PowerLawRule&, const PowerLawRule&) = default;
};

namespace family {

struct Identity {
  friend bool operator==(const Identity&, const Identity&) = default;
};

/// lambda_1 = c1 * d^alpha, lambda_2..d = base.
struct SingleSpike {
  double alpha = 1.5;
  double c1 = 1.0;
  double base = 1.0;

  friend bool operator==(const SingleSpike&, const SingleSpike&) = default;
};

struct SpikeGroup {
  double alpha = 1.5;
  std::vector<double> scales;  // c_i, one per spike in the group

  friend bool operator==(const SpikeGroup&, const SpikeGroup&) = default;
};

/// Groups of spikes c_i * d^alpha_l in declaration order, tail = base.
/// base == 0 gives the singular case.
struct MultiSpikeGroups {
  std::vector<SpikeGroup> groups;
  double base = 1.0;

  friend bool operator==(const MultiSpikeGroups&, const MultiSpikeGroups&) = default;
};

/// lambda_i = i^(-beta).
struct PolynomialDecay {
  double beta = 0.5;

  friend bool operator==(const PolynomialDecay&, const PolynomialDecay&) = default;
};

/// lambda_i = c^(-i), c > 1.
struct ExponentialDecay {
  double c = 2.0;

  friend bool operator==(const ExponentialDecay&, const ExponentialDecay&) = default;
};

/// floor(d^beta) spikes of c1 * d^alpha, remaining eigenvalues c2.
struct GrowingSpikes {
  double alpha = 0.5;
  double beta = 0.5;
  double c1 = 1.0;
  double c2 = 1.0;

  friend bool operator==(const GrowingSpikes&, const GrowingSpikes&) = default;
};

/// Sigma = F F' with F = (1 - rho) I + rho J.
struct Equicorrelation {
  PowerLawRule rho;

  friend bool operator==(const Equicorrelation&, const Equicorrelation&) = default;
};

/// Two equicorrelation blocks of size d/2 each; the model dimension is the
/// ambient dimension 2 * block.
struct BlockEquicorrelation {
  PowerLawRule rho1;
  PowerLawRule rho2;

  friend bool operator==(const BlockEquicorrelation&, const BlockEquicorrelation&) = default;
};

/// Fixed nonincreasing spectrum, valid only at d == values.size().
struct ExplicitDiagonal {
  std::vector<double> values;

  friend bool operator==(const ExplicitDiagonal&, const ExplicitDiagonal&) = default;
};

}  // namespace family

using Family = std::variant<family::Identity, family::SingleSpike, family::MultiSpikeGroups,
                            family::PolynomialDecay, family::ExponentialDecay,
                            family::GrowingSpikes, family::Equicorrelation,
                            family::BlockEquicorrelation, family::ExplicitDiagonal>;

enum class Mixing { IndependentComponents, RhoMixingUnderPermutation, NotRhoMixing };

std::string_view to_string(Mixing mixing) noexcept;
Mixing mixing_from_string(std::string_view name);

/// A d-indexed family of population covariance spectra. Immutable once built;
/// the constructor validates every parameter.
class CovarianceModel {
 public:
  explicit CovarianceModel(Family family, Mixing mixing = Mixing::IndependentComponents);

  static CovarianceModel identity() { return CovarianceModel(family::Identity{}); }

  const Family& family() const noexcept { return family_; }
  Mixing mixing() const noexcept { return mixing_; }
  std::string_view family_name() const noexcept;

  /// Smallest dimension at which eigenvalues() is defined.
  std::size_t min_dimension() const noexcept;

  /// True when U != I, i.e. population eigenvectors are not coordinate axes.
  bool has_dense_eigenvectors() const noexcept;

  template <class F>
  const F* get_if() const noexcept { return std::get_if<F>(&family_); }

  friend bool operator==(const CovarianceModel&, const CovarianceModel&) = default;

 private:
  Family family_;
  Mixing mixing_;
};


/// A run of `count` identical eigenvalues.
struct EigenRun {
  double value = 0.0;
  std::size_t count = 0;
};

/// Nonincreasing, nonnegative spectrum stored as runs, so a d = 10^6 spike
/// model costs O(number of distinct values).
class EigenSpectrum {
 public:
  explicit EigenSpectrum(std::vector<EigenRun> runs);

  std::size_t dimension() const noexcept { return dimension_; }
  const std::vector<EigenRun>& runs() const noexcept { return runs_; }

  /// 0-based element access; O(log runs).
  double at(std::size_t index) const;
  /// Sum of lambda_i for i >= k (1-based).
  double tail_sum(std::size_t k = 1) const;
  /// Sum of lambda_i^2 for i >= k (1-based).
  double tail_sum_squares(std::size_t k = 1) const;
  double trace() const { return tail_sum(1); }

  std::vector<double> materialize() const;

 private:
  std::vector<EigenRun> runs_;
  std::vector<std::size_t> run_start_;  // 0-based start offset of each run
  std::size_t dimension_ = 0;
};

/// Analytic population spectrum at dimension d, sorted nonincreasing.
EigenSpectrum eigenvalues(const CovarianceModel& model, std::size_t d);

struct SphericityReport {
  std::size_t k = 1;
  double epsilon_k = 0.0;
  double d_epsilon_k = 0.0;
  double sqrtd_epsilon_k = 0.0;
};

/// eps_k = (sum_{i>=k} lambda_i)^2 / (d * sum_{i>=k} lambda_i^2), with the
/// full ambient d in the denominator.
SphericityReport sphericity(const EigenSpectrum& spectrum, std::size_t k);

enum class Verdict { Holds, Fails, Unknown };
enum class Basis { Analytic, NumericTrend };

std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(Basis b) noexcept;

struct ConditionVerdict {
  Verdict epsilon_condition = Verdict::Unknown;
  Verdict strong_epsilon_condition = Verdict::Unknown;
  std::size_t k = 1;
  Basis basis = Basis::Analytic;
  /// Smallest l >= k witnessing the strong condition, when it holds.
  std::optional<std::size_t> strong_index;
};

/// Growth factor per grid step required to call a trend divergent.
inline constexpr double kTrendHoldsFactor = 2.0;

/// Closed-form classification when the family admits one.
std::optional<ConditionVerdict> analytic_condition(const CovarianceModel& model, std::size_t k);

/// Evaluates d*eps_k and sqrt(d)*eps_l along the grid. Holds when every step
/// grows by kTrendHoldsFactor, Fails when the sequence never increases,
/// otherwise Unknown.
ConditionVerdict trend_condition(const CovarianceModel& model, std::size_t k,
                                 std::span<const std::size_t> d_grid);

/// Analytic verdict when available, otherwise the numeric trend over d_grid.
ConditionVerdict condition_check(const CovarianceModel& model, std::size_t k,
                                 std::span<const std::size_t> d_grid);

/// Frame of a coordinate vector: population eigenbasis (u_j = e_j) or the
/// ambient coordinates in which Sigma = U Lambda U'.
enum class Frame { Eigenbasis, Ambient };

/// u_j' v without materializing U. j is 1-based; v must be unit length.
double population_eigvec_inner(const CovarianceModel& model, std::size_t d, std::size_t j,
                               std::span<const double> v, Frame frame = Frame::Ambient);

/// out = U * coeffs, mapping eigenbasis coordinates to ambient coordinates.
void eigenbasis_to_ambient(const CovarianceModel& model, std::span<const double> coeffs,
                           std::span<double> out);

}  // namespace hdlss
