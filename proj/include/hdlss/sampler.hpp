#pragma once

// Sphered noise Z, data synthesis X = U Lambda^{1/2} Z (held in eigenbasis
// coordinates), and the norm/distance concentration statistics.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "hdlss/spectra.hpp"

namespace hdlss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class NoiseLaw { Gaussian, Rademacher, UniformStd, ScaleMixture };

std::string_view to_string(NoiseLaw law) noexcept;
NoiseLaw noise_law_from_string(std::string_view name);

/// Component law of Z. Gaussian, Rademacher (+-1) and UniformStd (uniform on
/// [-sqrt 3, sqrt 3]) have independent unit-variance entries. ScaleMixture
/// draws each column as y or sigma*y with probability 1/2, rescaled to unit
/// variance: uncorrelated, but never rho-mixing.
struct NoiseSpec {
  NoiseLaw law = NoiseLaw::Gaussian;
  double sigma = 3.0;  // ScaleMixture only; must be > 1

  void validate() const;
  bool independent_components() const noexcept { return law != NoiseLaw::ScaleMixture; }
  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// Master seed plus the derivation (replicate, column) -> child seed. Every
/// column of every replicate draws from its own engine, so sampling order
/// and thread count never change the numbers, and the first rows of a
/// column are shared across dimensions (one infinite sequence truncated at d).
struct SeedSpec {
  std::uint64_t master_seed = 20090101;

  std::uint64_t child(std::uint64_t replicate, std::uint64_t column) const noexcept;
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// d x n sphered matrix for the given replicate.
Matrix sample_z(const NoiseSpec& noise, std::size_t d, std::size_t n, const SeedSpec& seed,
                std::uint64_t replicate = 0);

/// Data in a known frame, tied to the population model that produced it.
struct DataMatrix {
  Matrix values;  // d x n, one observation per column
  Frame frame = Frame::Eigenbasis;
  CovarianceModel model = CovarianceModel::identity();

  std::size_t d() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t n() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Scales row i of z by sqrt(lambda_i); the result is in eigenbasis
/// coordinates (U = I), which leaves every orthogonally invariant statistic
/// unchanged.
DataMatrix synthesize_x(const CovarianceModel& model, const Matrix& z);

/// Applies U column by column so the data sit in ambient coordinates.
DataMatrix to_ambient(const DataMatrix& x);

struct DistanceStats {
  std::vector<double> scaled_norms;      // ||x_j|| / sqrt(tr Sigma)
  std::vector<double> scaled_distances;  // ||x_j - x_k|| / sqrt(2 tr Sigma), j < k
};

DistanceStats distance_stats(const DataMatrix& x);

/// Debug dump: 16-byte header (d, n as little-endian u64) then row-major
/// little-endian doubles.
void write_binary(std::ostream& os, const Matrix& m);
Matrix read_binary(std::istream& is);

}  // namespace hdlss
