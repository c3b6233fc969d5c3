#pragma once

// Dual sample covariance S_D = X'X / n, its eigendecomposition, recovery of
// the primal sample directions, and angles to population eigenvectors via
// the inner-product rows p_ji = u_j' uhat_i.

#include <map>
#include <vector>

#include "hdlss/sampler.hpp"

namespace hdlss {

/// Dual eigenvalues closer than this (relative to the largest) form a tied
/// block whose individual directions are not identifiable.
inline constexpr double kTieTolerance = 1e-10;
/// Directions whose dual eigenvalue is at or below this fraction of the
/// largest one are treated as rank deficient.
inline constexpr double kRankThreshold = 1e-12;

struct EigenPairs {
  Vector values;   // descending
  Matrix vectors;  // columns orthonormal; largest-|.| coordinate positive
};

/// Symmetric eigensolve with descending order and a fixed sign convention.
/// Throws InvalidMatrix when A is not symmetric within 1e-10 relative.
EigenPairs eigendecompose(const Matrix& a);

struct DualDecomposition {
  Matrix dual_matrix;  // n x n
  Vector eigenvalues;  // descending, empty until decomposed
  Matrix eigenvectors;
  double c_d = 0.0;  // tr(Sigma) / n

  std::size_t n() const noexcept { return static_cast<std::size_t>(dual_matrix.rows()); }
  /// false for directions inside a tied eigenvalue block
  std::vector<bool> identifiable() const;
};

/// Matrix part only: S_D and c_d, symmetrized by averaging with the transpose.
DualDecomposition dual_covariance(const DataMatrix& x);

/// dual_covariance followed by eigendecompose.
DualDecomposition decompose(const DataMatrix& x);

struct PrimalDirections {
  Matrix directions;  // d x r, unit columns
  Vector eigenvalues;  // lambda_hat_1..r
  Frame frame = Frame::Eigenbasis;

  std::size_t retained() const noexcept { return static_cast<std::size_t>(directions.cols()); }
};

/// uhat_i = X v_i / ||X v_i|| for i = 1..r.
PrimalDirections recover_directions(const DataMatrix& x, const DualDecomposition& dual,
                                    std::size_t r);

/// Rows p_j. of the inner-product matrix keyed by tracked population index j
/// (1-based); entry i-1 of a row is u_j' uhat_i.
struct InnerProductRows {
  std::map<std::size_t, std::vector<double>> rows;

  double at(std::size_t j, std::size_t i) const;
};

InnerProductRows inner_products(const PrimalDirections& dirs, const CovarianceModel& model,
                                std::size_t d, const std::vector<std::size_t>& tracked);

/// arccos(|p|) in [0, pi/2], with p clamped to [-1, 1].
double angle(double p);

/// arccos(sqrt(sum_{j in group} p_ji^2)): angle of uhat_i (1-based i) to
/// span{u_j : j in group}.
double subspace_angle(const InnerProductRows& rows, std::size_t i,
                      const std::vector<std::size_t>& group);

/// max_ij |S_D / c_d - I|.
double scaled_dual_deviation(const DualDecomposition& dual);

inline double to_degrees(double radians) { return radians * 57.29577951308232; }

}  // namespace hdlss
