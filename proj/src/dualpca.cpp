#include "hdlss/dualpca.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace hdlss {

EigenPairs eigendecompose(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::InvalidMatrix, "matrix is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-10 * scale)) {
    std::ostringstream os;
    os << "matrix is not symmetric (max |A - A'| = " << asym << ")";
    throw Error(ErrorKind::InvalidMatrix, os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::InvalidMatrix, "symmetric eigensolver did not converge");

  const auto m = a.rows();
  EigenPairs out{Vector(m), Matrix(m, m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    out.values(i) = solver.eigenvalues()(m - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(m - 1 - i);
    Eigen::Index pivot = 0;
    out.vectors.col(i).cwiseAbs().maxCoeff(&pivot);
    if (out.vectors(pivot, i) < 0.0) out.vectors.col(i) *= -1.0;
  }
  return out;
}

std::vector<bool> DualDecomposition::identifiable() const {
  const auto n = static_cast<std::size_t>(eigenvalues.size());
  std::vector<bool> ok(n, true);
  if (n == 0) return ok;
  const double tol = kTieTolerance * std::abs(eigenvalues(0));
  for (std::size_t i = 1; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (std::abs(eigenvalues(ii - 1) - eigenvalues(ii)) <= tol) ok[i - 1] = ok[i] = false;
  }
  return ok;
}

DualDecomposition dual_covariance(const DataMatrix& x) {
  if (x.n() < 2) throw Error(ErrorKind::InvalidArgument, "dual covariance needs n >= 2");
  const double n = static_cast<double>(x.n());
  DualDecomposition dual;
  Matrix gram = x.values.transpose() * x.values / n;
  dual.dual_matrix = 0.5 * (gram + gram.transpose());
  dual.c_d = eigenvalues(x.model, x.d()).trace() / n;
  return dual;
}

DualDecomposition decompose(const DataMatrix& x) {
  DualDecomposition dual = dual_covariance(x);
  EigenPairs pairs = eigendecompose(dual.dual_matrix);
  dual.eigenvalues = std::move(pairs.values);
  dual.eigenvectors = std::move(pairs.vectors);
  return dual;
}

PrimalDirections recover_directions(const DataMatrix& x, const DualDecomposition& dual,
                                    std::size_t r) {
  if (dual.eigenvalues.size() == 0)
    throw Error(ErrorKind::InvalidArgument, "dual decomposition has no eigenpairs");
  if (r > dual.n()) throw Error(ErrorKind::InvalidArgument, "cannot retain more than n directions");
  const double top = dual.eigenvalues(0);
  PrimalDirections out;
  out.frame = x.frame;
  out.directions.resize(x.values.rows(), static_cast<Eigen::Index>(r));
  out.eigenvalues.resize(static_cast<Eigen::Index>(r));
  for (std::size_t i = 0; i < r; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double lambda = dual.eigenvalues(ii);
    if (!(top > 0.0) || lambda <= kRankThreshold * top) {
      std::ostringstream os;
      os << "direction " << i + 1 << " has dual eigenvalue " << lambda
         << " below the rank threshold";
      throw Error(ErrorKind::RankDeficiency, os.str());
    }
    Vector u = x.values * dual.eigenvectors.col(ii);
    out.directions.col(ii) = u / u.norm();
    out.eigenvalues(ii) = lambda;
  }
  return out;
}

double InnerProductRows::at(std::size_t j, std::size_t i) const {
  const auto it = rows.find(j);
  if (it == rows.end() || i < 1 || i > it->second.size())
    throw Error(ErrorKind::UnsupportedEigenvector, "inner product row not tracked");
  return it->second[i - 1];
}

InnerProductRows inner_products(const PrimalDirections& dirs, const CovarianceModel& model,
                                std::size_t d, const std::vector<std::size_t>& tracked) {
  if (static_cast<std::size_t>(dirs.directions.rows()) != d)
    throw Error(ErrorKind::Shape, "directions do not match the dimension");
  InnerProductRows out;
  for (std::size_t j : tracked) {
    std::vector<double> row;
    row.reserve(dirs.retained());
    for (Eigen::Index i = 0; i < dirs.directions.cols(); ++i) {
      row.push_back(population_eigvec_inner(
          model, d, j, std::span<const double>(dirs.directions.col(i).data(), d), dirs.frame));
    }
    out.rows.emplace(j, std::move(row));
  }
  return out;
}

double angle(double p) { return std::acos(std::clamp(std::abs(p), 0.0, 1.0)); }

double subspace_angle(const InnerProductRows& rows, std::size_t i,
                      const std::vector<std::size_t>& group) {
  if (group.empty()) throw Error(ErrorKind::InvalidArgument, "subspace group is empty");
  double sq = 0.0;
  for (std::size_t j : group) {
    const double p = rows.at(j, i);
    sq += p * p;
  }
  return std::acos(std::clamp(std::sqrt(sq), 0.0, 1.0));
}

double scaled_dual_deviation(const DualDecomposition& dual) {
  if (!(dual.c_d > 0.0)) throw Error(ErrorKind::InvalidArgument, "c_d must be positive");
  const auto n = dual.dual_matrix.rows();
  return (dual.dual_matrix / dual.c_d - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

}  // namespace hdlss
