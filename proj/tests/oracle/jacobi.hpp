#pragma once

// Independent dense oracles for the test suite. Nothing here calls into the
// library's linear algebra: the eigensolver is a plain cyclic Jacobi sweep
// on row-major std::vector storage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

struct Dense {
  std::size_t n = 0;
  std::vector<double> a;  // row-major n x n

  explicit Dense(std::size_t size = 0) : n(size), a(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

struct Eig {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // vectors[k] pairs with values[k]
};

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
inline Eig jacobi(Dense m) {
  const std::size_t n = m.n;
  Dense v(n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  auto off = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += m(i, j) * m(i, j);
    return s;
  };
  double scale = 0.0;
  for (double x : m.a) scale += x * x;

  for (int sweep = 0; sweep < 100 && off() > 1e-30 * scale; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m(a, a) > m(b, b); });
  Eig out;
  for (std::size_t k : order) {
    out.values.push_back(m(k, k));
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v(i, k);
    out.vectors.push_back(std::move(col));
  }
  return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// F = (1 - rho) I + rho J of size b, the equicorrelation factor.
inline Dense equicorrelation_factor(std::size_t b, double rho) {
  Dense f(b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) f(i, j) = (i == j ? 1.0 : 0.0) * (1.0 - rho) + rho;
  return f;
}

inline Dense multiply_transpose(const Dense& f) {  // F F'
  Dense out(f.n);
  for (std::size_t i = 0; i < f.n; ++i)
    for (std::size_t j = 0; j < f.n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < f.n; ++k) s += f(i, k) * f(j, k);
      out(i, j) = s;
    }
  return out;
}

/// Block-diagonal F F' for two equicorrelation blocks of size b.
inline Dense block_equicorrelation(std::size_t b, double rho1, double rho2) {
  const Dense s1 = multiply_transpose(equicorrelation_factor(b, rho1));
  const Dense s2 = multiply_transpose(equicorrelation_factor(b, rho2));
  Dense out(2 * b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      out(i, j) = s1(i, j);
      out(b + i, b + j) = s2(i, j);
    }
  return out;
}

/// S = X X' / n with X given as its columns.
inline Dense primal_covariance(const std::vector<std::vector<double>>& columns) {
  const std::size_t d = columns.front().size();
  Dense s(d);
  for (const auto& x : columns)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) s(i, j) += x[i] * x[j];
  for (double& v : s.a) v /= static_cast<double>(columns.size());
  return s;
}

/// Brute-force eps_k over a full materialized spectrum.
inline double sphericity(std::vector<double> lambda, std::size_t k) {
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = k - 1; i < lambda.size(); ++i) {
    s1 += lambda[i];
    s2 += lambda[i] * lambda[i];
  }
  return s1 * s1 / (static_cast<double>(lambda.size()) * s2);
}

}  // namespace oracle
