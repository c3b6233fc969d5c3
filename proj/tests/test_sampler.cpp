#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hdlss/dualpca.hpp"
#include "hdlss/sampler.hpp"
#include "oracle/jacobi.hpp"

using namespace hdlss;
using doctest::Approx;

TEST_CASE("sample_z: laws and calibration") {
  const SeedSpec seed{42};
  const Matrix r = sample_z({NoiseLaw::Rademacher}, 50, 7, seed);
  for (Eigen::Index i = 0; i < r.size(); ++i) CHECK(std::abs(r.data()[i]) == 1.0);

  const Matrix g = sample_z({NoiseLaw::Gaussian}, 10000, 2, seed);
  CHECK(std::abs(g.col(0).mean()) < 4.0 / 100.0);

  const Matrix u = sample_z({NoiseLaw::UniformStd}, 1000, 3, seed);
  CHECK(u.cwiseAbs().maxCoeff() <= std::sqrt(3.0));

  for (NoiseLaw law : {NoiseLaw::Gaussian, NoiseLaw::Rademacher, NoiseLaw::UniformStd}) {
    const Matrix z = sample_z({law}, 100000, 10, seed);
    const double mean = z.mean();
    const double var = (z.array() - mean).square().mean();
    INFO(to_string(law));
    CHECK(var == Approx(1.0).epsilon(0.01));
  }

  // Columns of a scale mixture have second moment 1/5 or 9/5; averaged over
  // many columns the variance is 1.
  const Matrix m = sample_z({NoiseLaw::ScaleMixture, 3.0}, 10000, 400, seed);
  int low = 0, high = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double m2 = m.col(c).squaredNorm() / 10000.0;
    if (std::abs(m2 - 0.2) < 0.02) ++low;
    if (std::abs(m2 - 1.8) < 0.1) ++high;
  }
  CHECK(low + high == 400);
  CHECK(low > 150);
  CHECK(high > 150);
  CHECK(m.array().square().mean() == Approx(1.0).epsilon(0.1));

  CHECK_THROWS_AS(sample_z({NoiseLaw::Gaussian}, 1, 3, seed), Error);
  CHECK_THROWS_AS(sample_z({NoiseLaw::ScaleMixture, 1.0}, 10, 3, seed), Error);
}

TEST_CASE("sample_z: reproducible streams shared across dimensions") {
  const SeedSpec seed{7};
  const Matrix a = sample_z({NoiseLaw::Gaussian}, 300, 5, seed, 3);
  const Matrix b = sample_z({NoiseLaw::Gaussian}, 300, 5, seed, 3);
  CHECK(a == b);
  const Matrix c = sample_z({NoiseLaw::Gaussian}, 300, 5, seed, 4);
  CHECK(a != c);
  const Matrix longer = sample_z({NoiseLaw::Gaussian}, 1000, 5, seed, 3);
  CHECK(longer.topRows(300) == a);
  const Matrix wider = sample_z({NoiseLaw::Gaussian}, 300, 8, seed, 3);
  CHECK(wider.leftCols(5) == a);
}

TEST_CASE("synthesize_x: row scaling") {
  const Matrix z = Matrix::Identity(4, 4).leftCols(2);
  const CovarianceModel spike(family::SingleSpike{2.0, 1.0, 1.0});
  const DataMatrix x = synthesize_x(spike, z);
  CHECK(x.values(0, 0) == 4.0);
  CHECK(x.values(1, 1) == 1.0);
  CHECK(x.values.col(0).sum() == 4.0);
  CHECK(synthesize_x(CovarianceModel::identity(), z).values == z);
  CHECK(synthesize_x(spike, Matrix::Zero(4, 2)).values.isZero());
  CHECK_THROWS_AS(synthesize_x(CovarianceModel(family::ExplicitDiagonal{{3, 2, 1}}), z), Error);
}

TEST_CASE("distance_stats: concentration and the scale-mixture split") {
  const SeedSpec seed{99};
  int inside = 0, total = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const DataMatrix x = synthesize_x(CovarianceModel::identity(),
                                      sample_z({NoiseLaw::Gaussian}, 10000, 3, seed, rep));
    const auto s = distance_stats(x);
    CHECK(s.scaled_norms.size() == 3);
    CHECK(s.scaled_distances.size() == 3);
    for (double v : s.scaled_norms) inside += std::abs(v - 1.0) < 0.05, ++total;
  }
  CHECK(inside == total);

  const DataMatrix zero{Matrix::Zero(10, 3), Frame::Eigenbasis, CovarianceModel::identity()};
  for (double v : distance_stats(zero).scaled_norms) CHECK(v == 0.0);

  const DataMatrix mix = synthesize_x(CovarianceModel::identity(),
                                      sample_z({NoiseLaw::ScaleMixture, 3.0}, 10000, 40, seed));
  for (double v : distance_stats(mix).scaled_norms) {
    const bool near_low = std::abs(v - std::sqrt(0.2)) < 0.03;
    const bool near_high = std::abs(v - 3.0 * std::sqrt(0.2)) < 0.05;
    CHECK((near_low || near_high));
  }
}

TEST_CASE("eigenbasis convention: dual spectrum invariant under rotation") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const CovarianceModel model(family::SingleSpike{1.5, 1.0, 1.0});
  for (std::size_t d : {6u, 17u, 30u}) {
    // Orthogonal Q from the eigenvectors of a random symmetric matrix.
    oracle::Dense a(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = normal(rng);
    const auto q = oracle::jacobi(a).vectors;
    const DataMatrix x = synthesize_x(model, sample_z({NoiseLaw::Gaussian}, d, 5, SeedSpec{d}));
    DataMatrix rotated = x;
    for (Eigen::Index c = 0; c < x.values.cols(); ++c)
      for (std::size_t r = 0; r < d; ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += q[k][r] * x.values(static_cast<Eigen::Index>(k), c);
        rotated.values(static_cast<Eigen::Index>(r), c) = s;
      }
    const Vector e1 = decompose(x).eigenvalues;
    const Vector e2 = decompose(rotated).eigenvalues;
    for (Eigen::Index i = 0; i < e1.size(); ++i) CHECK(e2(i) == Approx(e1(i)).epsilon(1e-10));
  }
}

TEST_CASE("binary dump round trip") {
  const Matrix m = sample_z({NoiseLaw::Gaussian}, 7, 3, SeedSpec{1});
  std::stringstream buf;
  write_binary(buf, m);
  CHECK(buf.str().size() == 16 + 7 * 3 * 8);
  CHECK(read_binary(buf) == m);
  std::stringstream truncated(buf.str().substr(0, 20));
  CHECK_THROWS_AS(read_binary(truncated), Error);
}
