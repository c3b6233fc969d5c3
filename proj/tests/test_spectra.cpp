#include <doctest.h>

#include <cmath>
#include <random>

#include "hdlss/model_json.hpp"
#include "hdlss/spectra.hpp"
#include "oracle/jacobi.hpp"

using namespace hdlss;
using doctest::Approx;

namespace {

std::vector<double> values(const CovarianceModel& m, std::size_t d) {
  return eigenvalues(m, d).materialize();
}

CovarianceModel equi(double r, double gamma = 0.0) {
  return CovarianceModel(family::Equicorrelation{{r, gamma}});
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected hdlss::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("eigenvalues: closed-form families") {
  CHECK(values(equi(0.5), 3) == std::vector<double>{4.0, 0.25, 0.25});
  CHECK(values(CovarianceModel::identity(), 5) == std::vector<double>(5, 1.0));
  const auto poly = values(CovarianceModel(family::PolynomialDecay{1.0}), 3);
  CHECK(poly[0] == Approx(1.0));
  CHECK(poly[1] == Approx(0.5));
  CHECK(poly[2] == Approx(1.0 / 3.0));
  CHECK(values(CovarianceModel(family::SingleSpike{2.0, 1.0, 1.0}), 4) ==
        std::vector<double>{16.0, 1.0, 1.0, 1.0});
}

TEST_CASE("eigenvalues: spectra are nonincreasing and nonnegative") {
  using namespace family;
  const std::vector<CovarianceModel> models{
      CovarianceModel::identity(),
      CovarianceModel(SingleSpike{1.5, 2.0, 1.0}),
      CovarianceModel(MultiSpikeGroups{{{2.0, {1.0, 3.0}}, {3.0, {0.5}}}, 1.0}),
      CovarianceModel(PolynomialDecay{0.8}),
      CovarianceModel(ExponentialDecay{1.5}),
      CovarianceModel(GrowingSpikes{0.4, 0.5, 2.0, 1.0}),
      equi(0.3),
      equi(1.0, 0.75),
      CovarianceModel(BlockEquicorrelation{{0.5, 0.0}, {0.5, 0.25}}),
  };
  for (const auto& m : models) {
    for (std::size_t d : {16u, 100u, 1000u}) {
      const auto v = values(m, d);
      REQUIRE(v.size() == d);
      CHECK(std::is_sorted(v.rbegin(), v.rend()));
      CHECK(v.back() >= 0.0);
      const double eps = sphericity(eigenvalues(m, d), 1).epsilon_k;
      CHECK(eps >= 1.0 / static_cast<double>(d) - 1e-15);
      CHECK(eps <= 1.0);
    }
  }
}

TEST_CASE("eigenvalues: equicorrelation families match the dense factor product") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  for (int rep = 0; rep < 10; ++rep) {
    const double rho = unif(rng);
    for (std::size_t d : {3u, 10u, 37u, 50u}) {
      const auto dense = oracle::jacobi(oracle::multiply_transpose(oracle::equicorrelation_factor(d, rho)));
      const auto v = values(equi(rho), d);
      for (std::size_t i = 0; i < d; ++i) CHECK(v[i] == Approx(dense.values[i]).epsilon(1e-10));
      double trace = 0.0;
      for (double x : v) trace += x;
      const double t1 = (1 - rho) * (1 - rho);
      const double lam1 = (d * rho + 1 - rho) * (d * rho + 1 - rho);
      CHECK(trace == Approx(d * t1 + (lam1 - t1)).epsilon(1e-12));
    }
  }
  // Two blocks of size 12, ambient 24.
  const CovarianceModel block(family::BlockEquicorrelation{{0.6, 0.0}, {0.2, 0.0}});
  const auto dense = oracle::jacobi(oracle::block_equicorrelation(12, 0.6, 0.2));
  const auto v = values(block, 24);
  for (std::size_t i = 0; i < 24; ++i) CHECK(v[i] == Approx(dense.values[i]).epsilon(1e-10));
}

TEST_CASE("eigenvalues: dimension errors") {
  using namespace family;
  const CovarianceModel groups(MultiSpikeGroups{{{2.0, {1.0, 1.0, 1.0}}}, 1.0});
  CHECK(kind_of([&] { eigenvalues(groups, 3); }) == ErrorKind::InvalidDimension);
  const CovarianceModel diag(ExplicitDiagonal{{3.0, 2.0, 1.0}});
  CHECK(values(diag, 3) == std::vector<double>{3.0, 2.0, 1.0});
  CHECK(kind_of([&] { eigenvalues(diag, 4); }) == ErrorKind::InvalidDimension);
  CHECK(kind_of([&] { eigenvalues(CovarianceModel::identity(), 1); }) == ErrorKind::InvalidDimension);
  CHECK(kind_of([] { CovarianceModel(ExponentialDecay{1.0}); }) == ErrorKind::InvalidModel);
}

TEST_CASE("sphericity: worked values") {
  const EigenSpectrum flat({{1.0, 4}});
  CHECK(sphericity(flat, 1).epsilon_k == Approx(1.0));
  const EigenSpectrum spiked({{4.0, 1}, {1.0, 3}});
  CHECK(sphericity(spiked, 1).epsilon_k == Approx(49.0 / 76.0));
  CHECK(sphericity(spiked, 2).epsilon_k == Approx(0.75));
  CHECK(sphericity(spiked, 2).d_epsilon_k == Approx(3.0));
  CHECK(sphericity(spiked, 2).sqrtd_epsilon_k == Approx(1.5));
  const EigenSpectrum singular({{1.0, 1}, {0.0, 3}});
  CHECK(sphericity(singular, 1).epsilon_k == Approx(0.25));
  CHECK(kind_of([&] { sphericity(singular, 2); }) == ErrorKind::UndefinedSphericity);
  CHECK(kind_of([&] { sphericity(singular, 5); }) == ErrorKind::InvalidIndex);
}

TEST_CASE("sphericity: brute-force oracle, scaling invariance, equality case") {
  std::mt19937_64 rng(11);
  std::gamma_distribution<double> g(0.7);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<EigenRun> runs;
    std::vector<double> lam;
    const std::size_t d = 5 + rep;
    for (std::size_t i = 0; i < d; ++i) {
      lam.push_back(g(rng) + 1e-3);
      runs.push_back({lam.back(), 1});
    }
    std::sort(runs.begin(), runs.end(), [](auto& a, auto& b) { return a.value > b.value; });
    const EigenSpectrum s(runs);
    for (std::size_t k : {std::size_t{1}, std::size_t{2}, d / 2, d}) {
      const double eps = sphericity(s, k).epsilon_k;
      CHECK(eps == Approx(oracle::sphericity(lam, k)).epsilon(1e-12));
      auto scaled = runs;
      for (auto& r : scaled) r.value *= 37.5;
      CHECK(sphericity(EigenSpectrum(scaled), k).epsilon_k == Approx(eps).epsilon(1e-12));
    }
    // Equal tail from k on gives eps_k * d / (d - k + 1) = 1.
    const EigenSpectrum tail_equal({{9.0, 2}, {2.0, d - 2}});
    const auto r = sphericity(tail_equal, 3);
    CHECK(r.epsilon_k * static_cast<double>(d) / static_cast<double>(d - 2) == Approx(1.0));
  }
}

TEST_CASE("condition_check: catalog examples") {
  const std::vector<std::size_t> grid{1000, 10000, 100000, 1000000};
  auto check = [&](const CovarianceModel& m) { return condition_check(m, 1, grid); };
  const auto f1 = check(CovarianceModel(family::PolynomialDecay{0.5}));
  CHECK(f1.epsilon_condition == Verdict::Holds);
  CHECK(f1.strong_epsilon_condition == Verdict::Holds);
  CHECK(f1.basis == Basis::Analytic);
  const auto f2 = check(CovarianceModel(family::PolynomialDecay{0.9}));
  CHECK(f2.epsilon_condition == Verdict::Holds);
  CHECK(f2.strong_epsilon_condition == Verdict::Fails);
  CHECK(check(CovarianceModel(family::ExponentialDecay{2.0})).epsilon_condition == Verdict::Fails);
  const auto g1 = check(CovarianceModel(family::GrowingSpikes{0.5, 0.4, 1.0, 1.0}));
  CHECK(g1.epsilon_condition == Verdict::Holds);
  CHECK(g1.strong_epsilon_condition == Verdict::Holds);
  // Strong with l_o = k implies the plain condition at k.
  CHECK(check(CovarianceModel::identity()).strong_index == std::size_t{1});
  CHECK(kind_of([&] { condition_check(CovarianceModel::identity(), 2000, grid); }) ==
        ErrorKind::InvalidIndex);
}

TEST_CASE("condition_check: numeric trend agrees with the analytic verdict") {
  using namespace family;
  const std::vector<std::size_t> grid{1000, 10000, 100000, 1000000};
  const std::vector<CovarianceModel> models{
      CovarianceModel::identity(),
      CovarianceModel(SingleSpike{0.5, 1.0, 1.0}),
      CovarianceModel(SingleSpike{1.5, 1.0, 1.0}),
      CovarianceModel(MultiSpikeGroups{{{0.5, {1.0, 1.0, 1.0}}}, 1.0}),
      CovarianceModel(MultiSpikeGroups{{{0.0, {3.0, 2.0, 1.0}}}, 0.0}),
      CovarianceModel(PolynomialDecay{0.5}),
      CovarianceModel(PolynomialDecay{1.5}),
      CovarianceModel(ExponentialDecay{2.0}),
      CovarianceModel(GrowingSpikes{0.3, 0.5, 1.0, 1.0}),
      equi(0.5),
      equi(1.0, 0.75),
  };
  for (const auto& m : models) {
    for (std::size_t k : {1u, 2u}) {
      const auto a = analytic_condition(m, k);
      REQUIRE(a);
      ConditionVerdict t;
      try {
        t = trend_condition(m, k, grid);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UndefinedSphericity);  // singular tail past the spikes
        continue;
      }
      INFO(m.family_name(), " k=", k);
      CHECK((t.epsilon_condition == a->epsilon_condition || t.epsilon_condition == Verdict::Unknown));
      CHECK((t.strong_epsilon_condition == a->strong_epsilon_condition ||
             t.strong_epsilon_condition == Verdict::Unknown));
    }
  }
}

TEST_CASE("population_eigvec_inner: analytic eigenvectors") {
  std::vector<double> e1(4, 0.0);
  e1[0] = 1.0;
  CHECK(population_eigvec_inner(equi(0.5), 4, 1, e1) == Approx(0.5));

  std::vector<double> e2(4, 0.0);
  e2[1] = 1.0;
  CHECK(population_eigvec_inner(CovarianceModel(family::SingleSpike{1.5, 1, 1}), 4, 1, e2) == 0.0);
  CHECK(kind_of([&] { population_eigvec_inner(equi(0.5), 4, 5, e1); }) ==
        ErrorKind::UnsupportedEigenvector);
  std::vector<double> not_unit(4, 1.0);
  CHECK(kind_of([&] { population_eigvec_inner(equi(0.5), 4, 1, not_unit); }) ==
        ErrorKind::InvalidArgument);

  // Every u_j = U e_j is a unit eigenvector of the dense F F' and u_j' u_j = 1.
  for (const auto& [model, dense, d] :
       {std::tuple{equi(0.4), oracle::multiply_transpose(oracle::equicorrelation_factor(9, 0.4)), 9u},
        std::tuple{CovarianceModel(family::BlockEquicorrelation{{0.7, 0.0}, {0.3, 0.0}}),
                   oracle::block_equicorrelation(5, 0.7, 0.3), 10u}}) {
    const auto lam = values(model, d);
    for (std::size_t j = 1; j <= d; ++j) {
      std::vector<double> coeffs(d, 0.0), u(d);
      coeffs[j - 1] = 1.0;
      eigenbasis_to_ambient(model, coeffs, u);
      CHECK(oracle::dot(u, u) == Approx(1.0));
      for (std::size_t r = 0; r < d; ++r) {
        double su = 0.0;
        for (std::size_t c = 0; c < d; ++c) su += dense(r, c) * u[c];
        CHECK(su == Approx(lam[j - 1] * u[r]).epsilon(1e-10).scale(1.0));
      }
      CHECK(population_eigvec_inner(model, d, j, u) == Approx(1.0));
      for (std::size_t other = 1; other <= d; ++other)
        if (other != j) CHECK(std::abs(population_eigvec_inner(model, d, other, u)) < 1e-12);
    }
  }
}

TEST_CASE("model json round trip and diagnostics") {
  using namespace family;
  const std::vector<CovarianceModel> models{
      CovarianceModel::identity(),
      CovarianceModel(SingleSpike{1.5, 2.0, 0.5}, Mixing::RhoMixingUnderPermutation),
      CovarianceModel(MultiSpikeGroups{{{3.0, {1.0}}, {2.0, {2.0, 1.0}}}, 1.0}),
      CovarianceModel(PolynomialDecay{0.75}),
      CovarianceModel(ExponentialDecay{3.0}),
      CovarianceModel(GrowingSpikes{0.5, 0.4, 1.0, 2.0}),
      equi(1.0, 0.25),
      CovarianceModel(BlockEquicorrelation{{0.5, 0.0}, {0.3, 0.0}}, Mixing::NotRhoMixing),
      CovarianceModel(ExplicitDiagonal{{5.0, 2.0, 1.0}}),
  };
  for (const auto& m : models) CHECK(model_from_json(model_to_json(m)) == m);

  const auto bad = nlohmann::json::parse(R"({"family":"single_spike","params":{"alpha":1.5,"alfa":2}})");
  try {
    model_from_json(bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidModel);
    CHECK(std::string(e.what()).find("params.alfa") != std::string::npos);
  }
}
