#include "hdlss/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hdlss {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(ErrorKind::InvalidModel, msg);
}

void validate_rule(const PowerLawRule& r, const char* name) {
  require(std::isfinite(r.scale) && r.scale > 0.0, std::string(name) + ".r must be > 0");
  require(std::isfinite(r.decay) && r.decay >= 0.0, std::string(name) + ".gamma must be >= 0");
  require(r.decay > 0.0 || r.scale < 1.0,
          std::string(name) + ": a constant rho must lie in (0, 1)");
}

double checked_rho(const PowerLawRule& rule, double d, const char* name) {
  const double rho = rule.at(d);
  if (!(rho > 0.0 && rho < 1.0)) {
    std::ostringstream os;
    os << name << " = " << rho << " at d = " << d << " is outside (0, 1)";
    fail(ErrorKind::InvalidDimension, os.str());
  }
  return rho;
}

double equi_spike(double block, double rho) {
  const double root = block * rho + 1.0 - rho;
  return root * root;
}

std::size_t spike_count(const family::MultiSpikeGroups& f) {
  std::size_t kappa = 0;
  for (const auto& g : f.groups) kappa += g.scales.size();
  return kappa;
}

std::size_t growing_count(const family::GrowingSpikes& f, std::size_t d) {
  return static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(d), f.beta)));
}

// Sorts descending (stable, so ties keep construction order) and merges
// equal neighbours.
std::vector<EigenRun> normalize_runs(std::vector<EigenRun> runs) {
  std::stable_sort(runs.begin(), runs.end(),
                   [](const EigenRun& a, const EigenRun& b) { return a.value > b.value; });
  std::vector<EigenRun> out;
  for (const auto& r : runs) {
    if (r.count == 0) continue;
    if (!out.empty() && out.back().value == r.value) {
      out.back().count += r.count;
    } else {
      out.push_back(r);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Order-of-growth arithmetic: d^power * (log d)^log_power.

struct Order {
  double power = 0.0;
  int log_power = 0;
};

constexpr double kOrderTol = 1e-12;

int compare(const Order& a, const Order& b) {
  if (a.power > b.power + kOrderTol) return 1;
  if (a.power < b.power - kOrderTol) return -1;
  return (a.log_power > b.log_power) - (a.log_power < b.log_power);
}

Order dominant(const Order& a, const Order& b) { return compare(a, b) >= 0 ? a : b; }

bool diverges(const Order& o) { return compare(o, Order{0.0, 0}) > 0; }

// Order of sum_{i<=d} i^(-b).
Order power_sum_order(double b) {
  if (b < 1.0 - kOrderTol) return {1.0 - b, 0};
  if (b <= 1.0 + kOrderTol) return {0.0, 1};
  return {0.0, 0};
}

struct TailOrders {
  Order sum;          // sum_{i>=l} lambda_i
  Order sum_squares;  // sum_{i>=l} lambda_i^2
};

// Spike exponents (index order) plus an optional O(d) flat tail.
std::optional<TailOrders> spiked_tail_orders(const std::vector<double>& alphas, std::size_t l,
                                             bool flat_tail) {
  std::optional<Order> sum, sq;
  auto add = [](std::optional<Order>& acc, Order o) { acc = acc ? dominant(*acc, o) : o; };
  for (std::size_t i = l; i <= alphas.size(); ++i) {
    add(sum, Order{alphas[i - 1], 0});
    add(sq, Order{2.0 * alphas[i - 1], 0});
  }
  if (flat_tail) {
    add(sum, Order{1.0, 0});
    add(sq, Order{1.0, 0});
  }
  if (!sum) return std::nullopt;
  return TailOrders{*sum, *sq};
}

double equi_rate(const PowerLawRule& r) { return std::max(2.0 * (1.0 - r.decay), 0.0); }

struct AnalyticShape {
  // Either a spiked layout (finite spike list + flat tail) or an
  // index-independent order pair.
  std::vector<double> spike_alphas;
  bool flat_tail = true;
  std::optional<TailOrders> uniform;
};

std::optional<AnalyticShape> analytic_shape(const CovarianceModel& model) {
  using namespace family;
  return std::visit(
      overloaded{
          [](const Identity&) -> std::optional<AnalyticShape> { return AnalyticShape{}; },
          [](const SingleSpike& f) -> std::optional<AnalyticShape> {
            return AnalyticShape{{f.alpha}, true, std::nullopt};
          },
          [](const MultiSpikeGroups& f) -> std::optional<AnalyticShape> {
            AnalyticShape s;
            for (const auto& g : f.groups)
              for (std::size_t i = 0; i < g.scales.size(); ++i) s.spike_alphas.push_back(g.alpha);
            std::stable_sort(s.spike_alphas.begin(), s.spike_alphas.end(), std::greater<>());
            s.flat_tail = f.base > 0.0;
            return s;
          },
          [](const PolynomialDecay& f) -> std::optional<AnalyticShape> {
            AnalyticShape s;
            s.uniform = TailOrders{power_sum_order(f.beta), power_sum_order(2.0 * f.beta)};
            return s;
          },
          [](const ExponentialDecay&) -> std::optional<AnalyticShape> {
            AnalyticShape s;
            s.uniform = TailOrders{{0.0, 0}, {0.0, 0}};
            return s;
          },
          [](const GrowingSpikes& f) -> std::optional<AnalyticShape> {
            if (f.beta == 0.0) return AnalyticShape{{f.alpha}, true, std::nullopt};
            // floor(d^beta) equal spikes: any fixed index eventually sits
            // inside the spike block, so the orders do not depend on l.
            AnalyticShape s;
            s.uniform = TailOrders{dominant({f.alpha + f.beta, 0}, {1.0, 0}),
                                   dominant({2.0 * f.alpha + f.beta, 0}, {1.0, 0})};
            return s;
          },
          [](const Equicorrelation& f) -> std::optional<AnalyticShape> {
            return AnalyticShape{{equi_rate(f.rho)}, true, std::nullopt};
          },
          [](const BlockEquicorrelation& f) -> std::optional<AnalyticShape> {
            return AnalyticShape{{equi_rate(f.rho1), equi_rate(f.rho2)}, true, std::nullopt};
          },
          [](const ExplicitDiagonal&) -> std::optional<AnalyticShape> { return std::nullopt; },
      },
      model.family());
}

std::optional<TailOrders> orders_at(const AnalyticShape& shape, std::size_t l) {
  if (shape.uniform) return shape.uniform;
  return spiked_tail_orders(shape.spike_alphas, l, shape.flat_tail);
}

// ---------------------------------------------------------------------------
// Eigenvector layout for the equicorrelation families. Each block of size b
// owns a mean direction 1/sqrt(b) and the Gram-Schmidt completion
// w_t (t = 1..b-1) of the coordinate axes e_1..e_{b-1} against it:
//   w_t = ((b - t) e_t - sum_{m > t} e_m) / sqrt((b - t)(b - t + 1)).

double helmert_norm(std::size_t b, std::size_t t) {
  const double r = static_cast<double>(b - t);
  return std::sqrt(r * (r + 1.0));
}

double block_mean_inner(std::span<const double> block) {
  const long double s = std::accumulate(block.begin(), block.end(), 0.0L);
  return static_cast<double>(s / std::sqrt(static_cast<long double>(block.size())));
}

double block_helmert_inner(std::span<const double> block, std::size_t t) {
  const std::size_t b = block.size();
  long double tail = 0.0L;
  for (std::size_t m = t; m < b; ++m) tail += block[m];
  const long double num = static_cast<long double>(b - t) * block[t - 1] - tail;
  return static_cast<double>(num / helmert_norm(b, t));
}

// out = mean * 1/sqrt(b) + sum_t g[t-1] w_t  for a single block.
void block_synthesize(double mean, std::span<const double> g, std::span<double> out) {
  const std::size_t b = out.size();
  const double m = mean / std::sqrt(static_cast<double>(b));
  long double running = 0.0L;  // sum_{t <= pos} g_t / N_t
  for (std::size_t pos = 0; pos < b; ++pos) {
    double v = m - static_cast<double>(running);
    if (pos + 1 < b) {
      const std::size_t t = pos + 1;
      const double nt = helmert_norm(b, t);
      v += g[t - 1] * static_cast<double>(b - t) / nt;
      running += g[t - 1] / nt;
    }
    out[pos] = v;
  }
}

struct BlockRef {
  std::size_t offset;  // ambient position of the block start
  std::size_t size;
  std::size_t t;  // 0 = mean direction, otherwise Helmert index
};

// Maps a 1-based eigen index to its block direction.
BlockRef locate(const CovarianceModel& model, std::size_t d, std::size_t j) {
  if (model.get_if<family::Equicorrelation>()) {
    return {0, d, j - 1};
  }
  const std::size_t b = d / 2;
  if (j == 1) return {0, b, 0};
  if (j == 2) return {b, b, 0};
  if (j <= b + 1) return {b, b, j - 2};
  return {0, b, j - b - 1};
}

}  // namespace

double PowerLawRule::at(double d) const { return scale * std::pow(d, -decay); }

std::string_view to_string(Mixing mixing) noexcept {
  switch (mixing) {
    case Mixing::IndependentComponents: return "independent_components";
    case Mixing::RhoMixingUnderPermutation: return "rho_mixing_under_permutation";
    case Mixing::NotRhoMixing: return "not_rho_mixing";
  }
  return "independent_components";
}

Mixing mixing_from_string(std::string_view name) {
  for (Mixing m : {Mixing::IndependentComponents, Mixing::RhoMixingUnderPermutation,
                   Mixing::NotRhoMixing}) {
    if (to_string(m) == name) return m;
  }
  fail(ErrorKind::InvalidModel, "unknown mixing attribute '" + std::string(name) + "'");
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Basis b) noexcept {
  return b == Basis::Analytic ? "analytic" : "numeric_trend";
}

CovarianceModel::CovarianceModel(Family fam, Mixing mixing)
    : family_(std::move(fam)), mixing_(mixing) {
  using namespace family;
  std::visit(
      overloaded{
          [](const Identity&) {},
          [](const SingleSpike& f) {
            require(std::isfinite(f.alpha) && f.alpha > 0.0, "single_spike.alpha must be > 0");
            require(f.c1 > 0.0, "single_spike.c1 must be > 0");
            require(f.base > 0.0, "single_spike.base must be > 0");
          },
          [](const MultiSpikeGroups& f) {
            require(!f.groups.empty(), "multi_spike_groups needs at least one group");
            for (const auto& g : f.groups) {
              require(std::isfinite(g.alpha) && g.alpha >= 0.0,
                      "multi_spike_groups: every alpha must be >= 0");
              require(!g.scales.empty(), "multi_spike_groups: every group needs scales");
              for (double c : g.scales)
                require(std::isfinite(c) && c > 0.0, "multi_spike_groups: scales must be > 0");
            }
            require(std::isfinite(f.base) && f.base >= 0.0, "multi_spike_groups.base must be >= 0");
          },
          [](const PolynomialDecay& f) {
            require(std::isfinite(f.beta) && f.beta >= 0.0, "polynomial_decay.beta must be >= 0");
          },
          [](const ExponentialDecay& f) {
            require(std::isfinite(f.c) && f.c > 1.0, "exponential_decay.c must be > 1");
          },
          [](const GrowingSpikes& f) {
            require(std::isfinite(f.alpha) && f.alpha >= 0.0, "growing_spikes.alpha must be >= 0");
            require(f.beta > 0.0 && f.beta < 1.0, "growing_spikes.beta must lie in (0, 1)");
            require(f.c1 > 0.0 && f.c2 > 0.0, "growing_spikes.c1 and c2 must be > 0");
          },
          [](const Equicorrelation& f) { validate_rule(f.rho, "equicorrelation.rho"); },
          [](const BlockEquicorrelation& f) {
            validate_rule(f.rho1, "block_equicorrelation.rho1");
            validate_rule(f.rho2, "block_equicorrelation.rho2");
          },
          [](const ExplicitDiagonal& f) {
            require(f.values.size() >= 2, "explicit_diagonal needs at least two values");
            bool positive = false;
            for (std::size_t i = 0; i < f.values.size(); ++i) {
              require(std::isfinite(f.values[i]) && f.values[i] >= 0.0,
                      "explicit_diagonal values must be finite and >= 0");
              if (i > 0)
                require(f.values[i] <= f.values[i - 1],
                        "explicit_diagonal values must be nonincreasing");
              positive = positive || f.values[i] > 0.0;
            }
            require(positive, "explicit_diagonal needs a positive value");
          },
      },
      family_);
}

std::string_view CovarianceModel::family_name() const noexcept {
  using namespace family;
  return std::visit(overloaded{
                        [](const Identity&) { return "identity"; },
                        [](const SingleSpike&) { return "single_spike"; },
                        [](const MultiSpikeGroups&) { return "multi_spike_groups"; },
                        [](const PolynomialDecay&) { return "polynomial_decay"; },
                        [](const ExponentialDecay&) { return "exponential_decay"; },
                        [](const GrowingSpikes&) { return "growing_spikes"; },
                        [](const Equicorrelation&) { return "equicorrelation"; },
                        [](const BlockEquicorrelation&) { return "block_equicorrelation"; },
                        [](const ExplicitDiagonal&) { return "explicit_diagonal"; },
                    },
                    family_);
}

std::size_t CovarianceModel::min_dimension() const noexcept {
  using namespace family;
  return std::visit(overloaded{
                        [](const MultiSpikeGroups& f) { return spike_count(f) + 1; },
                        [](const BlockEquicorrelation&) { return std::size_t{4}; },
                        [](const ExplicitDiagonal& f) { return f.values.size(); },
                        [](const auto&) { return std::size_t{2}; },
                    },
                    family_);
}

bool CovarianceModel::has_dense_eigenvectors() const noexcept {
  return get_if<family::Equicorrelation>() || get_if<family::BlockEquicorrelation>();
}

// ---------------------------------------------------------------------------

EigenSpectrum::EigenSpectrum(std::vector<EigenRun> runs) : runs_(std::move(runs)) {
  bool positive = false;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    const auto& r = runs_[i];
    if (r.count == 0 || !std::isfinite(r.value) || r.value < 0.0)
      fail(ErrorKind::InvalidArgument, "spectrum runs must be finite, >= 0 and non-empty");
    if (i > 0 && r.value > runs_[i - 1].value)
      fail(ErrorKind::InvalidArgument, "spectrum must be nonincreasing");
    positive = positive || r.value > 0.0;
    run_start_.push_back(dimension_);
    dimension_ += r.count;
  }
  if (!positive) fail(ErrorKind::InvalidArgument, "spectrum needs a positive eigenvalue");
}

double EigenSpectrum::at(std::size_t index) const {
  if (index >= dimension_) fail(ErrorKind::InvalidIndex, "eigenvalue index out of range");
  const auto it = std::upper_bound(run_start_.begin(), run_start_.end(), index);
  return runs_[static_cast<std::size_t>(it - run_start_.begin()) - 1].value;
}

double EigenSpectrum::tail_sum(std::size_t k) const {
  long double s = 0.0L;
  const std::size_t from = k == 0 ? 0 : k - 1;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    const std::size_t end = run_start_[i] + runs_[i].count;
    if (end <= from) continue;
    const std::size_t skip = from > run_start_[i] ? from - run_start_[i] : 0;
    s += static_cast<long double>(runs_[i].value) * static_cast<long double>(runs_[i].count - skip);
  }
  return static_cast<double>(s);
}

double EigenSpectrum::tail_sum_squares(std::size_t k) const {
  long double s = 0.0L;
  const std::size_t from = k == 0 ? 0 : k - 1;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    const std::size_t end = run_start_[i] + runs_[i].count;
    if (end <= from) continue;
    const std::size_t skip = from > run_start_[i] ? from - run_start_[i] : 0;
    const long double v = runs_[i].value;
    s += v * v * static_cast<long double>(runs_[i].count - skip);
  }
  return static_cast<double>(s);
}

std::vector<double> EigenSpectrum::materialize() const {
  std::vector<double> out;
  out.reserve(dimension_);
  for (const auto& r : runs_) out.insert(out.end(), r.count, r.value);
  return out;
}

EigenSpectrum eigenvalues(const CovarianceModel& model, std::size_t d) {
  using namespace family;
  if (d < 2 || d < model.min_dimension()) {
    std::ostringstream os;
    os << model.family_name() << " is undefined at d = " << d << " (minimum "
       << std::max<std::size_t>(2, model.min_dimension()) << ")";
    fail(ErrorKind::InvalidDimension, os.str());
  }
  const double dd = static_cast<double>(d);
  std::vector<EigenRun> runs = std::visit(
      overloaded{
          [&](const Identity&) { return std::vector<EigenRun>{{1.0, d}}; },
          [&](const SingleSpike& f) {
            return std::vector<EigenRun>{{f.c1 * std::pow(dd, f.alpha), 1}, {f.base, d - 1}};
          },
          [&](const MultiSpikeGroups& f) {
            std::vector<EigenRun> r;
            for (const auto& g : f.groups)
              for (double c : g.scales) r.push_back({c * std::pow(dd, g.alpha), 1});
            r.push_back({f.base, d - spike_count(f)});
            return r;
          },
          [&](const PolynomialDecay& f) {
            std::vector<EigenRun> r;
            r.reserve(d);
            for (std::size_t i = 1; i <= d; ++i)
              r.push_back({std::pow(static_cast<double>(i), -f.beta), 1});
            return r;
          },
          [&](const ExponentialDecay& f) {
            std::vector<EigenRun> r;
            r.reserve(d);
            for (std::size_t i = 1; i <= d; ++i)
              r.push_back({std::pow(f.c, -static_cast<double>(i)), 1});
            return r;
          },
          [&](const GrowingSpikes& f) {
            const std::size_t m = growing_count(f, d);
            if (m < 1 || m >= d) fail(ErrorKind::InvalidDimension, "growing_spikes: need 1 <= m < d");
            return std::vector<EigenRun>{{f.c1 * std::pow(dd, f.alpha), m}, {f.c2, d - m}};
          },
          [&](const Equicorrelation& f) {
            const double rho = checked_rho(f.rho, dd, "rho_d");
            const double tail = (1.0 - rho) * (1.0 - rho);
            return std::vector<EigenRun>{{equi_spike(dd, rho), 1}, {tail, d - 1}};
          },
          [&](const BlockEquicorrelation& f) {
            if (d % 2 != 0)
              fail(ErrorKind::InvalidDimension, "block_equicorrelation needs an even dimension");
            const std::size_t b = d / 2;
            const double bb = static_cast<double>(b);
            const double r1 = checked_rho(f.rho1, bb, "rho1_d");
            const double r2 = checked_rho(f.rho2, bb, "rho2_d");
            if (r1 < r2) {
              std::ostringstream os;
              os << "block_equicorrelation requires rho1 >= rho2, got " << r1 << " < " << r2
                 << " at block size " << b;
              fail(ErrorKind::InvalidDimension, os.str());
            }
            // Order matters: eigen index j maps onto block directions in this order.
            return std::vector<EigenRun>{{equi_spike(bb, r1), 1},
                                         {equi_spike(bb, r2), 1},
                                         {(1.0 - r2) * (1.0 - r2), b - 1},
                                         {(1.0 - r1) * (1.0 - r1), b - 1}};
          },
          [&](const ExplicitDiagonal& f) {
            if (f.values.size() != d)
              fail(ErrorKind::InvalidDimension, "explicit_diagonal is only defined at its own length");
            std::vector<EigenRun> r;
            for (double v : f.values) r.push_back({v, 1});
            return r;
          },
      },
      model.family());
  return EigenSpectrum(normalize_runs(std::move(runs)));
}

SphericityReport sphericity(const EigenSpectrum& spectrum, std::size_t k) {
  const std::size_t d = spectrum.dimension();
  if (k < 1 || k > d) fail(ErrorKind::InvalidIndex, "sphericity index k must satisfy 1 <= k <= d");
  const double s1 = spectrum.tail_sum(k);
  const double s2 = spectrum.tail_sum_squares(k);
  if (!(s1 > 0.0)) fail(ErrorKind::UndefinedSphericity, "all eigenvalues from index k on are zero");
  const double dd = static_cast<double>(d);
  // Ratio of sums computed as (s1/s2)*s1 to keep huge spikes finite.
  const double d_eps = (s1 / s2) * s1;
  SphericityReport rep;
  rep.k = k;
  rep.d_epsilon_k = d_eps;
  rep.epsilon_k = std::min(1.0, d_eps / dd);
  rep.sqrtd_epsilon_k = d_eps / std::sqrt(dd);
  return rep;
}

// ---------------------------------------------------------------------------

std::optional<ConditionVerdict> analytic_condition(const CovarianceModel& model, std::size_t k) {
  if (k < 1) fail(ErrorKind::InvalidIndex, "condition index k must be >= 1");
  const auto shape = analytic_shape(model);
  if (!shape) return std::nullopt;

  ConditionVerdict v;
  v.k = k;
  v.basis = Basis::Analytic;
  const auto at_k = orders_at(*shape, k);
  if (!at_k) fail(ErrorKind::UndefinedSphericity, "the tail from index k on is identically zero");
  const Order d_eps{2.0 * at_k->sum.power - at_k->sum_squares.power,
                    2 * at_k->sum.log_power - at_k->sum_squares.log_power};
  v.epsilon_condition = diverges(d_eps) ? Verdict::Holds : Verdict::Fails;

  // Past the last spike every l gives the same orders, so l <= kappa + 1 suffices.
  const std::size_t last_l = shape->uniform ? k : std::max(k, shape->spike_alphas.size() + 1);
  v.strong_epsilon_condition = Verdict::Fails;
  for (std::size_t l = k; l <= last_l; ++l) {
    const auto o = orders_at(*shape, l);
    if (!o) break;
    const Order strong{2.0 * o->sum.power - o->sum_squares.power - 0.5,
                       2 * o->sum.log_power - o->sum_squares.log_power};
    if (diverges(strong)) {
      v.strong_epsilon_condition = Verdict::Holds;
      v.strong_index = l;
      break;
    }
  }
  return v;
}

namespace {

enum class Trend { Grows, Flat, Mixed };

Trend classify_series(const std::vector<double>& s) {
  bool grows = true;
  bool flat = true;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double ratio = s[i] / s[i - 1];
    grows = grows && ratio >= kTrendHoldsFactor;
    flat = flat && ratio <= 1.0 + 1e-12;
  }
  if (grows) return Trend::Grows;
  if (flat) return Trend::Flat;
  return Trend::Mixed;
}

}  // namespace

ConditionVerdict trend_condition(const CovarianceModel& model, std::size_t k,
                                 std::span<const std::size_t> d_grid) {
  if (d_grid.size() < 3) fail(ErrorKind::InvalidArgument, "trend check needs at least 3 grid points");
  for (std::size_t i = 1; i < d_grid.size(); ++i)
    if (d_grid[i] <= d_grid[i - 1])
      fail(ErrorKind::InvalidArgument, "d_grid must be strictly increasing");
  if (k < 1 || k > d_grid.front())
    fail(ErrorKind::InvalidIndex, "k exceeds the smallest grid dimension");

  constexpr std::size_t kMaxStrongShift = 32;
  const std::size_t last_l = std::min(k + kMaxStrongShift, d_grid.front());

  std::vector<double> d_eps;
  std::vector<std::vector<double>> strong(last_l - k + 1);
  std::vector<bool> strong_defined(strong.size(), true);
  for (std::size_t d : d_grid) {
    const EigenSpectrum spec = eigenvalues(model, d);
    d_eps.push_back(sphericity(spec, k).d_epsilon_k);
    for (std::size_t l = k; l <= last_l; ++l) {
      try {
        strong[l - k].push_back(sphericity(spec, l).sqrtd_epsilon_k);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::UndefinedSphericity) throw;
        strong_defined[l - k] = false;
      }
    }
  }

  ConditionVerdict v;
  v.k = k;
  v.basis = Basis::NumericTrend;
  switch (classify_series(d_eps)) {
    case Trend::Grows: v.epsilon_condition = Verdict::Holds; break;
    case Trend::Flat: v.epsilon_condition = Verdict::Fails; break;
    case Trend::Mixed: v.epsilon_condition = Verdict::Unknown; break;
  }

  bool all_flat = true;
  v.strong_epsilon_condition = Verdict::Unknown;
  for (std::size_t i = 0; i < strong.size(); ++i) {
    if (!strong_defined[i]) continue;
    const Trend t = classify_series(strong[i]);
    if (t == Trend::Grows) {
      v.strong_epsilon_condition = Verdict::Holds;
      v.strong_index = k + i;
      return v;
    }
    all_flat = all_flat && t == Trend::Flat;
  }
  if (all_flat) v.strong_epsilon_condition = Verdict::Fails;
  return v;
}

ConditionVerdict condition_check(const CovarianceModel& model, std::size_t k,
                                 std::span<const std::size_t> d_grid) {
  if (!d_grid.empty()) {
    const std::size_t smallest = *std::min_element(d_grid.begin(), d_grid.end());
    if (k > smallest) fail(ErrorKind::InvalidIndex, "k exceeds the smallest grid dimension");
  }
  if (auto v = analytic_condition(model, k)) return *v;
  if (model.get_if<family::ExplicitDiagonal>()) {
    // A fixed-length spectrum has no dimension trend to examine.
    ConditionVerdict v;
    v.k = k;
    v.basis = Basis::NumericTrend;
    return v;
  }
  return trend_condition(model, k, d_grid);
}

// ---------------------------------------------------------------------------

double population_eigvec_inner(const CovarianceModel& model, std::size_t d, std::size_t j,
                               std::span<const double> v, Frame frame) {
  if (v.size() != d) fail(ErrorKind::Shape, "vector length does not match the dimension");
  if (d < std::max<std::size_t>(2, model.min_dimension()))
    fail(ErrorKind::InvalidDimension, "dimension below the family minimum");
  if (j < 1 || j > d) {
    std::ostringstream os;
    os << "eigenvector u_" << j << " is not tracked at d = " << d;
    fail(ErrorKind::UnsupportedEigenvector, os.str());
  }
  long double sq = 0.0L;
  for (double x : v) sq += static_cast<long double>(x) * x;
  if (std::abs(std::sqrt(static_cast<double>(sq)) - 1.0) > 1e-8)
    fail(ErrorKind::InvalidArgument, "population_eigvec_inner expects a unit vector");

  if (frame == Frame::Eigenbasis || !model.has_dense_eigenvectors()) return v[j - 1];
  if (model.get_if<family::BlockEquicorrelation>() && d % 2 != 0)
    fail(ErrorKind::InvalidDimension, "block_equicorrelation needs an even dimension");

  const BlockRef ref = locate(model, d, j);
  const auto block = v.subspan(ref.offset, ref.size);
  return ref.t == 0 ? block_mean_inner(block) : block_helmert_inner(block, ref.t);
}

void eigenbasis_to_ambient(const CovarianceModel& model, std::span<const double> coeffs,
                           std::span<double> out) {
  const std::size_t d = coeffs.size();
  if (out.size() != d) fail(ErrorKind::Shape, "output length does not match the dimension");
  if (!model.has_dense_eigenvectors()) {
    std::copy(coeffs.begin(), coeffs.end(), out.begin());
    return;
  }
  if (model.get_if<family::Equicorrelation>()) {
    block_synthesize(coeffs[0], coeffs.subspan(1), out);
    return;
  }
  if (d % 2 != 0 || d < 4)
    fail(ErrorKind::InvalidDimension, "block_equicorrelation needs an even dimension >= 4");
  const std::size_t b = d / 2;
  // Eigen order: [mean1, mean2, helmert(block2) x (b-1), helmert(block1) x (b-1)].
  block_synthesize(coeffs[0], coeffs.subspan(2 + (b - 1), b - 1), out.subspan(0, b));
  block_synthesize(coeffs[1], coeffs.subspan(2, b - 1), out.subspan(b, b));
}

}  // namespace hdlss
