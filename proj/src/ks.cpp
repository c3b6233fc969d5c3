#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "hdlss/harness.hpp"

namespace hdlss {

namespace {

std::vector<double> sorted_copy(std::span<const double> xs, const char* what) {
  if (xs.size() < kKsMinSamples)
    throw Error(ErrorKind::InsufficientData,
                std::string(what) + ": KS needs at least 30 samples, got " +
                    std::to_string(xs.size()));
  std::vector<double> s(xs.begin(), xs.end());
  for (double v : s)
    if (std::isnan(v)) throw Error(ErrorKind::InvalidArgument, "KS samples contain NaN");
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

double chisq_over_n_cdf(const ChiSqOverNRef& ref, double x) {
  if (x <= 0.0) return 0.0;
  const double n = static_cast<double>(ref.n);
  return boost::math::gamma_p(0.5 * n, 0.5 * n * x / ref.scale);
}

KsResult ks_statistic(std::span<const double> samples, const ChiSqOverNRef& reference) {
  if (reference.n < 1 || !(reference.scale > 0.0))
    throw Error(ErrorKind::InvalidArgument, "chi-square reference needs n >= 1 and scale > 0");
  const auto s = sorted_copy(samples, "samples");
  const double m = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = chisq_over_n_cdf(reference, s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - f, f - static_cast<double>(i) / m});
  }
  KsResult r;
  r.statistic = d;
  r.critical = kKsCritical01 / std::sqrt(m);
  r.rejected = d > r.critical;
  return r;
}

KsResult ks_statistic(std::span<const double> samples, std::span<const double> reference) {
  const auto a = sorted_copy(samples, "samples");
  const auto b = sorted_copy(reference, "reference");
  const double m = static_cast<double>(a.size());
  const double k = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    // Step past every copy of the smaller value so ties move both ECDFs together.
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / k));
  }
  KsResult r;
  r.statistic = d;
  r.critical = kKsCritical01 * std::sqrt((m + k) / (m * k));
  r.rejected = d > r.critical;
  return r;
}

}  // namespace hdlss
