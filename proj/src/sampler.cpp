#include "hdlss/sampler.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

namespace hdlss {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void fill_column(const NoiseSpec& noise, std::mt19937_64& rng, double* out, std::size_t d) {
  switch (noise.law) {
    case NoiseLaw::Gaussian: {
      std::normal_distribution<double> g;
      for (std::size_t i = 0; i < d; ++i) out[i] = g(rng);
      break;
    }
    case NoiseLaw::Rademacher: {
      // 64 signs per engine call.
      std::uint64_t bits = 0;
      for (std::size_t i = 0; i < d; ++i) {
        if (i % 64 == 0) bits = rng();
        out[i] = (bits & 1ULL) ? 1.0 : -1.0;
        bits >>= 1;
      }
      break;
    }
    case NoiseLaw::UniformStd: {
      const double half_width = std::sqrt(3.0);
      std::uniform_real_distribution<double> u(-half_width, half_width);
      for (std::size_t i = 0; i < d; ++i) out[i] = u(rng);
      break;
    }
    case NoiseLaw::ScaleMixture: {
      std::bernoulli_distribution coin(0.5);
      const double unit = 1.0 / std::sqrt((1.0 + noise.sigma * noise.sigma) / 2.0);
      const double scale = (coin(rng) ? 1.0 : noise.sigma) * unit;
      std::normal_distribution<double> g;
      for (std::size_t i = 0; i < d; ++i) out[i] = scale * g(rng);
      break;
    }
  }
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw Error(ErrorKind::Io, "truncated matrix dump");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

std::string_view to_string(NoiseLaw law) noexcept {
  switch (law) {
    case NoiseLaw::Gaussian: return "gaussian";
    case NoiseLaw::Rademacher: return "rademacher";
    case NoiseLaw::UniformStd: return "uniform_std";
    case NoiseLaw::ScaleMixture: return "scale_mixture";
  }
  return "gaussian";
}

NoiseLaw noise_law_from_string(std::string_view name) {
  for (NoiseLaw l : {NoiseLaw::Gaussian, NoiseLaw::Rademacher, NoiseLaw::UniformStd,
                     NoiseLaw::ScaleMixture})
    if (to_string(l) == name) return l;
  throw Error(ErrorKind::InvalidArgument, "unknown noise law '" + std::string(name) + "'");
}

void NoiseSpec::validate() const {
  if (law == NoiseLaw::ScaleMixture && !(std::isfinite(sigma) && sigma > 1.0))
    throw Error(ErrorKind::InvalidArgument, "scale_mixture.sigma must be > 1");
}

std::uint64_t SeedSpec::child(std::uint64_t replicate, std::uint64_t column) const noexcept {
  const std::uint64_t r = splitmix64(master_seed ^ splitmix64(replicate + 0x5851F42D4C957F2DULL));
  return splitmix64(r ^ splitmix64(column * 0xD1B54A32D192ED03ULL + 1));
}

Matrix sample_z(const NoiseSpec& noise, std::size_t d, std::size_t n, const SeedSpec& seed,
                std::uint64_t replicate) {
  noise.validate();
  if (d < 2 || n < 2) throw Error(ErrorKind::InvalidArgument, "sample_z needs d >= 2 and n >= 2");
  Matrix z(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    std::mt19937_64 rng(seed.child(replicate, j));
    fill_column(noise, rng, z.col(static_cast<Eigen::Index>(j)).data(), d);
  }
  return z;
}

DataMatrix synthesize_x(const CovarianceModel& model, const Matrix& z) {
  const auto d = static_cast<std::size_t>(z.rows());
  EigenSpectrum spectrum = [&] {
    try {
      return eigenvalues(model, d);
    } catch (const Error& e) {
      throw Error(ErrorKind::Shape, std::string("z does not fit the model: ") + e.what());
    }
  }();
  Vector root(z.rows());
  Eigen::Index i = 0;
  for (const auto& run : spectrum.runs()) {
    root.segment(i, static_cast<Eigen::Index>(run.count)).setConstant(std::sqrt(run.value));
    i += static_cast<Eigen::Index>(run.count);
  }
  return DataMatrix{root.asDiagonal() * z, Frame::Eigenbasis, model};
}

DataMatrix to_ambient(const DataMatrix& x) {
  if (x.frame == Frame::Ambient) return x;
  DataMatrix out{Matrix(x.values.rows(), x.values.cols()), Frame::Ambient, x.model};
  const auto d = static_cast<std::size_t>(x.values.rows());
  for (Eigen::Index j = 0; j < x.values.cols(); ++j) {
    eigenbasis_to_ambient(x.model, std::span<const double>(x.values.col(j).data(), d),
                          std::span<double>(out.values.col(j).data(), d));
  }
  return out;
}

DistanceStats distance_stats(const DataMatrix& x) {
  if (x.n() < 2) throw Error(ErrorKind::InvalidArgument, "distance_stats needs n >= 2");
  const double trace = eigenvalues(x.model, x.d()).trace();
  DistanceStats s;
  const Matrix gram = x.values.transpose() * x.values;
  const auto n = gram.rows();
  for (Eigen::Index j = 0; j < n; ++j) s.scaled_norms.push_back(std::sqrt(gram(j, j) / trace));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double sq = (x.values.col(j) - x.values.col(k)).squaredNorm();
      s.scaled_distances.push_back(std::sqrt(sq / (2.0 * trace)));
    }
  return s;
}

void write_binary(std::ostream& os, const Matrix& m) {
  put_u64(os, static_cast<std::uint64_t>(m.rows()));
  put_u64(os, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_u64(os, std::bit_cast<std::uint64_t>(m(i, j)));
  if (!os) throw Error(ErrorKind::Io, "failed to write matrix dump");
}

Matrix read_binary(std::istream& is) {
  const auto rows = get_u64(is);
  const auto cols = get_u64(is);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = std::bit_cast<double>(get_u64(is));
  return m;
}

}  // namespace hdlss
