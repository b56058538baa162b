#include "homsum/simulate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <bit>
#include <boost/math/special_functions/gamma.hpp>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <thread>

#include "homsum/error.hpp"
#include "homsum/numeric.hpp"

namespace homsum {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr char kDumpMagic[8] = {'H', 'S', 'M', 'S', 'M', 'P', 'L', '1'};

}  // namespace

DistributionSpec::DistributionSpec(Law law, double p) : law_(law), p_(p) {
  if (law_ == Law::TwoPoint) {
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "two_point needs p in (0, 1)");
    hi_ = std::sqrt((1.0 - p) / p);
    lo_ = -std::sqrt(p / (1.0 - p));
  }
}

DistributionSpec DistributionSpec::parse(std::string_view text) {
  if (text == "gaussian") return DistributionSpec(Law::Gaussian);
  if (text == "rademacher") return DistributionSpec(Law::Rademacher);
  if (text == "uniform_unit_variance" || text == "uniform") return DistributionSpec(Law::UniformUnitVariance);
  if (text == "shifted_exponential") return DistributionSpec(Law::ShiftedExponential);
  constexpr std::string_view prefix = "two_point";
  if (text.starts_with(prefix)) {
    auto rest = text.substr(prefix.size());
    if (rest.starts_with(':')) {
      rest.remove_prefix(1);
    } else if (rest.starts_with('(') && rest.ends_with(')')) {
      rest = rest.substr(1, rest.size() - 2);
    } else {
      rest = {};
    }
    double p = 0.0;
    const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), p);
    if (!rest.empty() && res.ec == std::errc{} && res.ptr == rest.data() + rest.size()) {
      return DistributionSpec(Law::TwoPoint, p);
    }
  }
  throw Error(ErrorCode::Usage, "unknown law '" + std::string(text) + "'");
}

std::string DistributionSpec::name() const {
  switch (law_) {
    case Law::Gaussian: return "gaussian";
    case Law::Rademacher: return "rademacher";
    case Law::UniformUnitVariance: return "uniform_unit_variance";
    case Law::ShiftedExponential: return "shifted_exponential";
    case Law::TwoPoint: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, p_);
      return "two_point(" + std::string(buf, res.ptr) + ")";
    }
  }
  return "unknown";
}

double DistributionSpec::abs_third_moment() const noexcept {
  switch (law_) {
    case Law::Gaussian: return 2.0 * std::sqrt(2.0 / std::numbers::pi);
    case Law::Rademacher: return 1.0;
    case Law::UniformUnitVariance: return 3.0 * kSqrt3 / 4.0;
    case Law::ShiftedExponential: return 12.0 / std::numbers::e - 2.0;
    case Law::TwoPoint: return ((1 - p_) * (1 - p_) + p_ * p_) / std::sqrt(p_ * (1 - p_));
  }
  return 0.0;
}

double DistributionSpec::third_moment() const noexcept {
  switch (law_) {
    case Law::ShiftedExponential: return 2.0;
    case Law::TwoPoint: return (1 - 2 * p_) / std::sqrt(p_ * (1 - p_));
    default: return 0.0;
  }
}

double DistributionSpec::fourth_moment() const noexcept {
  switch (law_) {
    case Law::Gaussian: return 3.0;
    case Law::Rademacher: return 1.0;
    case Law::UniformUnitVariance: return 1.8;
    case Law::ShiftedExponential: return 9.0;
    case Law::TwoPoint: return ((1 - p_) * (1 - p_) * (1 - p_) + p_ * p_ * p_) / (p_ * (1 - p_));
  }
  return 0.0;
}

double DistributionSpec::sample(CounterStream& rng) const noexcept {
  switch (law_) {
    case Law::Gaussian: return rng.next_normal();
    case Law::Rademacher: return rng.next_sign();
    case Law::UniformUnitVariance: return kSqrt3 * (2.0 * rng.next_open01() - 1.0);
    case Law::ShiftedExponential: return -std::log(rng.next_open01()) - 1.0;
    case Law::TwoPoint: return rng.next_open01() < p_ ? hi_ : lo_;
  }
  return 0.0;
}

void DistributionSpec::fill(CounterStream& rng, std::span<double> out) const noexcept {
  for (double& x : out) x = sample(rng);
}

namespace {

unsigned resolve_workers(unsigned requested, std::uint64_t batches) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(w, std::max<std::uint64_t>(batches, 1)));
}

void check_config(const SampleConfig& config) {
  if (config.n == 0 || config.n > kMaxSamples) {
    throw Error(ErrorCode::ParameterOutOfRange, "sample count must lie in [1, " + std::to_string(kMaxSamples) + "]");
  }
  if (config.batch_size == 0) throw Error(ErrorCode::ParameterOutOfRange, "batch size must be positive");
}

// Runs body(draw) for every draw index, batches handed out dynamically. Each
// draw is a pure function of its index, so scheduling never affects results.
template <class MakeState, class Body>
void for_each_draw(const SampleConfig& config, MakeState make_state, Body body) {
  const std::uint64_t batches = (config.n + config.batch_size - 1) / config.batch_size;
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    auto state = make_state();
    for (std::uint64_t b = next++; b < batches; b = next++) {
      const std::uint64_t end = std::min(config.n, (b + 1) * config.batch_size);
      for (std::uint64_t k = b * config.batch_size; k < end; ++k) body(state, k);
    }
  };
  const unsigned workers = resolve_workers(config.workers, batches);
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
}

MomentWithError mean_with_error(const CompensatedSum& sum, const CompensatedSum& sum_sq, double n) {
  const double mean = sum.value() / n;
  const double var = std::max(sum_sq.value() / n - mean * mean, 0.0);
  return {mean, std::sqrt(var / n)};
}

}  // namespace

SampleSummary sample_sums(const SymmetricKernel& f, const DistributionSpec& dist, const SampleConfig& config) {
  check_config(config);
  SampleSummary s;
  s.n = config.n;
  s.samples.assign(config.n, 0.0);
  const std::size_t dim = f.dimension();
  for_each_draw(
      config, [dim] { return std::vector<double>(dim); },
      [&](std::vector<double>& x, std::uint64_t k) {
        CounterStream rng(config.seed, k);
        dist.fill(rng, x);
        s.samples[k] = f.evaluate_sum(x);
      });

  // Powers 1..8 in draw order give the moments and their standard errors.
  std::array<CompensatedSum, 8> pw;
  CompensatedSum abs3, abs6;
  for (double q : s.samples) {
    double p = 1.0;
    for (auto& acc : pw) acc.add(p *= q);
    const double a3 = std::fabs(q) * q * q;
    abs3.add(a3);
    abs6.add(a3 * a3);
  }
  const double n = static_cast<double>(config.n);
  for (int k = 1; k <= 4; ++k) s.moments[k - 1] = mean_with_error(pw[k - 1], pw[2 * k - 1], n);
  s.abs_third = mean_with_error(abs3, abs6, n);
  s.sorted = s.samples;
  std::sort(s.sorted.begin(), s.sorted.end());
  return s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double centered_chi2_cdf(double x, int nu) {
  if (nu < 1) throw Error(ErrorCode::InvalidDegrees, "degrees of freedom must be >= 1");
  if (x <= -nu) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(nu / 2.0, (x + nu) / 2.0);
}

double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double fx = cdf(sorted[i]);
    d = std::max({d, (i + 1) / n - fx, fx - i / n});
  }
  return d;
}

double ks_normal(const SampleSummary& s) { return ks_statistic(s.sorted, normal_cdf); }

double ks_chi2(const SampleSummary& s, int nu) {
  if (nu < 1) throw Error(ErrorCode::InvalidDegrees, "degrees of freedom must be >= 1");
  return ks_statistic(s.sorted, [nu](double x) { return centered_chi2_cdf(x, nu); });
}

double dkw_band(std::uint64_t n, double alpha) { return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n))); }

VectorSampleSummary sample_vector_sums(const std::vector<SymmetricKernel>& kernels, const DistributionSpec& dist,
                                       const SampleConfig& config) {
  check_config(config);
  if (kernels.empty()) throw Error(ErrorCode::DimensionMismatch, "at least one kernel is required");
  Index dim = 0;
  for (const auto& f : kernels) dim = std::max(dim, f.dimension());
  std::vector<SymmetricKernel> padded;
  for (const auto& f : kernels) padded.push_back(f.dimension() == dim ? f : f.shifted(0, dim));

  VectorSampleSummary s;
  s.n = config.n;
  s.m = kernels.size();
  s.joint.assign(config.n * s.m, 0.0);
  for_each_draw(
      config, [dim] { return std::vector<double>(dim); },
      [&](std::vector<double>& x, std::uint64_t k) {
        CounterStream rng(config.seed, k);
        dist.fill(rng, x);
        for (std::size_t j = 0; j < s.m; ++j) s.joint[k * s.m + j] = padded[j].evaluate_sum(x);
      });

  const double n = static_cast<double>(config.n);
  s.covariance.assign(s.m, std::vector<double>(s.m, 0.0));
  s.covariance_std_error = s.covariance;
  for (std::size_t i = 0; i < s.m; ++i) {
    for (std::size_t j = i; j < s.m; ++j) {
      CompensatedSum sum, sum_sq;
      for (std::uint64_t k = 0; k < config.n; ++k) {
        const double prod = s.joint[k * s.m + i] * s.joint[k * s.m + j];
        sum.add(prod);
        sum_sq.add(prod * prod);
      }
      const auto est = mean_with_error(sum, sum_sq, n);
      s.covariance[i][j] = s.covariance[j][i] = est.value;
      s.covariance_std_error[i][j] = s.covariance_std_error[j][i] = est.std_error;
    }
  }
  std::vector<double> column(config.n);
  for (std::size_t j = 0; j < s.m; ++j) {
    for (std::uint64_t k = 0; k < config.n; ++k) column[k] = s.joint[k * s.m + j];
    std::sort(column.begin(), column.end());
    s.marginal_ks.push_back(ks_statistic(column, normal_cdf));
  }
  return s;
}

std::vector<double> sample_gaussian_vectors(const std::vector<std::vector<double>>& covariance, std::uint64_t n,
                                            std::uint64_t seed) {
  const auto m = static_cast<Eigen::Index>(covariance.size());
  if (m == 0) throw Error(ErrorCode::InvalidCovariance, "covariance matrix is empty");
  Eigen::MatrixXd v(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<Eigen::Index>(covariance[i].size()) != m) {
      throw Error(ErrorCode::InvalidCovariance, "covariance matrix must be square");
    }
    for (Eigen::Index j = 0; j < m; ++j) v(i, j) = covariance[i][j];
  }
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidCovariance, "covariance matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(v);
  Eigen::VectorXd root = solver.eigenvalues();
  const double tol = 1e-10 * std::max(1.0, root.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < m; ++k) {
    if (root(k) < -tol) throw Error(ErrorCode::InvalidCovariance, "covariance matrix has a negative eigenvalue");
    root(k) = std::sqrt(std::max(root(k), 0.0));
  }
  const Eigen::MatrixXd factor = solver.eigenvectors() * root.asDiagonal();
  std::vector<double> out(n * static_cast<std::size_t>(m));
  Eigen::VectorXd z(m);
  for (std::uint64_t k = 0; k < n; ++k) {
    CounterStream rng(seed, k);
    for (Eigen::Index j = 0; j < m; ++j) z(j) = rng.next_normal();
    const Eigen::VectorXd y = factor * z;
    for (Eigen::Index j = 0; j < m; ++j) out[k * m + j] = y(j);
  }
  return out;
}

double joint_ks_two_sample(std::span<const double> a, std::span<const double> b, std::size_t m,
                           std::size_t max_points) {
  if (m == 0 || a.size() % m != 0 || b.size() % m != 0 || a.empty() || b.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "joint samples must be nonempty rows of equal dimension");
  }
  const std::size_t na = a.size() / m;
  const std::size_t nb = b.size() / m;
  auto fraction_below = [m](std::span<const double> rows, std::size_t count, const double* z) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < count; ++k) {
      bool below = true;
      for (std::size_t j = 0; j < m && below; ++j) below = rows[k * m + j] <= z[j];
      hits += below;
    }
    return static_cast<double>(hits) / static_cast<double>(count);
  };
  double d = 0.0;
  const std::size_t per_side = std::max<std::size_t>(1, max_points / 2);
  for (auto [rows, count] : {std::pair{a, na}, std::pair{b, nb}}) {
    for (std::size_t k = 0; k < std::min(per_side, count); ++k) {
      const double* z = rows.data() + k * m;
      d = std::max(d, std::fabs(fraction_below(a, na, z) - fraction_below(b, nb, z)));
    }
  }
  return d;
}

namespace {

template <class T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

}  // namespace

void write_sample_dump(const std::filesystem::path& path, std::span<const double> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Usage, "cannot open " + path.string() + " for writing");
  out.write(kDumpMagic, sizeof kDumpMagic);
  const auto count = to_little_endian<std::uint64_t>(samples.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (double x : samples) {
    const auto le = to_little_endian(std::bit_cast<std::uint64_t>(x));
    out.write(reinterpret_cast<const char*>(&le), sizeof le);
  }
  if (!out) throw Error(ErrorCode::Usage, "failed writing " + path.string());
}

std::vector<double> read_sample_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Usage, "cannot open " + path.string());
  char magic[8];
  std::uint64_t count = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || std::memcmp(magic, kDumpMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::MalformedInput, "not a sample dump: " + path.string());
  }
  count = to_little_endian(count);
  if (count > kMaxSamples) throw Error(ErrorCode::MalformedInput, "sample dump count too large");
  std::vector<double> out(count);
  for (auto& x : out) {
    std::uint64_t raw = 0;
    in.read(reinterpret_cast<char*>(&raw), sizeof raw);
    x = std::bit_cast<double>(to_little_endian(raw));
  }
  if (!in) throw Error(ErrorCode::MalformedInput, "truncated sample dump: " + path.string());
  return out;
}

}  // namespace homsum
