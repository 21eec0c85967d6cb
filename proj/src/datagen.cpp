#include "fedmm/datagen.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

namespace fedmm {

static_assert(std::endian::native == std::endian::little,
              "dataset dumps are written in host order and assume a little-endian host");

namespace {

// Per-tensor substream ids.
enum QuadTensor : std::uint64_t { kAlpha = 0, kA = 1, kMu = 2, kTheta = 3, kEps = 4 };
enum RlrTensor : std::uint64_t { kXStar = 1, kC = 2, kRlrMu = 3, kFeatures = 4, kNoise = 5 };

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

}  // namespace

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t tensor) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(tensor)};
  engine_.seed(seq);
}

double NormalStream::uniform_open() {
  return static_cast<double>((engine_() >> 11) + 1) * kTwoPow53Inv;
}

double NormalStream::operator()(double mean, double stddev) {
  const double u1 = uniform_open();
  const double u2 = static_cast<double>(engine_() >> 11) * kTwoPow53Inv;
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

void QuadraticGenSpec::validate() const {
  if (m < 1) throw ConfigError("quadratic spec: m must be >= 1");
  if (d < 1) throw ConfigError("quadratic spec: d must be >= 1");
  if (n < d) throw ConfigError("quadratic spec: n must be >= d so that A_i'A_i has full rank");
}

void RlrGenSpec::validate() const {
  if (m < 1) throw ConfigError("rlr spec: m must be >= 1");
  if (d < 1) throw ConfigError("rlr spec: d must be >= 1");
  if (n < 1) throw ConfigError("rlr spec: n must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw ConfigError("rlr spec: alpha must be finite and >= 0");
}

namespace {

QuadraticData draw_quadratic(const QuadraticGenSpec& spec, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(spec.d);
  const auto n = static_cast<Eigen::Index>(spec.n);
  QuadraticData out;
  out.n = spec.n;
  out.seed = seed;

  // alpha ~ N(0, 100), shared by every agent.
  const double alpha = NormalStream(seed, 0, kAlpha)(0.0, 10.0);

  for (std::size_t i = 1; i <= spec.m; ++i) {
    const double a_std = 1.0 / (0.5 * static_cast<double>(i));

    NormalStream a_stream(seed, i, kA);
    Matrix A(n, d);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < d; ++c) A(r, c) = a_stream(0.0, a_std);

    NormalStream mu_stream(seed, i, kMu);
    Vector mu(d);
    for (Eigen::Index k = 0; k < d; ++k) mu(k) = mu_stream(alpha, 1.0);

    NormalStream theta_stream(seed, i, kTheta);
    Vector theta(d);
    for (Eigen::Index k = 0; k < d; ++k) theta(k) = theta_stream(mu(k), 1.0);

    NormalStream eps_stream(seed, i, kEps);
    Vector b = A * theta;
    for (Eigen::Index r = 0; r < n; ++r) b(r) += eps_stream(0.0, 0.5);

    out.Q.push_back(A.transpose() * A);
    out.c.push_back(A.transpose() * b);
  }
  return out;
}

}  // namespace

QuadraticData gen_quadratic_data(const QuadraticGenSpec& spec) {
  spec.validate();
  constexpr int kRetries = 3;
  for (int attempt = 0; attempt <= kRetries; ++attempt) {
    QuadraticData data = draw_quadratic(spec, spec.seed + static_cast<std::uint64_t>(attempt));
    try {
      (void)to_problem(data);
      return data;
    } catch (const SingularSystemError&) {
      // fall through to the next seed
    }
  }
  throw SingularSystemError("gen_quadratic: aggregate curvature singular for seeds " +
                            std::to_string(spec.seed) + ".." +
                            std::to_string(spec.seed + kRetries));
}

MinimaxProblem gen_quadratic(const QuadraticGenSpec& spec) {
  return to_problem(gen_quadratic_data(spec));
}

RlrData gen_rlr_data(const RlrGenSpec& spec) {
  spec.validate();
  const auto d = static_cast<Eigen::Index>(spec.d);
  const auto n = static_cast<Eigen::Index>(spec.n);
  RlrData out;
  out.n = spec.n;
  out.seed = spec.seed;

  for (std::size_t i = 1; i <= spec.m; ++i) {
    NormalStream xs_stream(spec.seed, i, kXStar);
    Vector x_star(d);
    for (Eigen::Index k = 0; k < d; ++k) x_star(k) = xs_stream();

    NormalStream c_stream(spec.seed, i, kC);
    Vector c(d);
    for (Eigen::Index k = 0; k < d; ++k) c(k) = c_stream(0.0, spec.alpha);

    NormalStream mu_stream(spec.seed, i, kRlrMu);
    Vector mu(d);
    for (Eigen::Index k = 0; k < d; ++k) mu(k) = mu_stream(c(k), 1.0);

    // Covariance i^{-1.3} I.
    const double feature_std = std::pow(static_cast<double>(i), -0.65);
    NormalStream f_stream(spec.seed, i, kFeatures);
    Matrix a(n, d);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index k = 0; k < d; ++k) a(r, k) = f_stream(mu(k), feature_std);

    NormalStream noise_stream(spec.seed, i, kNoise);
    Vector b = a * x_star;
    for (Eigen::Index r = 0; r < n; ++r) b(r) += noise_stream();

    out.agents.push_back({std::move(a), std::move(b)});
    out.x_star.push_back(std::move(x_star));
  }
  return out;
}

MinimaxProblem gen_rlr(const RlrGenSpec& spec) { return to_problem(gen_rlr_data(spec)); }

MinimaxProblem to_problem(const QuadraticData& data) {
  return make_uncoupled_quadratic(data.Q, data.c);
}

MinimaxProblem to_problem(const RlrData& data, double y_radius) {
  return make_robust_regression(data.agents, y_radius);
}

// --- dataset dump ------------------------------------------------------------

namespace {

constexpr char kMagic[6] = {'F', 'E', 'D', 'M', 'M', '1'};

struct Header {
  DatasetKind kind;
  std::uint64_t m, d, n, seed;
};

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw ConfigError("dataset '" + path.string() + "' is truncated");
  return value;
}

void put_matrix(std::ostream& os, const Matrix& M) {
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) put(os, M(r, c));
}

void put_vector(std::ostream& os, const Vector& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) put(os, v(k));
}

Matrix get_matrix(std::istream& is, std::uint64_t rows, std::uint64_t cols,
                  const std::filesystem::path& path) {
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) M(r, c) = get<double>(is, path);
  return M;
}

Vector get_vector(std::istream& is, std::uint64_t len, const std::filesystem::path& path) {
  Vector v(static_cast<Eigen::Index>(len));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = get<double>(is, path);
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  return os;
}

void write_header(std::ostream& os, const Header& h) {
  os.write(kMagic, sizeof(kMagic));
  put(os, static_cast<std::uint32_t>(h.kind));
  put(os, h.m);
  put(os, h.d);
  put(os, h.n);
  put(os, h.seed);
}

std::ifstream open_in(const std::filesystem::path& path, Header& h) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open dataset '" + path.string() + "'");
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ConfigError("'" + path.string() + "' is not a FEDMM1 dataset");
  const auto kind = get<std::uint32_t>(is, path);
  if (kind != static_cast<std::uint32_t>(DatasetKind::Quadratic) &&
      kind != static_cast<std::uint32_t>(DatasetKind::Rlr))
    throw ConfigError("dataset '" + path.string() + "' has unknown kind " + std::to_string(kind));
  h.kind = static_cast<DatasetKind>(kind);
  h.m = get<std::uint64_t>(is, path);
  h.d = get<std::uint64_t>(is, path);
  h.n = get<std::uint64_t>(is, path);
  h.seed = get<std::uint64_t>(is, path);
  if (h.m == 0 || h.d == 0 || h.n == 0)
    throw ConfigError("dataset '" + path.string() + "' has empty dimensions");
  return is;
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const QuadraticData& data) {
  auto os = open_out(path);
  const auto d = static_cast<std::uint64_t>(data.Q.front().rows());
  write_header(os, {DatasetKind::Quadratic, data.Q.size(), d, data.n, data.seed});
  for (std::size_t i = 0; i < data.Q.size(); ++i) {
    put_matrix(os, data.Q[i]);
    put_vector(os, data.c[i]);
  }
  if (!os) throw ConfigError("failed writing '" + path.string() + "'");
}

void write_dataset(const std::filesystem::path& path, const RlrData& data) {
  auto os = open_out(path);
  const auto d = static_cast<std::uint64_t>(data.agents.front().a.cols());
  write_header(os, {DatasetKind::Rlr, data.agents.size(), d, data.n, data.seed});
  for (std::size_t i = 0; i < data.agents.size(); ++i) {
    put_vector(os, data.x_star[i]);
    put_matrix(os, data.agents[i].a);
    put_vector(os, data.agents[i].b);
  }
  if (!os) throw ConfigError("failed writing '" + path.string() + "'");
}

DatasetKind peek_dataset_kind(const std::filesystem::path& path) {
  Header h{};
  open_in(path, h);
  return h.kind;
}

QuadraticData read_quadratic_dataset(const std::filesystem::path& path) {
  Header h{};
  auto is = open_in(path, h);
  if (h.kind != DatasetKind::Quadratic)
    throw ConfigError("dataset '" + path.string() + "' is not a quadratic dataset");
  QuadraticData out;
  out.n = h.n;
  out.seed = h.seed;
  for (std::uint64_t i = 0; i < h.m; ++i) {
    out.Q.push_back(get_matrix(is, h.d, h.d, path));
    out.c.push_back(get_vector(is, h.d, path));
  }
  return out;
}

RlrData read_rlr_dataset(const std::filesystem::path& path) {
  Header h{};
  auto is = open_in(path, h);
  if (h.kind != DatasetKind::Rlr)
    throw ConfigError("dataset '" + path.string() + "' is not an rlr dataset");
  RlrData out;
  out.n = h.n;
  out.seed = h.seed;
  for (std::uint64_t i = 0; i < h.m; ++i) {
    out.x_star.push_back(get_vector(is, h.d, path));
    Matrix a = get_matrix(is, h.n, h.d, path);
    Vector b = get_vector(is, h.n, path);
    out.agents.push_back({std::move(a), std::move(b)});
  }
  return out;
}

}  // namespace fedmm
