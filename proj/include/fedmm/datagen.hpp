#pragma once

// Seeded synthetic federations for the quadratic and robust-regression experiments.
//
// Random streams: every tensor is drawn from its own std::mt19937_64 seeded with
// std::seed_seq{seed_lo, seed_hi, stream, tensor}, where stream is the 1-based agent
// index (0 for problem-wide draws). Changing m therefore leaves agent i's data intact.
//
// Normal variates use the cosine branch of Box-Muller on two 53-bit uniforms, one
// variate per pair. Generation is bitwise reproducible within this implementation;
// no cross-language equality is promised.

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "fedmm/problems.hpp"

namespace fedmm {

class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t tensor);

  /// N(mean, stddev^2)
  double operator()(double mean = 0.0, double stddev = 1.0);
  /// Uniform on (0, 1].
  double uniform_open();

 private:
  std::mt19937_64 engine_;
};

struct QuadraticGenSpec {
  std::size_t m = 20;
  std::size_t d = 50;
  std::size_t n = 500;
  std::uint64_t seed = 1;

  void validate() const;
};

struct RlrGenSpec {
  std::size_t m = 10;
  std::size_t d = 10;
  std::size_t n = 50;
  double alpha = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct QuadraticData {
  std::vector<Matrix> Q;  // A_i'A_i
  std::vector<Vector> c;  // A_i'b_i
  std::size_t n = 0;
  std::uint64_t seed = 0;  // seed actually used (after any singular-retry)
};

struct RlrData {
  std::vector<RlrSamples> agents;
  std::vector<Vector> x_star;  // per-agent generating model
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

/// Draws A_i, theta_i, eps_i and keeps only Q_i = A_i'A_i, c_i = A_i'b_i.
/// A singular aggregate curvature triggers regeneration with seed+1 (up to 3 retries).
QuadraticData gen_quadratic_data(const QuadraticGenSpec& spec);
MinimaxProblem gen_quadratic(const QuadraticGenSpec& spec);

RlrData gen_rlr_data(const RlrGenSpec& spec);
MinimaxProblem gen_rlr(const RlrGenSpec& spec);

MinimaxProblem to_problem(const QuadraticData& data);
MinimaxProblem to_problem(const RlrData& data, double y_radius = 1.0);

// Dataset dump (layout in docs/dataset_format.md).
enum class DatasetKind : std::uint32_t { Quadratic = 1, Rlr = 2 };

void write_dataset(const std::filesystem::path& path, const QuadraticData& data);
void write_dataset(const std::filesystem::path& path, const RlrData& data);
DatasetKind peek_dataset_kind(const std::filesystem::path& path);
QuadraticData read_quadratic_dataset(const std::filesystem::path& path);
RlrData read_rlr_dataset(const std::filesystem::path& path);

}  // namespace fedmm
