#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace maddness {

// Row-major matrix of 32-bit floats. Every entry is finite.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);  // zero-filled
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const float> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

// N x C matrix of 4-bit codes (one byte each, values in [0, 16)).
struct CodeMatrix {
  std::size_t rows = 0;
  std::size_t codebooks = 0;
  std::vector<std::uint8_t> data;

  CodeMatrix() = default;
  CodeMatrix(std::size_t n, std::size_t c) : rows(n), codebooks(c), data(n * c, 0) {}

  std::uint8_t operator()(std::size_t n, std::size_t c) const { return data[n * codebooks + c]; }
  std::uint8_t& operator()(std::size_t n, std::size_t c) { return data[n * codebooks + c]; }
  std::span<const std::uint8_t> row(std::size_t n) const {
    return {data.data() + n * codebooks, codebooks};
  }

  bool operator==(const CodeMatrix&) const = default;
};

// Operation tally filled in by the instrumented kernels when a non-null
// pointer is passed. Additions and shifts are not counted.
struct OpCounts {
  std::uint64_t multiplies = 0;
  std::uint64_t comparisons = 0;
  std::uint64_t lookups = 0;

  OpCounts& operator+=(const OpCounts& o) {
    multiplies += o.multiplies;
    comparisons += o.comparisons;
    lookups += o.lookups;
    return *this;
  }
  bool operator==(const OpCounts&) const = default;
};

// Exact product with double accumulation.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, OpCounts* counts = nullptr);
DenseMatrix transpose(const DenseMatrix& a);
double frobenius_norm_sq(const DenseMatrix& a);

// Round to nearest, ties to even, independent of the floating-point environment.
double round_half_even(double x);

// Largest l with 2^l * range <= 255, or `degenerate` when range <= 0.
int byte_scale_exponent(double range, int degenerate = 30);

// ||approx - exact||_F^2 / ||exact||_F^2.
double nmse(const DenseMatrix& approx, const DenseMatrix& exact);

// xoshiro256** seeded through splitmix64. Normal draws use Box-Muller so the
// stream is identical on every platform (std:: distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();                          // [0, 1)
  std::uint64_t uniform_int(std::uint64_t bound);  // [0, bound)
  double normal();

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t s_[4];
  std::optional<double> spare_normal_;
};

enum class TaskKind { LowRankPlusNoise, GaussianMixtureClassifier };

struct SyntheticTaskSpec {
  TaskKind kind = TaskKind::LowRankPlusNoise;
  std::size_t n = 1024;
  std::size_t d = 32;
  std::size_t m = 8;
  std::size_t rank = 4;
  double noise_scale = 0.1;
  std::size_t class_count = 10;
  std::uint64_t seed = 0;
};

struct SyntheticTask {
  DenseMatrix train;  // n x d
  DenseMatrix test;   // ceil(n/5) x d
  DenseMatrix op;     // d x m
  std::optional<std::vector<std::uint32_t>> train_labels;
  std::optional<std::vector<std::uint32_t>> test_labels;
};

void validate(const SyntheticTaskSpec& spec);

// Pure function of the spec.
//
// LowRankPlusNoise: rows are z W + noise_scale * e with z ~ N(0, I_rank),
// W ~ N(0, 1/rank) of shape rank x d, e ~ N(0, I_d); B ~ N(0, 1).
//
// GaussianMixtureClassifier: each row is mu_y + noise_scale * e with labels y drawn
// uniformly and mu ~ N(0, I); B holds the class means as columns (m must equal class_count), so
// argmax over a row of AB is a nearest-mean style classifier.
SyntheticTask generate_task(const SyntheticTaskSpec& spec);

}  // namespace maddness
