#include "maddness/core.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace maddness {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("DenseMatrix: data length " + std::to_string(data_.size()) +
                                " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw std::invalid_argument("DenseMatrix: non-finite entry");
  }
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b, OpCounts* counts) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  const std::size_t n = a.rows(), d = a.cols(), m = b.cols();
  DenseMatrix out(n, m);
  std::vector<double> acc(m);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      const double aij = a(i, j);
      auto brow = b.row(j);
      for (std::size_t k = 0; k < m; ++k) acc[k] += aij * brow[k];
    }
    for (std::size_t k = 0; k < m; ++k) out(i, k) = static_cast<float>(acc[k]);
  }
  if (counts) counts->multiplies += static_cast<std::uint64_t>(n) * d * m;
  return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

double frobenius_norm_sq(const DenseMatrix& a) {
  double s = 0.0;
  for (float v : a.data()) s += static_cast<double>(v) * v;
  return s;
}

double round_half_even(double x) {
  const double r = std::floor(x + 0.5);
  if (r - x == 0.5 && std::fmod(r, 2.0) != 0.0) return r - 1.0;
  return r;
}

int byte_scale_exponent(double range, int degenerate) {
  if (!(range > 0.0)) return degenerate;
  int l = static_cast<int>(std::floor(std::log2(255.0 / range)));
  while (std::ldexp(range, l) > 255.0) --l;
  while (std::ldexp(range, l + 1) <= 255.0) ++l;
  return l;
}

double nmse(const DenseMatrix& approx, const DenseMatrix& exact) {
  if (approx.rows() != exact.rows() || approx.cols() != exact.cols()) {
    throw std::invalid_argument("nmse: shape mismatch");
  }
  const double denom = frobenius_norm_sq(exact);
  if (denom == 0.0) throw std::invalid_argument("nmse: exact matrix has zero Frobenius norm");
  double num = 0.0;
  auto x = approx.data();
  auto y = exact.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = static_cast<double>(x[i]) - y[i];
    num += diff * diff;
  }
  return num / denom;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::uniform_int: zero bound");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

double Rng::normal() {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

void validate(const SyntheticTaskSpec& spec) {
  if (spec.n == 0 || spec.d == 0 || spec.m == 0) {
    throw std::invalid_argument("generate_task: n, d, m must be positive");
  }
  if (!(spec.noise_scale >= 0.0) || !std::isfinite(spec.noise_scale)) {
    throw std::invalid_argument("generate_task: noise_scale must be finite and >= 0");
  }
  switch (spec.kind) {
    case TaskKind::LowRankPlusNoise:
      if (spec.rank == 0 || spec.rank > std::min(spec.n, spec.d)) {
        throw std::invalid_argument("generate_task: rank must be in [1, min(n, d)]");
      }
      break;
    case TaskKind::GaussianMixtureClassifier:
      if (spec.class_count < 2) throw std::invalid_argument("generate_task: class_count < 2");
      if (spec.m != spec.class_count) {
        throw std::invalid_argument("generate_task: classifier task requires m == class_count");
      }
      break;
  }
}

namespace {

DenseMatrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  std::vector<float> v(rows * cols);
  for (auto& x : v) x = static_cast<float>(scale * rng.normal());
  return DenseMatrix(rows, cols, std::move(v));
}

DenseMatrix low_rank_rows(Rng& rng, const DenseMatrix& basis, std::size_t n, double noise) {
  const std::size_t rank = basis.rows(), d = basis.cols();
  DenseMatrix out(n, d);
  std::vector<double> z(rank);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& zk : z) zk = rng.normal();
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < rank; ++k) acc += z[k] * basis(k, j);
      if (noise > 0.0) acc += noise * rng.normal();
      out(i, j) = static_cast<float>(acc);
    }
  }
  return out;
}

DenseMatrix mixture_rows(Rng& rng, const DenseMatrix& means, std::size_t n, double noise,
                         std::vector<std::uint32_t>& labels) {
  const std::size_t k = means.rows(), d = means.cols();
  DenseMatrix out(n, d);
  labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::uint32_t>(rng.uniform_int(k));
    labels[i] = y;
    for (std::size_t j = 0; j < d; ++j) {
      out(i, j) = static_cast<float>(means(y, j) + noise * rng.normal());
    }
  }
  return out;
}

}  // namespace

SyntheticTask generate_task(const SyntheticTaskSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const std::size_t n_test = (spec.n + 4) / 5;
  SyntheticTask task;
  if (spec.kind == TaskKind::LowRankPlusNoise) {
    const DenseMatrix basis =
        gaussian(rng, spec.rank, spec.d, 1.0 / std::sqrt(static_cast<double>(spec.rank)));
    task.train = low_rank_rows(rng, basis, spec.n, spec.noise_scale);
    task.test = low_rank_rows(rng, basis, n_test, spec.noise_scale);
    task.op = gaussian(rng, spec.d, spec.m, 1.0);
  } else {
    const DenseMatrix means = gaussian(rng, spec.class_count, spec.d, 1.0);
    std::vector<std::uint32_t> train_labels, test_labels;
    task.train = mixture_rows(rng, means, spec.n, spec.noise_scale, train_labels);
    task.test = mixture_rows(rng, means, n_test, spec.noise_scale, test_labels);
    task.op = transpose(means);
    task.train_labels = std::move(train_labels);
    task.test_labels = std::move(test_labels);
  }
  return task;
}

}  // namespace maddness
