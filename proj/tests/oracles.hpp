#pragma once

// Direct, unoptimized reference computations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "maddness/core.hpp"

namespace oracle {

// Two-pass SSE of the given rows of x about their mean, all columns.
inline double sse(const maddness::DenseMatrix& x, std::span<const std::uint32_t> ids) {
  if (ids.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    for (auto i : ids) mean += x(i, j);
    mean /= static_cast<double>(ids.size());
    for (auto i : ids) total += (x(i, j) - mean) * (x(i, j) - mean);
  }
  return total;
}

struct Split {
  double threshold;
  double loss;
};

// Try every midpoint between adjacent distinct values at column j; each
// candidate is scored by partitioning the bucket from scratch (x_j >= v goes
// right). First strictly-best candidate in ascending order wins.
inline Split brute_force_split(const maddness::DenseMatrix& x, std::span<const std::uint32_t> ids,
                               std::size_t j) {
  std::vector<double> values;
  for (auto i : ids) values.push_back(x(i, j));
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.size() == 1) return {values[0], sse(x, ids)};
  Split best{0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t p = 0; p + 1 < values.size(); ++p) {
    const double v = (values[p] + values[p + 1]) / 2.0;
    std::vector<std::uint32_t> lo, hi;
    for (auto i : ids) (x(i, j) >= v ? hi : lo).push_back(i);
    const double loss = sse(x, lo) + sse(x, hi);
    if (loss < best.loss) best = {v, loss};
  }
  return best;
}

// Sum of the 4 real-valued tree decisions replayed independently.
inline std::uint32_t hash_leaf(std::span<const float> x, const std::uint32_t (&idx)[4],
                               const std::vector<double> (&thr)[4]) {
  std::uint32_t node = 0;  // 0-based within the level
  for (int t = 0; t < 4; ++t) node = 2 * node + (x[idx[t]] >= thr[t][node] ? 1 : 0);
  return node + 1;
}

// Dense (G^T G + lambda I) P = G^T A solve by Gaussian elimination with
// partial pivoting, on the materialized one-hot matrix.
inline std::vector<double> ridge_dense(const maddness::DenseMatrix& G, const maddness::DenseMatrix& A,
                                       double lambda) {
  const std::size_t n = G.rows(), k = G.cols(), d = A.cols();
  std::vector<double> m(k * (k + d), 0.0);
  const std::size_t w = k + d;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t a = 0; a < k; ++a) {
      if (G(r, a) == 0.0f) continue;
      for (std::size_t b = 0; b < k; ++b) m[a * w + b] += double(G(r, a)) * G(r, b);
      for (std::size_t c = 0; c < d; ++c) m[a * w + k + c] += double(G(r, a)) * A(r, c);
    }
  for (std::size_t a = 0; a < k; ++a) m[a * w + a] += lambda;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(m[r * w + col]) > std::abs(m[piv * w + col])) piv = r;
    for (std::size_t c = 0; c < w; ++c) std::swap(m[col * w + c], m[piv * w + c]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = m[r * w + col] / m[col * w + col];
      for (std::size_t c = col; c < w; ++c) m[r * w + c] -= f * m[col * w + c];
    }
  }
  std::vector<double> p(k * d);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t c = 0; c < d; ++c) p[a * d + c] = m[a * w + k + c] / m[a * w + a];
  return p;
}

// U * (pairwise rounding-up average tree), computed recursively.
inline std::int64_t averaged_sum(std::vector<int> v) {
  const std::size_t u = v.size();
  while (v.size() > 1) {
    std::vector<int> next;
    for (std::size_t i = 0; i < v.size(); i += 2) next.push_back((v[i] + v[i + 1] + 1) / 2);
    v = std::move(next);
  }
  return static_cast<std::int64_t>(u) * v[0];
}

}  // namespace oracle
