#include "maddness/pq.hpp"

#include <limits>
#include <stdexcept>

#include "maddness/aggregation.hpp"

namespace maddness {

namespace {

double sq_dist(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = static_cast<double>(a[j]) - b[j];
    s += d * d;
  }
  return s;
}

DenseMatrix kmeans_plus_plus(const DenseMatrix& x, std::size_t K, Rng& rng) {
  const std::size_t n = x.rows(), d = x.cols();
  DenseMatrix centroids(K, d);
  auto copy_row = [&](std::size_t k, std::size_t i) {
    auto src = x.row(i);
    std::copy(src.begin(), src.end(), centroids.row(k).begin());
  };
  copy_row(0, rng.uniform_int(n));
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) best[i] = sq_dist(x.row(i), centroids.row(0));
  for (std::size_t k = 1; k < K; ++k) {
    double total = 0.0;
    for (double v : best) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double run = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        run += best[i];
        if (run > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_int(n);
    }
    copy_row(k, pick);
    for (std::size_t i = 0; i < n; ++i) best[i] = std::min(best[i], sq_dist(x.row(i), centroids.row(k)));
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const DenseMatrix& x, std::size_t K, std::uint64_t seed,
                    std::size_t max_iters) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0) throw std::invalid_argument("kmeans: empty input");
  if (K == 0) throw std::invalid_argument("kmeans: K must be positive");
  if (max_iters == 0) throw std::invalid_argument("kmeans: max_iters must be positive");

  Rng rng(seed);
  KMeansResult res;
  res.centroids = kmeans_plus_plus(x, K, rng);
  res.assignments.assign(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> dist(n);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      for (std::size_t k = 0; k < K; ++k) {
        const double dk = sq_dist(x.row(i), res.centroids.row(k));
        if (dk < best) {
          best = dk;
          arg = static_cast<std::uint32_t>(k);
        }
      }
      if (arg != res.assignments[i]) changed = true;
      res.assignments[i] = arg;
      dist[i] = best;
      inertia += best;
    }
    res.inertia = inertia;
    res.inertia_history.push_back(inertia);
    res.iterations = iter + 1;
    if (!changed) break;

    std::vector<double> sums(K * d, 0.0);
    std::vector<std::size_t> counts(K, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = res.assignments[i];
      ++counts[k];
      auto row = x.row(i);
      for (std::size_t j = 0; j < d; ++j) sums[k * d + j] += row[j];
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (counts[k] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        res.centroids(k, j) = static_cast<float>(sums[k * d + j] / static_cast<double>(counts[k]));
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (counts[k] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (dist[i] > dist[far]) far = i;
      if (dist[far] == 0.0) continue;  // every point already sits on a centroid
      auto src = x.row(far);
      std::copy(src.begin(), src.end(), res.centroids.row(k).begin());
      dist[far] = 0.0;
    }
  }
  return res;
}

PrototypeMatrix pq_train(const DenseMatrix& train, std::size_t C, std::size_t K,
                         std::uint64_t seed, std::size_t max_iters) {
  PrototypeMatrix out;
  out.C = C;
  out.K = K;
  out.subspaces = partition_subspaces(train.cols(), C);
  out.P = DenseMatrix(K * C, train.cols());
  for (std::size_t c = 0; c < C; ++c) {
    const Subspace s = out.subspaces[c];
    const auto fit = kmeans(slice_columns(train, s), K, seed + c, max_iters);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < s.size(); ++j) out.P(c * K + k, s.begin + j) = fit.centroids(k, j);
  }
  return out;
}

CodeMatrix pq_encode(const DenseMatrix& A, const PrototypeMatrix& P, OpCounts* counts) {
  if (A.cols() != P.P.cols()) throw std::invalid_argument("pq_encode: width mismatch");
  CodeMatrix codes(A.rows(), P.C);
  for (std::size_t n = 0; n < A.rows(); ++n) {
    auto row = A.row(n);
    for (std::size_t c = 0; c < P.C; ++c) {
      const Subspace s = P.subspaces[c];
      auto sub = row.subspan(s.begin, s.size());
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t k = 0; k < P.K; ++k) {
        const double dk = sq_dist(sub, P.prototype(c, k).subspan(s.begin, s.size()));
        if (dk < best) {
          best = dk;
          arg = k;
        }
      }
      codes(n, c) = static_cast<std::uint8_t>(arg);
    }
  }
  if (counts) {
    counts->multiplies += static_cast<std::uint64_t>(A.rows()) * P.K * A.cols();
    counts->comparisons += static_cast<std::uint64_t>(A.rows()) * P.K * P.C;
  }
  return codes;
}

DenseMatrix pq_apply(const DenseMatrix& A, const DenseMatrix& B, const PrototypeMatrix& P,
                     bool quantize, OpCounts* counts) {
  if (A.cols() != B.rows()) throw std::invalid_argument("pq_apply: inner dimension mismatch");
  const auto codes = pq_encode(A, P, counts);
  const auto real = build_tables(B, P);
  if (!quantize) return aggregate_real(codes, real, counts);
  const auto q = quantize_tables(real);
  const AggregationConfig exact{1, AggregationMode::ExactUpcast};
  return dequantize(aggregate(codes, q, exact, counts), q);
}

}  // namespace maddness
