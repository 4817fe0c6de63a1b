#include <cmath>

#include "maddness/pipeline.hpp"

namespace maddness {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double normalize(Vec& v) {
  const double n = std::sqrt(dot(v, v));
  if (n > 0.0)
    for (auto& x : v) x /= n;
  return n;
}

// Removes the components along every vector in basis (two passes).
void orthogonalize(Vec& v, const std::vector<Vec>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) {
      const double p = dot(v, b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
    }
}

Vec random_unit(Rng& rng, std::size_t d, const std::vector<Vec>& basis) {
  for (;;) {
    Vec v(d);
    for (auto& x : v) x = rng.normal();
    orthogonalize(v, basis);
    if (normalize(v) > 1e-8) return v;
  }
}

}  // namespace

double estimate_max_singular_value(const DenseMatrix& x, std::size_t iters, std::uint64_t seed) {
  if (x.empty()) throw std::invalid_argument("estimate_max_singular_value: empty matrix");
  Rng rng(seed);
  const std::size_t n = x.rows(), d = x.cols();
  Vec v = random_unit(rng, d, {});
  Vec xv(n);
  double sigma = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      auto row = x.row(i);
      for (std::size_t j = 0; j < d; ++j) s += row[j] * v[j];
      xv[i] = s;
    }
    sigma = std::sqrt(dot(xv, xv));
    Vec next(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = x.row(i);
      for (std::size_t j = 0; j < d; ++j) next[j] += row[j] * xv[i];
    }
    if (normalize(next) == 0.0) return 0.0;
    v = std::move(next);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    auto row = x.row(i);
    for (std::size_t j = 0; j < d; ++j) s += row[j] * v[j];
    xv[i] = s;
  }
  return std::max(sigma, std::sqrt(dot(xv, xv)));
}

PcaModel pca_baseline_train(const DenseMatrix& train, std::size_t d, std::size_t iters,
                            std::uint64_t seed) {
  const std::size_t n = train.rows(), D = train.cols();
  if (d == 0 || d > D) throw std::invalid_argument("pca_baseline_train: need 1 <= d <= D");
  if (n == 0) throw std::invalid_argument("pca_baseline_train: empty training matrix");

  Vec mean(D, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < D; ++j) mean[j] += train(i, j);
  for (auto& m : mean) m /= static_cast<double>(n);

  std::vector<double> cov(D * D, 0.0);
  Vec centered(D);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < D; ++j) centered[j] = train(i, j) - mean[j];
    for (std::size_t a = 0; a < D; ++a)
      for (std::size_t b = 0; b < D; ++b) cov[a * D + b] += centered[a] * centered[b];
  }

  Rng rng(seed);
  std::vector<Vec> basis;
  basis.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    Vec v = random_unit(rng, D, basis);
    for (std::size_t it = 0; it < iters; ++it) {
      Vec next(D, 0.0);
      for (std::size_t a = 0; a < D; ++a)
        for (std::size_t b = 0; b < D; ++b) next[a] += cov[a * D + b] * v[b];
      orthogonalize(next, basis);
      // Remaining spectrum is numerically zero: any orthogonal direction works.
      if (normalize(next) <= 1e-12) break;
      v = std::move(next);
    }
    orthogonalize(v, basis);
    normalize(v);
    basis.push_back(std::move(v));
  }

  PcaModel model;
  model.V = DenseMatrix(D, d);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t j = 0; j < D; ++j) model.V(j, k) = static_cast<float>(basis[k][j]);
  return model;
}

void PcaModel::set_operator(const DenseMatrix& B) {
  if (B.rows() != V.rows()) throw std::invalid_argument("PcaModel::set_operator: shape mismatch");
  projected_operator = matmul(transpose(V), B);
}

DenseMatrix PcaModel::apply(const DenseMatrix& A, OpCounts* counts) const {
  if (!projected_operator) throw std::logic_error("PcaModel::apply: set_operator not called");
  return matmul(matmul(A, V, counts), *projected_operator, counts);
}

}  // namespace maddness
