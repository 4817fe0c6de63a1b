#include "maddness/prototypes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace maddness {

std::vector<Subspace> partition_subspaces(std::size_t dims, std::size_t codebooks) {
  if (codebooks == 0 || codebooks > dims) {
    throw std::invalid_argument("partition_subspaces: need 1 <= C <= D (C=" +
                                std::to_string(codebooks) + ", D=" + std::to_string(dims) + ")");
  }
  std::vector<Subspace> out;
  out.reserve(codebooks);
  const std::size_t base = dims / codebooks, extra = dims % codebooks;
  std::size_t begin = 0;
  for (std::size_t c = 0; c < codebooks; ++c) {
    const std::size_t width = base + (c < extra ? 1 : 0);
    out.push_back({begin, begin + width});
    begin += width;
  }
  return out;
}

DenseMatrix slice_columns(const DenseMatrix& x, Subspace s) {
  DenseMatrix out(x.rows(), s.size());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) out(i, j) = x(i, s.begin + j);
  return out;
}

PrototypeMatrix bucket_means(std::span<const std::vector<Bucket>> leaves,
                             const DenseMatrix& train, std::span<const Subspace> subspaces) {
  if (leaves.size() != subspaces.size()) {
    throw std::invalid_argument("bucket_means: one leaf set per subspace required");
  }
  PrototypeMatrix out;
  out.C = subspaces.size();
  out.K = kLeaves;
  out.subspaces.assign(subspaces.begin(), subspaces.end());
  out.P = DenseMatrix(out.K * out.C, train.cols());
  for (std::size_t c = 0; c < out.C; ++c) {
    if (leaves[c].size() != out.K) throw std::invalid_argument("bucket_means: need K leaves");
    const Subspace s = subspaces[c];
    for (std::size_t k = 0; k < out.K; ++k) {
      const auto ids = leaves[c][k].members();
      if (ids.empty()) continue;
      auto row = out.P.row(c * out.K + k);
      for (std::size_t j = s.begin; j < s.end; ++j) {
        double acc = 0.0;
        for (auto id : ids) acc += train(id, j);
        row[j] = static_cast<float>(acc / static_cast<double>(ids.size()));
      }
    }
  }
  return out;
}

AssignmentMatrix::AssignmentMatrix(CodeMatrix codes, std::size_t K)
    : codes_(std::move(codes)), K_(K) {
  for (auto v : codes_.data) {
    if (v >= K_) throw std::invalid_argument("AssignmentMatrix: code out of range");
  }
}

DenseMatrix AssignmentMatrix::dense() const {
  DenseMatrix g(rows(), cols());
  for (std::size_t n = 0; n < rows(); ++n)
    for (std::size_t c = 0; c < C(); ++c) g(n, c * K_ + codes_(n, c)) = 1.0f;
  return g;
}

std::vector<double> AssignmentMatrix::gram() const {
  const std::size_t kc = cols();
  std::vector<double> g(kc * kc, 0.0);
  std::vector<std::size_t> hot(C());
  for (std::size_t n = 0; n < rows(); ++n) {
    for (std::size_t c = 0; c < C(); ++c) hot[c] = c * K_ + codes_(n, c);
    for (auto a : hot)
      for (auto b : hot) g[a * kc + b] += 1.0;
  }
  return g;
}

std::vector<double> AssignmentMatrix::transpose_times(const DenseMatrix& x) const {
  if (x.rows() != rows()) throw std::invalid_argument("G^T X: row count mismatch");
  const std::size_t d = x.cols();
  std::vector<double> out(cols() * d, 0.0);
  for (std::size_t n = 0; n < rows(); ++n) {
    auto xr = x.row(n);
    for (std::size_t c = 0; c < C(); ++c) {
      double* dst = out.data() + (c * K_ + codes_(n, c)) * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += xr[j];
    }
  }
  return out;
}

AssignmentMatrix build_G(const CodeMatrix& codes, std::size_t K, std::size_t C) {
  if (codes.codebooks != C) throw std::invalid_argument("build_G: code width != C");
  return AssignmentMatrix(codes, K);
}

void cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n,
                    std::size_t r) {
  // Lower factor overwrites the lower triangle of a.
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw std::runtime_error("cholesky_solve: matrix is not positive definite");
    }
    const double ljj = std::sqrt(diag);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  // Forward substitution L Y = B.
  for (std::size_t i = 0; i < n; ++i) {
    double* bi = b.data() + i * r;
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = a[i * n + k];
      if (lik == 0.0) continue;
      const double* bk = b.data() + k * r;
      for (std::size_t c = 0; c < r; ++c) bi[c] -= lik * bk[c];
    }
    const double lii = a[i * n + i];
    for (std::size_t c = 0; c < r; ++c) bi[c] /= lii;
  }
  // Back substitution L^T X = Y.
  for (std::size_t ii = n; ii-- > 0;) {
    double* bi = b.data() + ii * r;
    for (std::size_t k = ii + 1; k < n; ++k) {
      const double lki = a[k * n + ii];
      if (lki == 0.0) continue;
      const double* bk = b.data() + k * r;
      for (std::size_t c = 0; c < r; ++c) bi[c] -= lki * bk[c];
    }
    const double lii = a[ii * n + ii];
    for (std::size_t c = 0; c < r; ++c) bi[c] /= lii;
  }
}

PrototypeMatrix optimize_prototypes(const AssignmentMatrix& G, const DenseMatrix& train,
                                    double lambda, std::vector<Subspace> subspaces) {
  if (!(lambda > 0.0)) throw std::invalid_argument("optimize_prototypes: lambda must be > 0");
  const std::size_t kc = G.cols(), d = train.cols();
  auto gram = G.gram();
  for (std::size_t i = 0; i < kc; ++i) gram[i * kc + i] += lambda;
  auto rhs = G.transpose_times(train);
  cholesky_solve(gram, rhs, kc, d);

  std::vector<float> p(kc * d);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<float>(rhs[i]);
  PrototypeMatrix out;
  out.P = DenseMatrix(kc, d, std::move(p));
  out.K = G.K();
  out.C = G.C();
  out.subspaces = std::move(subspaces);
  return out;
}

double ridge_objective(const AssignmentMatrix& G, const DenseMatrix& train, const DenseMatrix& P,
                       double lambda) {
  const auto& codes = G.codes();
  const std::size_t d = train.cols();
  double loss = 0.0;
  std::vector<double> recon(d);
  for (std::size_t n = 0; n < G.rows(); ++n) {
    std::fill(recon.begin(), recon.end(), 0.0);
    for (std::size_t c = 0; c < G.C(); ++c) {
      auto prow = P.row(c * G.K() + codes(n, c));
      for (std::size_t j = 0; j < d; ++j) recon[j] += prow[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double e = train(n, j) - recon[j];
      loss += e * e;
    }
  }
  return loss + lambda * frobenius_norm_sq(P);
}

}  // namespace maddness
