#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "maddness/core.hpp"
#include "maddness/hash_tree.hpp"

namespace maddness {

// Half-open column range [begin, end) owned by one codebook.
struct Subspace {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const Subspace&) const = default;
};

// Contiguous blocks; the first (dims % codebooks) blocks get one extra column.
std::vector<Subspace> partition_subspaces(std::size_t dims, std::size_t codebooks);

// Columns [begin, end) of x as a standalone matrix.
DenseMatrix slice_columns(const DenseMatrix& x, Subspace s);

// KC x D prototype matrix; row c*K + k is prototype k of codebook c.
struct PrototypeMatrix {
  DenseMatrix P;
  std::size_t K = kLeaves;
  std::size_t C = 0;
  std::vector<Subspace> subspaces;

  std::span<const float> prototype(std::size_t c, std::size_t k) const { return P.row(c * K + k); }
  bool operator==(const PrototypeMatrix&) const = default;
};

// Row (c, k) is the mean of leaf k's rows of `train` over subspace c and zero
// elsewhere; empty leaves give zero rows. leaves[c] must hold K buckets.
PrototypeMatrix bucket_means(std::span<const std::vector<Bucket>> leaves,
                             const DenseMatrix& train, std::span<const Subspace> subspaces);

// One-hot assignment matrix G stored as codes.
class AssignmentMatrix {
 public:
  AssignmentMatrix(CodeMatrix codes, std::size_t K);

  std::size_t rows() const { return codes_.rows; }
  std::size_t cols() const { return K_ * codes_.codebooks; }
  std::size_t K() const { return K_; }
  std::size_t C() const { return codes_.codebooks; }
  const CodeMatrix& codes() const { return codes_; }

  // Dense N x KC matrix; tests and small problems only.
  DenseMatrix dense() const;

  // G^T G (KC x KC, co-occurrence counts) and G^T X (KC x D), from codes.
  std::vector<double> gram() const;
  std::vector<double> transpose_times(const DenseMatrix& x) const;

 private:
  CodeMatrix codes_;
  std::size_t K_;
};

AssignmentMatrix build_G(const CodeMatrix& codes, std::size_t K, std::size_t C);

// Ridge solution (G^T G + lambda I)^{-1} G^T train via Cholesky.
PrototypeMatrix optimize_prototypes(const AssignmentMatrix& G, const DenseMatrix& train,
                                    double lambda, std::vector<Subspace> subspaces);

// ||train - G P||_F^2 + lambda ||P||_F^2 in double precision.
double ridge_objective(const AssignmentMatrix& G, const DenseMatrix& train,
                       const DenseMatrix& P, double lambda);

// In-place Cholesky solve of the SPD system A X = B (A n x n, B n x r, both
// row-major). Throws std::runtime_error when A is not positive definite.
void cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n, std::size_t r);

}  // namespace maddness
