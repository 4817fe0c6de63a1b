#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "maddness/core.hpp"
#include "maddness/prototypes.hpp"
#include "maddness/tables.hpp"

namespace maddness {

struct KMeansResult {
  DenseMatrix centroids;                    // K x d
  std::vector<std::uint32_t> assignments;   // N
  double inertia = 0.0;
  std::vector<double> inertia_history;      // after each assignment step
  std::size_t iterations = 0;
};

// Lloyd's algorithm from k-means++ seeding. Empty clusters are reseeded to
// the point farthest from its current centroid. Stops when assignments do not
// change or after max_iters assignment steps.
KMeansResult kmeans(const DenseMatrix& x, std::size_t K, std::uint64_t seed,
                    std::size_t max_iters = 25);

// Independent K-means per contiguous subspace; block-diagonal prototypes.
PrototypeMatrix pq_train(const DenseMatrix& train, std::size_t C, std::size_t K = kLeaves,
                         std::uint64_t seed = 0, std::size_t max_iters = 25);

// Nearest prototype per subspace by squared Euclidean distance, ties to the
// lowest index. Counts K*D multiplies per row.
CodeMatrix pq_encode(const DenseMatrix& A, const PrototypeMatrix& P, OpCounts* counts = nullptr);

// Encode, build tables, and sum exactly. quantize=true routes through 8-bit
// tables and exact-upcast aggregation.
DenseMatrix pq_apply(const DenseMatrix& A, const DenseMatrix& B, const PrototypeMatrix& P,
                     bool quantize, OpCounts* counts = nullptr);

}  // namespace maddness
