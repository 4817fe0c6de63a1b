#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "maddness/core.hpp"

namespace maddness {

inline constexpr std::size_t kTreeDepth = 4;
inline constexpr std::size_t kLeaves = 16;

// Four-level balanced tree where every node of level t splits on the same
// column split_indices[t]. Level t (0-based) holds 2^t thresholds.
//
// The quantized form compares 8-bit values: each level has an offset and a
// power-of-two scale 2^scale_exponents[t], and the threshold for node i is
// quantized_thresholds[t][i] = clamp(rne(2^e * (v - offset)), 0, 255).
struct HashTreeParams {
  std::array<std::uint32_t, kTreeDepth> split_indices{};
  std::array<std::vector<double>, kTreeDepth> thresholds{
      std::vector<double>(1), std::vector<double>(2), std::vector<double>(4),
      std::vector<double>(8)};
  std::array<std::vector<std::uint8_t>, kTreeDepth> quantized_thresholds{
      std::vector<std::uint8_t>(1), std::vector<std::uint8_t>(2), std::vector<std::uint8_t>(4),
      std::vector<std::uint8_t>(8)};
  std::array<double, kTreeDepth> split_offsets{};
  std::array<int, kTreeDepth> scale_exponents{};
  bool quantized = false;

  double split_scale(std::size_t level) const;
  bool operator==(const HashTreeParams&) const = default;
};

// Set of training rows (ids into X) with per-dimension running sums.
class Bucket {
 public:
  Bucket() = default;
  explicit Bucket(std::size_t dims) : sums_(dims, 0.0), sumsq_(dims, 0.0) {}
  Bucket(std::vector<std::uint32_t> ids, const DenseMatrix& x);

  void add(std::uint32_t id, std::span<const float> row);

  std::span<const std::uint32_t> members() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  std::span<const double> sums() const { return sums_; }
  std::span<const double> sums_of_squares() const { return sumsq_; }

  // Per-dimension SSE about the bucket mean, and its total over dimensions.
  double dimension_loss(std::size_t j) const;
  double loss() const;

 private:
  std::vector<std::uint32_t> ids_;
  std::vector<double> sums_;
  std::vector<double> sumsq_;
};

// Tree traversal with i <- 2i - 1 + (x_j >= v); leaves are 1..16. Each call performs exactly
// four comparisons.
std::uint32_t maddness_hash(std::span<const float> x, const HashTreeParams& tree,
                            OpCounts* counts = nullptr);

// Same traversal on 8-bit quantized values. Requires tree.quantized.
std::uint32_t maddness_hash_quantized(std::span<const float> x, const HashTreeParams& tree,
                                      OpCounts* counts = nullptr);

// out[n] = SSE of rows 0..n (or n..N-1 when reverse) summed over columns.
std::vector<double> cumulative_sse(const DenseMatrix& x, bool reverse);

struct SplitResult {
  double threshold = 0.0;
  double loss = 0.0;
};

// Best threshold along column j for the rows in bucket; loss is the total SSE
// (all columns) of the two children. Candidate thresholds are midpoints
// between adjacent distinct sorted values, so the reported loss is exactly
// what the >= rule produces. A bucket with a single distinct value at j
// returns (that value, SSE of the bucket).
SplitResult optimal_split_threshold(const Bucket& bucket, std::size_t j, const DenseMatrix& x);

// Up to four columns with largest loss summed over buckets; ties -> lowest index.
std::vector<std::uint32_t> heuristic_select_idxs(std::span<const Bucket> buckets,
                                                 const DenseMatrix& x);

struct LevelResult {
  std::vector<Bucket> buckets;  // 2 * input size: (below, above) per parent
  double loss = 0.0;
  std::uint32_t split_index = 0;
  std::vector<double> thresholds;
};

LevelResult add_tree_level(std::span<const Bucket> buckets, const DenseMatrix& x);

struct TreeFit {
  HashTreeParams tree;
  std::vector<Bucket> leaves;                  // 16, leaf k holds code k
  std::array<double, kTreeDepth + 1> losses{};  // root SSE, then per level
};

// Greedy construction from the root bucket holding every row of x.
TreeFit learn_hash_tree(const DenseMatrix& x);

// Fills quantized_thresholds, split_offsets and scale_exponents.
HashTreeParams quantize_tree(HashTreeParams tree);

// Saturating quantizer shared by thresholds and data.
std::uint8_t quantize_threshold(double v, double offset, int exponent);
int quantize_input(double x, double offset, int exponent);

}  // namespace maddness
