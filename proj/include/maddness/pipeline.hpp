#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "maddness/aggregation.hpp"
#include "maddness/core.hpp"
#include "maddness/hash_tree.hpp"
#include "maddness/prototypes.hpp"
#include "maddness/tables.hpp"

namespace maddness {

struct MaddnessConfig {
  std::size_t codebooks = 16;
  // Ridge strength for prototype optimization; 0 keeps the bucket means.
  double lambda = 1.0;
  AggregationConfig aggregation{};
};

struct ApplyOptions {
  // Real-valued thresholds, real tables and exact sums: isolates the
  // hashing/prototype error from quantization and averaging error.
  bool debug_float_tables = false;
};

class MaddnessModel {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  MaddnessModel() = default;
  MaddnessModel(MaddnessConfig config, std::size_t input_dims, std::vector<HashTreeParams> trees,
                PrototypeMatrix prototypes);

  const MaddnessConfig& config() const { return config_; }
  std::size_t input_dims() const { return input_dims_; }
  std::size_t codebooks() const { return trees_.size(); }
  std::span<const HashTreeParams> trees() const { return trees_; }
  const PrototypeMatrix& prototypes() const { return prototypes_; }
  bool has_operator() const { return quantized_.has_value(); }
  const QuantizedTables& tables() const;

  // Builds and quantizes the lookup tables for B (D x M).
  void set_operator(const DenseMatrix& B);

  // Codes (0..15) via the quantized trees, or the real-valued trees in debug mode.
  CodeMatrix encode(const DenseMatrix& A, const ApplyOptions& opts = {},
                    OpCounts* counts = nullptr) const;

  // Integer estimates and debias before the affine output transform.
  AggregateResult apply_estimates(const DenseMatrix& A, OpCounts* counts = nullptr) const;

  // alpha * f(g(A), h(B)) + beta.
  DenseMatrix apply(const DenseMatrix& A, const ApplyOptions& opts = {},
                    OpCounts* counts = nullptr) const;

  std::vector<std::uint8_t> serialize() const;
  static MaddnessModel deserialize(std::span<const std::uint8_t> bytes);

 private:
  void check_input(const DenseMatrix& A) const;

  MaddnessConfig config_{};
  std::size_t input_dims_ = 0;
  std::vector<HashTreeParams> trees_;  // split indices are global columns
  PrototypeMatrix prototypes_;
  std::optional<RealTables> real_tables_;  // not serialized
  std::optional<QuantizedTables> quantized_;
};

// Learns one hash tree per contiguous subspace, sets prototypes to bucket
// means, then ridge-optimizes them when config.lambda > 0.
MaddnessModel train(const DenseMatrix& train, const MaddnessConfig& config);

// Training-set codes from the real-valued trees and both prototype sets; used
// by tests comparing the optimized and bucket-mean objectives.
struct TrainingDiagnostics {
  CodeMatrix codes;
  PrototypeMatrix bucket_mean_prototypes;
  std::vector<std::array<double, kTreeDepth + 1>> tree_losses;
};
MaddnessModel train(const DenseMatrix& train, const MaddnessConfig& config,
                    TrainingDiagnostics* diagnostics);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedVersionError : public std::runtime_error {
 public:
  explicit UnsupportedVersionError(std::uint32_t version)
      : std::runtime_error("unsupported model format version " + std::to_string(version)),
        version_(version) {}
  std::uint32_t version() const { return version_; }

 private:
  std::uint32_t version_;
};

struct BoundInputs {
  std::size_t codebooks = 1;
  std::size_t dims = 1;
  std::size_t n = 1;
  double delta = 0.5;
  double sigma_a = 1.0;   // bound on the largest singular value of the training matrix
  double b_norm = 1.0;
  double lambda = 1.0;
  double train_loss = 0.0;
};

// C (4 ceil(log2 D) + 256) ln 2 - ln delta.
double hypothesis_complexity(std::size_t codebooks, std::size_t dims, double delta);

// train_loss + C sigma_A ||b|| / (2 sqrt(lambda)) * (1/256 + (8 + sqrt(nu)) / sqrt(2n)).
double generalization_bound(const BoundInputs& in);

// Largest singular value by power iteration on X^T X.
double estimate_max_singular_value(const DenseMatrix& x, std::size_t iters = 20,
                                   std::uint64_t seed = 0);

// Projection onto the top principal directions of the (centered) training rows.
struct PcaModel {
  DenseMatrix V;  // D x d, orthonormal columns
  std::optional<DenseMatrix> projected_operator;  // V^T B

  void set_operator(const DenseMatrix& B);
  // (A V)(V^T B)
  DenseMatrix apply(const DenseMatrix& A, OpCounts* counts = nullptr) const;
};

PcaModel pca_baseline_train(const DenseMatrix& train, std::size_t d, std::size_t iters = 200,
                            std::uint64_t seed = 0);

}  // namespace maddness
