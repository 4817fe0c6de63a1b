#include "maddness/pipeline.hpp"

#include <cmath>
#include <numbers>

namespace maddness {

MaddnessModel::MaddnessModel(MaddnessConfig config, std::size_t input_dims,
                             std::vector<HashTreeParams> trees, PrototypeMatrix prototypes)
    : config_(config),
      input_dims_(input_dims),
      trees_(std::move(trees)),
      prototypes_(std::move(prototypes)) {
  validate(config_.aggregation);
  if (trees_.empty()) throw std::invalid_argument("MaddnessModel: need at least one codebook");
  if (trees_.size() != config_.codebooks) {
    throw std::invalid_argument("MaddnessModel: tree count != configured codebooks");
  }
  if (prototypes_.C != trees_.size() || prototypes_.K != kLeaves ||
      prototypes_.P.rows() != kLeaves * trees_.size() || prototypes_.P.cols() != input_dims_ ||
      prototypes_.subspaces.size() != trees_.size()) {
    throw std::invalid_argument("MaddnessModel: prototype matrix shape mismatch");
  }
  for (std::size_t c = 0; c < trees_.size(); ++c) {
    const Subspace s = prototypes_.subspaces[c];
    if (s.end > input_dims_ || s.begin >= s.end) {
      throw std::invalid_argument("MaddnessModel: invalid subspace");
    }
    for (auto j : trees_[c].split_indices) {
      if (j < s.begin || j >= s.end) {
        throw std::invalid_argument("MaddnessModel: split index outside its subspace");
      }
    }
    if (!trees_[c].quantized) throw std::invalid_argument("MaddnessModel: trees must be quantized");
  }
}

const QuantizedTables& MaddnessModel::tables() const {
  if (!quantized_) throw std::logic_error("MaddnessModel: set_operator has not been called");
  return *quantized_;
}

void MaddnessModel::set_operator(const DenseMatrix& B) {
  if (B.rows() != input_dims_) {
    throw std::invalid_argument("set_operator: B must have " + std::to_string(input_dims_) +
                                " rows");
  }
  RealTables real = build_tables(B, prototypes_);
  quantized_ = quantize_tables(real);
  real_tables_ = std::move(real);
}

void MaddnessModel::check_input(const DenseMatrix& A) const {
  if (A.cols() != input_dims_) {
    throw std::invalid_argument("MaddnessModel: A must have " + std::to_string(input_dims_) +
                                " columns");
  }
}

CodeMatrix MaddnessModel::encode(const DenseMatrix& A, const ApplyOptions& opts,
                                 OpCounts* counts) const {
  check_input(A);
  CodeMatrix codes(A.rows(), trees_.size());
  for (std::size_t n = 0; n < A.rows(); ++n) {
    auto row = A.row(n);
    for (std::size_t c = 0; c < trees_.size(); ++c) {
      const std::uint32_t leaf = opts.debug_float_tables
                                     ? maddness_hash(row, trees_[c], counts)
                                     : maddness_hash_quantized(row, trees_[c], counts);
      codes(n, c) = static_cast<std::uint8_t>(leaf - 1);
    }
  }
  return codes;
}

AggregateResult MaddnessModel::apply_estimates(const DenseMatrix& A, OpCounts* counts) const {
  const auto& q = tables();
  return aggregate(encode(A, {}, counts), q, config_.aggregation, counts);
}

DenseMatrix MaddnessModel::apply(const DenseMatrix& A, const ApplyOptions& opts,
                                 OpCounts* counts) const {
  const auto& q = tables();
  if (opts.debug_float_tables) {
    if (!real_tables_) {
      throw std::logic_error("apply: real-valued tables unavailable; call set_operator first");
    }
    return aggregate_real(encode(A, opts, counts), *real_tables_, counts);
  }
  return dequantize(apply_estimates(A, counts), q);
}

MaddnessModel train(const DenseMatrix& train_rows, const MaddnessConfig& config) {
  return train(train_rows, config, nullptr);
}

MaddnessModel train(const DenseMatrix& train_rows, const MaddnessConfig& config,
                    TrainingDiagnostics* diagnostics) {
  if (train_rows.rows() == 0) throw std::invalid_argument("train: empty training matrix");
  if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
    throw std::invalid_argument("train: lambda must be finite and >= 0");
  }
  validate(config.aggregation);
  const std::size_t C = config.codebooks;
  auto subspaces = partition_subspaces(train_rows.cols(), C);

  std::vector<HashTreeParams> trees;
  std::vector<std::vector<Bucket>> leaves;
  CodeMatrix codes(train_rows.rows(), C);
  trees.reserve(C);
  leaves.reserve(C);
  if (diagnostics) diagnostics->tree_losses.clear();
  for (std::size_t c = 0; c < C; ++c) {
    const Subspace s = subspaces[c];
    TreeFit fit = learn_hash_tree(slice_columns(train_rows, s));
    for (auto& j : fit.tree.split_indices) j += static_cast<std::uint32_t>(s.begin);
    for (std::size_t k = 0; k < kLeaves; ++k)
      for (auto id : fit.leaves[k].members()) codes(id, c) = static_cast<std::uint8_t>(k);
    if (diagnostics) diagnostics->tree_losses.push_back(fit.losses);
    trees.push_back(quantize_tree(std::move(fit.tree)));
    leaves.push_back(std::move(fit.leaves));
  }

  PrototypeMatrix means = bucket_means(leaves, train_rows, subspaces);
  PrototypeMatrix prototypes =
      config.lambda > 0.0
          ? optimize_prototypes(build_G(codes, kLeaves, C), train_rows, config.lambda, subspaces)
          : means;
  if (diagnostics) {
    diagnostics->codes = codes;
    diagnostics->bucket_mean_prototypes = std::move(means);
  }
  return MaddnessModel(config, train_rows.cols(), std::move(trees), std::move(prototypes));
}

double hypothesis_complexity(std::size_t codebooks, std::size_t dims, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bound: delta must be in (0,1)");
  if (dims == 0 || codebooks == 0) throw std::invalid_argument("bound: C and D must be >= 1");
  const double log2d = std::ceil(std::log2(static_cast<double>(dims)));
  return static_cast<double>(codebooks) * (4.0 * log2d + 256.0) * std::numbers::ln2 -
         std::log(delta);
}

double generalization_bound(const BoundInputs& in) {
  if (!(in.lambda > 0.0)) throw std::invalid_argument("bound: lambda must be > 0");
  if (in.n == 0) throw std::invalid_argument("bound: n must be >= 1");
  const double nu = hypothesis_complexity(in.codebooks, in.dims, in.delta);
  const double scale =
      static_cast<double>(in.codebooks) * in.sigma_a * in.b_norm / (2.0 * std::sqrt(in.lambda));
  const double gap = 1.0 / 256.0 + (8.0 + std::sqrt(nu)) / std::sqrt(2.0 * static_cast<double>(in.n));
  return in.train_loss + scale * gap;
}

}  // namespace maddness
