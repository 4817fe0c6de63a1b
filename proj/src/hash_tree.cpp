#include "maddness/hash_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace maddness {

double HashTreeParams::split_scale(std::size_t level) const {
  return std::ldexp(1.0, scale_exponents[level]);
}

Bucket::Bucket(std::vector<std::uint32_t> ids, const DenseMatrix& x)
    : sums_(x.cols(), 0.0), sumsq_(x.cols(), 0.0) {
  ids_.reserve(ids.size());
  for (auto id : ids) add(id, x.row(id));
}

void Bucket::add(std::uint32_t id, std::span<const float> row) {
  ids_.push_back(id);
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double v = row[j];
    sums_[j] += v;
    sumsq_[j] += v * v;
  }
}

double Bucket::dimension_loss(std::size_t j) const {
  if (ids_.empty()) return 0.0;
  const double n = static_cast<double>(ids_.size());
  return std::max(0.0, sumsq_[j] - sums_[j] * sums_[j] / n);
}

double Bucket::loss() const {
  double total = 0.0;
  for (std::size_t j = 0; j < sums_.size(); ++j) total += dimension_loss(j);
  return total;
}

std::uint32_t maddness_hash(std::span<const float> x, const HashTreeParams& tree,
                            OpCounts* counts) {
  std::uint32_t i = 1;
  for (std::size_t t = 0; t < kTreeDepth; ++t) {
    const double v = tree.thresholds[t][i - 1];
    const std::uint32_t b = static_cast<double>(x[tree.split_indices[t]]) >= v ? 1 : 0;
    i = 2 * i - 1 + b;
  }
  if (counts) counts->comparisons += kTreeDepth;
  return i;
}

std::uint8_t quantize_threshold(double v, double offset, int exponent) {
  const double q = round_half_even(std::ldexp(v - offset, exponent));
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

int quantize_input(double x, double offset, int exponent) {
  // Saturating to [-1, 256] keeps inputs outside the threshold range on the
  // correct side of the extreme thresholds 0 and 255.
  const double q = std::clamp(std::ldexp(x - offset, exponent), -1.0, 256.0);
  return static_cast<int>(round_half_even(q));
}

std::uint32_t maddness_hash_quantized(std::span<const float> x, const HashTreeParams& tree,
                                      OpCounts* counts) {
  if (!tree.quantized) throw std::logic_error("maddness_hash_quantized: tree not quantized");
  std::uint32_t i = 1;
  for (std::size_t t = 0; t < kTreeDepth; ++t) {
    const int xq =
        quantize_input(x[tree.split_indices[t]], tree.split_offsets[t], tree.scale_exponents[t]);
    const std::uint32_t b = xq >= tree.quantized_thresholds[t][i - 1] ? 1 : 0;
    i = 2 * i - 1 + b;
  }
  if (counts) counts->comparisons += kTreeDepth;
  return i;
}

std::vector<double> cumulative_sse(const DenseMatrix& x, bool reverse) {
  const std::size_t n_rows = x.rows(), dims = x.cols();
  std::vector<double> out(n_rows, 0.0);
  std::vector<double> cum(dims, 0.0), cum2(dims, 0.0);
  for (std::size_t step = 0; step < n_rows; ++step) {
    const std::size_t r = reverse ? n_rows - 1 - step : step;
    const double count = static_cast<double>(step + 1);
    double total = 0.0;
    auto row = x.row(r);
    for (std::size_t j = 0; j < dims; ++j) {
      const double v = row[j];
      cum[j] += v;
      cum2[j] += v * v;
      total += std::max(0.0, cum2[j] - cum[j] * cum[j] / count);
    }
    out[r] = total;
  }
  return out;
}

SplitResult optimal_split_threshold(const Bucket& bucket, std::size_t j, const DenseMatrix& x) {
  if (bucket.empty()) throw std::invalid_argument("optimal_split_threshold: empty bucket");
  auto ids = bucket.members();
  const std::size_t n = ids.size();
  if (n == 1) return {x(ids[0], j), 0.0};

  std::vector<std::uint32_t> order(ids.begin(), ids.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return x(a, j) < x(b, j); });

  DenseMatrix sorted(n, x.cols());
  for (std::size_t r = 0; r < n; ++r) {
    auto src = x.row(order[r]);
    std::copy(src.begin(), src.end(), sorted.row(r).begin());
  }
  const auto head = cumulative_sse(sorted, false);
  const auto tail = cumulative_sse(sorted, true);

  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best = n;  // sentinel: no boundary between distinct values
  for (std::size_t pos = 0; pos + 1 < n; ++pos) {
    if (!(sorted(pos, j) < sorted(pos + 1, j))) continue;
    const double loss = head[pos] + tail[pos + 1];
    if (loss < best_loss) {
      best_loss = loss;
      best = pos;
    }
  }
  if (best == n) return {sorted(0, j), head[n - 1]};
  const double threshold =
      (static_cast<double>(sorted(best, j)) + static_cast<double>(sorted(best + 1, j))) / 2.0;
  return {threshold, best_loss};
}

std::vector<std::uint32_t> heuristic_select_idxs(std::span<const Bucket> buckets,
                                                 const DenseMatrix& x) {
  const bool any = std::any_of(buckets.begin(), buckets.end(),
                               [](const Bucket& b) { return !b.empty(); });
  if (!any) throw std::invalid_argument("heuristic_select_idxs: all buckets empty");
  const std::size_t dims = x.cols();
  std::vector<double> loss(dims, 0.0);
  for (const auto& b : buckets)
    for (std::size_t j = 0; j < dims; ++j) loss[j] += b.dimension_loss(j);

  std::vector<std::uint32_t> idx(dims);
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return loss[a] > loss[b]; });
  idx.resize(std::min<std::size_t>(dims, kTreeDepth));
  return idx;
}

LevelResult add_tree_level(std::span<const Bucket> buckets, const DenseMatrix& x) {
  const auto candidates = heuristic_select_idxs(buckets, x);

  double best_loss = std::numeric_limits<double>::infinity();
  std::uint32_t best_index = 0;
  std::vector<double> best_thresholds;
  for (auto j : candidates) {
    double loss = 0.0;
    std::vector<double> thresholds;
    thresholds.reserve(buckets.size());
    for (const auto& b : buckets) {
      if (b.empty()) {
        thresholds.push_back(0.0);
        continue;
      }
      const auto split = optimal_split_threshold(b, j, x);
      thresholds.push_back(split.threshold);
      loss += split.loss;
    }
    if (loss < best_loss || (loss == best_loss && j < best_index)) {
      best_loss = loss;
      best_index = j;
      best_thresholds = std::move(thresholds);
    }
  }

  LevelResult result;
  result.loss = best_loss;
  result.split_index = best_index;
  result.thresholds = best_thresholds;
  result.buckets.reserve(2 * buckets.size());
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    Bucket below(x.cols()), above(x.cols());
    const double v = best_thresholds[i];
    for (auto id : buckets[i].members()) {
      if (static_cast<double>(x(id, best_index)) >= v) {
        above.add(id, x.row(id));
      } else {
        below.add(id, x.row(id));
      }
    }
    result.buckets.push_back(std::move(below));
    result.buckets.push_back(std::move(above));
  }
  return result;
}

TreeFit learn_hash_tree(const DenseMatrix& x) {
  if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("learn_hash_tree: empty X");
  std::vector<std::uint32_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0u);

  TreeFit fit;
  std::vector<Bucket> level{Bucket(std::move(all), x)};
  fit.losses[0] = level.front().loss();
  for (std::size_t t = 0; t < kTreeDepth; ++t) {
    auto next = add_tree_level(level, x);
    fit.tree.split_indices[t] = next.split_index;
    fit.tree.thresholds[t] = std::move(next.thresholds);
    fit.losses[t + 1] = next.loss;
    level = std::move(next.buckets);
  }
  fit.leaves = std::move(level);
  return fit;
}

HashTreeParams quantize_tree(HashTreeParams tree) {
  for (std::size_t t = 0; t < kTreeDepth; ++t) {
    const auto& v = tree.thresholds[t];
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double offset = *lo;
    const int exponent = byte_scale_exponent(*hi - *lo);
    tree.split_offsets[t] = offset;
    tree.scale_exponents[t] = exponent;
    auto& q = tree.quantized_thresholds[t];
    q.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      q[i] = *hi == *lo ? 0 : quantize_threshold(v[i], offset, exponent);
    }
  }
  tree.quantized = true;
  return tree;
}

}  // namespace maddness
