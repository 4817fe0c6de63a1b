#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "maddness/core.hpp"
#include "maddness/tables.hpp"

namespace maddness {

enum class AggregationMode : std::uint8_t { ExactUpcast = 0, Averaging = 1 };

struct AggregationConfig {
  std::size_t block_size = 16;  // U; a power of two
  AggregationMode mode = AggregationMode::Averaging;
};

void validate(const AggregationConfig& cfg);

// floor((a + b + 1) / 2), the rounding-up byte average.
constexpr std::uint8_t mean_pair_u8(std::uint8_t a, std::uint8_t b) {
  return static_cast<std::uint8_t>((static_cast<unsigned>(a) + b + 1) >> 1);
}

// U times the balanced pairwise-average reduction of a power-of-two block.
// Never underestimates the true sum and overshoots by at most U*log2(U)/2.
std::int64_t estimate_block_sum(std::span<const std::uint8_t> values);

// Signed correction to add to an averaging-mode estimate so it is unbiased
// when low bits are fair coins: -(full blocks) * U * log2(U) / 4. Codebooks
// in a trailing partial block are summed exactly and need no correction.
double bias_correction(std::size_t codebooks, std::size_t block_size);

struct AggregateResult {
  std::size_t rows = 0, cols = 0;
  std::vector<std::int64_t> estimates;  // rows x cols, row-major
  double debias = 0.0;

  std::int64_t operator()(std::size_t n, std::size_t m) const { return estimates[n * cols + m]; }
  bool operator==(const AggregateResult&) const = default;
};

// For every (n, m), gathers tables(m, c, codes(n, c)) over c and sums them:
// exactly in ExactUpcast mode, or blockwise with estimate_block_sum (blocks
// summed exactly) in Averaging mode. Performs N*C*M lookups and no multiplies.
AggregateResult aggregate(const CodeMatrix& codes, const QuantizedTables& tables,
                          const AggregationConfig& cfg, OpCounts* counts = nullptr);

// alpha * (estimate + debias) + sum_c offsets[c]. alpha is a power of two,
// applied with ldexp.
DenseMatrix dequantize(const AggregateResult& estimates, const QuantizedTables& tables);

// Unquantized lookup-and-sum against real-valued tables (debug/oracle path).
DenseMatrix aggregate_real(const CodeMatrix& codes, const RealTables& tables,
                           OpCounts* counts = nullptr);

}  // namespace maddness
