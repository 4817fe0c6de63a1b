#include "maddness/aggregation.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace maddness {

namespace {

bool is_power_of_two(std::size_t u) { return u != 0 && (u & (u - 1)) == 0; }

void check_shapes(const CodeMatrix& codes, std::size_t C, std::size_t K) {
  if (codes.codebooks != C) throw std::invalid_argument("aggregate: code width != table C");
  for (auto v : codes.data) {
    if (v >= K) throw std::invalid_argument("aggregate: code out of range");
  }
}

}  // namespace

void validate(const AggregationConfig& cfg) {
  if (!is_power_of_two(cfg.block_size)) {
    throw std::invalid_argument("AggregationConfig: block size must be a power of two");
  }
}

std::int64_t estimate_block_sum(std::span<const std::uint8_t> values) {
  const std::size_t u = values.size();
  if (!is_power_of_two(u)) throw std::invalid_argument("estimate_block_sum: size not 2^p");
  if (u == 1) return values[0];
  std::array<std::uint8_t, 256> stack_buf{};
  std::vector<std::uint8_t> heap_buf;
  std::uint8_t* buf = stack_buf.data();
  if (u > stack_buf.size()) {
    heap_buf.resize(u);
    buf = heap_buf.data();
  }
  std::copy(values.begin(), values.end(), buf);
  for (std::size_t width = u; width > 1; width /= 2) {
    for (std::size_t i = 0; i < width / 2; ++i) buf[i] = mean_pair_u8(buf[2 * i], buf[2 * i + 1]);
  }
  return static_cast<std::int64_t>(buf[0]) * static_cast<std::int64_t>(u);
}

double bias_correction(std::size_t codebooks, std::size_t block_size) {
  if (!is_power_of_two(block_size)) {
    throw std::invalid_argument("bias_correction: block size must be a power of two");
  }
  const std::size_t full_blocks = codebooks / block_size;
  const int levels = std::countr_zero(block_size);
  return -static_cast<double>(full_blocks * block_size) * levels / 4.0;
}

AggregateResult aggregate(const CodeMatrix& codes, const QuantizedTables& tables,
                          const AggregationConfig& cfg, OpCounts* counts) {
  validate(cfg);
  check_shapes(codes, tables.C, tables.K);
  const std::size_t N = codes.rows, C = tables.C, M = tables.M, K = tables.K;
  const std::size_t U = cfg.block_size;
  const bool averaging = cfg.mode == AggregationMode::Averaging && U > 1;
  const std::size_t full = averaging ? (C / U) * U : 0;

  AggregateResult out;
  out.rows = N;
  out.cols = M;
  out.estimates.assign(N * M, 0);
  out.debias = averaging ? bias_correction(C, U) : 0.0;

  std::vector<std::uint8_t> gathered(C);
  for (std::size_t m = 0; m < M; ++m) {
    const std::uint8_t* lut = tables.values.data() + m * C * K;
    for (std::size_t n = 0; n < N; ++n) {
      auto code_row = codes.row(n);
      for (std::size_t c = 0; c < C; ++c) gathered[c] = lut[c * K + code_row[c]];
      std::int64_t acc = 0;
      std::size_t c = 0;
      for (; c < full; c += U) acc += estimate_block_sum({gathered.data() + c, U});
      for (; c < C; ++c) acc += gathered[c];
      out.estimates[n * M + m] = acc;
    }
  }
  if (counts) counts->lookups += static_cast<std::uint64_t>(N) * C * M;
  return out;
}

DenseMatrix dequantize(const AggregateResult& estimates, const QuantizedTables& tables) {
  if (estimates.cols != tables.M) throw std::invalid_argument("dequantize: column mismatch");
  const double beta = tables.offset_sum();
  std::vector<float> out(estimates.estimates.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double raw = static_cast<double>(estimates.estimates[i]) + estimates.debias;
    out[i] = static_cast<float>(std::ldexp(raw, -tables.exponent) + beta);
  }
  return DenseMatrix(estimates.rows, estimates.cols, std::move(out));
}

DenseMatrix aggregate_real(const CodeMatrix& codes, const RealTables& tables, OpCounts* counts) {
  check_shapes(codes, tables.C, tables.K);
  const std::size_t N = codes.rows, C = tables.C, M = tables.M, K = tables.K;
  DenseMatrix out(N, M);
  for (std::size_t n = 0; n < N; ++n) {
    auto code_row = codes.row(n);
    for (std::size_t m = 0; m < M; ++m) {
      const double* lut = tables.values.data() + m * C * K;
      double acc = 0.0;
      for (std::size_t c = 0; c < C; ++c) acc += lut[c * K + code_row[c]];
      out(n, m) = static_cast<float>(acc);
    }
  }
  if (counts) counts->lookups += static_cast<std::uint64_t>(N) * C * M;
  return out;
}

}  // namespace maddness
