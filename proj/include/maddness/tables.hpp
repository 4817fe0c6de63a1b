#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "maddness/core.hpp"
#include "maddness/prototypes.hpp"

namespace maddness {

// M x C x K tensor of inner products between columns of B and prototypes.
struct RealTables {
  std::size_t M = 0, C = 0, K = 0;
  std::vector<double> values;

  double operator()(std::size_t m, std::size_t c, std::size_t k) const {
    return values[(m * C + c) * K + k];
  }
  double& operator()(std::size_t m, std::size_t c, std::size_t k) {
    return values[(m * C + c) * K + k];
  }
};

// 8-bit tables with T ~= 2^-exponent * Tq + offsets[c].
struct QuantizedTables {
  std::size_t M = 0, C = 0, K = 0;
  std::vector<std::uint8_t> values;
  int exponent = 0;  // alpha^{-1} = 2^exponent
  std::vector<double> offsets;

  std::uint8_t operator()(std::size_t m, std::size_t c, std::size_t k) const {
    return values[(m * C + c) * K + k];
  }
  double alpha() const;
  double alpha_inverse() const;
  double offset_sum() const;
  bool operator==(const QuantizedTables&) const = default;
};

// T[m,c,k] = <B[:, m], P[c*K + k, :]>. Costs M*K*C*D multiplies.
RealTables build_tables(const DenseMatrix& B, const PrototypeMatrix& P,
                        OpCounts* counts = nullptr);

// Offsets are per-codebook minima; the shared exponent is the largest l with
// 2^l * (max - min) <= 255 for every codebook. Codebooks with zero range do
// not constrain l; if every codebook is constant l = 30.
QuantizedTables quantize_tables(const RealTables& T);

}  // namespace maddness
