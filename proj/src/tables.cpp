#include "maddness/tables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace maddness {

double QuantizedTables::alpha() const { return std::ldexp(1.0, -exponent); }
double QuantizedTables::alpha_inverse() const { return std::ldexp(1.0, exponent); }

double QuantizedTables::offset_sum() const {
  double s = 0.0;
  for (double o : offsets) s += o;
  return s;
}

RealTables build_tables(const DenseMatrix& B, const PrototypeMatrix& P, OpCounts* counts) {
  const std::size_t d = B.rows();
  if (P.P.cols() != d) throw std::invalid_argument("build_tables: B rows != prototype width");
  if (P.P.rows() != P.K * P.C) throw std::invalid_argument("build_tables: P must be KC x D");
  RealTables T;
  T.M = B.cols();
  T.C = P.C;
  T.K = P.K;
  T.values.assign(T.M * T.C * T.K, 0.0);
  for (std::size_t m = 0; m < T.M; ++m) {
    for (std::size_t row = 0; row < P.K * P.C; ++row) {
      auto p = P.P.row(row);
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += static_cast<double>(B(j, m)) * p[j];
      T.values[m * T.C * T.K + row] = acc;
    }
  }
  if (counts) counts->multiplies += static_cast<std::uint64_t>(T.M) * T.K * T.C * d;
  return T;
}

QuantizedTables quantize_tables(const RealTables& T) {
  for (double v : T.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("quantize_tables: non-finite entry");
  }
  QuantizedTables q;
  q.M = T.M;
  q.C = T.C;
  q.K = T.K;
  q.offsets.assign(T.C, 0.0);
  std::vector<double> range(T.C, 0.0);
  for (std::size_t c = 0; c < T.C; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t m = 0; m < T.M; ++m)
      for (std::size_t k = 0; k < T.K; ++k) {
        lo = std::min(lo, T(m, c, k));
        hi = std::max(hi, T(m, c, k));
      }
    q.offsets[c] = lo;
    range[c] = hi - lo;
  }

  int exponent = std::numeric_limits<int>::max();
  for (double r : range) {
    if (!(r > 0.0)) continue;
    exponent = std::min(exponent, byte_scale_exponent(r));
  }
  if (exponent == std::numeric_limits<int>::max()) exponent = byte_scale_exponent(0.0);
  q.exponent = exponent;

  q.values.resize(T.values.size());
  for (std::size_t m = 0; m < T.M; ++m)
    for (std::size_t c = 0; c < T.C; ++c)
      for (std::size_t k = 0; k < T.K; ++k) {
        const double scaled = round_half_even(std::ldexp(T(m, c, k) - q.offsets[c], exponent));
        q.values[(m * T.C + c) * T.K + k] =
            static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
      }
  return q;
}

}  // namespace maddness
