#pragma once

#include <cmath>
#include <vector>

#include "maddness/core.hpp"

namespace testing {

inline maddness::DenseMatrix random_matrix(maddness::Rng& rng, std::size_t r, std::size_t c,
                                           double scale = 1.0) {
  maddness::DenseMatrix x(r, c);
  for (auto& v : x.data()) v = static_cast<float>(scale * rng.normal());
  return x;
}

// Values on a coarse grid so ties and duplicates are common.
inline maddness::DenseMatrix grid_matrix(maddness::Rng& rng, std::size_t r, std::size_t c,
                                         int levels) {
  maddness::DenseMatrix x(r, c);
  for (auto& v : x.data()) v = static_cast<float>(rng.uniform_int(levels)) * 0.5f;
  return x;
}

inline double max_abs_diff(const maddness::DenseMatrix& a, const maddness::DenseMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(double(a.data()[i]) - double(b.data()[i])));
  return m;
}

}  // namespace testing
