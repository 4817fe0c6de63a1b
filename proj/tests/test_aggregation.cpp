#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "maddness/aggregation.hpp"
#include "oracles.hpp"

using namespace maddness;

namespace {

QuantizedTables random_qtables(Rng& rng, std::size_t M, std::size_t C) {
  QuantizedTables q;
  q.M = M;
  q.C = C;
  q.K = 16;
  q.values.resize(M * C * 16);
  for (auto& v : q.values) v = static_cast<std::uint8_t>(rng.uniform_int(256));
  q.exponent = 3;
  q.offsets.assign(C, 0.5);
  return q;
}

CodeMatrix random_codes(Rng& rng, std::size_t n, std::size_t c) {
  CodeMatrix codes(n, c);
  for (auto& v : codes.data) v = static_cast<std::uint8_t>(rng.uniform_int(16));
  return codes;
}

}  // namespace

TEST_CASE("mean_pair") {
  CHECK(mean_pair_u8(0, 1) == 1);
  CHECK(mean_pair_u8(0, 0) == 0);
  CHECK(mean_pair_u8(255, 255) == 255);
  CHECK(mean_pair_u8(3, 4) == 4);
  for (int a = 0; a < 256; ++a)
    for (int b = 0; b < 256; ++b)
      CHECK_UNARY(mean_pair_u8(a, b) == (a + b + 1) / 2);
}

TEST_CASE("estimate_block_sum") {
  std::vector<std::uint8_t> pair{0, 1};
  CHECK(estimate_block_sum(pair) == 2);
  for (int v : {0, 7, 255}) {
    std::vector<std::uint8_t> same(16, static_cast<std::uint8_t>(v));
    CHECK(estimate_block_sum(same) == 16 * v);
  }
  std::vector<std::uint8_t> three(3, 1);
  CHECK_THROWS_AS(estimate_block_sum(three), std::invalid_argument);

  // Exhaustive {0,1}^U enumeration pins the sign and size of the bias.
  for (std::size_t u : {2u, 4u, 8u, 16u}) {
    double err = 0.0;
    const std::size_t count = std::size_t{1} << u;
    for (std::size_t mask = 0; mask < count; ++mask) {
      std::vector<std::uint8_t> v(u);
      std::vector<int> ints(u);
      int truth = 0;
      for (std::size_t i = 0; i < u; ++i) {
        v[i] = static_cast<std::uint8_t>((mask >> i) & 1);
        ints[i] = v[i];
        truth += v[i];
      }
      const auto est = estimate_block_sum(v);
      CHECK_UNARY(est == oracle::averaged_sum(ints));
      err += static_cast<double>(est - truth);
    }
    const double lg = std::log2(static_cast<double>(u));
    CHECK(err / count > 0.0);
    CHECK(err / count <= u * lg / 2);
    // Fair-coin low bits hold exactly only at the first level, i.e. for U = 2.
    if (u == 2) CHECK(err / count == -bias_correction(2, 2));
  }
}

TEST_CASE("bias correction") {
  CHECK(bias_correction(16, 16) == -16.0);
  CHECK(bias_correction(7, 1) == 0.0);
  CHECK(bias_correction(2, 2) == -0.5);
  CHECK(bias_correction(32, 16) == -32.0);
  CHECK(bias_correction(8, 16) == 0.0);  // no full block
  CHECK(bias_correction(24, 16) == -16.0);
}

TEST_CASE("aggregate C=1 and constant tables") {
  Rng rng(1);
  auto q = random_qtables(rng, 2, 1);
  auto codes = random_codes(rng, 5, 1);
  OpCounts ops;
  auto r = aggregate(codes, q, {}, &ops);
  for (std::size_t n = 0; n < 5; ++n)
    for (std::size_t m = 0; m < 2; ++m) CHECK(r(n, m) == q(m, 0, codes(n, 0)));
  CHECK(ops.lookups == 10);
  CHECK(ops.multiplies == 0);

  auto c = random_qtables(rng, 3, 16);
  std::fill(c.values.begin(), c.values.end(), std::uint8_t{9});
  auto codes16 = random_codes(rng, 4, 16);
  for (auto mode : {AggregationMode::ExactUpcast, AggregationMode::Averaging}) {
    auto res = aggregate(codes16, c, {16, mode});
    for (auto e : res.estimates) CHECK(e == 16 * 9);
  }
}

TEST_CASE("averaging mode against exact upcast") {
  Rng rng(2);
  const std::size_t C = 16, M = 8, N = 1500;
  auto q = random_qtables(rng, M, C);
  auto codes = random_codes(rng, N, C);
  OpCounts ops;
  auto exact = aggregate(codes, q, {16, AggregationMode::ExactUpcast});
  auto avg = aggregate(codes, q, {16, AggregationMode::Averaging}, &ops);
  CHECK(ops.lookups == N * C * M);
  CHECK(ops.multiplies == 0);
  CHECK(avg.debias == -16.0);
  CHECK(exact.debias == 0.0);
  double mean = 0.0;
  for (std::size_t i = 0; i < exact.estimates.size(); ++i) {
    const double diff = avg.estimates[i] + avg.debias - exact.estimates[i];
    CHECK(std::abs(diff) <= C * std::log2(16.0) / 2);
    CHECK(avg.estimates[i] >= exact.estimates[i]);
    mean += diff;
  }
  mean /= static_cast<double>(exact.estimates.size());
  // Mean residual is small against the bias removed (C log2 U / 4 = 16).
  CHECK(std::abs(mean) <= 0.15 * C * std::log2(16.0) / 4);
}

TEST_CASE("averaging with U=1 equals exact upcast") {
  Rng rng(3);
  auto q = random_qtables(rng, 3, 5);
  auto codes = random_codes(rng, 50, 5);
  CHECK(aggregate(codes, q, {1, AggregationMode::Averaging}) ==
        aggregate(codes, q, {1, AggregationMode::ExactUpcast}));
}

TEST_CASE("trailing partial block is summed exactly") {
  Rng rng(4);
  auto q = random_qtables(rng, 2, 6);
  auto codes = random_codes(rng, 20, 6);
  auto exact = aggregate(codes, q, {4, AggregationMode::ExactUpcast});
  auto avg = aggregate(codes, q, {4, AggregationMode::Averaging});
  for (std::size_t n = 0; n < 20; ++n)
    for (std::size_t m = 0; m < 2; ++m) {
      std::vector<std::uint8_t> head;
      std::int64_t tail = 0;
      for (std::size_t c = 0; c < 6; ++c) {
        const auto v = q(m, c, codes(n, c));
        if (c < 4) head.push_back(v);
        else tail += v;
      }
      CHECK(avg(n, m) == estimate_block_sum(head) + tail);
    }
  CHECK(avg.debias == bias_correction(6, 4));
  CHECK_THROWS(aggregate(codes, q, {3, AggregationMode::Averaging}));
}

TEST_CASE("dequantize") {
  AggregateResult est;
  est.rows = 1;
  est.cols = 3;
  est.estimates = {0, 5, -2};
  QuantizedTables q;
  q.M = 3;
  q.C = 1;
  q.K = 16;
  q.exponent = 0;
  q.offsets = {0.0};
  auto out = dequantize(est, q);
  CHECK(out == DenseMatrix(1, 3, {0, 5, -2}));
  q.exponent = 2;
  q.offsets = {1.0};
  est.debias = -1.0;
  out = dequantize(est, q);
  CHECK(out(0, 1) == doctest::Approx(0.25 * 4 + 1.0));
}

TEST_CASE("aggregate_real") {
  RealTables t;
  t.M = 1;
  t.C = 2;
  t.K = 16;
  t.values.assign(32, 0.0);
  t(0, 0, 3) = 1.5;
  t(0, 1, 7) = -0.25;
  CodeMatrix codes(1, 2);
  codes(0, 0) = 3;
  codes(0, 1) = 7;
  OpCounts ops;
  auto out = aggregate_real(codes, t, &ops);
  CHECK(out(0, 0) == doctest::Approx(1.25));
  CHECK(ops.lookups == 2);
}
