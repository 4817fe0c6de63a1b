#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "maddness/hash_tree.hpp"
#include "maddness/prototypes.hpp"
#include "oracles.hpp"

using namespace maddness;

namespace {

CodeMatrix random_codes(Rng& rng, std::size_t n, std::size_t c, std::size_t K) {
  CodeMatrix codes(n, c);
  for (auto& v : codes.data) v = static_cast<std::uint8_t>(rng.uniform_int(K));
  return codes;
}

}  // namespace

TEST_CASE("partition subspaces") {
  auto s = partition_subspaces(10, 3);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == Subspace{0, 4});
  CHECK(s[1] == Subspace{4, 7});
  CHECK(s[2] == Subspace{7, 10});
  auto one = partition_subspaces(5, 5);
  for (std::size_t c = 0; c < 5; ++c) CHECK(one[c].size() == 1);
  CHECK_THROWS_AS(partition_subspaces(4, 5), std::invalid_argument);
  CHECK_THROWS_AS(partition_subspaces(4, 0), std::invalid_argument);
}

TEST_CASE("build_G worked example") {
  CodeMatrix codes(1, 3);
  codes(0, 0) = 2;  // 1-indexed codes 3, 1, 2
  codes(0, 1) = 0;
  codes(0, 2) = 1;
  auto G = build_G(codes, 4, 3).dense();
  REQUIRE(G.rows() == 1);
  REQUIRE(G.cols() == 12);
  const std::vector<float> want{0, 0, 1, 0, 1, 0, 0, 0, 0, 1, 0, 0};
  CHECK(std::vector<float>(G.data().begin(), G.data().end()) == want);

  Rng rng(1);
  auto g = build_G(random_codes(rng, 5, 2, 16), 16, 2);
  CHECK(g.rows() == 5);
  CHECK(g.cols() == 32);
  CodeMatrix bad(1, 1);
  bad(0, 0) = 16;
  CHECK_THROWS_AS(build_G(bad, 16, 1), std::invalid_argument);
}

TEST_CASE("gram and transpose_times match dense products") {
  Rng rng(3);
  auto codes = random_codes(rng, 40, 3, 4);
  AssignmentMatrix G(codes, 4);
  auto dense = G.dense();
  auto gram = G.gram();
  auto x = testing::random_matrix(rng, 40, 5);
  auto gtx = G.transpose_times(x);
  auto gt = transpose(dense);
  auto gg = matmul(gt, dense);
  auto gx = matmul(gt, x);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      CHECK(gram[i * 12 + j] == gg(i, j));
      CHECK(gram[i * 12 + j] == gram[j * 12 + i]);
    }
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(gtx[i * 5 + j] == doctest::Approx(gx(i, j)).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("ridge closed-form examples") {
  CodeMatrix id(2, 1);
  id(0, 0) = 0;
  id(1, 0) = 1;
  auto p = optimize_prototypes(AssignmentMatrix(id, 2), DenseMatrix(2, 1, {2, 4}), 1.0,
                               {Subspace{0, 1}});
  CHECK(p.P(0, 0) == doctest::Approx(1.0));
  CHECK(p.P(1, 0) == doctest::Approx(2.0));

  CodeMatrix g(3, 1);
  g(0, 0) = 0;
  g(1, 0) = 0;
  g(2, 0) = 1;
  p = optimize_prototypes(AssignmentMatrix(g, 2), DenseMatrix(3, 1, {3, 3, 5}), 1.0,
                          {Subspace{0, 1}});
  CHECK(p.P(0, 0) == doctest::Approx(2.0));
  CHECK(p.P(1, 0) == doctest::Approx(2.5));

  auto big = optimize_prototypes(AssignmentMatrix(g, 2), DenseMatrix(3, 1, {3, 3, 5}), 1e9,
                                 {Subspace{0, 1}});
  CHECK(frobenius_norm_sq(big.P) < 1e-12);
}

TEST_CASE("ridge matches a dense elimination oracle") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + rng.uniform_int(50), C = 1 + rng.uniform_int(3), K = 4, D = 3;
    auto codes = random_codes(rng, n, C, K);
    AssignmentMatrix G(codes, K);
    auto a = testing::random_matrix(rng, n, D);
    const double lambda = 0.1 + rng.uniform();
    auto p = optimize_prototypes(G, a, lambda, partition_subspaces(D, C));
    auto want = oracle::ridge_dense(G.dense(), a, lambda);
    for (std::size_t i = 0; i < want.size(); ++i)
      CHECK(p.P.data()[i] == doctest::Approx(want[i]).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("cholesky rejects indefinite systems") {
  std::vector<double> a{1, 2, 2, 1}, b{1, 1};
  CHECK_THROWS_AS(cholesky_solve(a, b, 2, 1), std::runtime_error);
}

TEST_CASE("bucket means") {
  DenseMatrix x(3, 2, {0, 2, 2, 4, 9, 9});
  std::vector<std::vector<Bucket>> leaves(1, std::vector<Bucket>(kLeaves, Bucket(2)));
  leaves[0][0] = Bucket({0, 1}, x);
  leaves[0][5] = Bucket({2}, x);
  auto s = partition_subspaces(2, 1);
  auto p = bucket_means(leaves, x, s);
  CHECK(p.P.rows() == 16);
  CHECK(p.prototype(0, 0)[0] == 1.0f);
  CHECK(p.prototype(0, 0)[1] == 3.0f);
  CHECK(p.prototype(0, 5)[0] == 9.0f);
  CHECK(p.prototype(0, 3)[0] == 0.0f);
}

TEST_CASE("ridge objective at optimum beats bucket means") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 100, D = 6, C = 2;
    auto x = testing::random_matrix(rng, n, D);
    auto subs = partition_subspaces(D, C);
    CodeMatrix codes(n, C);
    std::vector<std::vector<Bucket>> leaves;
    for (std::size_t c = 0; c < C; ++c) {
      auto fit = learn_hash_tree(slice_columns(x, subs[c]));
      for (std::size_t k = 0; k < kLeaves; ++k)
        for (auto id : fit.leaves[k].members()) codes(id, c) = static_cast<std::uint8_t>(k);
      leaves.push_back(fit.leaves);
    }
    AssignmentMatrix G(codes, kLeaves);
    auto means = bucket_means(leaves, x, subs);
    auto opt = optimize_prototypes(G, x, 1.0, subs);
    CHECK(ridge_objective(G, x, opt.P, 1.0) <= ridge_objective(G, x, means.P, 1.0) + 1e-9);
  }
}
