#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "maddness/bench.hpp"

using namespace maddness;
using namespace maddness::bench;

namespace {

BenchConfig quick() {
  BenchConfig cfg;
  cfg.n = 1024;
  cfg.d = 16;
  cfg.m = 4;
  cfg.rank = 4;
  cfg.c_list = {4, 8};
  cfg.trials = 1;
  cfg.reps = 1;
  return cfg;
}

// Records with timing columns blanked, for determinism comparisons.
std::vector<BenchmarkRecord> untimed(std::vector<BenchmarkRecord> rs) {
  for (auto& r : rs) r.best_time_ns.clear();
  return rs;
}

}  // namespace

TEST_CASE("exact method gives zero error") {
  auto cfg = quick();
  cfg.methods = {"exact"};
  auto rep = run_benchmark(cfg);
  REQUIRE(rep.records.size() == 1);
  CHECK(rep.records[0].nmse == 0.0);
  CHECK(rep.records[0].ops.multiplies == rep.records[0].n * 16 * 4);
  CHECK(rep.records[0].best_time_ns.size() == 1);
}

TEST_CASE("runs are deterministic") {
  auto cfg = quick();
  cfg.methods = {"exact", "maddness", "maddness-pq", "pq", "pca"};
  auto a = run_benchmark(cfg), b = run_benchmark(cfg);
  CHECK(untimed(a.records) == untimed(b.records));
  CHECK(a.records.size() == 1 + 4 * 2);
  for (const auto& r : a.records) {
    CHECK(r.error.empty());
    REQUIRE(r.nmse);
    CHECK(*r.nmse < 1.0);
  }
}

TEST_CASE("op-count ratio is C/D") {
  BenchConfig cfg;
  cfg.n = 5120;  // 1024 test rows
  cfg.d = 64;
  cfg.m = 8;
  cfg.c_list = {16};
  cfg.methods = {"exact", "maddness"};
  cfg.trials = 1;
  cfg.reps = 1;
  auto rep = run_benchmark(cfg);
  REQUIRE(rep.records.size() == 2);
  const auto& ex = rep.records[0];
  const auto& md = rep.records[1];
  CHECK(ex.n == 1024);
  CHECK(ex.ops.multiplies == 1024u * 64 * 8);
  CHECK(md.ops.lookups == 1024u * 16 * 8);
  CHECK(md.ops.comparisons == 4u * 1024 * 16);
  CHECK(md.ops.multiplies == 0);
  CHECK(double(md.ops.lookups) / double(ex.ops.multiplies) == 0.25);
}

TEST_CASE("infeasible codebook count is a per-record error") {
  auto cfg = quick();
  cfg.methods = {"pq", "maddness"};
  cfg.c_list = {4, 32};
  auto rep = run_benchmark(cfg);
  REQUIRE(rep.records.size() == 4);
  CHECK(rep.records[0].error.empty());
  CHECK_FALSE(rep.records[1].error.empty());
  CHECK_FALSE(rep.records[1].nmse);
  CHECK(rep.records[2].error.empty());
  CHECK_FALSE(rep.records[3].error.empty());
}

TEST_CASE("unknown method is rejected") {
  auto cfg = quick();
  cfg.methods = {"exact", "svd"};
  CHECK_THROWS_AS(run_benchmark(cfg), std::invalid_argument);
}

TEST_CASE("csv and json round trips") {
  auto cfg = quick();
  cfg.methods = {"exact", "maddness", "pq"};
  cfg.c_list = {4, 100};
  cfg.trials = 3;
  auto rep = run_benchmark(cfg);
  const auto csv = to_csv(rep);
  CHECK(csv.rfind(csv_header(), 0) == 0);
  const auto from_csv = parse_csv(csv);
  CHECK(from_csv == rep.records);
  const auto j = to_json(rep);
  CHECK(j.contains("environment"));
  CHECK(records_from_json(nlohmann::json::parse(j.dump())) == rep.records);
  CHECK(from_csv == records_from_json(j));
  CHECK_THROWS(parse_csv("nope\n"));
}

TEST_CASE("config json") {
  auto cfg = quick();
  cfg.task = TaskKind::GaussianMixtureClassifier;
  cfg.methods = {"pq"};
  cfg.lambda = 0.5;
  auto back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  auto partial = config_from_json(nlohmann::json{{"n", 77}});
  CHECK(partial.n == 77);
  CHECK(partial.d == BenchConfig{}.d);
  CHECK_THROWS(config_from_json(nlohmann::json{{"bogus", 1}}));
  CHECK(parse_task(task_name(TaskKind::LowRankPlusNoise)) == TaskKind::LowRankPlusNoise);
  CHECK_THROWS(parse_task("cifar"));
}

TEST_CASE("argmax agreement") {
  DenseMatrix a(3, 2, {1, 0, 0, 1, 2, 2});
  DenseMatrix b(3, 2, {5, 1, 1, 0, 3, 3});
  CHECK(argmax_agreement(a, a) == 1.0);
  CHECK(argmax_agreement(a, b) == doctest::Approx(2.0 / 3));
  CHECK_THROWS(argmax_agreement(a, DenseMatrix(2, 2)));
}

TEST_CASE("classifier agreement trend and chance control") {
  const std::vector<std::size_t> cs{8, 16, 32, 64};
  std::vector<double> mean(cs.size(), 0.0);
  double control = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    BenchConfig cfg;
    cfg.task = TaskKind::GaussianMixtureClassifier;
    cfg.n = 2048;
    cfg.d = 64;
    cfg.classes = 10;
    cfg.noise = 1.0;
    cfg.methods = {"exact", "maddness"};
    cfg.c_list = cs;
    cfg.seed = seed;
    cfg.trials = 1;
    cfg.reps = 1;
    auto rep = run_benchmark(cfg);
    REQUIRE(rep.records.size() == 1 + cs.size());
    CHECK(rep.records[0].argmax_agreement == 1.0);
    for (std::size_t i = 0; i < cs.size(); ++i) mean[i] += *rep.records[i + 1].argmax_agreement / 5;

    auto task = generate_task(task_spec(cfg));
    auto exact = matmul(task.test, task.op);
    control += shuffled_control_agreement(exact, exact, seed) / 5;
  }
  for (std::size_t i = 1; i < cs.size(); ++i) CHECK(mean[i] >= mean[i - 1]);
  CHECK(mean.back() > 0.5);
  CHECK(control == doctest::Approx(0.1).epsilon(0.5));
}
