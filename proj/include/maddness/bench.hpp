#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "maddness/core.hpp"

namespace maddness::bench {

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"exact", "maddness", "maddness-pq", "pq", "pca"};
  return m;
}

struct BenchConfig {
  TaskKind task = TaskKind::LowRankPlusNoise;
  std::size_t n = 8192, d = 64, m = 8;
  std::size_t rank = 8;
  double noise = 0.1;
  std::size_t classes = 10;
  std::vector<std::string> methods{"exact", "maddness", "pq"};
  std::vector<std::size_t> c_list{4, 8, 16, 32};
  std::uint64_t seed = 0;
  std::size_t trials = 5;
  std::size_t reps = 20;
  double lambda = 1.0;
  std::size_t block_size = 16;
  bool debug_float_tables = false;
};

// Throws std::invalid_argument for unknown methods or malformed settings.
void validate(const BenchConfig& cfg);
SyntheticTaskSpec task_spec(const BenchConfig& cfg);

struct BenchmarkRecord {
  std::string method;
  std::string task;
  std::size_t n = 0, d = 0, m = 0, c = 0, k = 0, u = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> nmse;
  std::optional<double> argmax_agreement;
  std::vector<std::int64_t> best_time_ns;  // one entry per trial
  OpCounts ops;
  std::string error;

  bool operator==(const BenchmarkRecord&) const = default;
};

struct BenchmarkReport {
  BenchConfig config;
  std::vector<BenchmarkRecord> records;
};

BenchmarkReport run_benchmark(const BenchConfig& cfg);

// Fraction of rows whose argmax column agrees (ties -> lowest column).
double argmax_agreement(const DenseMatrix& approx, const DenseMatrix& exact);
// Agreement after randomly permuting the rows of approx; a chance-level control.
double shuffled_control_agreement(const DenseMatrix& approx, const DenseMatrix& exact,
                                  std::uint64_t seed);

// Minimum wall time in nanoseconds over reps calls of fn, once per trial.
template <class Fn>
std::vector<std::int64_t> time_best_of(Fn&& fn, std::size_t trials, std::size_t reps);

const std::string& csv_header();
std::string to_csv(const BenchmarkReport& report);
std::vector<BenchmarkRecord> parse_csv(const std::string& text);

nlohmann::json to_json(const BenchmarkReport& report);
std::vector<BenchmarkRecord> records_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const BenchConfig& cfg);
BenchConfig config_from_json(const nlohmann::json& j, BenchConfig base = {});

std::string task_name(TaskKind kind);
TaskKind parse_task(const std::string& name);

}  // namespace maddness::bench

#include <chrono>

namespace maddness::bench {

template <class Fn>
std::vector<std::int64_t> time_best_of(Fn&& fn, std::size_t trials, std::size_t reps) {
  using clock = std::chrono::steady_clock;
  std::vector<std::int64_t> out;
  out.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    std::int64_t best = -1;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto start = clock::now();
      fn();
      const auto ns =
          std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
      if (best < 0 || ns < best) best = ns;
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace maddness::bench
