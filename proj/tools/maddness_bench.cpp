// Benchmark harness: MADDNESS and baselines on synthetic matrix products.
//
//   maddness_bench --task low-rank --n 8192 --d 64 --m 8 \
//       --methods exact,maddness,pq --c-list 4,8,16,32 --out report.csv

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "maddness/bench.hpp"

namespace {

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  using maddness::bench::BenchConfig;
  CLI::App app{"Approximate matrix multiplication benchmark (MADDNESS, PQ, PCA, exact)"};

  BenchConfig flags;
  std::string config_path, task = "low-rank", out_path, format = "csv";
  app.add_option("--config", config_path, "JSON config file; explicit flags override it")
      ->check(CLI::ExistingFile);
  app.add_option("--task", task, "low-rank | classifier")
      ->check(CLI::IsMember({"low-rank", "classifier"}));
  app.add_option("--n", flags.n, "training rows (test rows = ceil(n/5))");
  app.add_option("--d", flags.d, "inner dimension D");
  app.add_option("--m", flags.m, "output columns M (classifier task: class count)");
  app.add_option("--rank", flags.rank, "latent rank of the low-rank task");
  app.add_option("--noise", flags.noise, "noise scale");
  app.add_option("--classes", flags.classes, "class count for the classifier task");
  app.add_option("--methods", flags.methods, "comma-separated: exact,maddness,maddness-pq,pq,pca")
      ->delimiter(',');
  app.add_option("--c-list", flags.c_list, "comma-separated codebook counts")->delimiter(',');
  app.add_option("--seed", flags.seed, "task and training seed");
  app.add_option("--trials", flags.trials, "timing trials");
  app.add_option("--reps", flags.reps, "executions per trial (best is kept)");
  app.add_option("--lambda", flags.lambda, "ridge strength for maddness");
  app.add_option("--u", flags.block_size, "averaging block size (power of two)");
  app.add_flag("--debug-float-tables", flags.debug_float_tables,
               "use real-valued tables and exact sums");
  app.add_option("--out", out_path, "output file (default: stdout)");
  app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  CLI11_PARSE(app, argc, argv);

  try {
    BenchConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      cfg = maddness::bench::config_from_json(nlohmann::json::parse(in));
    }
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--task")) cfg.task = maddness::bench::parse_task(task);
    if (given("--n")) cfg.n = flags.n;
    if (given("--d")) cfg.d = flags.d;
    if (given("--m")) cfg.m = flags.m;
    if (given("--rank")) cfg.rank = flags.rank;
    if (given("--noise")) cfg.noise = flags.noise;
    if (given("--classes")) cfg.classes = flags.classes;
    if (given("--methods")) cfg.methods = flags.methods;
    if (given("--c-list")) cfg.c_list = flags.c_list;
    if (given("--seed")) cfg.seed = flags.seed;
    if (given("--trials")) cfg.trials = flags.trials;
    if (given("--reps")) cfg.reps = flags.reps;
    if (given("--lambda")) cfg.lambda = flags.lambda;
    if (given("--u")) cfg.block_size = flags.block_size;
    if (given("--debug-float-tables")) cfg.debug_float_tables = flags.debug_float_tables;

    std::cerr << "task=" << maddness::bench::task_name(cfg.task) << " n=" << cfg.n
              << " d=" << cfg.d << " methods=" << join(cfg.methods)
              << " c=" << join(cfg.c_list) << " seed=" << cfg.seed << '\n';
    const auto report = maddness::bench::run_benchmark(cfg);
    const std::string text = format == "json" ? maddness::bench::to_json(report).dump(2) + "\n"
                                              : maddness::bench::to_csv(report);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot open " + out_path);
      out << text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
