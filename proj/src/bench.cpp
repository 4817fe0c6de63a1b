#include "maddness/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "maddness/aggregation.hpp"
#include "maddness/pipeline.hpp"
#include "maddness/pq.hpp"

namespace maddness::bench {

std::string task_name(TaskKind kind) {
  return kind == TaskKind::LowRankPlusNoise ? "low-rank" : "classifier";
}

TaskKind parse_task(const std::string& name) {
  if (name == "low-rank" || name == "low-rank-plus-noise") return TaskKind::LowRankPlusNoise;
  if (name == "classifier" || name == "gaussian-mixture-classifier") {
    return TaskKind::GaussianMixtureClassifier;
  }
  throw std::invalid_argument("unknown task '" + name + "'");
}

void validate(const BenchConfig& cfg) {
  for (const auto& m : cfg.methods) {
    const auto& known = known_methods();
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw std::invalid_argument("unknown method '" + m + "'");
    }
  }
  if (cfg.methods.empty()) throw std::invalid_argument("no methods requested");
  if (cfg.trials == 0 || cfg.reps == 0) throw std::invalid_argument("trials and reps must be >= 1");
  validate(AggregationConfig{cfg.block_size, AggregationMode::Averaging});
  validate(task_spec(cfg));
}

SyntheticTaskSpec task_spec(const BenchConfig& cfg) {
  SyntheticTaskSpec spec;
  spec.kind = cfg.task;
  spec.n = cfg.n;
  spec.d = cfg.d;
  spec.m = cfg.task == TaskKind::GaussianMixtureClassifier ? cfg.classes : cfg.m;
  spec.rank = cfg.rank;
  spec.noise_scale = cfg.noise;
  spec.class_count = cfg.classes;
  spec.seed = cfg.seed;
  return spec;
}

namespace {

std::size_t argmax_row(std::span<const float> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

// Keeps timed results observable so the work is not elided.
volatile float g_sink = 0.0f;

struct MethodRun {
  DenseMatrix output;
  OpCounts ops;
  std::function<DenseMatrix()> timed;
  std::size_t k = 0, u = 0;
  double lambda = 0.0;
};

MethodRun run_maddness(const BenchConfig& cfg, const SyntheticTask& task, std::size_t c,
                       bool optimize) {
  MaddnessConfig mc;
  mc.codebooks = c;
  mc.lambda = optimize ? cfg.lambda : 0.0;
  mc.aggregation = {cfg.block_size, AggregationMode::Averaging};
  auto model = std::make_shared<MaddnessModel>(train(task.train, mc));
  model->set_operator(task.op);
  const ApplyOptions opts{cfg.debug_float_tables};
  MethodRun run;
  run.output = model->apply(task.test, opts, &run.ops);
  run.timed = [model, opts, &task] { return model->apply(task.test, opts); };
  run.k = kLeaves;
  run.u = cfg.block_size;
  run.lambda = mc.lambda;
  return run;
}

MethodRun run_pq(const BenchConfig& cfg, const SyntheticTask& task, std::size_t c) {
  auto P = std::make_shared<PrototypeMatrix>(pq_train(task.train, c, kLeaves, cfg.seed));
  auto real = std::make_shared<RealTables>(build_tables(task.op, *P));
  auto quant = std::make_shared<QuantizedTables>(quantize_tables(*real));
  const bool debug = cfg.debug_float_tables;
  auto apply = [P, real, quant, debug, &task](OpCounts* counts) {
    const auto codes = pq_encode(task.test, *P, counts);
    if (debug) return aggregate_real(codes, *real, counts);
    const AggregationConfig exact{1, AggregationMode::ExactUpcast};
    return dequantize(aggregate(codes, *quant, exact, counts), *quant);
  };
  MethodRun run;
  run.output = apply(&run.ops);
  run.timed = [apply] { return apply(nullptr); };
  run.k = kLeaves;
  run.u = 1;
  return run;
}

MethodRun run_pca(const BenchConfig& cfg, const SyntheticTask& task, std::size_t c) {
  auto model = std::make_shared<PcaModel>(pca_baseline_train(task.train, c, 200, cfg.seed));
  model->set_operator(task.op);
  MethodRun run;
  run.output = model->apply(task.test, &run.ops);
  run.timed = [model, &task] { return model->apply(task.test); };
  return run;
}

BenchmarkRecord base_record(const BenchConfig& cfg, const std::string& method, std::size_t c,
                            const SyntheticTask& task) {
  BenchmarkRecord r;
  r.method = method;
  r.task = task_name(cfg.task);
  r.n = task.test.rows();
  r.d = task.test.cols();
  r.m = task.op.cols();
  r.c = c;
  r.seed = cfg.seed;
  return r;
}

void fill_metrics(BenchmarkRecord& r, const BenchConfig& cfg, const MethodRun& run,
                  const DenseMatrix& exact) {
  r.k = run.k;
  r.u = run.u;
  r.lambda = run.lambda;
  r.ops = run.ops;
  r.nmse = nmse(run.output, exact);
  if (cfg.task == TaskKind::GaussianMixtureClassifier) {
    r.argmax_agreement = argmax_agreement(run.output, exact);
  }
  // Metrics above are fixed before any timing happens.
  r.best_time_ns = time_best_of(
      [&] {
        const auto out = run.timed();
        if (!out.empty()) g_sink = out.data()[0];
      },
      cfg.trials, cfg.reps);
}

}  // namespace

double argmax_agreement(const DenseMatrix& approx, const DenseMatrix& exact) {
  if (approx.rows() != exact.rows() || approx.cols() != exact.cols()) {
    throw std::invalid_argument("argmax_agreement: shape mismatch");
  }
  if (approx.rows() == 0) throw std::invalid_argument("argmax_agreement: no rows");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < approx.rows(); ++i) {
    if (argmax_row(approx.row(i)) == argmax_row(exact.row(i))) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(approx.rows());
}

double shuffled_control_agreement(const DenseMatrix& approx, const DenseMatrix& exact,
                                  std::uint64_t seed) {
  std::vector<std::size_t> perm(approx.rows());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
  }
  DenseMatrix shuffled(approx.rows(), approx.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    auto src = approx.row(perm[i]);
    std::copy(src.begin(), src.end(), shuffled.row(i).begin());
  }
  return argmax_agreement(shuffled, exact);
}

BenchmarkReport run_benchmark(const BenchConfig& cfg) {
  validate(cfg);
  BenchmarkReport report;
  report.config = cfg;
  const SyntheticTask task = generate_task(task_spec(cfg));
  OpCounts exact_ops;
  const DenseMatrix exact = matmul(task.test, task.op, &exact_ops);

  for (const auto& method : cfg.methods) {
    if (method == "exact") {
      auto r = base_record(cfg, method, 0, task);
      MethodRun run;
      run.output = exact;
      run.ops = exact_ops;
      run.timed = [&task] { return matmul(task.test, task.op); };
      fill_metrics(r, cfg, run, exact);
      report.records.push_back(std::move(r));
      continue;
    }
    for (auto c : cfg.c_list) {
      auto r = base_record(cfg, method, c, task);
      try {
        if (c == 0 || c > cfg.d) {
          throw std::invalid_argument("infeasible config: need 1 <= C <= D");
        }
        MethodRun run;
        if (method == "maddness") {
          run = run_maddness(cfg, task, c, true);
        } else if (method == "maddness-pq") {
          run = run_maddness(cfg, task, c, false);
        } else if (method == "pq") {
          run = run_pq(cfg, task, c);
        } else {
          run = run_pca(cfg, task, c);
        }
        fill_metrics(r, cfg, run, exact);
      } catch (const std::exception& e) {
        r.error = e.what();
        r.nmse.reset();
        r.argmax_agreement.reset();
        r.best_time_ns.clear();
        r.ops = {};
      }
      report.records.push_back(std::move(r));
    }
  }
  return report;
}

// ---------------------------------------------------------------- CSV

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

template <class T>
T parse_number(const std::string& s) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw std::invalid_argument("parse_csv: bad number '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("parse_csv: bad real '" + s + "'");
  return v;
}

}  // namespace

const std::string& csv_header() {
  static const std::string h =
      "method,task,n,d,m,c,k,u,lambda,seed,nmse,argmax_agreement,best_time_ns,"
      "multiplies,comparisons,lookups,error";
  return h;
}

std::string to_csv(const BenchmarkReport& report) {
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const auto& r : report.records) {
    std::string times;
    for (std::size_t i = 0; i < r.best_time_ns.size(); ++i) {
      if (i) times += ';';
      times += std::to_string(r.best_time_ns[i]);
    }
    os << csv_quote(r.method) << ',' << csv_quote(r.task) << ',' << r.n << ',' << r.d << ','
       << r.m << ',' << r.c << ',' << r.k << ',' << r.u << ',' << fmt_double(r.lambda) << ','
       << r.seed << ',' << (r.nmse ? fmt_double(*r.nmse) : "") << ','
       << (r.argmax_agreement ? fmt_double(*r.argmax_agreement) : "") << ',' << times << ','
       << r.ops.multiplies << ',' << r.ops.comparisons << ',' << r.ops.lookups << ','
       << csv_quote(r.error) << '\n';
  }
  return os.str();
}

std::vector<BenchmarkRecord> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != csv_header()) {
    throw std::invalid_argument("parse_csv: missing or unexpected header");
  }
  std::vector<BenchmarkRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 17) throw std::invalid_argument("parse_csv: expected 17 fields");
    BenchmarkRecord r;
    r.method = f[0];
    r.task = f[1];
    r.n = parse_number<std::size_t>(f[2]);
    r.d = parse_number<std::size_t>(f[3]);
    r.m = parse_number<std::size_t>(f[4]);
    r.c = parse_number<std::size_t>(f[5]);
    r.k = parse_number<std::size_t>(f[6]);
    r.u = parse_number<std::size_t>(f[7]);
    r.lambda = parse_double(f[8]);
    r.seed = parse_number<std::uint64_t>(f[9]);
    if (!f[10].empty()) r.nmse = parse_double(f[10]);
    if (!f[11].empty()) r.argmax_agreement = parse_double(f[11]);
    std::istringstream ts(f[12]);
    std::string t;
    while (std::getline(ts, t, ';'))
      if (!t.empty()) r.best_time_ns.push_back(parse_number<std::int64_t>(t));
    r.ops.multiplies = parse_number<std::uint64_t>(f[13]);
    r.ops.comparisons = parse_number<std::uint64_t>(f[14]);
    r.ops.lookups = parse_number<std::uint64_t>(f[15]);
    r.error = f[16];
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------- JSON

nlohmann::json config_to_json(const BenchConfig& cfg) {
  return {{"task", task_name(cfg.task)},
          {"n", cfg.n},
          {"d", cfg.d},
          {"m", cfg.m},
          {"rank", cfg.rank},
          {"noise", cfg.noise},
          {"classes", cfg.classes},
          {"methods", cfg.methods},
          {"c_list", cfg.c_list},
          {"seed", cfg.seed},
          {"trials", cfg.trials},
          {"reps", cfg.reps},
          {"lambda", cfg.lambda},
          {"u", cfg.block_size},
          {"debug_float_tables", cfg.debug_float_tables}};
}

BenchConfig config_from_json(const nlohmann::json& j, BenchConfig cfg) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::vector<std::string> keys{
      "task", "n",    "d",    "m",      "rank", "noise", "classes", "methods",
      "c_list", "seed", "trials", "reps", "lambda", "u", "debug_float_tables"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (j.contains("task")) cfg.task = parse_task(j.at("task").get<std::string>());
  if (j.contains("n")) cfg.n = j.at("n").get<std::size_t>();
  if (j.contains("d")) cfg.d = j.at("d").get<std::size_t>();
  if (j.contains("m")) cfg.m = j.at("m").get<std::size_t>();
  if (j.contains("rank")) cfg.rank = j.at("rank").get<std::size_t>();
  if (j.contains("noise")) cfg.noise = j.at("noise").get<double>();
  if (j.contains("classes")) cfg.classes = j.at("classes").get<std::size_t>();
  if (j.contains("methods")) cfg.methods = j.at("methods").get<std::vector<std::string>>();
  if (j.contains("c_list")) cfg.c_list = j.at("c_list").get<std::vector<std::size_t>>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("trials")) cfg.trials = j.at("trials").get<std::size_t>();
  if (j.contains("reps")) cfg.reps = j.at("reps").get<std::size_t>();
  if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
  if (j.contains("u")) cfg.block_size = j.at("u").get<std::size_t>();
  if (j.contains("debug_float_tables")) {
    cfg.debug_float_tables = j.at("debug_float_tables").get<bool>();
  }
  return cfg;
}

nlohmann::json to_json(const BenchmarkReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    records.push_back({{"method", r.method},
                       {"task", r.task},
                       {"n", r.n},
                       {"d", r.d},
                       {"m", r.m},
                       {"c", r.c},
                       {"k", r.k},
                       {"u", r.u},
                       {"lambda", r.lambda},
                       {"seed", r.seed},
                       {"nmse", r.nmse ? nlohmann::json(*r.nmse) : nlohmann::json(nullptr)},
                       {"argmax_agreement", r.argmax_agreement
                                                ? nlohmann::json(*r.argmax_agreement)
                                                : nlohmann::json(nullptr)},
                       {"best_time_ns", r.best_time_ns},
                       {"multiplies", r.ops.multiplies},
                       {"comparisons", r.ops.comparisons},
                       {"lookups", r.ops.lookups},
                       {"error", r.error}});
  }
  nlohmann::json env = {{"compiler", __VERSION__},
                        {"cxx_standard", __cplusplus},
                        {"threads", 1},
                        {"timer", "std::chrono::steady_clock"},
                        {"timing", "best of reps per trial"}};
  return {{"environment", env}, {"config", config_to_json(report.config)}, {"records", records}};
}

std::vector<BenchmarkRecord> records_from_json(const nlohmann::json& j) {
  std::vector<BenchmarkRecord> out;
  for (const auto& e : j.at("records")) {
    BenchmarkRecord r;
    r.method = e.at("method").get<std::string>();
    r.task = e.at("task").get<std::string>();
    r.n = e.at("n").get<std::size_t>();
    r.d = e.at("d").get<std::size_t>();
    r.m = e.at("m").get<std::size_t>();
    r.c = e.at("c").get<std::size_t>();
    r.k = e.at("k").get<std::size_t>();
    r.u = e.at("u").get<std::size_t>();
    r.lambda = e.at("lambda").get<double>();
    r.seed = e.at("seed").get<std::uint64_t>();
    if (!e.at("nmse").is_null()) r.nmse = e.at("nmse").get<double>();
    if (!e.at("argmax_agreement").is_null()) {
      r.argmax_agreement = e.at("argmax_agreement").get<double>();
    }
    r.best_time_ns = e.at("best_time_ns").get<std::vector<std::int64_t>>();
    r.ops.multiplies = e.at("multiplies").get<std::uint64_t>();
    r.ops.comparisons = e.at("comparisons").get<std::uint64_t>();
    r.ops.lookups = e.at("lookups").get<std::uint64_t>();
    r.error = e.at("error").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace maddness::bench
