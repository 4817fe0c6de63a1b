#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "maddness/bench.hpp"
#include "maddness/pipeline.hpp"
#include "maddness/pq.hpp"

namespace py = pybind11;
using namespace maddness;

namespace {

using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

DenseMatrix to_matrix(const F32Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  const auto* p = a.data();
  return DenseMatrix(a.shape(0), a.shape(1), std::vector<float>(p, p + a.size()));
}

py::array_t<float> to_numpy(const DenseMatrix& m) {
  py::array_t<float> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::dict ops_dict(const OpCounts& o) {
  py::dict d;
  d["multiplies"] = o.multiplies;
  d["comparisons"] = o.comparisons;
  d["lookups"] = o.lookups;
  return d;
}

AggregationMode parse_mode(const std::string& s) {
  if (s == "averaging") return AggregationMode::Averaging;
  if (s == "exact") return AggregationMode::ExactUpcast;
  throw std::invalid_argument("mode must be 'averaging' or 'exact'");
}

PrototypeMatrix prototypes_from(const F32Array& p, std::size_t codebooks) {
  PrototypeMatrix out;
  out.P = to_matrix(p);
  out.C = codebooks;
  out.K = kLeaves;
  out.subspaces = partition_subspaces(out.P.cols(), codebooks);
  return out;
}

}  // namespace

PYBIND11_MODULE(_maddness, m) {
  m.doc() = "Multiply-free approximate matrix products via learned hashing";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<UnsupportedVersionError>(m, "UnsupportedVersionError", PyExc_ValueError);

  m.def("nmse", [](const F32Array& approx, const F32Array& exact) {
    return nmse(to_matrix(approx), to_matrix(exact));
  });

  m.def(
      "generate_task",
      [](const std::string& kind, std::size_t n, std::size_t d, std::size_t m_, std::size_t rank,
         double noise, std::size_t classes, std::uint64_t seed) {
        SyntheticTaskSpec spec;
        spec.kind = bench::parse_task(kind);
        spec.n = n;
        spec.d = d;
        spec.m = m_;
        spec.rank = rank;
        spec.noise_scale = noise;
        spec.class_count = classes;
        spec.seed = seed;
        auto t = generate_task(spec);
        py::dict out;
        out["train"] = to_numpy(t.train);
        out["test"] = to_numpy(t.test);
        out["op"] = to_numpy(t.op);
        if (t.train_labels) out["train_labels"] = *t.train_labels;
        if (t.test_labels) out["test_labels"] = *t.test_labels;
        return out;
      },
      py::arg("kind") = "low-rank", py::arg("n") = 1024, py::arg("d") = 32, py::arg("m") = 8,
      py::arg("rank") = 4, py::arg("noise") = 0.1, py::arg("classes") = 10, py::arg("seed") = 0);

  m.def(
      "optimal_split_threshold",
      [](const F32Array& x, std::size_t j) {
        auto mat = to_matrix(x);
        std::vector<std::uint32_t> ids(mat.rows());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
        auto r = optimal_split_threshold(Bucket(ids, mat), j, mat);
        return py::make_tuple(r.threshold, r.loss);
      },
      py::arg("x"), py::arg("j"));

  m.def("mean_pair", [](std::uint8_t a, std::uint8_t b) { return mean_pair_u8(a, b); });
  m.def("estimate_block_sum", [](const std::vector<std::uint8_t>& v) {
    return estimate_block_sum(v);
  });
  m.def("bias_correction", &bias_correction, py::arg("codebooks"), py::arg("block_size"));

  m.def("hypothesis_complexity", &hypothesis_complexity, py::arg("codebooks"), py::arg("dims"),
        py::arg("delta"));
  m.def(
      "generalization_bound",
      [](std::size_t codebooks, std::size_t dims, std::size_t n, double delta, double sigma_a,
         double b_norm, double lambda, double train_loss) {
        return generalization_bound(
            {codebooks, dims, n, delta, sigma_a, b_norm, lambda, train_loss});
      },
      py::arg("codebooks"), py::arg("dims"), py::arg("n"), py::arg("delta"), py::arg("sigma_a"),
      py::arg("b_norm"), py::arg("lambda_") = 1.0, py::arg("train_loss") = 0.0);

  py::class_<MaddnessModel>(m, "Model")
      .def_property_readonly("codebooks", &MaddnessModel::codebooks)
      .def_property_readonly("input_dims", &MaddnessModel::input_dims)
      .def_property_readonly("has_operator", &MaddnessModel::has_operator)
      .def_property_readonly("prototypes",
                             [](const MaddnessModel& self) { return to_numpy(self.prototypes().P); })
      .def("set_operator",
           [](MaddnessModel& self, const F32Array& B) { self.set_operator(to_matrix(B)); })
      .def(
          "encode",
          [](const MaddnessModel& self, const F32Array& A, bool debug) {
            auto codes = self.encode(to_matrix(A), {debug});
            py::array_t<std::uint8_t> out({codes.rows, codes.codebooks});
            std::copy(codes.data.begin(), codes.data.end(), out.mutable_data());
            return out;
          },
          py::arg("a"), py::arg("debug_float_tables") = false)
      .def(
          "apply",
          [](const MaddnessModel& self, const F32Array& A, bool debug) {
            return to_numpy(self.apply(to_matrix(A), {debug}));
          },
          py::arg("a"), py::arg("debug_float_tables") = false)
      .def(
          "apply_counted",
          [](const MaddnessModel& self, const F32Array& A, bool debug) {
            OpCounts ops;
            auto out = self.apply(to_matrix(A), {debug}, &ops);
            return py::make_tuple(to_numpy(out), ops_dict(ops));
          },
          py::arg("a"), py::arg("debug_float_tables") = false)
      .def("apply_estimates",
           [](const MaddnessModel& self, const F32Array& A) {
             auto r = self.apply_estimates(to_matrix(A));
             py::array_t<std::int64_t> est({r.rows, r.cols});
             std::copy(r.estimates.begin(), r.estimates.end(), est.mutable_data());
             return py::make_tuple(est, r.debias);
           })
      .def("serialize",
           [](const MaddnessModel& self) {
             auto b = self.serialize();
             return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
           })
      .def_static("deserialize", [](const py::bytes& data) {
        std::string_view s = data;
        return MaddnessModel::deserialize(
            {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
      });

  m.def(
      "train",
      [](const F32Array& x, std::size_t codebooks, double lambda, std::size_t block_size,
         const std::string& mode) {
        MaddnessConfig cfg;
        cfg.codebooks = codebooks;
        cfg.lambda = lambda;
        cfg.aggregation = {block_size, parse_mode(mode)};
        return train(to_matrix(x), cfg);
      },
      py::arg("x"), py::arg("codebooks") = 16, py::arg("lambda_") = 1.0,
      py::arg("block_size") = 16, py::arg("mode") = "averaging");

  m.def(
      "pq_train",
      [](const F32Array& x, std::size_t codebooks, std::uint64_t seed, std::size_t iters) {
        return to_numpy(pq_train(to_matrix(x), codebooks, kLeaves, seed, iters).P);
      },
      py::arg("x"), py::arg("codebooks"), py::arg("seed") = 0, py::arg("iters") = 25);
  m.def(
      "pq_apply",
      [](const F32Array& A, const F32Array& B, const F32Array& prototypes, std::size_t codebooks,
         bool quantize) {
        return to_numpy(
            pq_apply(to_matrix(A), to_matrix(B), prototypes_from(prototypes, codebooks), quantize));
      },
      py::arg("a"), py::arg("b"), py::arg("prototypes"), py::arg("codebooks"),
      py::arg("quantize") = false);

  m.def(
      "run_benchmark",
      [](const std::string& config_json) {
        auto cfg = bench::config_from_json(nlohmann::json::parse(config_json));
        return bench::to_json(bench::run_benchmark(cfg)).dump();
      },
      py::arg("config_json"), "Run a benchmark from a JSON config; returns the JSON report.");
}
