#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <cstdint>
#include <optional>

#include "cdepth/canonical_json.hpp"
#include "cdepth/datasets.hpp"
#include "cdepth/errors.hpp"
#include "cdepth/metrics.hpp"
#include "cdepth/pipeline.hpp"
#include "cdepth/probe.hpp"
#include "cdepth/reps_io.hpp"
#include "cdepth/synth.hpp"

namespace py = pybind11;
using namespace cdepth;

namespace {

using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

DesignMatrix design_from(const F64Array& x) {
  if (x.ndim() != 2) throw ShapeMismatch("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(x.shape(0));
  const auto cols = static_cast<std::size_t>(x.shape(1));
  return DesignMatrix(rows, cols, std::vector<double>(x.data(), x.data() + rows * cols));
}

std::vector<double> vec_from(const F64Array& a) {
  if (a.ndim() != 1) throw ShapeMismatch("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

std::vector<std::uint8_t> labels_from(const U8Array& a) {
  if (a.ndim() != 1) throw ShapeMismatch("expected a 1-D label array");
  return {a.data(), a.data() + a.size()};
}

F32Array to_numpy(const RepresentationMatrix& m) {
  F32Array out({static_cast<py::ssize_t>(m.n), static_cast<py::ssize_t>(m.d_model)});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

U8Array to_numpy(const LabelVector& y) {
  U8Array out(static_cast<py::ssize_t>(y.size()));
  std::copy(y.labels.begin(), y.labels.end(), out.mutable_data());
  return out;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::object fraction_or_none(const std::optional<LayerFraction>& f) {
  if (!f) return py::none();
  return py::float_(f->value());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Layer-wise linear probing and concept-depth metrics";

  // Translators run newest-first, so the base class goes in first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  // ---- reps_io ----
  m.def("write_layer", [](const F32Array& a, const std::filesystem::path& path) {
    if (a.ndim() != 2) throw ShapeMismatch("layer must be a 2-D array");
    RepresentationMatrix mat;
    mat.n = static_cast<std::size_t>(a.shape(0));
    mat.d_model = static_cast<std::size_t>(a.shape(1));
    mat.data.assign(a.data(), a.data() + a.size());
    write_layer(mat, path);
  }, py::arg("matrix"), py::arg("path"));
  m.def("read_layer", [](const std::filesystem::path& path) { return to_numpy(read_layer(path)); },
        py::arg("path"));
  m.def("write_labels", [](const U8Array& a, const std::filesystem::path& path) {
    write_labels(LabelVector{labels_from(a)}, path);
  }, py::arg("labels"), py::arg("path"));
  m.def("read_labels", [](const std::filesystem::path& path) { return to_numpy(read_labels(path)); },
        py::arg("path"));
  m.def("load_run", [](const std::filesystem::path& dir) {
    const auto run = load_run(dir);
    py::list layers;
    for (const auto& l : run.layers) layers.append(to_numpy(l));
    py::dict out;
    out["manifest"] = json_to_py(manifest_to_json(run.manifest));
    out["layers"] = layers;
    out["labels"] = to_numpy(run.labels);
    return out;
  }, py::arg("run_dir"));
  m.def("known_layer_count", &known_layer_count, py::arg("model_name"));

  // ---- probe ----
  py::class_<ProbeConfig>(m, "ProbeConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &ProbeConfig::lambda)
      .def_readwrite("max_iters", &ProbeConfig::max_iters)
      .def_readwrite("grad_tol", &ProbeConfig::grad_tol)
      .def_readwrite("standardize", &ProbeConfig::standardize)
      .def_readwrite("split_seed", &ProbeConfig::split_seed)
      .def_readwrite("train_fraction", &ProbeConfig::train_fraction);

  py::class_<ProbeModel>(m, "ProbeModel")
      .def_readonly("theta", &ProbeModel::theta)
      .def_readonly("intercept", &ProbeModel::intercept)
      .def_readonly("lambda_", &ProbeModel::lambda)
      .def_readonly("feature_means", &ProbeModel::feature_means)
      .def_readonly("feature_stds", &ProbeModel::feature_stds)
      .def_readonly("converged", &ProbeModel::converged)
      .def_readonly("iters_used", &ProbeModel::iters_used)
      .def_readonly("final_grad_norm", &ProbeModel::final_grad_norm)
      .def_readonly("final_objective", &ProbeModel::final_objective)
      .def("to_json", [](const ProbeModel& p) { return canonical_dump(probe_to_json(p)); });

  m.def("sigmoid", &sigmoid, py::arg("t"));
  m.def("objective", [](const F64Array& theta, double b, const F64Array& x, const U8Array& y, double lam) {
    return objective(vec_from(theta), b, design_from(x), labels_from(y), lam);
  }, py::arg("theta"), py::arg("intercept"), py::arg("x"), py::arg("y"), py::arg("lambda_"));
  m.def("gradient", [](const F64Array& theta, double b, const F64Array& x, const U8Array& y, double lam) {
    auto g = gradient(vec_from(theta), b, design_from(x), labels_from(y), lam);
    return py::make_tuple(F64Array(static_cast<py::ssize_t>(g.theta.size()), g.theta.data()), g.intercept);
  }, py::arg("theta"), py::arg("intercept"), py::arg("x"), py::arg("y"), py::arg("lambda_"));
  m.def("split", [](std::size_t n, std::uint64_t seed, double train_fraction) {
    ProbeConfig c;
    c.split_seed = seed;
    c.train_fraction = train_fraction;
    auto s = split(n, c);
    return py::make_tuple(s.train, s.test);
  }, py::arg("n"), py::arg("seed") = 42, py::arg("train_fraction") = 0.8);
  m.def("fit", [](const F64Array& x, const U8Array& y, const ProbeConfig& config) {
    return fit(design_from(x), labels_from(y), config);
  }, py::arg("x"), py::arg("y"), py::arg("config") = ProbeConfig{});
  m.def("predict", [](const ProbeModel& model, const F64Array& x) {
    auto p = predict(model, design_from(x));
    return py::make_tuple(U8Array(static_cast<py::ssize_t>(p.z.size()), p.z.data()),
                          F64Array(static_cast<py::ssize_t>(p.scores.size()), p.scores.data()));
  }, py::arg("model"), py::arg("x"));

  // ---- metrics ----
  m.def("accuracy", [](const U8Array& z, const U8Array& y) { return accuracy(labels_from(z), labels_from(y)); });
  m.def("f1_score", [](const U8Array& z, const U8Array& y) { return f1_score(labels_from(z), labels_from(y)); });
  m.def("auc", [](const F64Array& s, const U8Array& y) { return auc(vec_from(s), labels_from(y)); });
  m.def("variation_rate", [](std::vector<double> a) { return variation_rate({std::move(a)}); });
  m.def("jumping_point", [](std::vector<double> a) { return fraction_or_none(jumping_point({std::move(a)})); });
  m.def("converging_point", [](std::vector<double> a) { return fraction_or_none(converging_point({std::move(a)})); });
  m.def("depth_metrics", [](std::vector<double> a) {
    return json_to_py(depth_to_json(depth_metrics({std::move(a)})));
  });

  // ---- datasets ----
  m.def("dataset_names", [] {
    std::vector<std::string> names;
    for (const auto& t : prompt_templates()) names.push_back(t.dataset_name);
    return names;
  });
  m.def("render_prompt", py::overload_cast<std::string_view, std::string_view>(&render_prompt),
        py::arg("dataset"), py::arg("sample"));
  m.def("perturb", [](const std::string& prompt, double draw, const std::string& s1, const std::string& s2) {
    PerturbationSpec spec;
    spec.s1 = s1;
    spec.s2 = s2;
    spec.validate();
    return perturb(prompt, spec, draw);
  }, py::arg("prompt"), py::arg("draw"), py::arg("s1") = "aaa ", py::arg("s2") = "bbb ");
  m.def("perturb_prompts", [](const std::vector<std::string>& prompts, std::uint64_t seed,
                              const std::string& s1, const std::string& s2) {
    PerturbationSpec spec;
    spec.s1 = s1;
    spec.s2 = s2;
    spec.seed = seed;
    Perturber noise(spec);
    std::vector<std::string> out;
    out.reserve(prompts.size());
    for (const auto& p : prompts) out.push_back(noise(p));
    return out;
  }, py::arg("prompts"), py::arg("seed"), py::arg("s1") = "aaa ", py::arg("s2") = "bbb ");
  m.def("anchor_accuracies", [](const std::vector<std::tuple<std::string, std::string, std::string, int, int>>& rows) {
    std::vector<JudgmentRecord> records;
    for (const auto& [model, dataset, id, pred, gold] : rows) {
      if ((pred != 0 && pred != 1) || (gold != 0 && gold != 1)) throw ValidationError("judgments must be 0 or 1");
      records.push_back({model, dataset, id, static_cast<std::uint8_t>(pred), static_cast<std::uint8_t>(gold)});
    }
    const auto r = anchor_accuracies(records);
    py::dict per_model;
    for (const auto& [key, acc] : r.per_model_acc) per_model[py::make_tuple(key.first, key.second)] = acc;
    py::dict out;
    out["per_model_acc"] = per_model;
    out["avg_acc"] = r.avg_acc;
    out["order"] = r.order;
    return out;
  }, py::arg("records"));

  // ---- synth ----
  m.def("bayes_accuracy", &bayes_accuracy, py::arg("mu"), py::arg("sigma"));
  m.def("synth_generate", [](const std::string& profile_json, const std::filesystem::path& out_dir) {
    generate(profile_from_json(nlohmann::json::parse(profile_json)), out_dir);
  }, py::arg("profile_json"), py::arg("out_dir"));

  // ---- pipeline ----
  m.def("run_pipeline_json", [](const std::filesystem::path& run_dir, const ProbeConfig& probe,
                                std::size_t parallelism, bool per_layer_split, const std::string& format) {
    PipelineConfig config;
    config.probe = probe;
    config.parallelism = parallelism;
    config.per_layer_split = per_layer_split;
    const auto fmt = parse_report_format(format);
    RunReport report;
    {
      py::gil_scoped_release release;
      report = run_pipeline(run_dir, config);
    }
    return render_report(report, fmt);
  }, py::arg("run_dir"), py::arg("config") = ProbeConfig{}, py::arg("parallelism") = 1,
     py::arg("per_layer_split") = false, py::arg("format") = "json");
}
