#include "cdepth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "cdepth/canonical_json.hpp"
#include "cdepth/errors.hpp"

namespace cdepth {

namespace {

constexpr std::array<const char*, 6> kSummaryLabels = {"first", "25%", "50%", "67%", "83%", "last"};
constexpr std::array<const char*, 6> kSummaryTableLabels = {"1st-layer", "25%-layer", "50%-layer",
                                                            "67%-layer", "83%-layer", "last-layer"};

struct LayerOutcome {
  LayerEval eval;
  ProbeDiagnostics diag;
  ProbeModel model;
};

LayerOutcome evaluate_layer(const RepresentationMatrix& layer, const LabelVector& labels,
                            const SplitIndex& split_index, const ProbeConfig& probe_config) {
  const auto x_train = select_rows(layer, split_index.train);
  const auto y_train = select_labels(labels, split_index.train);
  const auto x_test = select_rows(layer, split_index.test);
  const auto y_test = select_labels(labels, split_index.test);

  LayerOutcome out;
  out.model = fit(x_train, y_train, probe_config);
  const auto pred = predict(out.model, x_test);
  out.eval.layer_index = layer.layer_index;
  out.eval.acc = accuracy(pred.z, y_test);
  out.eval.f1 = f1_score(pred.z, y_test);
  out.eval.auc = auc(pred.scores, y_test);
  out.diag = {out.model.converged, out.model.iters_used, out.model.final_grad_norm,
              out.model.final_objective};
  return out;
}

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

nlohmann::json fraction_json(const std::optional<LayerFraction>& f) {
  if (!f) return nullptr;
  return {{"index", f->index}, {"layers", f->layers}, {"fraction", f->value()}};
}

std::string render_csv(const RunReport& r) {
  std::string out = "layer,acc,f1,auc\n";
  for (const auto& e : r.layers) {
    out += std::to_string(e.layer_index) + "," + format_double17(e.acc) + "," +
           format_double17(e.f1) + "," + format_double17(e.auc) + "\n";
  }
  auto frac = [](const std::optional<LayerFraction>& f) {
    return f ? format_double17(f->value()) : std::string("none");
  };
  out += "# jumping_point=" + frac(r.depth.jumping_point) + "\n";
  out += "# converging_point=" + frac(r.depth.converging_point) + "\n";
  out += "# peak_acc=" + format_double17(r.depth.peak_acc) + "\n";
  out += "# peak_layer=" + std::to_string(r.depth.peak_layer) + "\n";
  out += std::string("# comprehended=") + (r.depth.comprehended ? "true" : "false") + "\n";
  return out;
}

std::string render_markdown(const RunReport& r) {
  auto frac = [](const std::optional<LayerFraction>& f) {
    if (!f) return std::string("none");
    return fmt(f->value(), "%.4f") + " (layer " + std::to_string(f->index) + " of " +
           std::to_string(f->layers) + ")";
  };
  std::ostringstream out;
  out << "# " << r.manifest.model_name << " (" << r.manifest.num_layers << " Layers) on "
      << r.manifest.dataset_name << "\n\n";
  out << "- jumping point: " << frac(r.depth.jumping_point) << "\n";
  out << "- converging point: " << frac(r.depth.converging_point) << "\n";
  out << "- peak accuracy: " << fmt(r.depth.peak_acc, "%.3f") << " at layer " << r.depth.peak_layer
      << (r.depth.comprehended ? " (comprehended)" : " (below 0.7)") << "\n\n";
  out << "| Depth | Layer | ACC | AUC | F1 |\n";
  out << "|---|---|---|---|---|\n";
  for (std::size_t k = 0; k < r.summary.size(); ++k) {
    const auto& row = r.summary[k];
    out << "| " << kSummaryTableLabels[k] << " | " << row.layer_index << " | "
        << fmt(row.eval.acc, "%.3f") << " | " << fmt(row.eval.auc, "%.3f") << " | "
        << fmt(row.eval.f1, "%.3f") << " |\n";
  }
  return out.str();
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "md") return ReportFormat::Markdown;
  throw ValidationError("unknown report format '" + std::string(name) + "' (json, csv, md)");
}

void PipelineConfig::validate() const {
  probe.validate();
  if (parallelism < 1) throw ValidationError("parallelism must be >= 1");
}

std::size_t default_parallelism() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::array<std::size_t, 6> summary_layers(std::size_t d) {
  if (d < 1) throw ValidationError("summary needs at least one layer");
  std::array<std::size_t, 6> out{};
  for (std::size_t k = 0; k < kSummaryFractions.size(); ++k) {
    out[k] = static_cast<std::size_t>(std::llround(kSummaryFractions[k] * static_cast<double>(d - 1)));
  }
  return out;
}

RunReport run_pipeline(const Run& run, const PipelineConfig& config,
                       std::vector<ProbeModel>* probes_out) {
  config.validate();
  const std::size_t d = run.layers.size();
  if (d < 2) throw ValidationError("pipeline needs at least 2 layers");
  const std::size_t n = run.labels.size();
  for (const auto& layer : run.layers) {
    if (layer.n != n) throw ShapeMismatch("layer row count differs from label count");
  }

  const SplitIndex shared = split(n, config.probe);
  std::vector<LayerOutcome> outcomes(d);
  std::vector<std::exception_ptr> errors(d);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < d; i = next.fetch_add(1)) {
      try {
        if (config.per_layer_split) {
          ProbeConfig layer_config = config.probe;
          layer_config.split_seed += i;
          outcomes[i] = evaluate_layer(run.layers[i], run.labels, split(n, layer_config), config.probe);
        } else {
          outcomes[i] = evaluate_layer(run.layers[i], run.labels, shared, config.probe);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::min(config.parallelism, d);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  for (std::size_t i = 0; i < d; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const IoError& e) {
      throw PartialFailure(i, e.what(), true);
    } catch (const std::exception& e) {
      throw PartialFailure(i, e.what(), false);
    }
  }

  RunReport report;
  report.manifest = run.manifest;
  report.config = config;
  report.n_train = shared.train.size();
  report.n_test = shared.test.size();
  LayerAccuracySeries series;
  for (std::size_t i = 0; i < d; ++i) {
    outcomes[i].eval.layer_index = i;
    report.layers.push_back(outcomes[i].eval);
    report.diagnostics.push_back(outcomes[i].diag);
    series.alpha.push_back(outcomes[i].eval.acc);
  }
  report.depth = depth_metrics(series);

  const auto picks = summary_layers(d);
  for (std::size_t k = 0; k < picks.size(); ++k) {
    report.summary.push_back({kSummaryLabels[k], kSummaryFractions[k], picks[k], report.layers[picks[k]]});
  }

  if (probes_out) {
    probes_out->clear();
    for (auto& o : outcomes) probes_out->push_back(std::move(o.model));
  }
  return report;
}

RunReport run_pipeline(const std::filesystem::path& run_dir, const PipelineConfig& config,
                       std::vector<ProbeModel>* probes_out) {
  return run_pipeline(load_run(run_dir), config, probes_out);
}

nlohmann::json depth_to_json(const DepthMetrics& depth) {
  return {{"beta", depth.beta},
          {"jumping_point", fraction_json(depth.jumping_point)},
          {"converging_point", fraction_json(depth.converging_point)},
          {"peak_acc", depth.peak_acc},
          {"peak_layer", depth.peak_layer},
          {"comprehended", depth.comprehended}};
}

nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t i = 0; i < r.layers.size(); ++i) {
    const auto& e = r.layers[i];
    const auto& g = r.diagnostics[i];
    layers.push_back({{"layer", e.layer_index},
                      {"acc", e.acc},
                      {"f1", e.f1},
                      {"auc", e.auc},
                      {"probe",
                       {{"converged", g.converged},
                        {"iters_used", g.iters_used},
                        {"final_grad_norm", g.final_grad_norm},
                        {"final_objective", g.final_objective}}}});
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : r.summary) {
    summary.push_back({{"depth", s.label},
                       {"fraction", s.fraction},
                       {"layer", s.layer_index},
                       {"acc", s.eval.acc},
                       {"f1", s.eval.f1},
                       {"auc", s.eval.auc}});
  }
  // Parallelism is deliberately absent: it must not change the bytes.
  const auto& p = r.config.probe;
  nlohmann::json config = {{"lambda", p.lambda},
                           {"max_iters", p.max_iters},
                           {"grad_tol", p.grad_tol},
                           {"standardize", p.standardize},
                           {"split_seed", p.split_seed},
                           {"train_fraction", p.train_fraction},
                           {"per_layer_split", r.config.per_layer_split}};
  return {{"format_version", 1},
          {"manifest", manifest_to_json(r.manifest)},
          {"config", config},
          {"split", {{"n_train", r.n_train}, {"n_test", r.n_test}}},
          {"layers", layers},
          {"depth", depth_to_json(r.depth)},
          {"summary", summary}};
}

std::string render_report(const RunReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json:
      return canonical_dump(report_to_json(report));
    case ReportFormat::Csv:
      return render_csv(report);
    case ReportFormat::Markdown:
      return render_markdown(report);
  }
  throw ValidationError("unhandled report format");
}

void emit_report(const RunReport& report, ReportFormat format, const std::filesystem::path& path) {
  const std::string text = render_report(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace cdepth
