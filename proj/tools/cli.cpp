#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cdepth/canonical_json.hpp"
#include "cdepth/datasets.hpp"
#include "cdepth/errors.hpp"
#include "cdepth/metrics.hpp"
#include "cdepth/pipeline.hpp"
#include "cdepth/reps_io.hpp"
#include "cdepth/synth.hpp"

namespace cdepth::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

std::uint64_t parse_u64(const std::string& s, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(std::string(what) + " is not an unsigned integer: '" + s + "'");
  }
  return v;
}

// Explicit flag wins, then CD_SEED, then the default.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CD_SEED"); env && *env) return parse_u64(env, "CD_SEED");
  return kDefaultSeed;
}

std::vector<double> parse_doubles(const std::string& list, const char* what) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ValidationError(std::string(what) + ": cannot parse '" + item + "' as a number");
    }
    out.push_back(v);
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write failure on '" + path + "'");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// ---- probe-run ----

struct ProbeRunArgs {
  std::string run_dir;
  double lambda = 1.0;
  std::optional<std::uint64_t> seed;
  bool no_standardize = false;
  double train_frac = 0.8;
  std::size_t parallelism = default_parallelism();
  std::string format = "json";
  std::string out_path;
  std::size_t max_iters = 10000;
  double grad_tol = 1e-6;
  bool per_layer_split = false;
  std::string probes_out;
};

int probe_run(const ProbeRunArgs& a, std::ostream& out) {
  PipelineConfig config;
  config.probe.lambda = a.lambda;
  config.probe.split_seed = resolve_seed(a.seed);
  config.probe.standardize = !a.no_standardize;
  config.probe.train_fraction = a.train_frac;
  config.probe.max_iters = a.max_iters;
  config.probe.grad_tol = a.grad_tol;
  config.parallelism = a.parallelism;
  config.per_layer_split = a.per_layer_split;
  const auto format = parse_report_format(a.format);

  std::vector<ProbeModel> probes;
  const auto report = run_pipeline(a.run_dir, config, a.probes_out.empty() ? nullptr : &probes);
  write_text(render_report(report, format), a.out_path, out);

  if (!a.probes_out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(a.probes_out, ec);
    if (ec) throw IoError("cannot create '" + a.probes_out + "': " + ec.message());
    for (std::size_t i = 0; i < probes.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "probe_%03zu.json", i);
      write_text(canonical_dump(probe_to_json(probes[i])),
                 (std::filesystem::path(a.probes_out) / name).string(), out);
    }
  }
  return kExitOk;
}

// ---- depth ----

int depth_cmd(const std::string& alphas, const std::string& format, std::ostream& out) {
  LayerAccuracySeries series{parse_doubles(alphas, "--alphas")};
  const auto m = depth_metrics(series);
  if (format == "json") {
    out << canonical_dump(depth_to_json(m));
    return kExitOk;
  }
  if (format != "text") throw ValidationError("depth --format must be text or json");
  auto frac = [](const std::optional<LayerFraction>& f) {
    return f ? fixed(f->value(), 4) : std::string("none");
  };
  std::string beta;
  for (std::size_t i = 0; i < m.beta.size(); ++i) beta += (i ? "," : "") + fixed(m.beta[i], 4);
  out << "beta=" << beta << "\n";
  out << "jumping=" << frac(m.jumping_point) << "\n";
  out << "converging=" << frac(m.converging_point) << "\n";
  out << "peak_acc=" << fixed(m.peak_acc, 4) << "\n";
  out << "peak_layer=" << m.peak_layer << "\n";
  out << "comprehended=" << (m.comprehended ? "true" : "false") << "\n";
  return kExitOk;
}

// ---- synth-gen ----

struct SynthArgs {
  std::string profile_path;
  std::string out_dir;
  std::size_t layers = 10;
  std::size_t d_model = 16;
  std::size_t n = 2000;
  double sigma = 1.0;
  std::string mu;
  std::optional<std::size_t> step_at;
  double step_height = 4.0;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> direction_seed;
};

int synth_gen(const SynthArgs& a, std::ostream& out) {
  EmergenceProfile p;
  if (!a.profile_path.empty()) {
    p = profile_from_json(read_json_file(a.profile_path));
  } else if (a.step_at) {
    p = step_profile(a.layers, *a.step_at, a.step_height * a.sigma, a.n, a.d_model, a.sigma);
  } else if (!a.mu.empty()) {
    p.mu = parse_doubles(a.mu, "--mu");
    p.d = p.mu.size();
    p.d_model = a.d_model;
    p.n = a.n;
    p.sigma = a.sigma;
  } else {
    throw ValidationError("synth-gen needs --profile, --mu or --step-at");
  }
  // Seeds from flags override the profile file only when given.
  if (a.seed || a.profile_path.empty()) p.noise_seed = resolve_seed(a.seed);
  if (a.direction_seed) {
    p.direction_seed = *a.direction_seed;
  } else if (a.profile_path.empty()) {
    p.direction_seed = p.noise_seed;
  }
  generate(p, a.out_dir);
  out << "wrote " << p.d << " layers (n=" << p.n << ", d_model=" << p.d_model << ") to "
      << a.out_dir << "\n";
  return kExitOk;
}

// ---- perturb-corpus ----

struct PerturbArgs {
  std::string corpus;
  std::string out_path;
  std::string dataset;
  std::string s1 = "aaa ";
  std::string s2 = "bbb ";
  std::optional<std::uint64_t> seed;
};

int perturb_cmd(const PerturbArgs& a, std::ostream& out, std::ostream& err) {
  PerturbationSpec spec;
  spec.s1 = a.s1;
  spec.s2 = a.s2;
  spec.seed = resolve_seed(a.seed);
  const auto corpus = read_corpus_jsonl(a.corpus);
  const auto perturbed = perturb_corpus(corpus, spec, a.dataset);

  std::vector<CorpusRecord> records;
  records.reserve(perturbed.size());
  std::size_t s1_count = 0;
  for (const auto& p : perturbed) {
    records.push_back(p.record);
    s1_count += p.used_s1;
  }
  std::ostringstream text;
  write_corpus_jsonl(records, text);
  write_text(text.str(), a.out_path, out);
  err << "perturbed " << records.size() << " records (" << s1_count << " with s1)\n";
  return kExitOk;
}

// ---- anchor-rank ----

int anchor_rank(const std::string& csv, const std::string& format, const std::string& out_path,
                std::ostream& out) {
  const auto records = read_judgments_csv(csv);
  const auto ranking = anchor_accuracies(records);
  std::string text;
  if (format == "json") {
    nlohmann::json per_model = nlohmann::json::object();
    for (const auto& [key, acc] : ranking.per_model_acc) per_model[key.second][key.first] = acc;
    nlohmann::json j = {{"order", ranking.order},
                        {"avg_acc", ranking.avg_acc},
                        {"per_model_acc", per_model}};
    text = canonical_dump(j);
  } else if (format == "text") {
    std::ostringstream s;
    s << "rank,dataset,avg_acc\n";
    for (std::size_t i = 0; i < ranking.order.size(); ++i) {
      s << (i + 1) << "," << ranking.order[i] << "," << fixed(ranking.avg_acc.at(ranking.order[i]), 4)
        << "\n";
    }
    text = s.str();
  } else {
    throw ValidationError("anchor-rank --format must be text or json");
  }
  write_text(text, out_path, out);
  return kExitOk;
}

// ---- fmt-dump ----

int fmt_dump(const std::string& path, std::size_t rows, std::ostream& out) {
  namespace fs = std::filesystem;
  nlohmann::json j;
  if (fs::is_directory(path)) {
    const auto run = load_run(path);
    std::size_t positives = 0;
    for (auto v : run.labels.labels) positives += v;
    j = {{"kind", "run"},
         {"manifest", manifest_to_json(run.manifest)},
         {"layers", run.layers.size()},
         {"positives", positives}};
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    char magic[4] = {};
    in.read(magic, 4);
    const std::string tag(magic, static_cast<std::size_t>(in.gcount()));
    in.close();
    if (tag == "CDL1") {
      const auto labels = read_labels(path);
      std::size_t positives = 0;
      for (auto v : labels.labels) positives += v;
      j = {{"kind", "labels"}, {"magic", "CDL1"}, {"n", labels.size()}, {"positives", positives}};
      if (rows > 0) {
        const std::size_t k = std::min(rows, labels.size());
        j["head"] = std::vector<int>(labels.labels.begin(), labels.labels.begin() + static_cast<std::ptrdiff_t>(k));
      }
    } else {
      const auto m = read_layer(path);
      j = {{"kind", "layer"}, {"magic", "CDR1"}, {"n", m.n}, {"d_model", m.d_model}};
      if (!m.data.empty()) {
        const auto [lo, hi] = std::minmax_element(m.data.begin(), m.data.end());
        double sum = 0.0;
        for (float v : m.data) sum += v;
        j["min"] = static_cast<double>(*lo);
        j["max"] = static_cast<double>(*hi);
        j["mean"] = sum / static_cast<double>(m.data.size());
      }
      if (rows > 0) {
        nlohmann::json head = nlohmann::json::array();
        for (std::size_t i = 0; i < std::min(rows, m.n); ++i) {
          const auto r = m.row(i);
          std::vector<double> row(r.begin(), r.end());
          head.push_back(row);
        }
        j["head"] = head;
      }
    }
  }
  out << canonical_dump(j);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cdepth: layer-wise linear probing and concept-depth metrics"};
  app.name("cdepth");
  app.require_subcommand(1);

  ProbeRunArgs pr;
  auto* probe_cmd = app.add_subcommand("probe-run", "Train one probe per layer of a run and report");
  probe_cmd->add_option("--run-dir", pr.run_dir, "Run directory")->required();
  probe_cmd->add_option("--lambda", pr.lambda, "L2 strength")->capture_default_str();
  probe_cmd->add_option("--seed", pr.seed, "Split seed (falls back to CD_SEED, then 42)");
  probe_cmd->add_flag("--no-standardize", pr.no_standardize, "Train on raw features");
  probe_cmd->add_option("--train-frac", pr.train_frac, "Training fraction")->capture_default_str();
  probe_cmd->add_option("--parallelism", pr.parallelism, "Concurrent layer fits");
  probe_cmd->add_option("--format", pr.format, "json|csv|md")->capture_default_str();
  probe_cmd->add_option("--out", pr.out_path, "Report path (stdout when omitted)");
  probe_cmd->add_option("--max-iters", pr.max_iters)->capture_default_str();
  probe_cmd->add_option("--grad-tol", pr.grad_tol)->capture_default_str();
  probe_cmd->add_flag("--per-layer-split", pr.per_layer_split, "Resplit for every layer");
  probe_cmd->add_option("--probes-out", pr.probes_out, "Directory for per-layer probe JSON");

  std::string alphas, depth_format = "text";
  auto* depth = app.add_subcommand("depth", "Depth metrics for an accuracy series");
  depth->add_option("--alphas", alphas, "Comma-separated per-layer accuracies")->required();
  depth->add_option("--format", depth_format, "text|json")->capture_default_str();

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic run directory");
  synth->add_option("--profile", sa.profile_path, "Emergence profile JSON");
  synth->add_option("--out", sa.out_dir, "Output run directory")->required();
  synth->add_option("--layers", sa.layers)->capture_default_str();
  synth->add_option("--d-model", sa.d_model)->capture_default_str();
  synth->add_option("--n", sa.n)->capture_default_str();
  synth->add_option("--sigma", sa.sigma)->capture_default_str();
  synth->add_option("--mu", sa.mu, "Comma-separated per-layer separations");
  synth->add_option("--step-at", sa.step_at, "Layer where separation jumps from 0");
  synth->add_option("--step-height", sa.step_height, "Separation after the step, in sigmas")
      ->capture_default_str();
  synth->add_option("--seed", sa.seed, "Noise seed");
  synth->add_option("--direction-seed", sa.direction_seed, "Class-direction seed");

  PerturbArgs pa;
  auto* perturb = app.add_subcommand("perturb-corpus", "Prepend label-independent noise to prompts");
  perturb->add_option("--corpus", pa.corpus, "JSON-lines corpus")->required();
  perturb->add_option("--out", pa.out_path, "Output JSON-lines (stdout when omitted)");
  perturb->add_option("--dataset", pa.dataset, "Render through this dataset's template first");
  perturb->add_option("--s1", pa.s1)->capture_default_str();
  perturb->add_option("--s2", pa.s2)->capture_default_str();
  perturb->add_option("--seed", pa.seed, "Noise seed");

  std::string judgments, anchor_format = "text", anchor_out;
  auto* anchor = app.add_subcommand("anchor-rank", "Rank datasets by anchor-model accuracy");
  anchor->add_option("judgments", judgments, "Judgment CSV")->required();
  anchor->add_option("--format", anchor_format, "text|json")->capture_default_str();
  anchor->add_option("--out", anchor_out);

  std::string dump_path;
  std::size_t dump_rows = 0;
  auto* dump = app.add_subcommand("fmt-dump", "Describe a CDR/CDL file or a run directory");
  dump->add_option("path", dump_path)->required();
  dump->add_option("--rows", dump_rows, "Leading rows to print")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*probe_cmd) return probe_run(pr, out);
    if (*depth) return depth_cmd(alphas, depth_format, out);
    if (*synth) return synth_gen(sa, out);
    if (*perturb) return perturb_cmd(pa, out, err);
    if (*anchor) return anchor_rank(judgments, anchor_format, anchor_out, out);
    if (*dump) return fmt_dump(dump_path, dump_rows, out);
  } catch (const PartialFailure& e) {
    err << "error: " << e.what() << "\n";
    return e.io() ? kExitIo : kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace cdepth::cli
