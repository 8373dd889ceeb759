#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdepth/rng.hpp"

namespace cdepth {

// ---- prompt templates ----

enum class SamplePosition { AfterPrefix, BeforeSuffix };

struct PromptTemplate {
  std::string dataset_name;
  std::string prefix;  // empty when the sample opens the prompt
  std::string suffix;  // empty when the sample closes the prompt
  SamplePosition sample_position = SamplePosition::AfterPrefix;
  // Answer words for label 1 and label 0, in that order.
  std::pair<std::string, std::string> label_vocabulary;
  // How many samples the reference experiments used; informational only.
  std::size_t default_sample_count = 0;
};

const std::vector<PromptTemplate>& prompt_templates();

/// Case-insensitive; also accepts the short table names "Common" and "Coin".
/// Throws UnknownDataset.
const PromptTemplate& find_template(std::string_view dataset_name);

/// prefix + " " + sample and/or sample + " " + suffix; the sample is spliced
/// verbatim, even when empty.
std::string render_prompt(const PromptTemplate& tmpl, std::string_view sample);
std::string render_prompt(std::string_view dataset_name, std::string_view sample);

// ---- noise perturbation ----

struct PerturbationSpec {
  std::string s1 = "aaa ";
  std::string s2 = "bbb ";
  double p = 0.5;
  std::uint64_t seed = 0;

  // Throws ValidationError unless p == 0.5 and s1 != s2.
  void validate() const;
};

/// s1 + prompt when draw < 0.5, otherwise s2 + prompt.
std::string perturb(std::string_view prompt, const PerturbationSpec& spec, double draw);

/// Owns one PRNG stream keyed by spec.seed; each call consumes exactly one
/// uniform draw. The label never enters the stream.
class Perturber {
 public:
  explicit Perturber(PerturbationSpec spec);

  std::string operator()(std::string_view prompt);
  bool last_was_s1() const { return last_was_s1_; }

 private:
  PerturbationSpec spec_;
  Rng rng_;
  bool last_was_s1_ = false;
};

// ---- corpora ----

struct CorpusRecord {
  std::string id;
  std::string text;
  std::uint8_t label = 0;

  bool operator==(const CorpusRecord&) const = default;
};

struct PerturbedRecord {
  CorpusRecord record;  // text holds the perturbed prompt
  bool used_s1 = false;
};

std::vector<CorpusRecord> parse_corpus_jsonl(std::istream& in, const std::string& source = "<stream>");
std::vector<CorpusRecord> read_corpus_jsonl(const std::filesystem::path& path);
void write_corpus_jsonl(std::span<const CorpusRecord> records, std::ostream& out);

/// Renders each record through `dataset_name`'s template when it is non-empty,
/// then prepends noise in corpus order.
std::vector<PerturbedRecord> perturb_corpus(std::span<const CorpusRecord> corpus,
                                            const PerturbationSpec& spec,
                                            std::string_view dataset_name = {});

// ---- difficulty anchoring ----

struct JudgmentRecord {
  std::string anchor_model;
  std::string dataset_name;
  std::string sample_id;
  std::uint8_t predicted = 0;
  std::uint8_t gold = 0;
};

struct DifficultyRanking {
  std::map<std::pair<std::string, std::string>, double> per_model_acc;  // (model, dataset)
  std::map<std::string, double> avg_acc;
  std::vector<std::string> order;  // hardest first
};

/// CSV with header `anchor_model,dataset,sample_id,predicted,gold`.
std::vector<JudgmentRecord> parse_judgments_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<JudgmentRecord> read_judgments_csv(const std::filesystem::path& path);
void write_judgments_csv(std::span<const JudgmentRecord> records, std::ostream& out);

/// Accuracy per (model, dataset), unweighted mean over models per dataset,
/// datasets sorted ascending by mean with name as tie-break. Throws EmptyGroup.
DifficultyRanking anchor_accuracies(std::span<const JudgmentRecord> records);

}  // namespace cdepth
