#include "cdepth/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <tuple>

#include "cdepth/errors.hpp"
#include "json.hpp"

namespace cdepth {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<PromptTemplate> build_templates() {
  using SP = SamplePosition;
  const std::string judge_statement = "Judge the statement is True or False.";
  return {
      {"Cities", judge_statement, "", SP::AfterPrefix, {"True", "False"}, 1496},
      {"CommonClaim", judge_statement, "", SP::AfterPrefix, {"True", "False"}, 6000},
      {"Counterfact", judge_statement, "", SP::AfterPrefix, {"True", "False"}, 4000},
      {"HateEval", "", "According to the comment, tell whether they present hate speech or not.",
       SP::BeforeSuffix, {"Yes", "No"}, 6000},
      {"STSA", "",
       "The sentence above is a movie review and reflects the writer's overall intention for this "
       "review. According to the sentence, judge whether the emotion is Positive or Negative.",
       SP::BeforeSuffix, {"Positive", "Negative"}, 6920},
      {"IMDb", "", "According to the movie review, judge whether it is Positive or Negative.",
       SP::BeforeSuffix, {"Positive", "Negative"}, 2000},
      {"Sarcasm",
       "Task: Detect sarcasm, help me identify whether this sentence is sarcastic. First, we need to "
       "understand what sarcasm is. Sarcasm is a form of verbal irony, where the intended meaning of "
       "the words is the opposite of the literal meaning. In other words, the speaker is saying one "
       "thing but meaning the opposite.",
       "Think carefully according to the sentence. Is there any sarcasm in this sentence? Please "
       "answer Yes or No.",
       SP::AfterPrefix, {"Yes", "No"}, 6000},
      {"StrategyQA",
       "Judge the question is true or false? Q: Will Queen Elizabeth be buried in the Pantheon? Let "
       "us think step by step. The stem of the sentence is Queen Elizabeth, burial, pantheon. "
       "Inference: First, the Pantheon is a church, so it is possible that she could be buried "
       "there. Second, Queen Elizabeth II is still alive, so she has not been buried yet. Third, "
       "even if she were to be buried in the Pantheon, it is unlikely that we would know about it "
       "ahead of time, so it is hard to say for sure. pred_ans: no.",
       "Let us think step by step...", SP::AfterPrefix, {"Yes", "No"}, 2290},
      {"Coinflip", "",
       "According to the flipping process above, determine if a coin remains heads up after it is "
       "either flipped or left unflipped by individuals. Therefore, the answer (Yes or No) is?",
       SP::BeforeSuffix, {"Yes", "No"}, 500},
  };
}

// RFC 4180 subset: comma separated, optional double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no,
                                        const std::string& source) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) {
    throw ValidationError(source + ":" + std::to_string(line_no) + ": unterminated quoted field");
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::uint8_t parse_bit(const std::string& s, const char* what, std::size_t line_no,
                       const std::string& source) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ValidationError(source + ":" + std::to_string(line_no) + ": " + what +
                        " must be 0 or 1, got '" + s + "'");
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

const std::vector<PromptTemplate>& prompt_templates() {
  static const std::vector<PromptTemplate> templates = build_templates();
  return templates;
}

const PromptTemplate& find_template(std::string_view dataset_name) {
  std::string key = lower(dataset_name);
  if (key == "common") key = "commonclaim";
  if (key == "coin") key = "coinflip";
  for (const auto& t : prompt_templates()) {
    if (lower(t.dataset_name) == key) return t;
  }
  throw UnknownDataset(std::string(dataset_name));
}

std::string render_prompt(const PromptTemplate& tmpl, std::string_view sample) {
  std::string out;
  if (!tmpl.prefix.empty()) {
    out += tmpl.prefix;
    out += ' ';
  }
  out += sample;
  if (!tmpl.suffix.empty()) {
    out += ' ';
    out += tmpl.suffix;
  }
  return out;
}

std::string render_prompt(std::string_view dataset_name, std::string_view sample) {
  return render_prompt(find_template(dataset_name), sample);
}

void PerturbationSpec::validate() const {
  if (p != 0.5) throw ValidationError("perturbation probability is fixed at 0.5");
  if (s1 == s2) throw ValidationError("noise strings s1 and s2 must differ");
}

std::string perturb(std::string_view prompt, const PerturbationSpec& spec, double draw) {
  if (prompt.empty()) throw ValidationError("cannot perturb an empty prompt");
  std::string out = draw < spec.p ? spec.s1 : spec.s2;
  out += prompt;
  return out;
}

Perturber::Perturber(PerturbationSpec spec) : spec_(std::move(spec)), rng_(spec_.seed) {
  spec_.validate();
}

std::string Perturber::operator()(std::string_view prompt) {
  const double draw = rng_.uniform01();
  last_was_s1_ = draw < spec_.p;
  return perturb(prompt, spec_, draw);
}

std::vector<CorpusRecord> parse_corpus_jsonl(std::istream& in, const std::string& source) {
  std::vector<CorpusRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j.contains("label")) {
      throw ValidationError(where + ": expected an object with id, text and label");
    }
    if (!j["id"].is_string() || !j["text"].is_string() || !j["label"].is_number_integer()) {
      throw ValidationError(where + ": id/text must be strings and label an integer");
    }
    const auto label = j["label"].get<long long>();
    if (label != 0 && label != 1) throw ValidationError(where + ": label must be 0 or 1");
    out.push_back({j["id"].get<std::string>(), j["text"].get<std::string>(),
                   static_cast<std::uint8_t>(label)});
  }
  return out;
}

std::vector<CorpusRecord> read_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_corpus_jsonl(in, path.string());
}

void write_corpus_jsonl(std::span<const CorpusRecord> records, std::ostream& out) {
  for (const auto& r : records) {
    nlohmann::json j = {{"id", r.id}, {"text", r.text}, {"label", r.label}};
    out << j.dump() << '\n';
  }
}

std::vector<PerturbedRecord> perturb_corpus(std::span<const CorpusRecord> corpus,
                                            const PerturbationSpec& spec,
                                            std::string_view dataset_name) {
  const PromptTemplate* tmpl = dataset_name.empty() ? nullptr : &find_template(dataset_name);
  Perturber noise(spec);
  std::vector<PerturbedRecord> out;
  out.reserve(corpus.size());
  for (const auto& rec : corpus) {
    const std::string prompt = tmpl ? render_prompt(*tmpl, rec.text) : rec.text;
    PerturbedRecord p;
    p.record = {rec.id, noise(prompt), rec.label};
    p.used_s1 = noise.last_was_s1();
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<JudgmentRecord> parse_judgments_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<JudgmentRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line, line_no, source);
    if (!header_seen) {
      const std::vector<std::string> expected = {"anchor_model", "dataset", "sample_id",
                                                 "predicted", "gold"};
      if (fields != expected) {
        throw ValidationError(source + ": header must be anchor_model,dataset,sample_id,predicted,gold");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 5) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": expected 5 fields, got " +
                            std::to_string(fields.size()));
    }
    out.push_back({fields[0], fields[1], fields[2], parse_bit(fields[3], "predicted", line_no, source),
                   parse_bit(fields[4], "gold", line_no, source)});
  }
  if (!header_seen) throw ValidationError(source + ": missing CSV header");
  return out;
}

std::vector<JudgmentRecord> read_judgments_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_judgments_csv(in, path.string());
}

void write_judgments_csv(std::span<const JudgmentRecord> records, std::ostream& out) {
  out << "anchor_model,dataset,sample_id,predicted,gold\n";
  for (const auto& r : records) {
    out << csv_field(r.anchor_model) << ',' << csv_field(r.dataset_name) << ','
        << csv_field(r.sample_id) << ',' << int{r.predicted} << ',' << int{r.gold} << '\n';
  }
}

DifficultyRanking anchor_accuracies(std::span<const JudgmentRecord> records) {
  if (records.empty()) throw EmptyGroup("no judgment records");

  // (model, dataset) -> (correct, total); integer counts keep the result
  // independent of record order.
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& r : records) {
    if (r.predicted > 1 || r.gold > 1) throw ValidationError("judgments must be binary");
    auto& [correct, total] = counts[{r.anchor_model, r.dataset_name}];
    correct += (r.predicted == r.gold);
    ++total;
  }

  DifficultyRanking out;
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& [key, c] : counts) {
    if (c.second == 0) throw EmptyGroup("empty group " + key.first + "/" + key.second);
    const double acc = static_cast<double>(c.first) / static_cast<double>(c.second);
    out.per_model_acc[key] = acc;
    auto& [sum, models] = sums[key.second];
    sum += acc;
    ++models;
  }
  for (const auto& [dataset, s] : sums) {
    out.avg_acc[dataset] = s.first / static_cast<double>(s.second);
    out.order.push_back(dataset);
  }
  std::stable_sort(out.order.begin(), out.order.end(), [&](const auto& a, const auto& b) {
    return std::tie(out.avg_acc.at(a), a) < std::tie(out.avg_acc.at(b), b);
  });
  return out;
}

}  // namespace cdepth
