#pragma once

// Frozen expected values shared by the unit tests and the acceptance binary.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace cdepth::golden {

// n=1, d_model=1, value 0.0f.
inline const std::vector<std::uint8_t> kCdrSmallest = {0x43, 0x44, 0x52, 0x31, 0x01, 0x00, 0x00, 0x00,
                                                      0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
// labels [1, 0, 1].
inline const std::vector<std::uint8_t> kCdl101 = {0x43, 0x44, 0x4C, 0x31, 0x03, 0x00,
                                                 0x00, 0x00, 0x01, 0x00, 0x01};

struct DepthFixture {
  const char* name;
  std::vector<double> alpha;
  std::optional<std::size_t> jump;
  std::optional<std::size_t> converge;
  double peak;
  std::size_t peak_layer;
  bool comprehended;
};

// Six-depth accuracy rows from published per-layer tables, with the expected
// metrics worked out by hand from the ratios.
inline const std::vector<DepthFixture>& depth_fixtures() {
  static const std::vector<DepthFixture> rows = {
      {"gemma2b_cities", {0.446, 0.94, 0.983, 0.992, 0.985, 0.988}, 1, 5, 0.992, 3, true},
      {"gemma2b_strategyqa", {0.556, 0.602, 0.639, 0.683, 0.62, 0.592}, std::nullopt, std::nullopt, 0.683, 3, false},
      {"gemma2b_coin", {0.635, 0.62, 0.65, 0.695, 0.585, 0.525}, std::nullopt, 1, 0.695, 3, false},
      {"gemma7b_counterfact", {0.496, 0.696, 0.835, 0.814, 0.776, 0.729}, 1, 3, 0.835, 2, true},
      {"llama7b_coin", {0.545, 0.615, 0.915, 0.9, 0.88, 0.815}, 1, 4, 0.915, 2, true},
      {"qwen05b_cities", {0.482, 0.731, 0.935, 0.933, 0.923, 0.912}, 1, 5, 0.935, 2, true},
      {"llama13b_imdb", {0.732, 0.942, 0.945, 0.94, 0.941, 0.946}, 1, 5, 0.946, 5, true},
      {"qwen18b_hateeval", {0.724, 0.809, 0.808, 0.809, 0.791, 0.795}, 1, 5, 0.809, 1, true},
  };
  return rows;
}

struct TemplateGolden {
  const char* dataset;
  const char* sample;
  const char* expected;
};

// One printed example per dataset. Expected strings are written out in full
// rather than assembled from the template fields.
inline const std::vector<TemplateGolden>& template_goldens() {
  static const std::vector<TemplateGolden> rows = {
      {"Cities", "The city of Tokyo is in Japan.",
       "Judge the statement is True or False. The city of Tokyo is in Japan."},
      {"CommonClaim", "A chicken has two right wings.",
       "Judge the statement is True or False. A chicken has two right wings."},
      {"Counterfact", "Kanata South Ward is in Wisconsin.",
       "Judge the statement is True or False. Kanata South Ward is in Wisconsin."},
      {"HateEval", "Labor migrants transfer almost $10 billion a year to Ukraine.",
       "Labor migrants transfer almost $10 billion a year to Ukraine. According to the comment, tell "
       "whether they present hate speech or not."},
      {"STSA",
       "The production values are of the highest and the performances attractive without being memorable.",
       "The production values are of the highest and the performances attractive without being "
       "memorable. The sentence above is a movie review and reflects the writer's overall intention "
       "for this review. According to the sentence, judge whether the emotion is Positive or Negative."},
      {"IMDb",
       "This is the definitive movie version of Hamlet. Branagh cuts nothing, but there are no wasted moments.",
       "This is the definitive movie version of Hamlet. Branagh cuts nothing, but there are no wasted "
       "moments. According to the movie review, judge whether it is Positive or Negative."},
      {"Sarcasm", "This ceo will send your kids to school, if you work for his company.",
       "Task: Detect sarcasm, help me identify whether this sentence is sarcastic. First, we need to "
       "understand what sarcasm is. Sarcasm is a form of verbal irony, where the intended meaning of "
       "the words is the opposite of the literal meaning. In other words, the speaker is saying one "
       "thing but meaning the opposite. This ceo will send your kids to school, if you work for his "
       "company. Think carefully according to the sentence. Is there any sarcasm in this sentence? "
       "Please answer Yes or No."},
      {"StrategyQA", "Do hamsters provide food for any animals?",
       "Judge the question is true or false? Q: Will Queen Elizabeth be buried in the Pantheon? Let "
       "us think step by step. The stem of the sentence is Queen Elizabeth, burial, pantheon. "
       "Inference: First, the Pantheon is a church, so it is possible that she could be buried "
       "there. Second, Queen Elizabeth II is still alive, so she has not been buried yet. Third, "
       "even if she were to be buried in the Pantheon, it is unlikely that we would know about it "
       "ahead of time, so it is hard to say for sure. pred_ans: no. Do hamsters provide food for any "
       "animals? Let us think step by step..."},
      {"Coinflip",
       "A coin is heads up. Whitney flips the coin. Erika does not flip the coin. Tj does not flip the "
       "coin. Benito flips the coin. Is the coin still heads up? Note that \"flip\" here means \"reverse\".",
       "A coin is heads up. Whitney flips the coin. Erika does not flip the coin. Tj does not flip the "
       "coin. Benito flips the coin. Is the coin still heads up? Note that \"flip\" here means "
       "\"reverse\". According to the flipping process above, determine if a coin remains heads up "
       "after it is either flipped or left unflipped by individuals. Therefore, the answer (Yes or No) is?"},
  };
  return rows;
}

}  // namespace cdepth::golden
