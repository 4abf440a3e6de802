#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "commentrank/model.hpp"

namespace commentrank {

struct FeatureConfig {
  // Comments with fewer tokens count as "too short": lexical diversity and
  // topical similarity are imputed to zero.
  int min_tokens = 3;
  // Comments with fewer sentences get readability imputed to the corpus
  // minimum (they are the shortest and simplest texts).
  int min_sentences = 1;
  int polysyllable_min = 3;  // syllables needed to count as polysyllabic
  // Exact-case match; lowercase "sie"/"du" are regular pronouns in German.
  std::vector<std::string> second_person = {"Du", "Sie"};
  bool require_sentiment = true;

  // JSON file with any subset of the fields above; absent keys keep their
  // defaults. Thresholds must be >= 1.
  static FeatureConfig load(const std::filesystem::path& path);
};

struct TokenizeResult {
  std::vector<std::string> tokens;  // original case; maximal letter/digit runs
  int sentences = 0;
};

// UTF-8 aware for ASCII + Latin-1 + Latin Extended-A letters; sentence
// terminators are . ! ? and the ellipsis, with a trailing unterminated
// segment counting as one sentence.
TokenizeResult tokenize(std::string_view text);

std::string lowercase(std::string_view token);  // ASCII + Latin-1 mapping

// Vowel clusters on the lowercased word; German diphthongs (ei, ie, au, eu,
// aeu) fall out of cluster counting naturally.
int count_syllables(std::string_view lowercased_word);

// Carroll's corrected type-token ratio V / sqrt(2T); 0 below the token
// threshold.
double cttr(std::string_view text, const FeatureConfig& cfg = {});

// 1.043 * sqrt(polysyllables * 30 / sentences) + 3.1291 using the vowel
// cluster syllable heuristic; empty when below the sentence threshold
// (imputed at corpus level).
std::optional<double> smog(std::string_view text, const FeatureConfig& cfg = {});
double smog_from_counts(double polysyllables, double sentences);

struct IdfModel {
  std::unordered_map<std::string, double> idf;
  std::size_t documents = 0;
  // Unseen terms use the df = 0 smoothing: ln(1 + D) + 1.
  double default_idf = 1.0;

  double lookup(const std::string& term) const {
    auto it = idf.find(term);
    return it == idf.end() ? default_idf : it->second;
  }
};

// idf(t) = ln((1 + D) / (1 + df(t))) + 1; order-independent in the corpus.
IdfModel fit_idf(const std::vector<std::string>& documents);

// Cosine of tf*idf vectors, in [0, 1]. Zero when either text falls below
// the token threshold or has a zero vector; symmetric under a shared model.
double tfidf_cosine(std::string_view a, std::string_view b, const IdfModel& idf,
                    const FeatureConfig& cfg = {});

// Fills every FeatureScores field except corpus-level readability
// imputation. Throws when sentiment inputs are required but missing.
FeatureScores score_comment(const Comment& comment, const Article& article,
                            const IdfModel& idf, const FeatureConfig& cfg = {});

struct OffsetColumn {
  std::vector<double> values;
  double offset = 0.0;  // amount added (>= 0)
};

// Shifts a column so all values are non-negative; pairwise differences and
// hence every ordering are preserved.
OffsetColumn offset_nonnegative(std::vector<double> column);

// The four ranking-target features.
extern const std::vector<std::string> kForumFeatures;

// Corpus-level feature store: raw per-comment scores plus the offset view
// consumed by the ranking metric. Offsets are global per feature so scores
// stay on one scale across discussions.
struct FeatureTable {
  std::vector<std::vector<FeatureScores>> scores;  // [discussion][comment]
  double readability_min = 0.0;
  std::map<std::string, double> forum_offset;  // feature -> shift applied

  double raw_value(const std::string& feature, int d, int c) const;
  // Offset-adjusted column for one discussion, aligned with canonical
  // comment order; all values >= 0.
  std::vector<double> forum_column(const std::string& feature, int d) const;
};

// Fits IDF over all comments plus article bodies, scores every comment,
// imputes missing readability to the dataset minimum, and computes global
// non-negative offsets for the ranking-target features.
FeatureTable score_corpus(const std::vector<Discussion>& discussions,
                          const FeatureConfig& cfg = {});

}  // namespace commentrank
