#include "commentrank/textfeat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace commentrank {

FeatureConfig FeatureConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feature config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  FeatureConfig cfg;
  if (j.contains("min_tokens")) cfg.min_tokens = j.at("min_tokens").get<int>();
  if (j.contains("min_sentences")) cfg.min_sentences = j.at("min_sentences").get<int>();
  if (j.contains("polysyllable_min"))
    cfg.polysyllable_min = j.at("polysyllable_min").get<int>();
  if (j.contains("second_person"))
    cfg.second_person = j.at("second_person").get<std::vector<std::string>>();
  if (j.contains("require_sentiment"))
    cfg.require_sentiment = j.at("require_sentiment").get<bool>();
  if (cfg.min_tokens < 1 || cfg.min_sentences < 1 || cfg.polysyllable_min < 1)
    throw Error(path.string() + ": thresholds must be >= 1");
  return cfg;
}

namespace {

// Decodes one UTF-8 codepoint; malformed bytes decode as themselves so the
// scan always advances.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
  const unsigned char c0 = s[i];
  if (c0 < 0x80) {
    ++i;
    return c0;
  }
  auto cont = [&](std::size_t k) {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  if ((c0 & 0xE0) == 0xC0 && cont(1)) {
    const std::uint32_t cp = ((c0 & 0x1Fu) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
    i += 2;
    return cp;
  }
  if ((c0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    const std::uint32_t cp = ((c0 & 0x0Fu) << 12) |
                             ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6) |
                             (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
    i += 3;
    return cp;
  }
  if ((c0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    const std::uint32_t cp = ((c0 & 0x07u) << 18) |
                             ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12) |
                             ((static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6) |
                             (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
    i += 4;
    return cp;
  }
  ++i;
  return c0;
}

void encode_utf8(std::uint32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_letter(std::uint32_t cp) {
  if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) return true;
  if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;  // Latin-1
  if (cp >= 0x100 && cp <= 0x17F) return true;                            // Latin Ext-A
  return false;
}

bool is_digit(std::uint32_t cp) { return cp >= '0' && cp <= '9'; }

std::uint32_t lower_cp(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  return cp;
}

bool is_terminator(std::uint32_t cp) {
  return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026;  // ellipsis
}

// ASCII ! ? . , ; : - " ' ( ) plus the ellipsis.
bool is_counted_punctuation(std::uint32_t cp) {
  switch (cp) {
    case '!': case '?': case '.': case ',': case ';': case ':':
    case '-': case '"': case '\'': case '(': case ')':
      return true;
    default:
      return cp == 0x2026;
  }
}

bool is_vowel(std::uint32_t cp) {
  switch (cp) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
    case 0xE4: case 0xF6: case 0xFC:  // ae oe ue umlauts
      return true;
    default:
      return false;
  }
}

std::vector<std::string> lowercase_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const std::string& t : tokenize(text).tokens) out.push_back(lowercase(t));
  return out;
}

std::unordered_map<std::string, double> tf_vector(const std::vector<std::string>& tokens) {
  std::unordered_map<std::string, double> tf;
  for (const std::string& t : tokens) tf[t] += 1.0;
  return tf;
}

double weighted_cosine(const std::unordered_map<std::string, double>& a,
                       const std::unordered_map<std::string, double>& b,
                       const IdfModel& idf) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [term, tf] : a) {
    const double w = tf * idf.lookup(term);
    na += w * w;
    auto it = b.find(term);
    if (it != b.end()) dot += w * it->second * idf.lookup(term);
  }
  for (const auto& [term, tf] : b) {
    const double w = tf * idf.lookup(term);
    nb += w * w;
  }
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

}  // namespace

TokenizeResult tokenize(std::string_view text) {
  TokenizeResult r;
  std::string token;
  bool segment_has_content = false;
  bool in_terminator_run = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::uint32_t cp = decode_utf8(text, i);
    if (is_letter(cp) || is_digit(cp)) {
      encode_utf8(cp, token);
      segment_has_content = true;
      in_terminator_run = false;
      continue;
    }
    if (!token.empty()) {
      r.tokens.push_back(std::move(token));
      token.clear();
    }
    if (is_terminator(cp)) {
      if (!in_terminator_run) ++r.sentences;
      in_terminator_run = true;
      segment_has_content = false;
    } else if (cp > ' ') {
      segment_has_content = true;  // punctuation counts as content but not a token
      in_terminator_run = false;
    }
  }
  if (!token.empty()) r.tokens.push_back(std::move(token));
  if (segment_has_content) ++r.sentences;
  return r;
}

std::string lowercase(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  std::size_t i = 0;
  while (i < token.size()) encode_utf8(lower_cp(decode_utf8(token, i)), out);
  return out;
}

int count_syllables(std::string_view lowercased_word) {
  int clusters = 0;
  bool in_cluster = false;
  std::size_t i = 0;
  while (i < lowercased_word.size()) {
    const bool v = is_vowel(decode_utf8(lowercased_word, i));
    if (v && !in_cluster) ++clusters;
    in_cluster = v;
  }
  return clusters;
}

double cttr(std::string_view text, const FeatureConfig& cfg) {
  const std::vector<std::string> tokens = lowercase_tokens(text);
  const auto t = static_cast<double>(tokens.size());
  if (tokens.size() < static_cast<std::size_t>(cfg.min_tokens)) return 0.0;
  const std::unordered_set<std::string> types(tokens.begin(), tokens.end());
  return static_cast<double>(types.size()) / std::sqrt(2.0 * t);
}

double smog_from_counts(double polysyllables, double sentences) {
  return 1.043 * std::sqrt(polysyllables * 30.0 / sentences) + 3.1291;
}

std::optional<double> smog(std::string_view text, const FeatureConfig& cfg) {
  const TokenizeResult r = tokenize(text);
  if (r.sentences < cfg.min_sentences) return std::nullopt;
  int poly = 0;
  for (const std::string& t : r.tokens)
    if (count_syllables(lowercase(t)) >= cfg.polysyllable_min) ++poly;
  return smog_from_counts(poly, r.sentences);
}

IdfModel fit_idf(const std::vector<std::string>& documents) {
  if (documents.empty()) throw Error("fit_idf: empty corpus");
  std::unordered_map<std::string, std::size_t> df;
  for (const std::string& doc : documents) {
    const std::vector<std::string> tokens = lowercase_tokens(doc);
    const std::unordered_set<std::string> types(tokens.begin(), tokens.end());
    for (const std::string& t : types) ++df[t];
  }
  IdfModel m;
  m.documents = documents.size();
  const double d1 = 1.0 + static_cast<double>(m.documents);
  m.default_idf = std::log(d1) + 1.0;
  m.idf.reserve(df.size());
  for (const auto& [term, count] : df)
    m.idf.emplace(term, std::log(d1 / (1.0 + static_cast<double>(count))) + 1.0);
  return m;
}

double tfidf_cosine(std::string_view a, std::string_view b, const IdfModel& idf,
                    const FeatureConfig& cfg) {
  const std::vector<std::string> ta = lowercase_tokens(a);
  const std::vector<std::string> tb = lowercase_tokens(b);
  const auto min_tokens = static_cast<std::size_t>(cfg.min_tokens);
  if (ta.size() < min_tokens || tb.size() < min_tokens) return 0.0;
  return weighted_cosine(tf_vector(ta), tf_vector(tb), idf);
}

namespace {

struct ArticleVector {
  std::unordered_map<std::string, double> tf;
  bool long_enough = false;
};

ArticleVector article_vector(std::string_view body_text, const FeatureConfig& cfg) {
  ArticleVector av;
  const std::vector<std::string> tokens = lowercase_tokens(body_text);
  av.long_enough = tokens.size() >= static_cast<std::size_t>(cfg.min_tokens);
  av.tf = tf_vector(tokens);
  return av;
}

FeatureScores score_against(const Comment& comment, const ArticleVector& av,
                            const IdfModel& idf, const FeatureConfig& cfg) {
  FeatureScores f;

  auto pos = comment.precomputed.find("sentiment_pos");
  auto neg = comment.precomputed.find("sentiment_neg");
  if (pos == comment.precomputed.end() || neg == comment.precomputed.end()) {
    if (cfg.require_sentiment)
      throw Error("comment '" + comment.comment_id +
                  "' is missing sentiment_pos/sentiment_neg");
  } else {
    f.sentiment_compound = pos->second - neg->second;
  }

  const TokenizeResult tk = tokenize(comment.text);
  f.num_sentences = tk.sentences;

  std::size_t i = 0;
  while (i < comment.text.size())
    if (is_counted_punctuation(decode_utf8(comment.text, i))) ++f.num_punctuation;

  for (const std::string& t : tk.tokens) {
    if (std::find(cfg.second_person.begin(), cfg.second_person.end(), t) !=
        cfg.second_person.end()) {
      f.uses_second_person = true;
      break;
    }
  }

  std::vector<std::string> lower;
  lower.reserve(tk.tokens.size());
  for (const std::string& t : tk.tokens) lower.push_back(lowercase(t));

  if (lower.size() >= static_cast<std::size_t>(cfg.min_tokens)) {
    const std::unordered_set<std::string> types(lower.begin(), lower.end());
    f.lexical_diversity =
        static_cast<double>(types.size()) / std::sqrt(2.0 * static_cast<double>(lower.size()));
    if (av.long_enough)
      f.topical_similarity = weighted_cosine(tf_vector(lower), av.tf, idf);
  }

  if (tk.sentences >= cfg.min_sentences) {
    int poly = 0;
    for (const std::string& t : lower)
      if (count_syllables(t) >= cfg.polysyllable_min) ++poly;
    f.readability = smog_from_counts(poly, tk.sentences);
  }
  return f;
}

}  // namespace

FeatureScores score_comment(const Comment& comment, const Article& article,
                            const IdfModel& idf, const FeatureConfig& cfg) {
  return score_against(comment, article_vector(article.body_text, cfg), idf, cfg);
}

OffsetColumn offset_nonnegative(std::vector<double> column) {
  if (column.empty()) throw Error("offset_nonnegative: empty column");
  const double min = *std::min_element(column.begin(), column.end());
  OffsetColumn out;
  out.offset = min < 0.0 ? -min : 0.0;
  if (out.offset > 0.0)
    for (double& v : column) v += out.offset;
  out.values = std::move(column);
  return out;
}

const std::vector<std::string> kForumFeatures = {
    "sentiment_compound", "lexical_diversity", "readability", "topical_similarity"};

double FeatureTable::raw_value(const std::string& feature, int d, int c) const {
  const FeatureScores& f = scores[d][c];
  if (feature == "sentiment_compound") return f.sentiment_compound;
  if (feature == "lexical_diversity") return f.lexical_diversity;
  if (feature == "readability") return f.readability.value_or(readability_min);
  if (feature == "topical_similarity") return f.topical_similarity;
  throw Error("unknown feature: " + feature);
}

std::vector<double> FeatureTable::forum_column(const std::string& feature, int d) const {
  auto it = forum_offset.find(feature);
  const double offset = it == forum_offset.end() ? 0.0 : it->second;
  std::vector<double> col(scores[d].size());
  for (std::size_t c = 0; c < col.size(); ++c)
    col[c] = raw_value(feature, d, static_cast<int>(c)) + offset;
  return col;
}

FeatureTable score_corpus(const std::vector<Discussion>& discussions,
                          const FeatureConfig& cfg) {
  std::vector<std::string> docs;
  for (const Discussion& d : discussions) {
    docs.push_back(d.article.body_text);
    for (const Comment& c : d.comments) docs.push_back(c.text);
  }
  const IdfModel idf = fit_idf(docs);

  FeatureTable table;
  table.scores.resize(discussions.size());

  const int nd = static_cast<int>(discussions.size());
  std::string first_error;  // exceptions may not cross the parallel region
#pragma omp parallel for schedule(dynamic)
  for (int d = 0; d < nd; ++d) {
    try {
      const Discussion& disc = discussions[d];
      const ArticleVector av = article_vector(disc.article.body_text, cfg);
      auto& out = table.scores[d];
      out.resize(disc.comments.size());
      for (std::size_t c = 0; c < disc.comments.size(); ++c)
        out[c] = score_against(disc.comments[c], av, idf, cfg);
    } catch (const std::exception& e) {
#pragma omp critical
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!first_error.empty()) throw Error(first_error);

  // Readability imputation: dataset minimum; the formula floor when the
  // corpus has no computable value at all.
  double rmin = std::numeric_limits<double>::infinity();
  for (const auto& per_disc : table.scores)
    for (const FeatureScores& f : per_disc)
      if (f.readability) rmin = std::min(rmin, *f.readability);
  table.readability_min = std::isfinite(rmin) ? rmin : 3.1291;

  for (const std::string& feature : kForumFeatures) {
    double min = std::numeric_limits<double>::infinity();
    for (int d = 0; d < nd; ++d)
      for (std::size_t c = 0; c < table.scores[d].size(); ++c)
        min = std::min(min, table.raw_value(feature, d, static_cast<int>(c)));
    table.forum_offset[feature] = (std::isfinite(min) && min < 0.0) ? -min : 0.0;
  }
  return table;
}

}  // namespace commentrank
