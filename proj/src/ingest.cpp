#include "commentrank/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "commentrank/csv.hpp"

namespace commentrank {

using nlohmann::json;

namespace {

json parse_line(const std::filesystem::path& path, std::size_t line_no,
                const std::string& line) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw Error("record is not a JSON object");
    return j;
  } catch (const std::exception& e) {
    throw ParseError(path.filename().string() + ":" + std::to_string(line_no) + ": " +
                     e.what());
  }
}

template <typename T>
T require(const json& j, const char* key, const std::filesystem::path& path,
          std::size_t line_no) {
  if (!j.contains(key))
    throw ParseError(path.filename().string() + ":" + std::to_string(line_no) +
                     ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw ParseError(path.filename().string() + ":" + std::to_string(line_no) +
                     ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

CorpusManifest CorpusManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  CorpusManifest m;
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  m.articles_path = resolve(j.at("articles").get<std::string>());
  m.comments_path = resolve(j.at("comments").get<std::string>());
  if (j.contains("external_columns"))
    m.external_columns = j.at("external_columns").get<std::vector<std::string>>();
  if (j.contains("optional_columns"))
    m.optional_columns = j.at("optional_columns").get<std::map<std::string, double>>();
  m.seed = get_or<std::uint64_t>(j, "seed", 0);
  return m;
}

LoadResult load_corpus(const CorpusManifest& manifest) {
  LoadResult result;

  std::unordered_map<std::string, Article> articles;
  std::vector<std::string> article_order;
  {
    std::ifstream in(manifest.articles_path);
    if (!in) throw Error("cannot open articles file: " + manifest.articles_path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = parse_line(manifest.articles_path, line_no, line);
      Article a;
      a.article_id = require<std::string>(j, "article_id", manifest.articles_path, line_no);
      a.discussion_id =
          require<std::string>(j, "discussion_id", manifest.articles_path, line_no);
      a.published_at = get_or<std::int64_t>(j, "published_at", 0);
      a.genre = get_or<std::string>(j, "genre", "");
      a.title = get_or<std::string>(j, "title", "");
      a.body_text = get_or<std::string>(j, "body_text", "");
      if (!articles.emplace(a.discussion_id, a).second)
        result.warnings.push_back("duplicate article for discussion '" + a.discussion_id +
                                  "' ignored");
      else
        article_order.push_back(a.discussion_id);
    }
  }

  std::unordered_map<std::string, std::vector<Comment>> grouped;
  std::size_t skipped_unknown = 0;
  {
    std::ifstream in(manifest.comments_path);
    if (!in) throw Error("cannot open comments file: " + manifest.comments_path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = parse_line(manifest.comments_path, line_no, line);
      Comment c;
      c.comment_id = require<std::string>(j, "comment_id", manifest.comments_path, line_no);
      c.discussion_id =
          require<std::string>(j, "discussion_id", manifest.comments_path, line_no);
      if (j.contains("parent_id") && !j.at("parent_id").is_null())
        c.parent_id = j.at("parent_id").get<std::string>();
      c.timestamp = require<std::int64_t>(j, "timestamp", manifest.comments_path, line_no);
      c.upvotes = get_or<int>(j, "upvotes", 0);
      c.downvotes = get_or<int>(j, "downvotes", 0);
      c.pinned = get_or<bool>(j, "pinned", false);
      c.author_id = get_or<std::string>(j, "author_id", "");
      c.author_followers = get_or<int>(j, "author_followers", 0);
      c.text = get_or<std::string>(j, "text", "");
      if (c.timestamp < 0 || c.upvotes < 0 || c.downvotes < 0 || c.author_followers < 0)
        throw ParseError(manifest.comments_path.filename().string() + ":" +
                         std::to_string(line_no) + ": negative count or timestamp");
      if (j.contains("precomputed")) {
        if (!j.at("precomputed").is_object())
          throw ParseError(manifest.comments_path.filename().string() + ":" +
                           std::to_string(line_no) + ": 'precomputed' must be an object");
        for (const auto& [key, value] : j.at("precomputed").items())
          c.precomputed[key] = value.get<double>();
      }

      if (!articles.count(c.discussion_id)) {
        ++skipped_unknown;
        continue;
      }

      for (const std::string& col : manifest.external_columns) {
        if (c.precomputed.count(col)) continue;
        auto opt = manifest.optional_columns.find(col);
        if (opt == manifest.optional_columns.end())
          throw Error("comment '" + c.comment_id + "' is missing declared column '" + col +
                      "' (not optional)");
        c.precomputed[col] = opt->second;
      }
      grouped[c.discussion_id].push_back(std::move(c));
    }
  }
  if (skipped_unknown)
    result.warnings.push_back(std::to_string(skipped_unknown) +
                              " comment(s) referenced unknown discussions and were skipped");

  for (const std::string& discussion_id : article_order) {
    auto it = grouped.find(discussion_id);
    if (it == grouped.end()) {
      result.warnings.push_back("article discussion '" + discussion_id +
                                "' has no comments and was skipped");
      continue;
    }
    std::vector<Comment>& comments = it->second;

    // Orphans (parent not in the same discussion) become roots.
    std::unordered_set<std::string_view> ids;
    for (const Comment& c : comments) ids.insert(c.comment_id);
    for (Comment& c : comments) {
      if (c.parent_id && !ids.count(*c.parent_id)) {
        result.warnings.push_back("comment '" + c.comment_id + "' lost its parent '" +
                                  *c.parent_id + "'; re-attached as root");
        c.parent_id.reset();
      }
    }

    Discussion d = build_discussion(std::move(comments), articles.at(discussion_id));
    if (d.article.published_at > d.comments.front().timestamp)
      result.warnings.push_back("discussion '" + discussion_id +
                                "' has comments before article publication");

    result.summary.discussions += 1;
    result.summary.comments += d.comments.size();
    result.summary.roots += d.roots.size();
    for (const Comment& c : d.comments) result.summary.pinned += c.pinned ? 1 : 0;
    result.discussions.push_back(std::move(d));
  }
  return result;
}

void write_corpus(const std::vector<Discussion>& discussions,
                  const std::filesystem::path& articles_path,
                  const std::filesystem::path& comments_path) {
  std::ofstream articles(articles_path, std::ios::binary);
  if (!articles) throw Error("cannot open output file: " + articles_path.string());
  std::ofstream comments(comments_path, std::ios::binary);
  if (!comments) throw Error("cannot open output file: " + comments_path.string());

  for (const Discussion& d : discussions) {
    json a{{"article_id", d.article.article_id},
           {"discussion_id", d.article.discussion_id.empty() ? d.discussion_id
                                                             : d.article.discussion_id},
           {"published_at", d.article.published_at},
           {"genre", d.article.genre},
           {"title", d.article.title},
           {"body_text", d.article.body_text}};
    articles << a.dump() << '\n';
    for (const Comment& c : d.comments) {
      json jc{{"comment_id", c.comment_id},
              {"discussion_id", c.discussion_id},
              {"timestamp", c.timestamp},
              {"upvotes", c.upvotes},
              {"downvotes", c.downvotes},
              {"pinned", c.pinned},
              {"author_id", c.author_id},
              {"author_followers", c.author_followers},
              {"text", c.text},
              {"precomputed", json(c.precomputed)}};
      if (c.parent_id) jc["parent_id"] = *c.parent_id;
      comments << jc.dump() << '\n';
    }
  }
}

namespace {

struct NumericColumn {
  std::string name;
  Transform transform;
  std::vector<double> values;
};

void apply_transform(NumericColumn& col) {
  if (col.transform == Transform::Log1p || col.transform == Transform::Log1pStandardize)
    for (double& v : col.values) v = std::log1p(v);
  if (col.transform == Transform::Standardize || col.transform == Transform::Log1pStandardize) {
    const auto n = static_cast<double>(col.values.size());
    double mean = 0.0;
    for (double v : col.values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : col.values) ss += (v - mean) * (v - mean);
    if (col.values.size() < 2 || ss <= 0.0)
      throw Error("cannot standardise zero-variance column '" + col.name + "'");
    const double sd = std::sqrt(ss / (n - 1.0));
    for (double& v : col.values) v = (v - mean) / sd;
  }
}

}  // namespace

void export_regression_table(const std::vector<Discussion>& discussions,
                             const FeatureTable& features,
                             const std::filesystem::path& out_path,
                             const std::map<std::string, Transform>& overrides,
                             const std::vector<PhiAttachment>& phi_columns) {
  // (name, default transform, extractor). The long-tailed columns follow
  // the log1p list; everything numeric is standardised.
  struct ColumnSpec {
    const char* name;
    Transform transform;
    double (*get)(const Discussion&, const FeatureTable&, int d, int c);
  };
  static const ColumnSpec specs[] = {
      {"sentiment_pos", Transform::Standardize,
       [](const Discussion& d, const FeatureTable&, int, int c) {
         auto it = d.comments[c].precomputed.find("sentiment_pos");
         return it == d.comments[c].precomputed.end() ? 0.0 : it->second;
       }},
      {"sentiment_neg", Transform::Standardize,
       [](const Discussion& d, const FeatureTable&, int, int c) {
         auto it = d.comments[c].precomputed.find("sentiment_neg");
         return it == d.comments[c].precomputed.end() ? 0.0 : it->second;
       }},
      {"lexical_diversity", Transform::Standardize,
       [](const Discussion&, const FeatureTable& f, int d, int c) {
         return f.raw_value("lexical_diversity", d, c);
       }},
      {"readability", Transform::Standardize,
       [](const Discussion&, const FeatureTable& f, int d, int c) {
         return f.raw_value("readability", d, c);
       }},
      {"topical_similarity", Transform::Standardize,
       [](const Discussion&, const FeatureTable& f, int d, int c) {
         return f.raw_value("topical_similarity", d, c);
       }},
      {"num_punctuation", Transform::Log1pStandardize,
       [](const Discussion&, const FeatureTable& f, int d, int c) {
         return static_cast<double>(f.scores[d][c].num_punctuation);
       }},
      {"num_sentences", Transform::Standardize,
       [](const Discussion&, const FeatureTable& f, int d, int c) {
         return static_cast<double>(f.scores[d][c].num_sentences);
       }},
      {"author_followers", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int c) {
         return static_cast<double>(d.comments[c].author_followers);
       }},
      {"hours_since_article", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int c) {
         // Pre-publication comments (warned at ingest) clamp to zero.
         const double hours =
             static_cast<double>(d.comments[c].timestamp - d.article.published_at) / 3600.0;
         return std::max(0.0, hours);
       }},
      {"level_in_tree", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int c) {
         return static_cast<double>(d.tree[c].level);
       }},
      {"tree_size", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int c) {
         return static_cast<double>(d.tree[d.tree[c].root].subtree_size);
       }},
      {"tree_height", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int c) {
         return static_cast<double>(d.tree[c].tree_height);
       }},
      {"num_replies", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int c) {
         return static_cast<double>(d.tree[c].subtree_size - 1);
       }},
      {"upvotes", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int c) {
         return static_cast<double>(d.comments[c].upvotes);
       }},
      {"downvotes", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int c) {
         return static_cast<double>(d.comments[c].downvotes);
       }},
      {"num_comments_in_discussion", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int) {
         return static_cast<double>(d.comments.size());
       }},
      {"mean_upvotes_in_discussion", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int) {
         double s = 0.0;
         for (const Comment& c : d.comments) s += c.upvotes;
         return s / static_cast<double>(d.comments.size());
       }},
      {"mean_downvotes_in_discussion", Transform::Log1pStandardize,
       [](const Discussion& d, const FeatureTable&, int, int) {
         double s = 0.0;
         for (const Comment& c : d.comments) s += c.downvotes;
         return s / static_cast<double>(d.comments.size());
       }},
  };

  std::size_t total = 0;
  for (const Discussion& d : discussions) total += d.comments.size();

  std::vector<NumericColumn> numeric;
  for (const ColumnSpec& spec : specs) {
    NumericColumn col;
    col.name = spec.name;
    auto it = overrides.find(spec.name);
    col.transform = it == overrides.end() ? spec.transform : it->second;
    col.values.reserve(total);
    for (std::size_t d = 0; d < discussions.size(); ++d)
      for (int c = 0; c < discussions[d].n(); ++c)
        col.values.push_back(spec.get(discussions[d], features, static_cast<int>(d), c));
    apply_transform(col);
    numeric.push_back(std::move(col));
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + out_path.string());

  std::vector<std::string> header = {"discussion_id", "comment_id", "sentiment_compound",
                                     "uses_second_person", "is_root", "is_leaf", "genre"};
  for (const NumericColumn& col : numeric) header.push_back(col.name);
  for (const PhiAttachment& a : phi_columns) header.push_back(a.column);
  write_csv_row(out, header);

  std::size_t row = 0;
  for (std::size_t d = 0; d < discussions.size(); ++d) {
    const Discussion& disc = discussions[d];
    for (int c = 0; c < disc.n(); ++c, ++row) {
      std::vector<std::string> fields;
      fields.reserve(header.size());
      fields.push_back(disc.discussion_id);
      fields.push_back(disc.comments[c].comment_id);
      fields.push_back(fmt_double(features.scores[d][c].sentiment_compound));
      fields.push_back(features.scores[d][c].uses_second_person ? "1" : "0");
      fields.push_back(disc.is_root(c) ? "1" : "0");
      fields.push_back(disc.tree[c].children.empty() ? "1" : "0");
      fields.push_back(disc.article.genre);
      for (const NumericColumn& col : numeric) fields.push_back(fmt_double(col.values[row]));
      for (const PhiAttachment& a : phi_columns) {
        auto it = a.by_discussion.find(disc.discussion_id);
        fields.push_back(it == a.by_discussion.end() ? "" : fmt_double(it->second));
      }
      write_csv_row(out, fields);
    }
  }
}

}  // namespace commentrank
