#include "commentrank/synth.hpp"

#include <algorithm>
#include <cmath>

#include "commentrank/rng.hpp"

namespace commentrank {

namespace {

// Small German-flavoured vocabulary with a spread of syllable counts.
const char* kVocab[] = {
    "der", "die", "das", "und", "ist", "nicht", "auch", "aber", "doch", "sehr",
    "gut", "ja", "nein", "man", "wir", "hier", "heute", "immer", "wieder", "ganz",
    "artikel", "meinung", "kommentar", "zeitung", "regierung", "politik", "wirtschaft",
    "gesellschaft", "diskussion", "argument", "problem", "frage", "antwort", "beispiel",
    "entwicklung", "entscheidung", "verantwortung", "situation", "interessant",
    "wichtig", "richtig", "falsch", "genau", "leider", "natürlich", "vielleicht",
    "eigentlich", "wirklich", "tatsächlich", "grundsätzlich", "österreich", "europa",
    "energie", "klima", "steuern", "preise", "inflation", "arbeit", "bildung",
    "wissenschaft", "medien", "digital", "zukunft", "vergangenheit", "geschichte",
    "menschen", "leute", "kinder", "familie", "stadt", "land", "welt", "jahr",
    "zeit", "geld", "recht", "gesetz", "wahl", "partei", "kanzler", "minister",
};
constexpr std::size_t kVocabSize = sizeof(kVocab) / sizeof(kVocab[0]);

std::string make_word(Rng& rng) {
  // Square the draw for a Zipf-ish skew towards early (common) words.
  const double u = rng.next_unit();
  return kVocab[static_cast<std::size_t>(u * u * static_cast<double>(kVocabSize))];
}

std::string make_text(Rng& rng) {
  const int sentences = 1 + static_cast<int>(rng.next_poisson(1.2));
  std::string text;
  for (int s = 0; s < sentences; ++s) {
    const int words = 3 + static_cast<int>(rng.next_below(10));
    for (int w = 0; w < words; ++w) {
      if (!text.empty()) text += ' ';
      if (w == 0 && rng.next_unit() < 0.08) {
        text += rng.next_unit() < 0.5 ? "Sie" : "Du";
        continue;
      }
      text += make_word(rng);
      if (w + 1 < words && rng.next_unit() < 0.08) text += ',';
    }
    const double u = rng.next_unit();
    text += u < 0.75 ? "." : (u < 0.9 ? "!" : "?");
  }
  return text;
}

int negative_binomial(Rng& rng, double mean, double dispersion) {
  if (mean <= 0.0) return 0;
  const double lambda = rng.next_gamma(dispersion, mean / dispersion);
  return static_cast<int>(rng.next_poisson(lambda));
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

SynthDiscussion generate_discussion(const SynthConfig& config) {
  if (config.n_comments < 1) throw Error("generate_discussion: n_comments must be >= 1");
  Rng rng(derive_seed(config.seed, config.discussion_id, "synth"));

  Article article;
  article.article_id = "a-" + config.discussion_id;
  article.discussion_id = config.discussion_id;
  article.published_at = 1'600'000'000 + static_cast<std::int64_t>(rng.next_below(86'400));
  article.genre = config.genre;
  article.title = make_text(rng);
  {
    std::string body;
    for (int s = 0; s < 12; ++s) {
      if (!body.empty()) body += ' ';
      body += make_text(rng);
    }
    article.body_text = std::move(body);
  }

  const double pin_prob =
      config.root_fraction > 0.0
          ? std::min(1.0, config.pinned_fraction / config.root_fraction)
          : 0.0;

  std::vector<Comment> comments;
  std::vector<int> level;  // generation-order levels for parent selection
  comments.reserve(static_cast<std::size_t>(config.n_comments));
  std::int64_t t = article.published_at + 60;
  for (int i = 0; i < config.n_comments; ++i) {
    Comment c;
    c.comment_id = config.discussion_id + "-c" + std::to_string(i);
    c.discussion_id = config.discussion_id;
    c.timestamp = t;
    t += 1 + static_cast<std::int64_t>(rng.next_poisson(90.0));

    const bool is_root = i == 0 || rng.next_unit() < config.root_fraction;
    int lvl = 1;
    if (!is_root) {
      // Prefer shallow parents: accept a uniformly drawn earlier comment
      // with probability decay^(level-1), falling back to the last draw.
      int parent = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i)));
      for (int tries = 0; tries < 8; ++tries) {
        const int cand = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i)));
        parent = cand;
        if (rng.next_unit() < std::pow(config.reply_depth_decay, level[cand] - 1)) break;
      }
      c.parent_id = comments[static_cast<std::size_t>(parent)].comment_id;
      lvl = level[static_cast<std::size_t>(parent)] + 1;
    }
    level.push_back(lvl);

    c.upvotes = negative_binomial(rng, config.mean_upvotes, config.vote_dispersion);
    c.downvotes = negative_binomial(rng, config.mean_downvotes, config.vote_dispersion);
    c.pinned = is_root && rng.next_unit() < pin_prob;
    c.author_id = "u" + std::to_string(rng.next_below(5000));
    c.author_followers = negative_binomial(rng, 12.0, 0.4);
    c.text = make_text(rng);

    const double pos = clamp01(rng.next_gamma(2.0, 0.15));
    const double neg = clamp01(rng.next_gamma(2.0, 0.10));
    c.precomputed["sentiment_pos"] = pos;
    c.precomputed["sentiment_neg"] = neg;
    // Model-score columns loosely correlated with votes and sentiment so
    // predictive orderings behave distinctly from random.
    const double scores[4] = {
        std::log1p(static_cast<double>(c.upvotes)) + 0.3 * rng.next_normal(),
        std::log1p(static_cast<double>(c.upvotes)) + 0.6 * rng.next_normal(),
        pos - neg + 0.3 * rng.next_normal(),
        rng.next_unit(),
    };
    for (std::size_t k = 0; k < config.external_columns.size() && k < 4; ++k)
      c.precomputed[config.external_columns[k]] = scores[k];

    comments.push_back(std::move(c));
  }

  SynthDiscussion out;
  out.discussion = build_discussion(std::move(comments), std::move(article));

  // Direct synthetic feature scores, aligned with canonical comment order.
  out.scores.resize(static_cast<std::size_t>(out.discussion.n()));
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    const Comment& c = out.discussion.comments[i];
    FeatureScores f;
    f.sentiment_compound = c.precomputed.at("sentiment_pos") - c.precomputed.at("sentiment_neg");
    f.lexical_diversity = std::abs(rng.next_normal()) * 0.5 + 0.8;
    f.readability = 8.0 + 2.0 * rng.next_normal();
    f.topical_similarity = rng.next_unit();
    out.scores[i] = f;
  }
  return out;
}

std::vector<SynthDiscussion> generate_corpus(const SynthCorpusConfig& config) {
  if (config.n_discussions < 1) throw Error("generate_corpus: n_discussions must be >= 1");
  std::vector<SynthDiscussion> out;
  out.reserve(static_cast<std::size_t>(config.n_discussions));
  Rng size_rng(derive_seed(config.base.seed, "corpus-sizes"));
  for (int i = 0; i < config.n_discussions; ++i) {
    SynthConfig cfg = config.base;
    cfg.discussion_id = "synth-" + std::to_string(i + 1);
    cfg.n_comments = std::max<int>(
        1, negative_binomial(size_rng, static_cast<double>(config.mean_comments), 2.0));
    out.push_back(generate_discussion(cfg));
  }
  return out;
}

}  // namespace commentrank
