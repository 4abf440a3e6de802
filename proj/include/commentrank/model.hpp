#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace commentrank {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input records; messages carry file/line context.
struct ParseError : Error {
  using Error::Error;
};

// Violations of the discussion-forest contract (cycles, dangling parents,
// pinned non-roots). Rejected at ingest so downstream code can assume a
// valid forest.
struct StructureError : Error {
  using Error::Error;
};

struct Comment {
  std::string comment_id;
  std::string discussion_id;
  std::optional<std::string> parent_id;  // absent => root
  std::int64_t timestamp = 0;            // seconds since epoch
  int upvotes = 0;
  int downvotes = 0;
  bool pinned = false;
  std::string author_id;
  int author_followers = 0;
  std::string text;
  std::map<std::string, double> precomputed;  // sentiment, external model scores

  int relative_votes() const { return upvotes - downvotes; }
};

struct Article {
  std::string article_id;
  std::string discussion_id;
  std::int64_t published_at = 0;
  std::string genre;
  std::string title;
  std::string body_text;
};

// Per-comment reply-tree bookkeeping; indices refer to Discussion::comments.
struct TreeNode {
  int parent = -1;  // -1 => root
  int root = -1;    // index of the tree's root (self for roots)
  int level = 1;    // root = level 1
  int subtree_size = 1;
  int tree_height = 1;  // levels in the tree this comment belongs to
  std::vector<int> children;  // chronological (timestamp, comment_id)
};

// A validated discussion. Comments are held in canonical chronological
// order (timestamp, comment_id) and the struct is immutable after
// construction, so it can be shared read-only across parallel workers.
struct Discussion {
  std::string discussion_id;
  Article article;
  std::vector<Comment> comments;
  std::vector<TreeNode> tree;  // parallel to comments
  std::vector<int> roots;      // chronological
  std::map<std::string, int, std::less<>> index;  // comment_id -> position

  int n() const { return static_cast<int>(comments.size()); }
  bool is_root(int i) const { return tree[i].parent < 0; }
  int find(std::string_view comment_id) const {
    auto it = index.find(comment_id);
    return it == index.end() ? -1 : it->second;
  }
};

// Validates the forest (no cycles, parents resolved, pinned implies root),
// sorts comments chronologically with comment_id as tie-break, and fills in
// the derived tree info. Throws StructureError naming the offending comment.
Discussion build_discussion(std::vector<Comment> comments, Article article = {});

// Per-comment feature vector. `readability` stays empty for comments with
// fewer sentences than the configured threshold until corpus-level
// imputation assigns the dataset minimum.
struct FeatureScores {
  double sentiment_compound = 0.0;  // sentiment_pos - sentiment_neg
  double lexical_diversity = 0.0;
  std::optional<double> readability;
  double topical_similarity = 0.0;
  int num_punctuation = 0;
  int num_sentences = 0;
  bool uses_second_person = false;
};

enum class Ordering {
  Random,
  Upvotes,
  RelativeVotes,    // upvotes - downvotes, descending
  Downvotes,        // most downvotes first
  RevDownvotes,     // least downvotes first
  Chronological,
  RevChronological,
  ExternalScore,    // descending by a precomputed model-score column
};

enum class PinMode { Unpinned, Pinned };
enum class ReplyMode { Loose, Hidden, Trees };

// One ranking policy = (primary ordering, pin status, reply structure).
// `seed_salt` lets callers rerun the same policy with fresh tie-break draws.
struct PolicyDescriptor {
  Ordering ordering = Ordering::Random;
  std::string external_column;  // set when ordering == ExternalScore
  PinMode pin = PinMode::Unpinned;
  ReplyMode reply = ReplyMode::Loose;
  std::uint64_t seed_salt = 0;

  // Canonical id, e.g. "upvotes+pinned+trees" or "score:pred_up_nbr+unpinned+loose".
  std::string id() const;
};

std::string ordering_token(Ordering o, const std::string& external_column = {});

}  // namespace commentrank
