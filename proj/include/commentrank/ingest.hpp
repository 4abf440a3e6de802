#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "commentrank/model.hpp"
#include "commentrank/textfeat.hpp"

namespace commentrank {

// Points at the two line-delimited JSON record files and declares which
// precomputed model-score columns every comment must carry.
struct CorpusManifest {
  std::filesystem::path articles_path;
  std::filesystem::path comments_path;
  std::vector<std::string> external_columns;
  std::map<std::string, double> optional_columns;  // filled with the default when absent
  std::uint64_t seed = 0;

  // JSON file with keys articles, comments, external_columns,
  // optional_columns, seed; relative paths resolve against the manifest.
  static CorpusManifest load(const std::filesystem::path& path);
};

struct CorpusSummary {
  std::size_t discussions = 0;
  std::size_t comments = 0;
  std::size_t roots = 0;
  std::size_t pinned = 0;

  double root_share() const {
    return comments ? static_cast<double>(roots) / static_cast<double>(comments) : 0.0;
  }
  double pinned_share() const {
    return comments ? static_cast<double>(pinned) / static_cast<double>(comments) : 0.0;
  }
};

struct LoadResult {
  std::vector<Discussion> discussions;
  std::vector<std::string> warnings;
  CorpusSummary summary;
};

// Parses and validates the corpus. Malformed lines and structural
// violations (cycles, pinned non-roots) throw; recoverable issues are
// warnings: comments for unknown discussions are skipped, orphaned comments
// (missing parent) are re-attached as roots to preserve vote mass.
LoadResult load_corpus(const CorpusManifest& manifest);

// Writes the same record format load_corpus consumes.
void write_corpus(const std::vector<Discussion>& discussions,
                  const std::filesystem::path& articles_path,
                  const std::filesystem::path& comments_path);

enum class Transform { None, Standardize, Log1p, Log1pStandardize };

// Per-comment explanatory table for external regression tools: long-tailed
// columns are log1p-transformed, numeric columns z-standardised (sample
// standard deviation). A zero-variance column throws, naming the column.
// When `phi_columns` is given, each entry adds a per-discussion constant
// column (e.g. the unit-interval ranking score of an attached policy run).
struct PhiAttachment {
  std::string column;                         // header name
  std::map<std::string, double> by_discussion;  // discussion_id -> value
};

void export_regression_table(const std::vector<Discussion>& discussions,
                             const FeatureTable& features,
                             const std::filesystem::path& out_path,
                             const std::map<std::string, Transform>& overrides = {},
                             const std::vector<PhiAttachment>& phi_columns = {});

}  // namespace commentrank
