#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xsema/core.hpp"

namespace xsema {

struct Dataset {
  std::vector<LabeledTransaction> items;
  std::map<std::string, std::size_t> source_manifest;  // file path -> record count

  std::size_t size() const noexcept { return items.size(); }

  /// Throws ErrorCode::DuplicateHash if the hash is already present.
  void add(LabeledTransaction t);

  /// Throws ErrorCode::SchemaViolation if any item has no label.
  void require_labeled() const;
};

/// One JSON object per line; blank lines are skipped. Errors carry the
/// 1-based line number.
Dataset load_labeled_jsonl(const std::filesystem::path& path);

void write_jsonl(const Dataset& ds, const std::filesystem::path& path);
std::string to_jsonl(const Dataset& ds);

struct MergeOptions {
  bool default_nt = false;
};

struct MergeResult {
  Dataset dataset;
  std::size_t updated = 0;
  std::vector<std::string> unmatched_rows;  // label rows with no dataset item
};

/// Applies a "hash,label,bridge" CSV. Items with no row keep their existing
/// label; items still unlabeled become NT with `default_nt` and raise
/// ErrorCode::MissingDefault without it. Also ConflictingLabel, ParseError,
/// SchemaViolation (bad header or row).
MergeResult merge_label_file(Dataset ds, const std::filesystem::path& labels, MergeOptions opts = {});

/// Cross-chain item count per bridge name.
std::map<std::string, std::size_t> bridge_counts(const Dataset& ds);

}  // namespace xsema
