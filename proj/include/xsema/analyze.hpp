#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "xsema/core.hpp"
#include "xsema/ingest.hpp"
#include "xsema/motif.hpp"

namespace xsema {

struct MotifProfile {
  std::array<Eigen::Matrix<double, kMotifSlots, 1>, kNumClasses> means;
  /// Slot total over class total; all zero when the class total is zero.
  std::array<Eigen::Matrix<double, kMotifSlots, 1>, kNumClasses> shares;
  std::array<std::int64_t, kNumClasses> samples{};

  /// 0-based slots among `candidates` ordered by share, descending; ties go
  /// to the lower slot.
  std::vector<int> top_slots(TxClass c, std::size_t k, std::span<const int> candidates = {}) const;

  /// class,kind,m1..m16 with one "mean" and one "share" row per class.
  std::string to_csv() const;
};

/// Throws ErrorCode::EmptyInput, LengthMismatch.
MotifProfile motif_profile(std::span<const MotifVector> features, std::span<const TxClass> labels);
MotifProfile motif_profile(const Dataset& ds);

using TermCounts = std::map<std::string, std::int64_t>;

struct TermProfile {
  std::array<TermCounts, kNumClasses> counts;

  /// Descending count, then lexicographic.
  std::vector<std::pair<std::string, std::int64_t>> ranked(TxClass c) const;
  /// 1-based rank of `term` in class `c`, 0 if absent.
  std::size_t rank_of(TxClass c, const std::string& term) const;

  /// {"NT": [[term, count], ...], "DT": ..., "WT": ...}
  nlohmann::json to_json() const;
};

/// Raw event names and parameter names per class. Throws ErrorCode::EmptyInput.
TermProfile term_profile(const Dataset& ds);

}  // namespace xsema
