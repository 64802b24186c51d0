#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "xsema/bundle.hpp"
#include "xsema/core.hpp"
#include "xsema/ingest.hpp"

namespace xsema {

/// Counts indexed (true class, predicted class) over NT, DT, WT.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, kNumClasses, kNumClasses> counts = decltype(counts)::Zero();

  std::int64_t total() const { return counts.sum(); }
  std::int64_t tp(TxClass c) const;
  std::int64_t fp(TxClass c) const;
  std::int64_t fn(TxClass c) const;
  std::int64_t tn(TxClass c) const;

  nlohmann::json to_json() const;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct MetricsReport {
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double accuracy = 0.0;
  double f1_macro = 0.0;
  std::array<ClassScores, kNumClasses> per_class{};
  ConfusionMatrix confusion;

  nlohmann::json to_json() const;
};

/// Empty denominators score 0. Throws ErrorCode::LengthMismatch, EmptyInput.
MetricsReport compute_metrics(std::span<const TxClass> y_true, std::span<const TxClass> y_pred);

enum class SplitMode { Generality, Generalizability };

std::string_view to_string(SplitMode m) noexcept;
std::optional<SplitMode> parse_split_mode(std::string_view s) noexcept;

/// The four bridges the unseen-bridge protocol trains on.
std::vector<std::string> default_train_bridges();

struct SplitPlan {
  SplitMode mode = SplitMode::Generality;
  double test_fraction = 0.2;
  std::vector<std::string> train_bridges = default_train_bridges();
  /// Empty means every bridge outside train_bridges. When given, cross-chain
  /// items of unlisted bridges are left out of both sides.
  std::vector<std::string> test_bridges;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static SplitPlan from_json(const nlohmann::json& j);
};

/// Ascending dataset indices.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Each (class, bridge) cell is shuffled and cut separately; a cell of n
/// items sends round(n * f) to test, clamped so that train keeps at least
/// one item and test gets one whenever n >= 2. Throws ErrorCode::EmptyDataset.
Split split_generality(const Dataset& ds, const SplitPlan& plan);

/// Cross-chain items go by bridge; NT is cut like a single generality cell.
/// Throws ErrorCode::EmptyDataset, EmptyTrainBridges, BridgeOverlap,
/// SchemaViolation (cross-chain item without a bridge).
Split split_generalizability(const Dataset& ds, const SplitPlan& plan);

Split make_split(const Dataset& ds, const SplitPlan& plan);

std::vector<LabeledTransaction> subset(const Dataset& ds, std::span<const std::size_t> indices);

struct ExperimentConfig {
  std::string dataset;
  PipelineConfig pipeline;
  SplitPlan split;
  /// When set, replaces the split, projection and classifier seeds.
  std::optional<std::uint64_t> seed;

  /// Copy with the top-level seed pushed into every component.
  ExperimentConfig resolved() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
};

struct BridgeScore {
  std::int64_t total = 0;
  std::int64_t correct = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct ExperimentReport {
  nlohmann::json config;  // effective (resolved) configuration
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  MetricsReport metrics;
  std::map<std::string, BridgeScore> per_bridge;  // cross-chain test items only
  std::map<std::string, double> timing_seconds;
  std::optional<ModelBundle> bundle;  // not serialized

  /// Timing sits under its own "timing" key and is omitted when
  /// `with_timing` is false, leaving the deterministic part.
  nlohmann::json to_json(bool with_timing = true) const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Featurize, fit projection, scaler and classifier on train only, evaluate
/// on test. `ds` overrides loading cfg.dataset; `provider` overrides the
/// configured embedding descriptor.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset* ds = nullptr,
                                const EmbeddingProvider* provider = nullptr);

/// "hash,label,bridge,f1..fk". Without a bundle the columns are the raw
/// motif counts m1..m16.
std::string feature_csv(const Dataset& ds, const ModelBundle* bundle = nullptr,
                        const EmbeddingProvider* provider = nullptr);

}  // namespace xsema
