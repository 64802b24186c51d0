#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "xsema/classify.hpp"
#include "xsema/encoder.hpp"
#include "xsema/fuse.hpp"
#include "xsema/motif.hpp"

namespace xsema {

inline constexpr const char* kBundleFormatVersion = "v1";

/// Which half of the representation reaches the classifier. MotifOnly is
/// the structure-only baseline.
enum class FeatureMode { MotifOnly, TextOnly, Fused };

std::string_view to_string(FeatureMode m) noexcept;
std::optional<FeatureMode> parse_feature_mode(std::string_view s) noexcept;
int feature_width(FeatureMode m) noexcept;

struct PipelineConfig {
  FeatureMode mode = FeatureMode::Fused;
  nlohmann::json provider = {{"kind", "hashing"}, {"dimension", 512}, {"seed", 0}};
  TrainingHyperparams projection;
  ClassifierSpec classifier;
  std::size_t max_tokens = kDefaultMaxTokens;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
};

/// Everything prediction needs besides raw metadata.
struct ModelBundle {
  std::string format_version = kBundleFormatVersion;
  MotifCatalog catalog;
  std::size_t max_tokens = kDefaultMaxTokens;
  std::string separator{kEventSeparator};
  nlohmann::json provider;
  FeatureMode mode = FeatureMode::Fused;
  std::optional<ProjectionHead> head;
  TrainingHyperparams projection_hp;
  FeatureScaler scaler;
  Classifier classifier;

  /// Document without the checksum field.
  nlohmann::json to_json() const;
  static ModelBundle from_json(const nlohmann::json& j);
};

/// Census per item (fast route on the default catalog).
std::vector<MotifVector> motif_features(std::span<const TransactionMetadata> items,
                                        const MotifCatalog& catalog = default_catalog());

/// One embedding row per item from the truncated event text.
Eigen::MatrixXd embed_items(std::span<const TransactionMetadata> items, const EmbeddingProvider& provider,
                            std::size_t max_tokens = kDefaultMaxTokens);

/// Unscaled classifier input: motif counts, projections, or both.
Eigen::MatrixXd assemble_features(FeatureMode mode, const std::vector<MotifVector>& motifs,
                                  const Eigen::MatrixXd& messages);

std::vector<TransactionMetadata> metadata_of(std::span<const LabeledTransaction> items);
std::vector<TxClass> labels_of(std::span<const LabeledTransaction> items);

/// Fits projection head (when text is used), scaler and classifier on the
/// given items only. `provider` overrides the configured descriptor.
ModelBundle train_bundle(std::span<const LabeledTransaction> train, const PipelineConfig& cfg,
                         const EmbeddingProvider* provider = nullptr);

/// Unscaled feature rows for `items` as the bundle sees them.
Eigen::MatrixXd bundle_features(const ModelBundle& bundle, std::span<const TransactionMetadata> items,
                                const EmbeddingProvider* provider = nullptr);

std::vector<TxClass> predict_bundle(const ModelBundle& bundle, std::span<const TransactionMetadata> items,
                                    const EmbeddingProvider* provider = nullptr);

/// Single JSON document carrying a SHA-256 checksum of its content.
void save_model(const ModelBundle& bundle, const std::filesystem::path& path);

/// Throws ErrorCode::IoError, VersionMismatch, CorruptBundle.
ModelBundle load_model(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

}  // namespace xsema
