#include "xsema/bundle.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace xsema {

namespace {

constexpr const char* kComponent = "classify";

}  // namespace

std::string_view to_string(FeatureMode m) noexcept {
  switch (m) {
    case FeatureMode::MotifOnly: return "motif-only";
    case FeatureMode::TextOnly: return "text-only";
    case FeatureMode::Fused: return "fused";
  }
  return "fused";
}

std::optional<FeatureMode> parse_feature_mode(std::string_view s) noexcept {
  if (s == "motif-only") return FeatureMode::MotifOnly;
  if (s == "text-only") return FeatureMode::TextOnly;
  if (s == "fused") return FeatureMode::Fused;
  return std::nullopt;
}

int feature_width(FeatureMode m) noexcept {
  switch (m) {
    case FeatureMode::MotifOnly: return kMotifSlots;
    case FeatureMode::TextOnly: return ProjectionHead::kProjection;
    case FeatureMode::Fused: return kFusedWidth;
  }
  return kFusedWidth;
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"feature_mode", std::string(to_string(mode))},
          {"provider", provider},
          {"projection", projection.to_json()},
          {"classifier", classifier.to_json()},
          {"max_tokens", max_tokens}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    if (auto m = j.find("feature_mode"); m != j.end()) {
      auto parsed = parse_feature_mode(m->get<std::string>());
      if (!parsed) throw Error(ErrorCode::ConfigInvalid, "eval", "unknown feature_mode " + m->dump());
      c.mode = *parsed;
    }
    if (auto p = j.find("provider"); p != j.end()) c.provider = *p;
    if (auto p = j.find("projection"); p != j.end()) c.projection = TrainingHyperparams::from_json(*p);
    if (auto p = j.find("classifier"); p != j.end()) c.classifier = ClassifierSpec::from_json(*p);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "eval", std::string("malformed pipeline config: ") + e.what());
  }
  if (c.max_tokens == 0) throw Error(ErrorCode::ConfigInvalid, "eval", "max_tokens must be >= 1");
  return c;
}

std::vector<MotifVector> motif_features(std::span<const TransactionMetadata> items, const MotifCatalog& catalog) {
  std::vector<MotifVector> out;
  out.reserve(items.size());
  const bool fast = catalog == default_catalog();
  for (const auto& m : items) {
    auto g = build_asset_graph(m);
    out.push_back(fast ? census_fast(g, catalog) : census_bruteforce(g, catalog));
  }
  return out;
}

Eigen::MatrixXd embed_items(std::span<const TransactionMetadata> items, const EmbeddingProvider& provider,
                            std::size_t max_tokens) {
  std::vector<std::string> texts;
  texts.reserve(items.size());
  for (const auto& m : items) texts.push_back(build_event_text(m, max_tokens).text);
  auto rows = provider.embed_batch(texts);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(items.size()), provider.dimension());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

Eigen::MatrixXd assemble_features(FeatureMode mode, const std::vector<MotifVector>& motifs,
                                  const Eigen::MatrixXd& messages) {
  const auto n = static_cast<Eigen::Index>(motifs.size());
  Eigen::MatrixXd x(n, feature_width(mode));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& mv = motifs[static_cast<std::size_t>(r)];
    switch (mode) {
      case FeatureMode::MotifOnly:
        x.row(r) = mv.cast<double>().transpose();
        break;
      case FeatureMode::TextOnly:
        x.row(r) = messages.row(r);
        break;
      case FeatureMode::Fused:
        x.row(r) = concat_features(mv, messages.row(r).transpose()).transpose();
        break;
    }
  }
  return x;
}

std::vector<TransactionMetadata> metadata_of(std::span<const LabeledTransaction> items) {
  std::vector<TransactionMetadata> out;
  out.reserve(items.size());
  for (const auto& t : items) out.push_back(t.metadata);
  return out;
}

std::vector<TxClass> labels_of(std::span<const LabeledTransaction> items) {
  std::vector<TxClass> out;
  out.reserve(items.size());
  for (const auto& t : items) {
    if (!t.label) throw Error(ErrorCode::SchemaViolation, "ingest", "transaction " + t.metadata.hash + " has no label");
    out.push_back(t.label->value());
  }
  return out;
}

ModelBundle train_bundle(std::span<const LabeledTransaction> train, const PipelineConfig& cfg,
                         const EmbeddingProvider* provider) {
  if (train.empty()) throw Error(ErrorCode::EmptyTrain, "eval", "no training items");
  const auto meta = metadata_of(train);
  const auto labels = labels_of(train);

  ModelBundle b;
  b.catalog = default_catalog();
  b.max_tokens = cfg.max_tokens;
  b.mode = cfg.mode;
  b.projection_hp = cfg.projection;

  const auto motifs = motif_features(meta, b.catalog);
  Eigen::MatrixXd messages;
  if (cfg.mode != FeatureMode::MotifOnly) {
    std::unique_ptr<EmbeddingProvider> owned;
    if (!provider) {
      owned = make_provider(cfg.provider);
      provider = owned.get();
    }
    b.provider = provider->descriptor();
    const Eigen::MatrixXd emb = embed_items(meta, *provider, cfg.max_tokens);
    b.head = train_projection(emb, labels, cfg.projection);
    messages = b.head->project(emb);
  } else {
    b.provider = nullptr;
  }
  const Eigen::MatrixXd raw = assemble_features(cfg.mode, motifs, messages);
  b.scaler = fit_scaler(raw);
  b.classifier = Classifier::fit(cfg.classifier, b.scaler.transform(raw), labels);
  return b;
}

Eigen::MatrixXd bundle_features(const ModelBundle& bundle, std::span<const TransactionMetadata> items,
                                const EmbeddingProvider* provider) {
  const auto motifs = motif_features(items, bundle.catalog);
  Eigen::MatrixXd messages;
  if (bundle.mode != FeatureMode::MotifOnly) {
    if (!bundle.head) throw Error(ErrorCode::CorruptBundle, kComponent, "bundle lacks a projection head");
    std::unique_ptr<EmbeddingProvider> owned;
    if (!provider) {
      owned = make_provider(bundle.provider);
      provider = owned.get();
    }
    if (provider->dimension() != bundle.head->input_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "encoder", "provider dimension does not match projection head");
    }
    messages = items.empty() ? Eigen::MatrixXd(0, ProjectionHead::kProjection)
                             : bundle.head->project(embed_items(items, *provider, bundle.max_tokens));
  }
  return assemble_features(bundle.mode, motifs, messages);
}

std::vector<TxClass> predict_bundle(const ModelBundle& bundle, std::span<const TransactionMetadata> items,
                                    const EmbeddingProvider* provider) {
  if (items.empty()) return {};
  return bundle.classifier.predict(bundle.scaler.transform(bundle_features(bundle, items, provider)));
}

nlohmann::json ModelBundle::to_json() const {
  return {{"format_version", format_version},
          {"catalog_version", catalog.catalog_version},
          {"catalog", catalog.to_json()},
          {"text", {{"max_tokens", max_tokens}, {"separator", separator}, {"tokenizer", "alnum-camel-digit-lower"}}},
          {"provider", provider},
          {"feature_mode", std::string(to_string(mode))},
          {"projection", head ? head_to_json(*head) : nlohmann::json(nullptr)},
          {"projection_training", projection_hp.to_json()},
          {"scaler", scaler_to_json(scaler)},
          {"classifier", classifier.to_json()}};
}

ModelBundle ModelBundle::from_json(const nlohmann::json& j) {
  ModelBundle b;
  try {
    b.format_version = j.at("format_version").get<std::string>();
    b.catalog = MotifCatalog::from_json(j.at("catalog"));
    const auto& text = j.at("text");
    b.max_tokens = text.at("max_tokens").get<std::size_t>();
    b.separator = text.at("separator").get<std::string>();
    b.provider = j.at("provider");
    auto mode = parse_feature_mode(j.at("feature_mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::CorruptBundle, kComponent, "unknown feature_mode");
    b.mode = *mode;
    if (!j.at("projection").is_null()) b.head = head_from_json(j.at("projection"));
    b.projection_hp = TrainingHyperparams::from_json(j.at("projection_training"));
    b.scaler = scaler_from_json(j.at("scaler"));
    b.classifier = Classifier::from_json(j.at("classifier"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptBundle, kComponent, std::string("malformed bundle: ") + e.what());
  }
  if (b.separator != kEventSeparator) {
    throw Error(ErrorCode::CorruptBundle, kComponent, "unsupported event separator '" + b.separator + "'");
  }
  return b;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, kComponent, "SHA-256 computation failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
  auto doc = bundle.to_json();
  doc["checksum"] = "sha256:" + sha256_hex(doc.dump());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, kComponent, "cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error(ErrorCode::IoError, kComponent, "write failure on " + path.string());
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, kComponent, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::CorruptBundle, kComponent, path.string() + ": unreadable bundle: " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::CorruptBundle, kComponent, path.string() + ": not a bundle");
  auto version = doc.find("format_version");
  if (version == doc.end() || !version->is_string() || version->get<std::string>() != kBundleFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, kComponent,
                "bundle format " + (version == doc.end() ? std::string("<none>") : version->dump()) +
                    ", this build reads " + kBundleFormatVersion);
  }
  auto checksum = doc.find("checksum");
  if (checksum == doc.end() || !checksum->is_string()) {
    throw Error(ErrorCode::CorruptBundle, kComponent, path.string() + ": missing checksum");
  }
  const auto expected = checksum->get<std::string>();
  doc.erase("checksum");
  if (expected != "sha256:" + sha256_hex(doc.dump())) {
    throw Error(ErrorCode::CorruptBundle, kComponent, path.string() + ": checksum mismatch");
  }
  return ModelBundle::from_json(doc);
}

}  // namespace xsema
