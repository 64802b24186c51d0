#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "xsema/core.hpp"
#include "xsema/ingest.hpp"

namespace xsema {

struct SynthConfig {
  int n_per_class = 100;
  /// 0-based catalog slots each class's transfer graphs must induce. An
  /// empty NT entry means random patterns and random small digraphs, with a
  /// quarter of clean NT items copying the DT or WT targets instead.
  std::map<TxClass, std::vector<int>> motif_targets = default_motif_targets();
  /// Event signatures "Name(type name, ...)" per class. Each bridge draws
  /// from a window of four consecutive templates of its class pool.
  std::map<TxClass, std::vector<std::string>> vocab = default_vocab();
  std::vector<std::string> bridge_names = default_bridge_names();
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
  /// Node budget per transfer graph.
  int max_nodes = 24;

  void validate() const;
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);

  static std::map<TxClass, std::vector<int>> default_motif_targets();
  static std::map<TxClass, std::vector<std::string>> default_vocab();
  static std::vector<std::string> default_bridge_names();
};

/// Items come out class by class (NT, DT, WT). Noisy items, round(noise_rate
/// * n_per_class) per class, alternately lose their motif signal (targets
/// replaced by plain transfers) or their text signal (events replaced by
/// generic Transfer/Approval logs). Throws ErrorCode::ConfigInvalid,
/// UnrealizableMotif.
Dataset generate_synthetic(const SynthConfig& cfg);

}  // namespace xsema
