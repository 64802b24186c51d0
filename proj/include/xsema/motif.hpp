#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "xsema/graph.hpp"

namespace xsema {

inline constexpr int kMotifSlots = 16;
inline constexpr std::size_t kDefaultNodeCap = 512;
inline constexpr const char* kDefaultCatalogVersion = "xsema-v1";

/// Slot i (0-based) holds the number of node subsets whose induced subgraph
/// is isomorphic to catalog slot i.
using MotifVector = Eigen::Matrix<std::int64_t, kMotifSlots, 1>;

struct MotifPattern {
  int node_count = 0;
  /// Directed edges over labeled slots 0..node_count-1.
  std::vector<std::pair<int, int>> edges;
  std::string name;

  /// Row-major adjacency bitmask, bit (i * node_count + j) set for i->j.
  std::uint32_t signature() const;

  friend bool operator==(const MotifPattern&, const MotifPattern&) = default;
};

struct MotifCatalog {
  std::vector<MotifPattern> slots;
  std::string catalog_version;

  /// Exactly 16 weakly connected, pairwise non-isomorphic patterns on 2-4
  /// nodes. Throws ErrorCode::ConfigInvalid.
  void validate() const;

  nlohmann::json to_json() const;
  static MotifCatalog from_json(const nlohmann::json& j);

  friend bool operator==(const MotifCatalog&, const MotifCatalog&) = default;
};

/// "xsema-v1": slot 1 one-way edge, slot 2 reciprocal pair, slots 3-15 the
/// 13 connected triads in the usual M1..M13 numbering, slot 16
/// the bi-fan.
const MotifCatalog& default_catalog();

/// Weak connectivity of a k-node pattern given by its adjacency bitmask.
bool is_weakly_connected(std::uint32_t signature, int k);

/// Induced-subgraph isomorphism between two k-node adjacency bitmasks, by
/// trying every relabeling.
bool is_isomorphic(std::uint32_t a, std::uint32_t b, int k);

/// Number of relabelings that map the pattern onto itself.
int automorphism_count(const MotifPattern& p);

/// Enumerates every 2-, 3- and 4-node subset. Reference implementation.
MotifVector census_bruteforce(const AssetTransferGraph& g, const MotifCatalog& c = default_catalog(),
                              std::size_t node_cap = kDefaultNodeCap);

/// Matrix route over the one-way/mutual/absent decomposition of the
/// adjacency. Only the default catalog is supported.
MotifVector census_fast(const AssetTransferGraph& g, const MotifCatalog& c = default_catalog(),
                        std::size_t node_cap = kDefaultNodeCap);

}  // namespace xsema
