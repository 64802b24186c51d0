#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xsema/core.hpp"

namespace xsema {

struct EdgeProvenance {
  TransferKind kind;
  std::string value;
  std::optional<Address> token;

  friend bool operator==(const EdgeProvenance&, const EdgeProvenance&) = default;
};

/// Simple directed graph of the addresses that send or receive assets in one
/// transaction. Parallel transfers collapse into one edge with several
/// annotations; self-transfers are annotated on `self_transfers` only.
class AssetTransferGraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  AssetTransferGraph() = default;
  /// Builds a graph directly from node count and edges (tests, generators).
  /// Self-loops and duplicates are dropped.
  static AssetTransferGraph from_edges(std::size_t n, const std::vector<Edge>& edges);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Address>& nodes() const noexcept { return nodes_; }
  /// Sorted by (from, to).
  std::vector<Edge> edges() const;
  bool has_edge(std::size_t from, std::size_t to) const { return edges_.count({from, to}) > 0; }
  const std::vector<EdgeProvenance>& annotations(const Edge& e) const { return edges_.at(e); }
  std::size_t annotation_count() const noexcept;
  const std::vector<std::pair<std::size_t, EdgeProvenance>>& self_transfers() const noexcept {
    return self_transfers_;
  }

  /// "from_hex to_hex kind value" per annotation.
  std::string to_edge_list() const;

 private:
  friend AssetTransferGraph build_asset_graph(const TransactionMetadata& m);

  std::size_t intern(const Address& a);

  std::vector<Address> nodes_;
  std::map<std::string, std::size_t> index_;
  std::map<Edge, std::vector<EdgeProvenance>> edges_;
  std::vector<std::pair<std::size_t, EdgeProvenance>> self_transfers_;
};

/// Nodes in first-appearance order over et, it, erc20, erc721.
AssetTransferGraph build_asset_graph(const TransactionMetadata& m);

}  // namespace xsema
