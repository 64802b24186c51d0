#include "xsema/graph.hpp"

#include <cstdio>

namespace xsema {

namespace {

Address synthetic_address(std::size_t i) {
  char buf[43];
  std::snprintf(buf, sizeof buf, "0x%040zx", i + 1);
  return Address::parse(buf);
}

}  // namespace

AssetTransferGraph AssetTransferGraph::from_edges(std::size_t n, const std::vector<Edge>& edges) {
  AssetTransferGraph g;
  for (std::size_t i = 0; i < n; ++i) g.intern(synthetic_address(i));
  for (const auto& [a, b] : edges) {
    if (a == b || a >= n || b >= n) continue;
    auto& ann = g.edges_[{a, b}];
    if (ann.empty()) ann.push_back({TransferKind::External, "0", std::nullopt});
  }
  return g;
}

std::size_t AssetTransferGraph::intern(const Address& a) {
  auto [it, inserted] = index_.emplace(a.hex(), nodes_.size());
  if (inserted) nodes_.push_back(a);
  return it->second;
}

std::vector<AssetTransferGraph::Edge> AssetTransferGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto& [e, _] : edges_) out.push_back(e);
  return out;
}

std::size_t AssetTransferGraph::annotation_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, ann] : edges_) n += ann.size();
  return n;
}

std::string AssetTransferGraph::to_edge_list() const {
  std::string out;
  for (const auto& [e, ann] : edges_) {
    for (const auto& p : ann) {
      out += nodes_[e.first].hex() + ' ' + nodes_[e.second].hex() + ' ' + std::string(to_string(p.kind)) + ' ' +
             p.value + '\n';
    }
  }
  return out;
}

AssetTransferGraph build_asset_graph(const TransactionMetadata& m) {
  AssetTransferGraph g;
  for (const auto* list : {&m.et, &m.it, &m.erc20, &m.erc721}) {
    for (const auto& r : *list) {
      auto from = g.intern(r.from);
      auto to = g.intern(r.to);
      EdgeProvenance p{r.kind, r.value, r.token};
      if (from == to) {
        g.self_transfers_.emplace_back(from, std::move(p));
      } else {
        g.edges_[{from, to}].push_back(std::move(p));
      }
    }
  }
  return g;
}

}  // namespace xsema
