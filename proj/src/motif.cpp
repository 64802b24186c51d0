#include "xsema/motif.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <unordered_map>

#include "xsema/error.hpp"

namespace xsema {

namespace {

constexpr const char* kComponent = "motif";

using IMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

bool has_bit(std::uint32_t sig, int k, int i, int j) { return (sig >> (i * k + j)) & 1U; }

std::uint32_t permute(std::uint32_t sig, int k, const std::array<int, 4>& perm) {
  std::uint32_t out = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (has_bit(sig, k, i, j)) out |= 1U << (perm[i] * k + perm[j]);
    }
  }
  return out;
}

template <typename F>
void for_each_permutation(int k, F&& f) {
  std::array<int, 4> perm{0, 1, 2, 3};
  do {
    f(perm);
  } while (std::next_permutation(perm.begin(), perm.begin() + k));
}

MotifCatalog make_default_catalog() {
  MotifCatalog c;
  c.catalog_version = kDefaultCatalogVersion;
  // u = 0, v = 1, w = 2
  c.slots = {
      {2, {{0, 1}}, "edge (one-way)"},
      {2, {{0, 1}, {1, 0}}, "mutual edge"},
      {3, {{0, 1}, {1, 2}, {2, 0}}, "M1 cyclic triangle"},
      {3, {{0, 1}, {1, 0}, {1, 2}, {2, 0}}, "M2 cycle with one mutual pair"},
      {3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 0}}, "M3 cycle with two mutual pairs"},
      {3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 0}, {0, 2}}, "M4 fully mutual triangle"},
      {3, {{0, 1}, {1, 2}, {0, 2}}, "M5 feed-forward loop"},
      {3, {{0, 1}, {1, 0}, {2, 0}, {2, 1}}, "M6 mutual pair fed by third"},
      {3, {{0, 1}, {1, 0}, {0, 2}, {1, 2}}, "M7 mutual pair feeding third"},
      {3, {{0, 1}, {0, 2}}, "M8 out-star"},
      {3, {{0, 1}, {2, 0}}, "M9 two-hop path"},
      {3, {{1, 0}, {2, 0}}, "M10 in-star"},
      {3, {{0, 1}, {1, 0}, {0, 2}}, "M11 mutual pair with out-edge"},
      {3, {{0, 1}, {1, 0}, {2, 0}}, "M12 mutual pair with in-edge"},
      {3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}}, "M13 two mutual pairs"},
      {4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}, "bi-fan"},
  };
  return c;
}

void check_cap(const AssetTransferGraph& g, std::size_t cap) {
  if (g.node_count() > cap) {
    throw Error(ErrorCode::GraphTooLarge, kComponent,
                "graph has " + std::to_string(g.node_count()) + " nodes, cap is " + std::to_string(cap));
  }
}

}  // namespace

std::uint32_t MotifPattern::signature() const {
  std::uint32_t sig = 0;
  for (const auto& [a, b] : edges) sig |= 1U << (a * node_count + b);
  return sig;
}

bool is_weakly_connected(std::uint32_t sig, int k) {
  std::uint32_t reached = 1U, frontier = 1U;
  while (frontier) {
    std::uint32_t next = 0;
    for (int i = 0; i < k; ++i) {
      if (!((frontier >> i) & 1U)) continue;
      for (int j = 0; j < k; ++j) {
        if (has_bit(sig, k, i, j) || has_bit(sig, k, j, i)) next |= 1U << j;
      }
    }
    frontier = next & ~reached;
    reached |= next;
  }
  return reached == (1U << k) - 1U;
}

bool is_isomorphic(std::uint32_t a, std::uint32_t b, int k) {
  bool found = false;
  for_each_permutation(k, [&](const auto& perm) { found = found || permute(a, k, perm) == b; });
  return found;
}

int automorphism_count(const MotifPattern& p) {
  int n = 0;
  auto sig = p.signature();
  for_each_permutation(p.node_count, [&](const auto& perm) { n += permute(sig, p.node_count, perm) == sig; });
  return n;
}

void MotifCatalog::validate() const {
  auto invalid = [](const std::string& msg) { return Error(ErrorCode::ConfigInvalid, kComponent, msg); };
  if (slots.size() != kMotifSlots) throw invalid("catalog must have exactly 16 slots");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& p = slots[i];
    if (p.node_count < 2 || p.node_count > 4) throw invalid("slot " + std::to_string(i + 1) + ": node_count");
    for (const auto& [a, b] : p.edges) {
      if (a < 0 || b < 0 || a >= p.node_count || b >= p.node_count || a == b) {
        throw invalid("slot " + std::to_string(i + 1) + ": bad edge");
      }
    }
    if (!is_weakly_connected(p.signature(), p.node_count)) {
      throw invalid("slot " + std::to_string(i + 1) + " is not weakly connected");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (slots[j].node_count == p.node_count &&
          is_isomorphic(slots[j].signature(), p.signature(), p.node_count)) {
        throw invalid("slots " + std::to_string(j + 1) + " and " + std::to_string(i + 1) + " are isomorphic");
      }
    }
  }
}

nlohmann::json MotifCatalog::to_json() const {
  nlohmann::json j;
  j["catalog_version"] = catalog_version;
  j["slots"] = nlohmann::json::array();
  for (const auto& p : slots) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : p.edges) edges.push_back({a, b});
    j["slots"].push_back({{"node_count", p.node_count}, {"edges", edges}, {"name", p.name}});
  }
  return j;
}

MotifCatalog MotifCatalog::from_json(const nlohmann::json& j) {
  MotifCatalog c;
  try {
    c.catalog_version = j.at("catalog_version").get<std::string>();
    for (const auto& s : j.at("slots")) {
      MotifPattern p;
      p.node_count = s.at("node_count").get<int>();
      p.name = s.value("name", std::string{});
      for (const auto& e : s.at("edges")) p.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      c.slots.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, kComponent, std::string("malformed catalog: ") + e.what());
  }
  c.validate();
  return c;
}

const MotifCatalog& default_catalog() {
  static const MotifCatalog catalog = make_default_catalog();
  return catalog;
}

MotifVector census_bruteforce(const AssetTransferGraph& g, const MotifCatalog& c, std::size_t node_cap) {
  check_cap(g, node_cap);
  const int n = static_cast<int>(g.node_count());
  MotifVector counts = MotifVector::Zero();
  if (n < 2) return counts;

  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const auto& [a, b] : g.edges()) adj[a][b] = true;

  // Every labeling of every slot, so lookups are a single hash probe.
  std::array<std::unordered_map<std::uint32_t, int>, 5> by_signature;
  for (int s = 0; s < static_cast<int>(c.slots.size()); ++s) {
    const auto& p = c.slots[s];
    for_each_permutation(p.node_count,
                         [&](const auto& perm) { by_signature[p.node_count][permute(p.signature(), p.node_count, perm)] = s; });
  }

  std::array<int, 4> pick{};
  auto visit = [&](int k) {
    std::uint32_t sig = 0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (i != j && adj[pick[i]][pick[j]]) sig |= 1U << (i * k + j);
      }
    }
    if (!is_weakly_connected(sig, k)) return;
    if (auto it = by_signature[k].find(sig); it != by_signature[k].end()) ++counts[it->second];
  };

  for (int k = 2; k <= 4 && k <= n; ++k) {
    // Lexicographic k-combinations of 0..n-1.
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      for (int i = 0; i < k; ++i) pick[i] = idx[i];
      visit(k);
      int i = k - 1;
      while (i >= 0 && idx[i] == n - k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return counts;
}

MotifVector census_fast(const AssetTransferGraph& g, const MotifCatalog& c, std::size_t node_cap) {
  if (!(c == default_catalog())) {
    throw Error(ErrorCode::UnsupportedCatalog, kComponent,
                "fast census supports only catalog " + std::string(kDefaultCatalogVersion));
  }
  check_cap(g, node_cap);
  const Eigen::Index n = static_cast<Eigen::Index>(g.node_count());
  MotifVector counts = MotifVector::Zero();
  if (n < 2) return counts;

  IMatrix adj = IMatrix::Zero(n, n);
  for (const auto& [a, b] : g.edges()) adj(a, b) = 1;
  const IMatrix mutual = adj.cwiseProduct(adj.transpose());
  const IMatrix oneway = adj - mutual;
  const IMatrix absent = (IMatrix::Ones(n, n) - adj).cwiseProduct(IMatrix::Ones(n, n) - adj.transpose()) -
                         IMatrix::Identity(n, n);

  counts[0] = oneway.sum();
  counts[1] = mutual.sum() / 2;

  // Each pair (a, b) of a labeled triad is one of mutual, one-way a->b,
  // one-way b->a, or absent. The ordered-triple count of a labeled triad is
  // trace(X_uv X_vw X_wu); dividing by the automorphism count gives subsets.
  const IMatrix oneway_t = oneway.transpose();
  auto pair_matrix = [&](std::uint32_t sig, int a, int b) -> const IMatrix& {
    bool ab = has_bit(sig, 3, a, b), ba = has_bit(sig, 3, b, a);
    if (ab && ba) return mutual;
    if (ab) return oneway;
    if (ba) return oneway_t;
    return absent;
  };
  for (int s = 2; s < 15; ++s) {
    const auto& p = c.slots[s];
    auto sig = p.signature();
    const IMatrix& uv = pair_matrix(sig, 0, 1);
    const IMatrix& vw = pair_matrix(sig, 1, 2);
    const IMatrix& wu = pair_matrix(sig, 2, 0);
    std::int64_t ordered = (uv * vw).cwiseProduct(wu.transpose()).sum();
    counts[s] = ordered / automorphism_count(p);
  }

  // Bi-fan: two non-adjacent sources with one-way edges into two
  // non-adjacent common sinks.
  const IMatrix co_out = oneway * oneway_t;
  std::int64_t bifans = 0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      if (co_out(a, b) < 2 || absent(a, b) == 0) continue;
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> common =
          oneway.row(a).cwiseProduct(oneway.row(b)).transpose();
      bifans += common.dot(absent * common) / 2;
    }
  }
  counts[15] = bifans;
  return counts;
}

}  // namespace xsema
