#include "xsema/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "xsema/classify.hpp"
#include "xsema/graph.hpp"
#include "xsema/motif.hpp"
#include "xsema/rpc.hpp"

namespace xsema {

namespace {

constexpr const char* kComponent = "synth";
constexpr int kBridgeWindow = 4;
constexpr double kExtraTransferRate = 0.3;
// Share of clean NT items whose graph copies a cross-chain target set, so
// that only their events tell them apart.
constexpr double kNtMimicRate = 0.25;

const char* const kTransferEvent = "Transfer(address from, address to, uint256 value)";
const char* const kApprovalEvent = "Approval(address owner, address spender, uint256 value)";

std::string random_hex(std::mt19937_64& rng, int digits) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "0x";
  for (int i = 0; i < digits; ++i) out += kHex[rng() & 0xf];
  return out;
}

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

// Disjoint union of small graphs on fresh addresses.
class GraphBuilder {
 public:
  GraphBuilder(std::mt19937_64& rng, int budget) : rng_(rng), budget_(budget) {}

  int nodes() const { return static_cast<int>(addresses_.size()); }
  bool fits(int k) const { return nodes() + k <= budget_; }

  void add(int k, const std::vector<std::pair<int, int>>& edges) {
    const int base = nodes();
    for (int i = 0; i < k; ++i) addresses_.push_back(random_hex(rng_, 40));
    for (auto [u, v] : edges) edges_.emplace_back(base + u, base + v);
  }

  void add_plain_edge() { add(2, {{0, 1}}); }

  // Random weakly connected digraph on 3 or 4 nodes.
  void add_random_digraph() {
    const int k = uniform(rng_, 3, 4);
    for (;;) {
      std::vector<std::pair<int, int>> edges;
      std::uint32_t sig = 0;
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          if (i != j && chance(rng_, 0.4)) {
            edges.emplace_back(i, j);
            sig |= 1u << (i * k + j);
          }
        }
      }
      if (edges.size() >= 2 && is_weakly_connected(sig, k)) {
        add(k, edges);
        return;
      }
    }
  }

  void emit(TransactionMetadata& m) {
    const auto token = Address::parse(random_hex(rng_, 40));
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      TransferEdgeRecord r{Address::parse(addresses_[static_cast<std::size_t>(edges_[i].first)]),
                           Address::parse(addresses_[static_cast<std::size_t>(edges_[i].second)]),
                           std::to_string(rng_() % 1000000000000000000ULL), TransferKind::External, std::nullopt};
      if (i == 0) {
        m.et.push_back(std::move(r));
      } else if (chance(rng_, 0.7)) {
        r.kind = TransferKind::Erc20;
        r.token = token;
        m.erc20.push_back(std::move(r));
      } else {
        r.kind = TransferKind::Internal;
        m.it.push_back(std::move(r));
      }
    }
  }

 private:
  std::mt19937_64& rng_;
  int budget_;
  std::vector<std::string> addresses_;
  std::vector<std::pair<int, int>> edges_;
};

std::string class_key(TxClass c) { return std::string(to_string(c)); }

TxClass class_from_key(const std::string& s) {
  auto c = parse_class(s);
  if (!c) throw Error(ErrorCode::ConfigInvalid, kComponent, "unknown class '" + s + "'");
  return *c;
}

}  // namespace

std::map<TxClass, std::vector<int>> SynthConfig::default_motif_targets() {
  // 0-based; slots 10, 11 and 13 in 1-based numbering for DT, slot 11 for WT.
  return {{TxClass::NT, {}}, {TxClass::DT, {9, 10, 12}}, {TxClass::WT, {10}}};
}

std::map<TxClass, std::vector<std::string>> SynthConfig::default_vocab() {
  return {
      {TxClass::DT,
       {"Deposit(address sender, uint256 amount, uint256 toChainId)",
        "FundsDeposited(uint256 amount, uint256 toChainId, address depositor, bytes32 transferId)",
        "Send(bytes32 transferId, address receiver, uint256 amount, uint64 toChainId)",
        "TokensSent(address token, uint256 amount, uint256 toChainId, bytes32 recipient)",
        "LogAnySwapOut(address token, address from, address to, uint256 amount, uint256 fromChainID, uint256 toChainId)",
        "TransferSent(bytes32 transferId, uint256 toChainId, address receiver, uint256 amount)",
        "SendToChain(uint256 toChainId, address to, uint256 amount, uint256 nonce)",
        "DepositInitiated(bytes32 transferId, address depositor, uint256 toChainId)"}},
      {TxClass::WT,
       {"Mint(bytes32 mintId, address receiver, uint256 value)",
        "UnlockEvent(address toAssetHash, address toAddress, uint256 value)",
        "Relay(bytes32 mintId, address receiver, uint256 value, uint64 srcChainId)",
        "TokensMinted(bytes32 mintId, address toAssetHash, uint256 value)",
        "LogAnySwapIn(bytes32 txhash, address toAssetHash, address to, uint256 value, uint256 fromChainID)",
        "WithdrawDone(bytes32 mintId, address toAssetHash, address toAddress, uint256 value)",
        "TokensReceived(bytes32 mintId, address receiver, uint256 value)",
        "FillRelay(address toAssetHash, bytes32 mintId, address recipient, uint256 value)"}},
      {TxClass::NT,
       {"Swap(address sender, address token, uint256 amountIn, uint256 amountOut)",
        "Approval(address owner, address spender, uint256 value, bool permit)",
        "Permit(address owner, address token, bool permit, uint256 deadline)",
        "Deposit(address token, uint256 wad)",
        "Sync(uint112 reserve0, uint112 reserve1)",
        "OrderFilled(bytes32 orderHash, address token, bool permit)",
        "Stake(address user, address token, uint256 amount)",
        "Claim(address user, address token, uint256 reward)"}},
  };
}

std::vector<std::string> SynthConfig::default_bridge_names() {
  return {"Allbridge core", "Celer cbridge", "Connext bridge",   "Multichain",   "Polybridge",
          "Stargate",       "Symbiosis",     "Synapse protocol", "Transit swap", "Wormhole"};
}

void SynthConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, kComponent, msg); };
  if (n_per_class < 1) bad("n_per_class must be >= 1");
  if (!(noise_rate >= 0.0 && noise_rate < 1.0)) bad("noise_rate must lie in [0, 1)");
  if (bridge_names.empty()) bad("bridge_names is empty");
  for (const auto& b : bridge_names) {
    if (b.empty()) bad("bridge names must be non-empty");
  }
  if (max_nodes < 2) bad("max_nodes must be >= 2");
  for (TxClass c : kAllClasses) {
    auto v = vocab.find(c);
    if (v == vocab.end() || v->second.empty()) bad("vocabulary for " + class_key(c) + " is empty");
    for (const auto& sig : v->second) parse_event_signature(sig);
  }
  for (const auto& [c, slots] : motif_targets) {
    for (int s : slots) {
      if (s < 0 || s >= kMotifSlots) bad("motif target " + std::to_string(s) + " outside 0.." + std::to_string(kMotifSlots - 1));
    }
  }
  for (TxClass c : {TxClass::DT, TxClass::WT}) {
    auto t = motif_targets.find(c);
    if (t == motif_targets.end() || t->second.empty()) bad("no motif targets for " + class_key(c));
  }
}

nlohmann::json SynthConfig::to_json() const {
  nlohmann::json targets = nlohmann::json::object();
  for (const auto& [c, slots] : motif_targets) targets[class_key(c)] = slots;
  nlohmann::json voc = nlohmann::json::object();
  for (const auto& [c, sigs] : vocab) voc[class_key(c)] = sigs;
  return {{"n_per_class", n_per_class}, {"motif_targets", targets}, {"vocab", voc},
          {"bridge_names", bridge_names}, {"noise_rate", noise_rate}, {"seed", seed},
          {"max_nodes", max_nodes}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  try {
    c.n_per_class = j.value("n_per_class", c.n_per_class);
    if (auto t = j.find("motif_targets"); t != j.end()) {
      c.motif_targets.clear();
      for (auto it = t->begin(); it != t->end(); ++it) c.motif_targets[class_from_key(it.key())] = it->get<std::vector<int>>();
    }
    if (auto v = j.find("vocab"); v != j.end()) {
      c.vocab.clear();
      for (auto it = v->begin(); it != v->end(); ++it) c.vocab[class_from_key(it.key())] = it->get<std::vector<std::string>>();
    }
    c.bridge_names = j.value("bridge_names", c.bridge_names);
    c.noise_rate = j.value("noise_rate", c.noise_rate);
    c.seed = j.value("seed", c.seed);
    c.max_nodes = j.value("max_nodes", c.max_nodes);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, kComponent, std::string("malformed synth config: ") + e.what());
  }
  return c;
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const auto& catalog = default_catalog();

  std::map<TxClass, std::vector<EventLogEntry>> pools;
  for (const auto& [c, sigs] : cfg.vocab) {
    for (const auto& s : sigs) pools[c].push_back(parse_event_signature(s));
  }
  const auto transfer_event = parse_event_signature(kTransferEvent);
  const auto approval_event = parse_event_signature(kApprovalEvent);

  auto targets_of = [&](TxClass c) {
    auto it = cfg.motif_targets.find(c);
    return it == cfg.motif_targets.end() ? std::vector<int>{} : it->second;
  };
  for (TxClass c : kAllClasses) {
    int need = 0;
    for (int s : targets_of(c)) need += catalog.slots[static_cast<std::size_t>(s)].node_count;
    if (need > cfg.max_nodes) {
      throw Error(ErrorCode::UnrealizableMotif, kComponent,
                  class_key(c) + " targets need " + std::to_string(need) + " nodes, budget is " +
                      std::to_string(cfg.max_nodes));
    }
  }

  Dataset ds;
  const int n = cfg.n_per_class;
  const int n_noisy = static_cast<int>(std::llround(cfg.noise_rate * n));
  const int n_bridges = static_cast<int>(cfg.bridge_names.size());

  for (TxClass c : kAllClasses) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(class_index(c))));
    const auto targets = targets_of(c);
    const auto& pool = pools.at(c);
    const int pool_size = static_cast<int>(pool.size());

    // 0 = clean, 1 = motif suppressed, 2 = text suppressed.
    std::vector<int> noise(static_cast<std::size_t>(n), 0);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (int k = 0; k < n_noisy; ++k) noise[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1 + k % 2;

    for (int i = 0; i < n; ++i) {
      const int mode = noise[static_cast<std::size_t>(i)];
      const int bridge = i % n_bridges;
      TransactionMetadata m;
      m.hash = random_hex(rng, 64);
      m.chain = c == TxClass::WT ? (i % 2 ? "pol" : "bsc") : "eth";

      GraphBuilder g(rng, cfg.max_nodes);
      if (mode == 1) {
        const int k = uniform(rng, 1, 3);
        for (int e = 0; e < k; ++e) g.add_plain_edge();
      } else if (!targets.empty() || (c == TxClass::NT && chance(rng, kNtMimicRate))) {
        const auto copied = targets.empty() ? targets_of(chance(rng, 0.5) ? TxClass::DT : TxClass::WT) : targets;
        for (int s : copied) {
          const auto& p = catalog.slots[static_cast<std::size_t>(s)];
          g.add(p.node_count, p.edges);
        }
        for (int s : copied) {
          const auto& p = catalog.slots[static_cast<std::size_t>(s)];
          if (chance(rng, 0.5) && g.fits(p.node_count)) g.add(p.node_count, p.edges);
        }
      } else {
        const int k = uniform(rng, 1, 3);
        for (int e = 0; e < k; ++e) {
          if (chance(rng, 0.5)) {
            const auto& p = catalog.slots[static_cast<std::size_t>(uniform(rng, 2, kMotifSlots - 1))];
            if (g.fits(p.node_count)) g.add(p.node_count, p.edges);
          } else if (g.fits(4)) {
            g.add_random_digraph();
          }
        }
      }
      const int extra = uniform(rng, 0, 2);
      for (int e = 0; e < extra && g.fits(2); ++e) g.add_plain_edge();
      if (g.nodes() == 0) g.add_plain_edge();
      g.emit(m);

      if (mode == 2) {
        const int k = uniform(rng, 1, 2);
        for (int e = 0; e < k; ++e) m.el.push_back(chance(rng, 0.5) ? transfer_event : approval_event);
      } else {
        const bool bridged = c != TxClass::NT;
        const int window = bridged ? std::min(kBridgeWindow, pool_size) : pool_size;
        const int k = uniform(rng, 1, 3);
        for (int e = 0; e < k; ++e) {
          const int slot = uniform(rng, 0, window - 1);
          m.el.push_back(pool[static_cast<std::size_t>(bridged ? (bridge + slot) % pool_size : slot)]);
        }
        if (chance(rng, kExtraTransferRate)) m.el.push_back(transfer_event);
      }

      m = validate_metadata(std::move(m));
      if (mode != 1 && !targets.empty()) {
        const auto census = census_bruteforce(build_asset_graph(m));
        for (int s : targets) {
          if (census[s] == 0) {
            throw Error(ErrorCode::UnrealizableMotif, kComponent,
                        "generated graph misses target slot " + std::to_string(s + 1));
          }
        }
      }

      std::optional<std::string> bridge_name;
      if (c != TxClass::NT) bridge_name = cfg.bridge_names[static_cast<std::size_t>(bridge)];
      ds.add(LabeledTransaction{std::move(m), Label(c, bridge_name)});
    }
  }
  ds.source_manifest["synthetic"] = ds.items.size();
  return ds;
}

}  // namespace xsema
