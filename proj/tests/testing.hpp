#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <Eigen/Core>

// After Eigen: resolv.h (pulled in by httplib) defines a _res macro.
#include <httplib.h>

#include "xsema/core.hpp"
#include "xsema/graph.hpp"
#include "xsema/jsonio.hpp"

namespace xsema::testing {

inline const std::string kFig3Hash = "0x00f2f49162f5f31e2419085f37b282a66d5ef1076e97fa21d5223fe215cca46b";
inline const std::string kUser = "0x1e89000000000000000000000000000000005ebb";
inline const std::string kRouter = "0x4d9079bb4165aeb4084c526a32695dcfd2f77381";
inline const std::string kWeth = "0xc02aaa39b223fe8d0a0e5c4f27ead9083c756cc2";

inline std::filesystem::path fixture_dir() { return XSEMA_FIXTURE_DIR; }

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("xsema-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string address(int i) {
  std::string digits = std::to_string(i);
  return "0x" + std::string(40 - digits.size(), '0') + digits;
}

inline std::string tx_hash(int i) {
  std::string digits = std::to_string(i);
  return "0x" + std::string(64 - digits.size(), 'a') + digits;
}

inline TransferEdgeRecord transfer(const std::string& from, const std::string& to, TransferKind kind,
                                   std::string value = "1") {
  TransferEdgeRecord r{Address::parse(from), Address::parse(to), std::move(value), kind, std::nullopt};
  if (kind == TransferKind::Erc20 || kind == TransferKind::Erc721) r.token = Address::parse(address(999));
  return r;
}

inline EventLogEntry event(std::string name, std::vector<std::pair<std::string, std::string>> params) {
  EventLogEntry e;
  e.name = std::move(name);
  for (auto& [t, n] : params) e.params.push_back({t, n});
  return e;
}

inline TransactionMetadata fig3_metadata() {
  TransactionMetadata m;
  m.hash = kFig3Hash;
  m.chain = "eth";
  m.et.push_back(transfer(kUser, kRouter, TransferKind::External, "500000000000000000"));
  m.it.push_back(transfer(kRouter, kWeth, TransferKind::Internal, "500000000000000000"));
  m.el.push_back(event("Deposit", {{"address", "dst"}, {"uint256", "wad"}}));
  m.el.push_back(event("FundsDeposited", {{"uint256", "amount"}, {"uint256", "destinationChainId"}}));
  return m;
}

/// Metadata whose external-transfer list realizes the given digraph.
inline TransactionMetadata metadata_from_edges(int id, const std::vector<std::pair<int, int>>& edges) {
  TransactionMetadata m;
  m.hash = tx_hash(id);
  m.chain = "eth";
  for (auto [u, v] : edges) m.et.push_back(transfer(address(u + 1), address(v + 1), TransferKind::External));
  return m;
}

/// G(n, p) digraph without self-loops.
inline AssetTransferGraph random_digraph(std::mt19937_64& rng, int n, double p) {
  std::bernoulli_distribution coin(p);
  std::vector<AssetTransferGraph::Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && coin(rng)) edges.emplace_back(i, j);
    }
  }
  return AssetTransferGraph::from_edges(static_cast<std::size_t>(n), edges);
}

/// httplib server on an ephemeral loopback port, serving until destroyed.
class FakeServer {
 public:
  explicit FakeServer(const std::function<void(httplib::Server&)>& routes) {
    routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  FakeServer(const FakeServer&) = delete;
  FakeServer& operator=(const FakeServer&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace xsema::testing
