#include <gtest/gtest.h>

#include <atomic>
#include <fstream>

#include "testing.hpp"
#include "xsema/eventtext.hpp"
#include "xsema/jsonio.hpp"
#include "xsema/rpc.hpp"

using namespace xsema;
using namespace xsema::testing;

namespace {

const std::string kWethDepositTopic = "0xe1fffcc4923d04b559f4d29a8bfc6cda04eb5b0d3c460751c2402c5c5cc9109c";
const std::string kFundsDepositedTopic = "0x4a4fc49abd237bfd7f4ac82d6c7a284c44daaf8f5e2a4e1be6e1a5c2b1e5f4a1";
const std::string kTransferTopic = "0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef";

std::string word(const std::string& addr) { return "0x" + std::string(24, '0') + addr.substr(2); }

struct NodeBehaviour {
  bool trace_supported = true;
  bool rate_limited = false;
  bool known = true;
};

// Minimal JSON-RPC node serving the Across deposit.
void node_routes(httplib::Server& s, const NodeBehaviour& b, std::atomic<int>& calls) {
  s.Post("/", [&b, &calls](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    if (b.rate_limited) {
      res.status = 429;
      return;
    }
    const auto j = nlohmann::json::parse(req.body);
    const auto method = j.at("method").get<std::string>();
    nlohmann::json reply = {{"jsonrpc", "2.0"}, {"id", j.at("id")}};
    if (method == "eth_getTransactionByHash") {
      reply["result"] = b.known ? nlohmann::json{{"hash", kFig3Hash},
                                                 {"from", "0x1E89000000000000000000000000000000005EBB"},
                                                 {"to", "0x4D9079Bb4165aeb4084c526a32695dCfd2F77381"},
                                                 {"value", "0x6f05b59d3b20000"}}
                                : nlohmann::json(nullptr);
    } else if (method == "eth_getTransactionReceipt") {
      reply["result"] = {
          {"status", "0x1"},
          {"logs",
           {{{"address", kWeth}, {"topics", {kWethDepositTopic, word(kRouter)}}, {"data", "0x6f05b59d3b20000"}},
            {{"address", kRouter}, {"topics", {kFundsDepositedTopic, "0x0a"}}, {"data", "0x"}},
            {{"address", kWeth}, {"topics", {"0x1234"}}, {"data", "0x"}}}}};
    } else if (method == "debug_traceTransaction") {
      if (!b.trace_supported) {
        reply["error"] = {{"code", -32601}, {"message", "the method debug_traceTransaction does not exist"}};
      } else {
        reply["result"] = {{"type", "CALL"},
                           {"from", kUser},
                           {"to", kRouter},
                           {"value", "0x6f05b59d3b20000"},
                           {"calls",
                            {{{"type", "CALL"}, {"from", kRouter}, {"to", kWeth}, {"value", "0x6f05b59d3b20000"}},
                             {{"type", "STATICCALL"}, {"from", kRouter}, {"to", kUser}, {"value", "0x1"}},
                             {{"type", "CALL"}, {"from", kRouter}, {"to", kUser}, {"value", "0x0"}}}}};
      }
    } else {
      reply["error"] = {{"code", -32601}, {"message", "method not found"}};
    }
    res.set_content(reply.dump(), "application/json");
  });
}

RpcProviderConfig live_config(const std::string& url) {
  RpcProviderConfig cfg;
  cfg.endpoint_url = url;
  cfg.trace_strategy = TraceStrategy::DebugTrace;
  cfg.timeout = 5;
  cfg.max_retries = 2;
  cfg.retry_backoff_ms = 1;
  cfg.event_registry[kFundsDepositedTopic] = parse_event_signature(
      "FundsDeposited(uint256 amount, uint256 originChainId, uint256 indexed destinationChainId, int64 relayerFeePct, "
      "uint32 indexed depositId, uint32 quoteTimestamp, address originToken, address recipient, "
      "address indexed depositor)");
  return cfg;
}

ErrorCode fetch_error(const RpcProviderConfig& cfg, const std::string& hash) {
  try {
    fetch_transaction_metadata(cfg, hash);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "fetch succeeded";
  return ErrorCode::ConfigInvalid;
}

}  // namespace

TEST(Fixture, EchoesFileThroughValidation) {
  RpcProviderConfig cfg;
  cfg.fixture_dir = fixture_dir();
  const auto m = fetch_transaction_metadata(cfg, kFig3Hash);
  std::ifstream in(fixture_dir() / (kFig3Hash + ".json"));
  EXPECT_EQ(m, metadata_from_json(nlohmann::json::parse(in)));
  ASSERT_EQ(m.et.size(), 1u);
  EXPECT_EQ(m.et[0].to.hex(), kRouter);
  EXPECT_EQ(m.et[0].value, "500000000000000000");
  ASSERT_EQ(m.el.size(), 2u);
  EXPECT_EQ(m.el[0].name, "Deposit");
  EXPECT_EQ(m.el[1].name, "FundsDeposited");
}

TEST(Fixture, Deterministic) {
  RpcProviderConfig cfg;
  cfg.fixture_dir = fixture_dir();
  RpcProvider p(cfg);
  EXPECT_EQ(p.fetch(kFig3Hash), p.fetch(kFig3Hash));
}

TEST(Fixture, UnknownHash) {
  RpcProviderConfig cfg;
  cfg.fixture_dir = fixture_dir();
  EXPECT_EQ(fetch_error(cfg, tx_hash(1)), ErrorCode::TxNotFound);
}

TEST(Config, Validation) {
  RpcProviderConfig cfg;
  EXPECT_THROW(cfg.validate(), Error);  // fixture mode without a directory
  cfg.trace_strategy = TraceStrategy::DebugTrace;
  EXPECT_THROW(cfg.validate(), Error);  // no endpoint
  cfg.endpoint_url = "http://127.0.0.1:1";
  EXPECT_NO_THROW(cfg.validate());
  cfg.trace_strategy = TraceStrategy::IndexerApi;
  EXPECT_THROW(cfg.validate(), Error);
  try {
    RpcProviderConfig::from_json({{"trace_strategy", "psychic"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
  }
}

TEST(EventSignature, Parses) {
  const auto e = parse_event_signature("Transfer(address indexed from, address indexed to, uint256 value)");
  EXPECT_EQ(e.name, "Transfer");
  ASSERT_EQ(e.params.size(), 3u);
  EXPECT_EQ(e.params[0].type, "address");
  EXPECT_EQ(e.params[0].name, "from");
  EXPECT_EQ(parse_event_signature("Sync(uint112,uint112)").params[1].name, "arg1");
  EXPECT_TRUE(parse_event_signature("Paused()").params.empty());
}

TEST(HexToDecimal, Converts) {
  EXPECT_EQ(hex_to_decimal("0x6f05b59d3b20000"), "500000000000000000");
  EXPECT_EQ(hex_to_decimal("0x0"), "0");
  EXPECT_EQ(hex_to_decimal("0xffffffffffffffffffffffffffffffff"), "340282366920938463463374607431768211455");
}

TEST(Live, AcrossDepositThroughFakeNode) {
  NodeBehaviour b;
  std::atomic<int> calls{0};
  FakeServer node([&](httplib::Server& s) { node_routes(s, b, calls); });
  const auto m = fetch_transaction_metadata(live_config(node.url()), kFig3Hash);

  ASSERT_EQ(m.et.size(), 1u);
  EXPECT_EQ(m.et[0].from.hex(), kUser);
  EXPECT_EQ(m.et[0].to.hex(), kRouter);
  EXPECT_EQ(m.et[0].value, "500000000000000000");
  ASSERT_EQ(m.it.size(), 1u);  // static and zero-value calls skipped
  EXPECT_EQ(m.it[0].to.hex(), kWeth);
  ASSERT_EQ(m.el.size(), 2u);  // undecodable topic skipped
  EXPECT_EQ(m.el[0].name, "Deposit");
  EXPECT_EQ(m.el[1].name, "FundsDeposited");
  EXPECT_EQ(m.el[1].contract->hex(), kRouter);
  EXPECT_EQ(build_event_text(m).text.rfind("Deposit(address dst, uint256 wad); FundsDeposited(", 0), 0u);
  EXPECT_EQ(calls.load(), 3);
}

TEST(Live, Erc20AndErc721Logs) {
  std::atomic<int> calls{0};
  FakeServer node([&](httplib::Server& s) {
    s.Post("/", [&](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      const auto j = nlohmann::json::parse(req.body);
      const auto method = j.at("method").get<std::string>();
      nlohmann::json reply = {{"jsonrpc", "2.0"}, {"id", 1}};
      if (method == "eth_getTransactionByHash") {
        reply["result"] = {{"from", kUser}, {"to", kRouter}, {"value", "0x0"}};
      } else {
        reply["result"] = {
            {"logs",
             {{{"address", kWeth}, {"topics", {kTransferTopic, word(kUser), word(kRouter)}}, {"data", "0x0de0b6b3a7640000"}},
              {{"address", address(5)},
               {"topics", {kTransferTopic, word(kRouter), word(kUser), "0x" + std::string(63, '0') + "7"}},
               {"data", "0x"}}}}};
      }
      res.set_content(reply.dump(), "application/json");
    });
  });
  auto cfg = live_config(node.url());
  cfg.trace_strategy = TraceStrategy::IndexerApi;
  FakeServer indexer([](httplib::Server& s) {
    s.Get("/api", [](const httplib::Request& req, httplib::Response& res) {
      EXPECT_EQ(req.get_param_value("action"), "txlistinternal");
      res.set_content(nlohmann::json{{"status", "1"}, {"result", {{{"from", kRouter}, {"to", kWeth}, {"value", "12"}}}}}.dump(),
                      "application/json");
    });
  });
  cfg.indexer_url = indexer.url() + "/api";
  const auto m = fetch_transaction_metadata(cfg, kFig3Hash);
  ASSERT_EQ(m.erc20.size(), 1u);
  EXPECT_EQ(m.erc20[0].value, "1000000000000000000");
  EXPECT_EQ(m.erc20[0].token->hex(), kWeth);
  ASSERT_EQ(m.erc721.size(), 1u);
  EXPECT_EQ(m.erc721[0].from.hex(), kRouter);
  ASSERT_EQ(m.it.size(), 1u);
  EXPECT_EQ(m.it[0].value, "12");
  EXPECT_EQ(m.el.size(), 2u);  // both decode as Transfer
}

TEST(Live, TraceUnsupported) {
  NodeBehaviour b;
  b.trace_supported = false;
  std::atomic<int> calls{0};
  FakeServer node([&](httplib::Server& s) { node_routes(s, b, calls); });
  EXPECT_EQ(fetch_error(live_config(node.url()), kFig3Hash), ErrorCode::TraceUnsupported);
}

TEST(Live, UnknownTransaction) {
  NodeBehaviour b;
  b.known = false;
  std::atomic<int> calls{0};
  FakeServer node([&](httplib::Server& s) { node_routes(s, b, calls); });
  EXPECT_EQ(fetch_error(live_config(node.url()), kFig3Hash), ErrorCode::TxNotFound);
}

TEST(Live, RateLimitedAfterRetries) {
  NodeBehaviour b;
  b.rate_limited = true;
  std::atomic<int> calls{0};
  FakeServer node([&](httplib::Server& s) { node_routes(s, b, calls); });
  EXPECT_EQ(fetch_error(live_config(node.url()), kFig3Hash), ErrorCode::RateLimited);
  EXPECT_EQ(calls.load(), 3);  // first attempt + 2 retries
}

TEST(Live, NetworkFailure) {
  auto cfg = live_config("http://127.0.0.1:1");
  cfg.max_retries = 0;
  EXPECT_EQ(fetch_error(cfg, kFig3Hash), ErrorCode::NetworkError);
}

TEST(Live, SharedAcrossThreads) {
  NodeBehaviour b;
  std::atomic<int> calls{0};
  FakeServer node([&](httplib::Server& s) { node_routes(s, b, calls); });
  const RpcProvider provider(live_config(node.url()));
  std::vector<TransactionMetadata> results(4);
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < results.size(); ++i) {
    workers.emplace_back([&, i] { results[i] = provider.fetch(kFig3Hash); });
  }
  for (auto& w : workers) w.join();
  for (const auto& r : results) EXPECT_EQ(r, results[0]);
}
