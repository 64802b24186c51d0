#include "xsema/rpc.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <thread>

#include "http_util.hpp"
#include "xsema/jsonio.hpp"

namespace xsema {

namespace {

constexpr const char* kComponent = "ingest";
constexpr const char* kTransferTopic = "0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef";

std::map<std::string, EventLogEntry> builtin_registry() {
  return {
      {kTransferTopic, parse_event_signature("Transfer(address from, address to, uint256 value)")},
      {"0x8c5be1e5ebec7d5bd14f71427d1e84f3dd0314c0f7b2291e5b200ac8c7c3b925",
       parse_event_signature("Approval(address owner, address spender, uint256 value)")},
      {"0xe1fffcc4923d04b559f4d29a8bfc6cda04eb5b0d3c460751c2402c5c5cc9109c",
       parse_event_signature("Deposit(address dst, uint256 wad)")},
      {"0x7fcf532c15f0a6db0bd6d0e038bea71d30d808c7d98cb3bf7268a95bf5081b65",
       parse_event_signature("Withdrawal(address src, uint256 wad)")},
  };
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Topic words carry addresses right-aligned in 32 bytes.
Address address_from_word(std::string_view word) {
  if (word.size() < 42) throw Error(ErrorCode::SchemaViolation, kComponent, "short topic word");
  return Address::parse("0x" + std::string(word.substr(word.size() - 40)));
}

bool is_rate_limit(const nlohmann::json& err) {
  if (!err.is_object()) return false;
  auto code = err.value("code", 0);
  auto msg = lower(err.value("message", std::string{}));
  return code == -32005 || code == 429 || msg.find("rate limit") != std::string::npos ||
         msg.find("too many requests") != std::string::npos;
}

bool is_method_unsupported(const nlohmann::json& err) {
  if (!err.is_object()) return false;
  auto code = err.value("code", 0);
  auto msg = lower(err.value("message", std::string{}));
  return code == -32601 || msg.find("not supported") != std::string::npos ||
         msg.find("does not exist") != std::string::npos || msg.find("not available") != std::string::npos;
}

void collect_internal_calls(const nlohmann::json& frame, bool is_root, std::vector<TransferEdgeRecord>& out) {
  if (!frame.is_object()) return;
  if (!is_root) {
    auto type = frame.value("type", std::string("CALL"));
    auto value = frame.find("value");
    if (value != frame.end() && value->is_string() && type != "DELEGATECALL" && type != "STATICCALL") {
      auto dec = hex_to_decimal(value->get<std::string>());
      if (dec != "0" && frame.contains("from") && frame.contains("to") && frame["to"].is_string()) {
        out.push_back({Address::parse(frame["from"].get<std::string>()),
                       Address::parse(frame["to"].get<std::string>()), dec, TransferKind::Internal, std::nullopt});
      }
    }
  }
  if (auto calls = frame.find("calls"); calls != frame.end() && calls->is_array()) {
    for (const auto& c : *calls) collect_internal_calls(c, false, out);
  }
}

}  // namespace

std::string_view to_string(TraceStrategy s) noexcept {
  switch (s) {
    case TraceStrategy::DebugTrace: return "debug-trace";
    case TraceStrategy::IndexerApi: return "indexer-api";
    case TraceStrategy::Fixture: return "fixture";
  }
  return "fixture";
}

std::optional<TraceStrategy> parse_trace_strategy(std::string_view s) noexcept {
  if (s == "debug-trace") return TraceStrategy::DebugTrace;
  if (s == "indexer-api") return TraceStrategy::IndexerApi;
  if (s == "fixture") return TraceStrategy::Fixture;
  return std::nullopt;
}

void RpcProviderConfig::validate() const {
  auto invalid = [](const std::string& msg) { return Error(ErrorCode::ConfigInvalid, kComponent, msg); };
  if (!(timeout > 0)) throw invalid("timeout must be > 0");
  if (max_retries < 0) throw invalid("max_retries must be >= 0");
  if (trace_strategy == TraceStrategy::Fixture && fixture_dir.empty()) {
    throw invalid("fixture mode requires fixture_dir");
  }
  if (trace_strategy != TraceStrategy::Fixture && endpoint_url.empty()) {
    throw invalid("live mode requires endpoint_url");
  }
  if (trace_strategy == TraceStrategy::IndexerApi && indexer_url.empty()) {
    throw invalid("indexer-api mode requires indexer_url");
  }
}

RpcProviderConfig RpcProviderConfig::from_json(const nlohmann::json& j) {
  RpcProviderConfig cfg;
  cfg.endpoint_url = j.value("endpoint_url", std::string{});
  if (auto s = j.find("trace_strategy"); s != j.end()) {
    auto parsed = parse_trace_strategy(s->get<std::string>());
    if (!parsed) throw Error(ErrorCode::ConfigInvalid, kComponent, "unknown trace_strategy");
    cfg.trace_strategy = *parsed;
  }
  cfg.timeout = j.value("timeout", cfg.timeout);
  cfg.max_retries = j.value("max_retries", cfg.max_retries);
  cfg.retry_backoff_ms = j.value("retry_backoff_ms", cfg.retry_backoff_ms);
  cfg.chain = j.value("chain", cfg.chain);
  cfg.fixture_dir = j.value("fixture_dir", std::string{});
  cfg.indexer_url = j.value("indexer_url", std::string{});
  if (auto reg = j.find("event_registry"); reg != j.end()) {
    for (auto it = reg->begin(); it != reg->end(); ++it) {
      cfg.event_registry[lower(it.key())] = parse_event_signature(it.value().get<std::string>());
    }
  }
  cfg.validate();
  return cfg;
}

EventLogEntry parse_event_signature(std::string_view signature) {
  auto open = signature.find('(');
  auto close = signature.rfind(')');
  EventLogEntry e;
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    e.name = trim(signature);
  } else {
    e.name = trim(signature.substr(0, open));
    auto body = signature.substr(open + 1, close - open - 1);
    std::size_t argn = 0;
    while (!trim(body).empty()) {
      auto comma = body.find(',');
      auto part = trim(body.substr(0, comma));
      auto space = part.find_last_of(' ');
      EventParam p;
      if (space == std::string::npos) {
        p.type = part;
        p.name = "arg" + std::to_string(argn);
      } else {
        p.type = trim(part.substr(0, space));
        p.name = trim(part.substr(space + 1));
        // "address indexed from"
        if (auto idx = p.type.find(" indexed"); idx != std::string::npos) p.type = p.type.substr(0, idx);
      }
      e.params.push_back(std::move(p));
      ++argn;
      if (comma == std::string_view::npos) break;
      body = body.substr(comma + 1);
    }
  }
  if (e.name.empty()) throw Error(ErrorCode::SchemaViolation, kComponent, "event signature without a name");
  return e;
}

std::string hex_to_decimal(std::string_view hex) {
  if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) hex.remove_prefix(2);
  // Little-endian base-1e9 limbs.
  std::vector<std::uint32_t> limbs{0};
  for (char c : hex) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw Error(ErrorCode::MalformedHex, kComponent, "bad hex quantity '" + std::string(hex) + "'");
    std::uint64_t carry = static_cast<std::uint64_t>(d);
    for (auto& limb : limbs) {
      std::uint64_t v = static_cast<std::uint64_t>(limb) * 16 + carry;
      limb = static_cast<std::uint32_t>(v % 1000000000ULL);
      carry = v / 1000000000ULL;
    }
    if (carry) limbs.push_back(static_cast<std::uint32_t>(carry));
  }
  std::string out = std::to_string(limbs.back());
  for (auto it = limbs.rbegin() + 1; it != limbs.rend(); ++it) {
    auto part = std::to_string(*it);
    out += std::string(9 - part.size(), '0') + part;
  }
  return out;
}

RpcProvider::RpcProvider(RpcProviderConfig cfg) : cfg_(std::move(cfg)), registry_(builtin_registry()) {
  cfg_.validate();
  for (const auto& [topic, entry] : cfg_.event_registry) registry_[lower(topic)] = entry;
}

TransactionMetadata RpcProvider::fetch(std::string_view hash) const {
  auto canonical = normalize_tx_hash(hash);
  if (cfg_.trace_strategy == TraceStrategy::Fixture) return fetch_fixture(canonical);
  return fetch_live(canonical);
}

TransactionMetadata RpcProvider::fetch_fixture(const std::string& hash) const {
  auto path = cfg_.fixture_dir / (hash + ".json");
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::TxNotFound, kComponent, "no fixture for " + hash);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, kComponent, path.string() + ": " + e.what());
  }
  return metadata_from_json(j);
}

nlohmann::json RpcProvider::call(const std::string& method, const nlohmann::json& params) const {
  auto [base, path] = detail::split_url(cfg_.endpoint_url);
  nlohmann::json req = {{"jsonrpc", "2.0"}, {"id", 1}, {"method", method}, {"params", params}};
  auto body = req.dump();

  std::string last_failure;
  ErrorCode last_code = ErrorCode::NetworkError;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.retry_backoff_ms << std::min(attempt - 1, 6)));
    }
    httplib::Client cli(base);
    detail::set_timeouts(cli, cfg_.timeout);
    auto res = cli.Post(path, body, "application/json");
    if (!res) {
      last_code = ErrorCode::NetworkError;
      last_failure = method + ": " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429) {
      last_code = ErrorCode::RateLimited;
      last_failure = method + ": HTTP 429";
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_code = ErrorCode::NetworkError;
      last_failure = method + ": HTTP " + std::to_string(res->status);
      continue;
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, kComponent, method + ": malformed reply: " + e.what());
    }
    if (auto err = reply.find("error"); err != reply.end() && !err->is_null()) {
      if (is_rate_limit(*err)) {
        last_code = ErrorCode::RateLimited;
        last_failure = method + ": " + err->dump();
        continue;
      }
      if (is_method_unsupported(*err) && method.rfind("debug_", 0) == 0) {
        throw Error(ErrorCode::TraceUnsupported, kComponent, method + " unsupported by provider: " + err->dump());
      }
      throw Error(ErrorCode::ServerError, kComponent, method + ": " + err->dump());
    }
    return reply.value("result", nlohmann::json());
  }
  throw Error(last_code, kComponent, last_failure + " (after " + std::to_string(cfg_.max_retries) + " retries)");
}

nlohmann::json RpcProvider::http_get_json(const std::string& url) const {
  auto [base, path] = detail::split_url(url);
  std::string last_failure;
  ErrorCode last_code = ErrorCode::NetworkError;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.retry_backoff_ms << std::min(attempt - 1, 6)));
    }
    httplib::Client cli(base);
    detail::set_timeouts(cli, cfg_.timeout);
    auto res = cli.Get(path);
    if (!res) {
      last_code = ErrorCode::NetworkError;
      last_failure = url + ": " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429) {
      last_code = ErrorCode::RateLimited;
      last_failure = url + ": HTTP 429";
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_code = ErrorCode::NetworkError;
      last_failure = url + ": HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, kComponent, url + ": " + e.what());
    }
  }
  throw Error(last_code, kComponent, last_failure);
}

TransactionMetadata RpcProvider::fetch_live(const std::string& hash) const {
  TransactionMetadata m;
  m.hash = hash;
  m.chain = cfg_.chain;

  auto tx = call("eth_getTransactionByHash", nlohmann::json::array({hash}));
  if (tx.is_null()) throw Error(ErrorCode::TxNotFound, kComponent, "transaction " + hash + " not found");
  auto receipt = call("eth_getTransactionReceipt", nlohmann::json::array({hash}));
  if (receipt.is_null()) throw Error(ErrorCode::TxNotFound, kComponent, "receipt for " + hash + " not found");

  std::string to_hex;
  if (tx.contains("to") && tx["to"].is_string()) {
    to_hex = tx["to"].get<std::string>();
  } else if (receipt.contains("contractAddress") && receipt["contractAddress"].is_string()) {
    to_hex = receipt["contractAddress"].get<std::string>();
  }
  if (!to_hex.empty()) {
    m.et.push_back({Address::parse(tx.at("from").get<std::string>()), Address::parse(to_hex),
                    hex_to_decimal(tx.value("value", std::string("0x0"))), TransferKind::External, std::nullopt});
  }

  for (const auto& log : receipt.value("logs", nlohmann::json::array())) {
    auto topics = log.value("topics", nlohmann::json::array());
    if (topics.empty()) continue;
    auto topic0 = lower(topics[0].get<std::string>());
    auto contract = Address::parse(log.at("address").get<std::string>());
    if (topic0 == kTransferTopic && topics.size() == 3) {
      auto data = log.value("data", std::string("0x0"));
      m.erc20.push_back({address_from_word(topics[1].get<std::string>()),
                         address_from_word(topics[2].get<std::string>()),
                         hex_to_decimal(data == "0x" ? "0x0" : data), TransferKind::Erc20, contract});
    } else if (topic0 == kTransferTopic && topics.size() == 4) {
      m.erc721.push_back({address_from_word(topics[1].get<std::string>()),
                          address_from_word(topics[2].get<std::string>()), "1", TransferKind::Erc721, contract});
    }
    auto reg = registry_.find(topic0);
    if (reg == registry_.end()) continue;  // undecodable log
    EventLogEntry entry = reg->second;
    entry.contract = contract;
    m.el.push_back(std::move(entry));
  }

  if (cfg_.trace_strategy == TraceStrategy::DebugTrace) {
    auto trace = call("debug_traceTransaction", nlohmann::json::array({hash, {{"tracer", "callTracer"}}}));
    collect_internal_calls(trace, true, m.it);
  } else if (cfg_.trace_strategy == TraceStrategy::IndexerApi) {
    auto sep = cfg_.indexer_url.find('?') == std::string::npos ? "?" : "&";
    auto reply = http_get_json(cfg_.indexer_url + sep + "module=account&action=txlistinternal&txhash=" + hash);
    auto result = reply.find("result");
    if (result == reply.end() || !result->is_array()) {
      throw Error(ErrorCode::TraceUnsupported, kComponent, "indexer returned no internal transaction list");
    }
    for (const auto& r : *result) {
      auto value = r.value("value", std::string("0"));
      if (r.value("to", std::string{}).empty()) continue;
      m.it.push_back({Address::parse(r.at("from").get<std::string>()), Address::parse(r.at("to").get<std::string>()),
                      value, TransferKind::Internal, std::nullopt});
    }
  }
  return validate_metadata(std::move(m));
}

TransactionMetadata fetch_transaction_metadata(const RpcProviderConfig& cfg, std::string_view hash) {
  return RpcProvider(cfg).fetch(hash);
}

}  // namespace xsema
