#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "xsema/core.hpp"

namespace xsema {

enum class TraceStrategy { DebugTrace, IndexerApi, Fixture };

std::string_view to_string(TraceStrategy s) noexcept;
std::optional<TraceStrategy> parse_trace_strategy(std::string_view s) noexcept;

struct RpcProviderConfig {
  std::string endpoint_url;
  TraceStrategy trace_strategy = TraceStrategy::Fixture;
  double timeout = 30.0;  // seconds
  int max_retries = 3;
  int retry_backoff_ms = 250;
  std::string chain = "eth";
  std::filesystem::path fixture_dir;
  /// Etherscan-compatible base URL, used by TraceStrategy::IndexerApi.
  std::string indexer_url;
  /// topic0 -> decoded event template; merged over the built-in entries.
  std::map<std::string, EventLogEntry> event_registry;

  /// Throws ErrorCode::ConfigInvalid.
  void validate() const;

  static RpcProviderConfig from_json(const nlohmann::json& j);
};

/// Parses "Name(type1 name1, type2 name2)" into an event entry. Unnamed
/// parameters get "argN".
EventLogEntry parse_event_signature(std::string_view signature);

/// Big-endian hex quantity ("0x1bc16d674ec80000") to a base-10 string.
std::string hex_to_decimal(std::string_view hex);

/// Fetches transaction metadata either from a JSON-RPC node or, in fixture
/// mode, from "<fixture_dir>/<hash>.json". The provider holds no mutable
/// state and may be shared across threads.
class RpcProvider {
 public:
  explicit RpcProvider(RpcProviderConfig cfg);

  const RpcProviderConfig& config() const noexcept { return cfg_; }

  TransactionMetadata fetch(std::string_view hash) const;

 private:
  TransactionMetadata fetch_fixture(const std::string& hash) const;
  TransactionMetadata fetch_live(const std::string& hash) const;

  nlohmann::json call(const std::string& method, const nlohmann::json& params) const;
  nlohmann::json http_get_json(const std::string& url) const;

  RpcProviderConfig cfg_;
  std::map<std::string, EventLogEntry> registry_;
};

/// Equivalent to RpcProvider(cfg).fetch(hash).
TransactionMetadata fetch_transaction_metadata(const RpcProviderConfig& cfg, std::string_view hash);

}  // namespace xsema
