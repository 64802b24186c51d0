#pragma once

#include <json.hpp>

#include "xsema/core.hpp"

namespace xsema {

using Json = nlohmann::json;

/// Wire form of a transaction: {"hash","chain","et","it","erc20","erc721","el"}.
Json metadata_to_json(const TransactionMetadata& m);

/// Parses and validates the wire form. Malformed fields raise
/// ErrorCode::SchemaViolation with the offending field path in the message.
TransactionMetadata metadata_from_json(const Json& j);

/// Dataset line: wire form plus "label" and "bridge".
Json record_to_json(const LabeledTransaction& t);
LabeledTransaction record_from_json(const Json& j);

/// Shortest round-trip decimal rendering used for every CSV/JSON real.
std::string format_real(double v);

}  // namespace xsema
