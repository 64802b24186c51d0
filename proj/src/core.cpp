#include "xsema/core.hpp"

#include <algorithm>
#include <cctype>

namespace xsema {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedHex: return "malformed-hex";
    case ErrorCode::FieldMissing: return "field-missing";
    case ErrorCode::KindMismatch: return "kind-mismatch";
    case ErrorCode::MalformedValue: return "malformed-value";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::DuplicateHash: return "duplicate-hash";
    case ErrorCode::SchemaViolation: return "schema-violation";
    case ErrorCode::NetworkError: return "network-error";
    case ErrorCode::TxNotFound: return "tx-not-found";
    case ErrorCode::TraceUnsupported: return "trace-unsupported";
    case ErrorCode::RateLimited: return "rate-limited";
    case ErrorCode::ConflictingLabel: return "conflicting-label";
    case ErrorCode::MissingDefault: return "missing-default";
    case ErrorCode::GraphTooLarge: return "graph-too-large";
    case ErrorCode::UnsupportedCatalog: return "unsupported-catalog";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::ServerError: return "server-error";
    case ErrorCode::MissingClass: return "missing-class";
    case ErrorCode::NonFiniteInput: return "non-finite-input";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::EmptyTrain: return "empty-train";
    case ErrorCode::UnfittedScaler: return "unfitted-scaler";
    case ErrorCode::SingleClassInput: return "single-class-input";
    case ErrorCode::NonFiniteFeature: return "non-finite-feature";
    case ErrorCode::VersionMismatch: return "version-mismatch";
    case ErrorCode::CorruptBundle: return "corrupt-bundle";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::EmptyDataset: return "empty-dataset";
    case ErrorCode::EmptyTrainBridges: return "empty-train-bridges";
    case ErrorCode::BridgeOverlap: return "bridge-overlap";
    case ErrorCode::ConfigInvalid: return "config-invalid";
    case ErrorCode::UnrealizableMotif: return "unrealizable-motif";
  }
  return "unknown";
}

namespace {

std::string normalize_hex(std::string_view raw, std::size_t digits, const char* what) {
  auto fail = [&] {
    return Error(ErrorCode::MalformedHex, "core-model",
                 std::string("malformed ") + what + ": '" + std::string(raw) + "'");
  };
  if (raw.size() != digits + 2 || raw[0] != '0' || (raw[1] != 'x' && raw[1] != 'X')) throw fail();
  std::string out = "0x";
  out.reserve(digits + 2);
  for (char c : raw.substr(2)) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) throw fail();
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::string normalize_address(std::string_view raw) { return normalize_hex(raw, 40, "address"); }

std::string normalize_tx_hash(std::string_view raw) { return normalize_hex(raw, 64, "transaction hash"); }

Address Address::parse(std::string_view raw) { return Address(normalize_address(raw)); }

Address Address::with_alias(std::string alias) const {
  Address a = *this;
  a.alias_ = std::move(alias);
  return a;
}

std::string_view to_string(TransferKind kind) noexcept {
  switch (kind) {
    case TransferKind::External: return "external";
    case TransferKind::Internal: return "internal";
    case TransferKind::Erc20: return "erc20";
    case TransferKind::Erc721: return "erc721";
  }
  return "external";
}

std::optional<TransferKind> parse_transfer_kind(std::string_view s) noexcept {
  if (s == "external") return TransferKind::External;
  if (s == "internal") return TransferKind::Internal;
  if (s == "erc20") return TransferKind::Erc20;
  if (s == "erc721") return TransferKind::Erc721;
  return std::nullopt;
}

std::string_view to_string(TxClass c) noexcept {
  switch (c) {
    case TxClass::NT: return "NT";
    case TxClass::DT: return "DT";
    case TxClass::WT: return "WT";
  }
  return "NT";
}

std::optional<TxClass> parse_class(std::string_view s) noexcept {
  if (s == "NT") return TxClass::NT;
  if (s == "DT") return TxClass::DT;
  if (s == "WT") return TxClass::WT;
  return std::nullopt;
}

Label::Label(TxClass value, std::optional<std::string> bridge) : value_(value), bridge_(std::move(bridge)) {
  if (bridge_ && bridge_->empty()) bridge_.reset();
  if (value_ == TxClass::NT && bridge_) {
    throw Error(ErrorCode::SchemaViolation, "core-model", "NT label must not carry a bridge");
  }
  if (value_ != TxClass::NT && !bridge_) {
    throw Error(ErrorCode::SchemaViolation, "core-model",
                std::string(to_string(value_)) + " label requires a bridge name");
  }
}

bool is_decimal_value(std::string_view s) noexcept {
  if (s.empty()) return false;
  std::size_t dot = s.find('.');
  auto digits = [](std::string_view part) {
    return !part.empty() && std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (dot == std::string_view::npos) return digits(s);
  return digits(s.substr(0, dot)) && digits(s.substr(dot + 1));
}

namespace {

void check_list(std::vector<TransferEdgeRecord>& list, TransferKind expected, std::string_view field) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto& r = list[i];
    if (r.kind != expected) {
      throw Error(ErrorCode::KindMismatch, "core-model",
                  std::string(field) + "[" + std::to_string(i) + "] has kind '" +
                      std::string(to_string(r.kind)) + "'");
    }
    if (!is_decimal_value(r.value)) {
      throw Error(ErrorCode::MalformedValue, "core-model",
                  std::string(field) + "[" + std::to_string(i) + "] value '" + r.value + "' is not a decimal");
    }
  }
}

}  // namespace

TransactionMetadata validate_metadata(TransactionMetadata m) {
  if (m.hash.empty()) throw Error(ErrorCode::FieldMissing, "core-model", "missing field 'hash'");
  if (m.chain.empty()) throw Error(ErrorCode::FieldMissing, "core-model", "missing field 'chain'");
  m.hash = normalize_tx_hash(m.hash);
  check_list(m.et, TransferKind::External, "et");
  check_list(m.it, TransferKind::Internal, "it");
  check_list(m.erc20, TransferKind::Erc20, "erc20");
  check_list(m.erc721, TransferKind::Erc721, "erc721");
  for (std::size_t i = 0; i < m.el.size(); ++i) {
    if (m.el[i].name.empty()) {
      throw Error(ErrorCode::FieldMissing, "core-model", "el[" + std::to_string(i) + "] has an empty name");
    }
  }
  return m;
}

}  // namespace xsema
