#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xsema/error.hpp"

namespace xsema {

/// 20-byte account address in canonical lowercase "0x" + 40 hex form.
/// Construction always goes through normalization, so two Address values
/// compare equal iff their canonical strings are byte-equal. The optional
/// alias (an ENS-style display name) never takes part in identity.
class Address {
 public:
  static Address parse(std::string_view raw);

  const std::string& hex() const noexcept { return hex_; }
  const std::optional<std::string>& alias() const noexcept { return alias_; }
  Address with_alias(std::string alias) const;

  friend bool operator==(const Address& a, const Address& b) noexcept { return a.hex_ == b.hex_; }
  friend auto operator<=>(const Address& a, const Address& b) noexcept { return a.hex_ <=> b.hex_; }

 private:
  explicit Address(std::string hex) : hex_(std::move(hex)) {}
  std::string hex_;
  std::optional<std::string> alias_;
};

/// Canonical lowercase form of a 0x-prefixed 40-digit hex address.
/// Throws ErrorCode::MalformedHex.
std::string normalize_address(std::string_view raw);

/// Canonical lowercase form of a 0x-prefixed 64-digit transaction hash.
std::string normalize_tx_hash(std::string_view raw);

enum class TransferKind : std::uint8_t { External, Internal, Erc20, Erc721 };

std::string_view to_string(TransferKind kind) noexcept;
std::optional<TransferKind> parse_transfer_kind(std::string_view s) noexcept;

struct TransferEdgeRecord {
  Address from;
  Address to;
  std::string value;  // non-negative decimal, token base units
  TransferKind kind;
  std::optional<Address> token;

  friend bool operator==(const TransferEdgeRecord&, const TransferEdgeRecord&) = default;
};

struct EventParam {
  std::string type;
  std::string name;

  friend bool operator==(const EventParam&, const EventParam&) = default;
};

struct EventLogEntry {
  std::string name;
  std::vector<EventParam> params;
  std::optional<Address> contract;

  friend bool operator==(const EventLogEntry&, const EventLogEntry&) = default;
};

/// Per-transaction record: external, internal, ERC-20 and ERC-721 transfer
/// lists plus decoded event logs.
struct TransactionMetadata {
  std::string hash;
  std::string chain;
  std::vector<TransferEdgeRecord> et;
  std::vector<TransferEdgeRecord> it;
  std::vector<TransferEdgeRecord> erc20;
  std::vector<TransferEdgeRecord> erc721;
  std::vector<EventLogEntry> el;

  std::size_t transfer_count() const noexcept {
    return et.size() + it.size() + erc20.size() + erc721.size();
  }

  friend bool operator==(const TransactionMetadata&, const TransactionMetadata&) = default;
};

/// Class indices double as the tie-break order everywhere: NT < DT < WT.
enum class TxClass : std::uint8_t { NT = 0, DT = 1, WT = 2 };
inline constexpr int kNumClasses = 3;
inline constexpr std::array<TxClass, 3> kAllClasses{TxClass::NT, TxClass::DT, TxClass::WT};

std::string_view to_string(TxClass c) noexcept;
std::optional<TxClass> parse_class(std::string_view s) noexcept;
inline int class_index(TxClass c) noexcept { return static_cast<int>(c); }
inline TxClass class_from_index(int i) noexcept { return static_cast<TxClass>(i); }

class Label {
 public:
  /// Throws ErrorCode::SchemaViolation when the bridge is missing for DT/WT
  /// or present for NT.
  Label(TxClass value, std::optional<std::string> bridge = std::nullopt);

  static Label nt() { return Label(TxClass::NT); }

  TxClass value() const noexcept { return value_; }
  const std::optional<std::string>& bridge() const noexcept { return bridge_; }

  friend bool operator==(const Label&, const Label&) = default;

 private:
  TxClass value_;
  std::optional<std::string> bridge_;
};

/// A transaction with its ground-truth label. The label is empty for records
/// ingested from metadata-only sources until a label file is merged.
struct LabeledTransaction {
  TransactionMetadata metadata;
  std::optional<Label> label;

  friend bool operator==(const LabeledTransaction&, const LabeledTransaction&) = default;
};

/// Canonicalizes hash and checks list/kind agreement, value syntax and event
/// names. Never drops records.
TransactionMetadata validate_metadata(TransactionMetadata m);

bool is_decimal_value(std::string_view s) noexcept;

}  // namespace xsema
