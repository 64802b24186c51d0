#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "xsema/core.hpp"

namespace xsema {

inline constexpr std::size_t kDefaultMaxTokens = 256;
inline constexpr std::string_view kEventSeparator = "; ";

struct TokenSeq {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

struct EventText {
  std::string text;
  std::size_t token_count = 0;
  bool truncated = false;
};

/// Splits on non-alphanumerics, camelCase/PascalCase and letter-digit
/// boundaries, then lowercases. "toChainId" -> to, chain, id.
TokenSeq tokenize(std::string_view text);

/// "Name(type1 name1, type2 name2)" per event, joined with "; ". When the
/// rendering has more than `max_tokens` tokens the text is cut right after
/// the last kept token.
EventText build_event_text(const TransactionMetadata& m, std::size_t max_tokens = kDefaultMaxTokens);

std::string render_event(const EventLogEntry& e);

}  // namespace xsema
