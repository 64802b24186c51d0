#include "xsema/eventtext.hpp"

#include <cctype>

namespace xsema {

namespace {

struct Span {
  std::size_t begin;
  std::size_t end;
};

bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool boundary_before(std::string_view s, std::size_t i) {
  char prev = s[i - 1], cur = s[i];
  if (is_digit(prev) != is_digit(cur)) return true;
  if (is_lower(prev) && is_upper(cur)) return true;
  // "HTTPServer": split before the upper that starts a lowercase word.
  return is_upper(prev) && is_upper(cur) && i + 1 < s.size() && is_lower(s[i + 1]);
}

std::vector<Span> token_spans(std::string_view s) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_alnum(s[i])) {
      ++i;
      continue;
    }
    std::size_t start = i++;
    while (i < s.size() && is_alnum(s[i])) {
      if (boundary_before(s, i)) {
        spans.push_back({start, i});
        start = i;
      }
      ++i;
    }
    spans.push_back({start, i});
  }
  return spans;
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  for (const auto& sp : token_spans(text)) {
    std::string tok(text.substr(sp.begin, sp.end - sp.begin));
    for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.tokens.push_back(std::move(tok));
  }
  return out;
}

std::string render_event(const EventLogEntry& e) {
  std::string out = e.name + "(";
  for (std::size_t i = 0; i < e.params.size(); ++i) {
    if (i) out += ", ";
    out += e.params[i].type + " " + e.params[i].name;
  }
  out += ")";
  return out;
}

EventText build_event_text(const TransactionMetadata& m, std::size_t max_tokens) {
  if (max_tokens == 0) throw Error(ErrorCode::ConfigInvalid, "eventtext", "max_tokens must be >= 1");
  std::string full;
  for (std::size_t i = 0; i < m.el.size(); ++i) {
    if (i) full += kEventSeparator;
    full += render_event(m.el[i]);
  }
  auto spans = token_spans(full);
  EventText out;
  if (spans.size() <= max_tokens) {
    out.text = std::move(full);
    out.token_count = spans.size();
    return out;
  }
  out.text = full.substr(0, spans[max_tokens - 1].end);
  out.token_count = max_tokens;
  out.truncated = true;
  return out;
}

}  // namespace xsema
