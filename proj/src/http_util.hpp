#pragma once

#include <string>
#include <string_view>
#include <utility>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace xsema::detail {

/// Splits "http://host:port/some/path" into ("http://host:port", "/some/path").
inline std::pair<std::string, std::string> split_url(std::string_view url) {
  auto scheme = url.find("://");
  auto start = scheme == std::string_view::npos ? 0 : scheme + 3;
  auto slash = url.find('/', start);
  if (slash == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

inline std::string join_path(const std::string& base, std::string_view tail) {
  if (base.empty() || base == "/") return std::string(tail);
  std::string out = base;
  if (out.back() == '/') out.pop_back();
  return out + std::string(tail);
}

inline void set_timeouts(httplib::Client& cli, double seconds) {
  auto sec = static_cast<time_t>(seconds);
  auto usec = static_cast<time_t>((seconds - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
}

}  // namespace xsema::detail
