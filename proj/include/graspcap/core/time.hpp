#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace graspcap {

// All clock arithmetic is done on integer nanoseconds so that offsets compose
// and invert exactly.
using Duration = std::chrono::duration<std::int64_t, std::nano>;

inline double to_seconds(Duration d) {
  return std::chrono::duration<double>(d).count();
}

inline Duration from_seconds(double s) {
  return Duration(static_cast<std::int64_t>(std::llround(s * 1e9)));
}

/// Time of sample `index` at `rate_hz`, rounded to the nearest nanosecond.
inline Duration sample_time(std::int64_t index, std::int64_t rate_hz) {
  // index * 1e9 / rate with round-half-up; fits for any realistic recording.
  const __int128 num = static_cast<__int128>(index) * 1'000'000'000;
  const __int128 q = (2 * num + rate_hz) / (2 * static_cast<__int128>(rate_hz));
  return Duration(static_cast<std::int64_t>(q));
}

/// Parses a plain decimal like "12.500", "-3", "0.000000001" into exact
/// nanoseconds. More than nine fractional digits, exponents and signs other
/// than a leading '-' are rejected.
inline std::optional<Duration> parse_decimal_seconds(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac =
      dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  if (frac.size() > 9) return std::nullopt;
  if (dot != std::string_view::npos && frac.empty() && whole.empty())
    return std::nullopt;

  std::int64_t seconds = 0;
  if (!whole.empty()) {
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), seconds);
    if (ec != std::errc{} || p != whole.data() + whole.size()) return std::nullopt;
    if (seconds > 9'000'000'000LL) return std::nullopt;
  }
  std::int64_t nanos = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    nanos *= 10;
    if (i < frac.size()) {
      const char c = frac[i];
      if (c < '0' || c > '9') return std::nullopt;
      nanos += c - '0';
    }
  }
  const std::int64_t total = seconds * 1'000'000'000LL + nanos;
  return Duration(negative ? -total : total);
}

/// Renders `d` as seconds with exactly `decimals` fractional digits,
/// truncating toward zero.
inline std::string format_decimal_seconds(Duration d, int decimals) {
  std::int64_t ns = d.count();
  const bool negative = ns < 0;
  if (negative) ns = -ns;
  std::int64_t div = 1;
  for (int i = decimals; i < 9; ++i) div *= 10;
  const std::int64_t units = ns / div;
  std::int64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  std::string out = negative && units != 0 ? "-" : "";
  out += std::to_string(units / scale);
  if (decimals > 0) {
    std::string frac = std::to_string(units % scale);
    out += '.';
    out.append(static_cast<std::size_t>(decimals) - frac.size(), '0');
    out += frac;
  }
  return out;
}

}  // namespace graspcap
