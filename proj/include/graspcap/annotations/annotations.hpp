#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/core/time.hpp"
#include "graspcap/timebase/offset.hpp"

// Annotation log grammar, one event per line:
//
//   <timestamp_seconds> <KIND> <message...>
//
// Fields are whitespace separated; the message is the rest of the line with
// its leading/trailing whitespace removed and may be empty. Blank lines and
// lines whose first non-blank character is '#' are skipped. KIND is one of
// GRASP_SET, TASK_CHANGE, RANGE_POINT, NOTE. Timestamps are non-negative plain
// decimals with at most nine fractional digits.

namespace graspcap::annotations {

enum class Kind { GraspSet, TaskChange, RangePoint, Note };

inline constexpr std::array<std::pair<Kind, std::string_view>, 4> kKindNames{{
    {Kind::GraspSet, "GRASP_SET"},
    {Kind::TaskChange, "TASK_CHANGE"},
    {Kind::RangePoint, "RANGE_POINT"},
    {Kind::Note, "NOTE"},
}};

inline std::string_view to_string(Kind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "NOTE";
}

inline std::optional<Kind> parse_kind(std::string_view s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

struct AnnotationEvent {
  Duration timestamp{0};
  Kind kind = Kind::Note;
  std::string text;

  double timestamp_s() const { return to_seconds(timestamp); }
  friend bool operator==(const AnnotationEvent&, const AnnotationEvent&) = default;
};

struct VideoTime {
  std::int64_t minutes = 0;
  int seconds = 0;
  int milliseconds = 0;

  friend bool operator==(const VideoTime&, const VideoTime&) = default;
};

struct AlignedAnnotation {
  AnnotationEvent event;
  Duration mapped{0};
  VideoTime video_time;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::pair<std::string_view, std::string_view> next_token(std::string_view s) {
  s = trim(s);
  const auto e = s.find_first_of(" \t");
  if (e == std::string_view::npos) return {s, {}};
  return {s.substr(0, e), trim(s.substr(e))};
}

}  // namespace detail

/// Parses one non-comment line. `line_no` is used for diagnostics only.
inline AnnotationEvent parse_annotation_line(std::string_view line, std::size_t line_no) {
  auto [stamp, rest] = detail::next_token(line);
  auto [kind_text, message] = detail::next_token(rest);
  const auto t = parse_decimal_seconds(stamp);
  if (!t) throw MalformedLine(line_no, "bad timestamp '" + std::string(stamp) + "'");
  if (t->count() < 0) throw MalformedLine(line_no, "negative timestamp");
  if (kind_text.empty()) throw MalformedLine(line_no, "missing kind");
  const auto kind = parse_kind(kind_text);
  if (!kind) throw MalformedLine(line_no, "unknown kind '" + std::string(kind_text) + "'");
  return {*t, *kind, std::string(message)};
}

/// All-or-nothing: the first bad line aborts the parse.
inline std::vector<AnnotationEvent> parse_annotations(std::string_view document) {
  std::vector<AnnotationEvent> events;
  std::size_t pos = 0, line_no = 0;
  while (pos < document.size()) {
    ++line_no;
    const auto nl = document.find('\n', pos);
    const auto line = document.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? document.size() : nl + 1;
    const auto body = detail::trim(line);
    if (!body.empty() && body.front() != '#') events.push_back(parse_annotation_line(body, line_no));
  }
  return events;
}

/// Inverse of parse_annotation_line at millisecond granularity.
inline std::string format_annotation_line(const AnnotationEvent& e) {
  std::string out = format_decimal_seconds(e.timestamp, 3);
  out += ' ';
  out += to_string(e.kind);
  if (!e.text.empty()) {
    out += ' ';
    out += e.text;
  }
  return out;
}

/// Splits a non-negative time into (m, s, ms). Times are first quantized to
/// whole microseconds, then truncated to the millisecond, so decimal inputs
/// like 3725.042 keep their last digit.
inline VideoTime to_video_time(Duration t) {
  if (t.count() < 0) throw NegativeTime("negative time " + format_decimal_seconds(t, 9));
  const std::int64_t us = (t.count() + 500) / 1000;
  const std::int64_t ms = us / 1000;
  return {ms / 60'000, static_cast<int>((ms / 1000) % 60), static_cast<int>(ms % 1000)};
}

inline std::string format_video_time(const VideoTime& v) {
  std::string mm = std::to_string(v.minutes);
  if (mm.size() < 2) mm.insert(0, 2 - mm.size(), '0');
  char buf[16];
  std::snprintf(buf, sizeof buf, ":%02d.%03d", v.seconds, v.milliseconds);
  return mm + buf;
}

/// "MM:SS.mmm" with minutes widening past 99; milliseconds truncated.
inline std::string format_relative(Duration t) { return format_video_time(to_video_time(t)); }

inline std::string format_relative(double seconds) {
  if (seconds < 0.0) throw NegativeTime("negative time");
  // Quantize to microseconds first so 59.9999 truncates to 59.999, not 59.998.
  return format_relative(Duration(std::llround(seconds * 1e6) * 1000));
}

/// Parses "MM:SS.mmm" back into a duration.
inline std::optional<Duration> parse_relative(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  std::int64_t minutes = 0;
  for (char c : text.substr(0, colon)) {
    if (c < '0' || c > '9') return std::nullopt;
    minutes = minutes * 10 + (c - '0');
  }
  const std::string_view rest = text.substr(colon + 1);
  if (rest.size() != 6 || rest[2] != '.') return std::nullopt;
  const auto secs = parse_decimal_seconds(rest);
  if (!secs || secs->count() < 0 || *secs >= std::chrono::seconds(60)) return std::nullopt;
  return std::chrono::minutes(minutes) + *secs;
}

inline std::vector<AlignedAnnotation> align_annotations(const std::vector<AnnotationEvent>& events,
                                                        const timebase::StreamOffset& offset) {
  std::vector<AlignedAnnotation> out;
  out.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Duration mapped = timebase::map_time(offset, events[i].timestamp);
    if (mapped.count() < 0)
      throw NegativeMappedTime("annotation " + std::to_string(i + 1) + " at " +
                               format_decimal_seconds(events[i].timestamp, 3) +
                               " s precedes the start of clock '" + offset.to_clock + "'");
    out.push_back({events[i], mapped, to_video_time(mapped)});
  }
  return out;
}

/// "MM:SS.mmm KIND message"
inline std::string format_aligned(const AlignedAnnotation& a) {
  std::string out = format_video_time(a.video_time);
  out += ' ';
  out += to_string(a.event.kind);
  if (!a.event.text.empty()) {
    out += ' ';
    out += a.event.text;
  }
  return out;
}

}  // namespace graspcap::annotations
