#pragma once

#include <string>

#include "graspcap/core/error.hpp"
#include "graspcap/core/time.hpp"
#include "graspcap/timebase/beep.hpp"

namespace graspcap::timebase {

/// t_to = t_from + offset. Offsets between clock domains form a groupoid:
/// composable when the clocks chain, invertible, identity is zero.
struct StreamOffset {
  std::string from_clock;
  std::string to_clock;
  Duration offset{0};
  Duration uncertainty{0};

  double offset_s() const { return to_seconds(offset); }

  friend bool operator==(const StreamOffset&, const StreamOffset&) = default;
};

inline StreamOffset identity_offset(const std::string& clock) { return {clock, clock, Duration{0}, Duration{0}}; }

inline StreamOffset inverse(const StreamOffset& o) {
  return {o.to_clock, o.from_clock, -o.offset, o.uncertainty};
}

/// first: A->B, second: B->C  =>  A->C.
inline StreamOffset compose(const StreamOffset& first, const StreamOffset& second) {
  require(first.to_clock == second.from_clock,
          "cannot compose " + first.from_clock + "->" + first.to_clock + " with " +
              second.from_clock + "->" + second.to_clock);
  return {first.from_clock, second.to_clock, first.offset + second.offset,
          first.uncertainty + second.uncertainty};
}

inline Duration map_time(const StreamOffset& o, Duration t) { return t + o.offset; }

inline StreamOffset compute_offset(const BeepDetection& a, const BeepDetection& b) {
  if (a.clock == b.clock) throw SameClock("both detections come from clock '" + a.clock + "'");
  const Duration unc = from_seconds((a.resolution_ms + b.resolution_ms) / 1000.0);
  return {a.clock, b.clock, b.time - a.time, unc};
}

}  // namespace graspcap::timebase
