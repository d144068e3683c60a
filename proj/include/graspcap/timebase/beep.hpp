#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>

#include "graspcap/core/error.hpp"
#include "graspcap/core/time.hpp"
#include "graspcap/timebase/audio.hpp"
#include "graspcap/timebase/band_power.hpp"

namespace graspcap::timebase {

/// Default slope threshold, in relative band-power units.
inline constexpr double kDefaultSlopeThreshold = 0.5;

struct BeepDetection {
  std::string clock;
  std::size_t window_index = 0;
  Duration time{0};
  double slope = 0.0;
  double resolution_ms = 0.0;
  // Analysis geometry of the triggering window, needed to refine.
  std::size_t window_start_sample = 0;
  std::size_t window_samples = 0;
  std::int64_t sample_rate_hz = 0;
  int overlap = 1;
  // Set when a refinement level failed and an earlier level was returned.
  bool degraded = false;

  double time_s() const { return to_seconds(time); }
  double window_ms() const { return 1000.0 * window_samples / sample_rate_hz; }
};

/// First window whose band power exceeds the band power one full window
/// earlier by more than `slope_threshold`. For consecutive windows this is the
/// plain first difference values[i] - values[i-1].
inline BeepDetection detect_beep(const BandPowerSeries& series,
                                 double slope_threshold = kDefaultSlopeThreshold) {
  require(slope_threshold > 0.0, "slope threshold must be positive");
  require(series.values.size() >= 2, "series needs at least two windows");
  const auto lag = static_cast<std::size_t>(std::max(1, series.overlap));
  for (std::size_t i = lag; i < series.values.size(); ++i) {
    const double slope = series.values[i] - series.values[i - lag];
    if (slope > slope_threshold) {
      BeepDetection det;
      det.clock = series.clock;
      det.window_index = i;
      det.time = series.time_of(i);
      det.slope = slope;
      det.resolution_ms = series.window_ms() / 2.0;
      det.window_start_sample = series.window_start_sample(i);
      det.window_samples = series.window_samples;
      det.sample_rate_hz = series.sample_rate_hz;
      det.overlap = series.overlap;
      return det;
    }
  }
  std::ostringstream msg;
  msg << "no window rises by more than " << slope_threshold << " in band power ("
      << series.values.size() << " windows of " << series.window_ms() << " ms)";
  throw NoBeepFound(msg.str());
}

/// Repeats detection inside [coarse window - 1 window, coarse window + 1 window]
/// with the window shortened by `shrink_factor`, `levels` times.
///
/// If a level finds nothing, the last successful detection is returned with
/// `degraded` set.
inline BeepDetection refine_beep(const AudioTrack& track, const BeepDetection& coarse,
                                 int levels, int shrink_factor, const BandPowerParams& params,
                                 double slope_threshold = kDefaultSlopeThreshold) {
  require(levels >= 1, "refinement needs at least one level");
  require(shrink_factor >= 2, "shrink factor must be >= 2");
  require(coarse.sample_rate_hz == track.sample_rate_hz && coarse.window_samples > 0,
          "coarse detection does not belong to this track");

  BeepDetection current = coarse;
  double window_ms = coarse.window_ms();
  for (int level = 0; level < levels; ++level) {
    const std::size_t w = current.window_samples;
    const std::size_t begin = current.window_start_sample >= w ? current.window_start_sample - w : 0;
    const std::size_t end = std::min(track.samples.size(), current.window_start_sample + 2 * w);

    BandPowerParams fine = params;
    window_ms /= shrink_factor;
    fine.window_ms = window_ms;
    fine.overlap = current.overlap;
    try {
      BandPowerSeries series = band_power_series(track, fine, begin, end);
      BeepDetection next = detect_beep(series, slope_threshold);
      next.resolution_ms = coarse.resolution_ms;
      for (int k = 0; k <= level; ++k) next.resolution_ms /= shrink_factor;
      current = next;
    } catch (const NoBeepFound&) {
      current.degraded = true;
      return current;
    } catch (const TooShort&) {
      current.degraded = true;
      return current;
    }
  }
  return current;
}

inline BeepDetection refine_beep(const AudioTrack& track, const BeepDetection& coarse,
                                 int levels = 1, int shrink_factor = 10) {
  return refine_beep(track, coarse, levels, shrink_factor, BandPowerParams{});
}

/// One-line structured report: clock, window index, time (6 decimals), resolution.
inline std::string format_detection(const BeepDetection& det) {
  std::ostringstream out;
  out << "clock=" << det.clock << " window_index=" << det.window_index
      << " time_s=" << format_decimal_seconds(det.time, 6) << " resolution_ms=" << det.resolution_ms;
  if (det.degraded) out << " degraded=1";
  return out.str();
}

}  // namespace graspcap::timebase
