#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/core/time.hpp"
#include "graspcap/timebase/audio.hpp"

namespace graspcap::timebase {

struct BandPowerParams {
  double window_ms = 100.0;
  double target_hz = 5000.0;
  double bandwidth_hz = 100.0;  // half-width of the analysed band
  // Windows per window length. 1 = consecutive windows; 2 = half-window hop.
  int overlap = 1;
  bool hann = false;
};

/// Relative in-band power of consecutive analysis windows over one track.
///
/// Window `i` covers samples [first_sample + i*hop, first_sample + i*hop + window).
/// Its time tag is the start of its newest hop-sized segment, which for
/// non-overlapping windows is simply the window start:
///   time(i) = start_time + i * hop_duration.
struct BandPowerSeries {
  std::string clock;
  std::int64_t sample_rate_hz = 0;
  std::size_t first_sample = 0;
  std::size_t window_samples = 0;
  std::size_t hop_samples = 0;
  int overlap = 1;
  Duration start_time{0};
  std::vector<double> values;

  double window_ms() const { return 1000.0 * window_samples / sample_rate_hz; }
  double hop_ms() const { return 1000.0 * hop_samples / sample_rate_hz; }

  std::size_t window_start_sample(std::size_t i) const { return first_sample + i * hop_samples; }

  std::size_t tag_sample(std::size_t i) const {
    return window_start_sample(i) + window_samples - hop_samples;
  }

  Duration time_of(std::size_t i) const {
    return sample_time(static_cast<std::int64_t>(tag_sample(i)), sample_rate_hz);
  }
};

namespace detail {

inline std::size_t window_length(double window_ms, std::int64_t rate) {
  return static_cast<std::size_t>(std::llround(window_ms * static_cast<double>(rate) / 1000.0));
}

/// Fraction of the window's one-sided power spectrum lying in
/// [lo_hz, hi_hz], evaluated with Goertzel recurrences on the in-band bins
/// and Parseval for the total.
class BandPowerKernel {
 public:
  BandPowerKernel(std::size_t n, std::int64_t rate, double lo_hz, double hi_hz, bool hann)
      : n_(n) {
    const double bin_hz = static_cast<double>(rate) / static_cast<double>(n);
    const auto k_lo = static_cast<std::int64_t>(std::ceil(lo_hz / bin_hz - 1e-9));
    const auto k_hi = static_cast<std::int64_t>(std::floor(hi_hz / bin_hz + 1e-9));
    const auto k_max = static_cast<std::int64_t>(n / 2);
    for (std::int64_t k = std::max<std::int64_t>(0, k_lo); k <= std::min(k_hi, k_max); ++k) {
      coeff_.push_back(2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                      static_cast<double>(n)));
      const bool edge = k == 0 || (n % 2 == 0 && k == k_max);
      weight_.push_back(edge ? 1.0 : 2.0);
    }
    if (hann) {
      taper_.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        taper_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                         static_cast<double>(n));
    }
    s1_.resize(coeff_.size());
    s2_.resize(coeff_.size());
  }

  double operator()(const double* x) {
    std::fill(s1_.begin(), s1_.end(), 0.0);
    std::fill(s2_.begin(), s2_.end(), 0.0);
    const std::size_t bins = coeff_.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double v = taper_.empty() ? x[i] : x[i] * taper_[i];
      total += v * v;
      for (std::size_t b = 0; b < bins; ++b) {
        const double s0 = v + coeff_[b] * s1_[b] - s2_[b];
        s2_[b] = s1_[b];
        s1_[b] = s0;
      }
    }
    if (total <= 0.0) return 0.0;
    double band = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      const double mag2 = s1_[b] * s1_[b] + s2_[b] * s2_[b] - coeff_[b] * s1_[b] * s2_[b];
      band += weight_[b] * std::max(0.0, mag2);
    }
    band /= static_cast<double>(n_);
    return std::clamp(band / total, 0.0, 1.0);
  }

 private:
  std::size_t n_;
  std::vector<double> coeff_, weight_, taper_, s1_, s2_;
};

}  // namespace detail

/// Band-power series over samples [begin, end) of `track`.
inline BandPowerSeries band_power_series(const AudioTrack& track, const BandPowerParams& params,
                                         std::size_t begin, std::size_t end) {
  require(params.window_ms > 0.0, "window_ms must be positive");
  require(params.bandwidth_hz >= 0.0 && params.target_hz > 0.0, "invalid analysis band");
  require(params.overlap >= 1, "overlap must be >= 1");
  require(track.sample_rate_hz > 0, "sample rate must be positive");
  if (static_cast<double>(track.sample_rate_hz) < 2.0 * (params.target_hz + params.bandwidth_hz))
    throw NyquistViolation("sample rate " + std::to_string(track.sample_rate_hz) +
                           " Hz cannot represent " +
                           std::to_string(params.target_hz + params.bandwidth_hz) + " Hz");
  end = std::min(end, track.samples.size());
  begin = std::min(begin, end);

  BandPowerSeries series;
  series.clock = track.clock;
  series.sample_rate_hz = track.sample_rate_hz;
  series.first_sample = begin;
  series.overlap = params.overlap;
  series.window_samples = detail::window_length(params.window_ms, track.sample_rate_hz);
  require(series.window_samples >= 1, "window shorter than one sample");
  series.hop_samples = std::max<std::size_t>(1, series.window_samples / params.overlap);

  const std::size_t span = end - begin;
  const std::size_t count =
      span < series.window_samples ? 0 : (span - series.window_samples) / series.hop_samples + 1;
  if (count < 2)
    throw TooShort("track supports " + std::to_string(count) + " analysis window(s), need 2");

  series.start_time = series.time_of(0);
  detail::BandPowerKernel kernel(series.window_samples, track.sample_rate_hz,
                                 params.target_hz - params.bandwidth_hz,
                                 params.target_hz + params.bandwidth_hz, params.hann);
  series.values.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    series.values[i] = kernel(track.samples.data() + series.window_start_sample(i));
  return series;
}

inline BandPowerSeries band_power_series(const AudioTrack& track,
                                         const BandPowerParams& params = {}) {
  return band_power_series(track, params, 0, track.samples.size());
}

}  // namespace graspcap::timebase
