#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/core/time.hpp"

namespace graspcap::timebase {

/// Mono audio in one clock domain. Samples are normalized to [-1, 1].
struct AudioTrack {
  std::vector<double> samples;
  std::int64_t sample_rate_hz = 0;
  std::string clock;

  Duration duration() const {
    return sample_time(static_cast<std::int64_t>(samples.size()), sample_rate_hz);
  }
};

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

/// Decodes a RIFF/WAVE byte buffer holding 16-bit PCM. Only the first channel
/// of a multi-channel file is kept.
inline AudioTrack decode_wav(const std::vector<unsigned char>& bytes, std::string clock) {
  using detail::read_u16;
  using detail::read_u32;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw UnsupportedWav("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Truncated data chunks are common from crashed recorders; keep what is there.
      if (std::memcmp(chunk, "data", 4) == 0) {
        data = bytes.data() + body;
        data_size = bytes.size() - body;
      }
      break;
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw UnsupportedWav("fmt chunk too small");
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1u);
  }
  if (format != 1 && format != 0xFFFE) throw UnsupportedWav("only PCM WAV is supported");
  if (bits != 16) throw UnsupportedWav("only 16-bit samples are supported");
  if (channels == 0 || rate == 0) throw UnsupportedWav("missing or invalid fmt chunk");
  if (data == nullptr) throw UnsupportedWav("missing data chunk");

  AudioTrack track;
  track.sample_rate_hz = rate;
  track.clock = std::move(clock);
  const std::size_t frame = 2u * channels;
  const std::size_t frames = data_size / frame;
  track.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const auto raw = static_cast<std::int16_t>(read_u16(data + i * frame));
    track.samples[i] = raw / 32768.0;
  }
  return track;
}

inline AudioTrack read_wav(const std::string& path, std::string clock) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_wav(bytes, std::move(clock));
}

/// Mono 16-bit PCM encoding; samples are clipped to [-1, 1].
inline std::string encode_wav(const AudioTrack& track) {
  std::string out;
  const auto n = static_cast<std::uint32_t>(track.samples.size());
  out += "RIFF";
  detail::put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(track.sample_rate_hz));
  detail::put_u32(out, static_cast<std::uint32_t>(track.sample_rate_hz * 2));
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out += "data";
  detail::put_u32(out, 2 * n);
  for (double s : track.samples) {
    double v = std::clamp(s, -1.0, 1.0) * 32768.0;
    v = std::clamp(std::round(v), -32768.0, 32767.0);
    detail::put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  return out;
}

inline void write_wav(const AudioTrack& track, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path);
  const std::string bytes = encode_wav(track);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("short write to " + path);
}

}  // namespace graspcap::timebase
