#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "arcseal/error.hpp"

namespace arcseal::media {

// Frames-per-second as an exact rational so resampling arithmetic stays
// integer-exact (no float drift across a degrade/verify roundtrip).
struct Rational {
  std::uint16_t num = 0;
  std::uint16_t den = 1;
  double value() const { return static_cast<double>(num) / den; }
  bool operator==(const Rational&) const = default;
};

struct Frame {
  std::uint16_t height = 0;
  std::uint16_t width = 0;
  std::uint8_t channels = 0;
  std::vector<std::uint8_t> data;  // row-major, channel-interleaved

  std::size_t sample_count() const { return data.size(); }
  std::uint8_t& at(std::size_t r, std::size_t c, std::size_t ch) {
    return data[(r * width + c) * channels + ch];
  }
  std::uint8_t at(std::size_t r, std::size_t c, std::size_t ch) const {
    return data[(r * width + c) * channels + ch];
  }
  bool operator==(const Frame&) const = default;
};

struct MediaClip {
  std::vector<Frame> frames;
  Rational frame_rate{10, 1};
  std::vector<std::int16_t> audio;  // mono PCM
  std::uint32_t sample_rate = 8000;

  double video_duration() const {
    return frame_rate.num == 0 ? 0.0 : static_cast<double>(frames.size()) * frame_rate.den / frame_rate.num;
  }
  double audio_duration() const {
    return sample_rate == 0 ? 0.0 : static_cast<double>(audio.size()) / sample_rate;
  }
  std::uint16_t height() const { return frames.empty() ? 0 : frames[0].height; }
  std::uint16_t width() const { return frames.empty() ? 0 : frames[0].width; }
  std::uint8_t channels() const { return frames.empty() ? 0 : frames[0].channels; }
  bool operator==(const MediaClip&) const = default;
};

// A parameterized stand-in for transcoding: luma/chroma requantization,
// box blur, additive noise, nearest-frame rate resampling, and on the audio
// side linear resampling plus bit-depth crush. All-identity parameters make
// degrade() a bit-exact no-op.
struct DegradeParams {
  int visual_quant_step = 1;  // q >= 1
  int blur_radius = 0;
  double noise_sigma = 0.0;
  Rational target_fps{0, 1};   // num == 0 keeps the source rate
  int audio_bits = 16;         // in [4, 16]
  std::uint32_t audio_rate = 0;  // 0 keeps the source rate
};

enum class TamperKind { TemporalCut, SpatialNoise, AudioNoise };

struct TamperSpec {
  TamperKind kind = TamperKind::TemporalCut;
  double start_s = 0.0;
  double duration_s = 0.0;
};

enum class SynthPreset {
  Dynamic,  // moving rectangles over per-scene backgrounds, tonal audio
  Static,   // fixed background per scene, speech-band audio carries the content
};

// ARCV container (little-endian, bit-exact; see README for the field layout).
std::vector<std::uint8_t> write_media(const MediaClip& clip);
MediaClip read_media(std::span<const std::uint8_t> bytes);
void write_media_file(const MediaClip& clip, const std::string& path);
MediaClip read_media_file(const std::string& path);

MediaClip synth_clip(int scene_count, double duration_s, std::uint64_t seed,
                     SynthPreset preset = SynthPreset::Dynamic);

MediaClip degrade(const MediaClip& clip, const DegradeParams& params, std::uint64_t seed);

MediaClip apply_tamper(const MediaClip& clip, const TamperSpec& spec, std::uint64_t seed = 0);

// Uniform temporal resampling to the 10 fps analysis rate, nearest frame.
std::vector<Frame> sample_keyframes(const MediaClip& clip);

// Exact keyframe count: ceil(duration_s * 10) computed in integer math.
std::size_t keyframe_count(std::size_t frame_count, Rational fps);

void validate_clip(const MediaClip& clip);

}  // namespace arcseal::media
