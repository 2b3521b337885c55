#include "arcseal/media.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "arcseal/bytes.hpp"

namespace arcseal::media {

namespace {

constexpr std::uint16_t kContainerVersion = 1;

// All randomness below goes through these helpers so outputs are pinned to
// the mt19937_64 stream alone, not to library distribution internals.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

double gaussian(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint8_t clamp_u8(double v) {
  if (v < 0.0) return 0;
  if (v > 255.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v));
}

std::int16_t clamp_i16(double v) {
  if (v < -32768.0) return -32768;
  if (v > 32767.0) return 32767;
  return static_cast<std::int16_t>(std::lround(v));
}

// round(a / b) for non-negative a, positive b
std::uint64_t div_round(std::uint64_t a, std::uint64_t b) { return (2 * a + b) / (2 * b); }

struct RectSprite {
  double cx, cy;        // path center, pixels
  double ax, ay;        // oscillation amplitude
  double fx, fy;        // oscillation frequency, Hz
  double px, py;        // phase
  int half_w, half_h;
  std::uint8_t color[3];
};

struct ToneVoice {
  double freq_hz;
  // Piecewise-linear amplitude envelope, one knot every `knot_dt` seconds.
  std::vector<double> knots;
  double knot_dt;
  double amp(double t) const {
    double x = t / knot_dt;
    std::size_t i = static_cast<std::size_t>(x);
    if (i + 1 >= knots.size()) return knots.back();
    double frac = x - static_cast<double>(i);
    return knots[i] * (1.0 - frac) + knots[i + 1] * frac;
  }
};

}  // namespace

void validate_clip(const MediaClip& clip) {
  if (clip.frames.empty()) raise(ErrorCode::MediaInvalid, "clip has no frames");
  if (clip.frame_rate.num == 0 || clip.frame_rate.den == 0) raise(ErrorCode::MediaInvalid, "bad frame rate");
  if (clip.sample_rate == 0) raise(ErrorCode::MediaInvalid, "bad sample rate");
  const Frame& f0 = clip.frames[0];
  if (f0.channels != 1 && f0.channels != 3) raise(ErrorCode::MediaInvalid, "channels must be 1 or 3");
  for (const Frame& f : clip.frames) {
    if (f.height != f0.height || f.width != f0.width || f.channels != f0.channels)
      raise(ErrorCode::MediaInvalid, "frame geometry varies");
    if (f.data.size() != static_cast<std::size_t>(f.height) * f.width * f.channels)
      raise(ErrorCode::MediaInvalid, "frame payload size mismatch");
  }
  double frame_period = static_cast<double>(clip.frame_rate.den) / clip.frame_rate.num;
  if (std::abs(clip.video_duration() - clip.audio_duration()) > frame_period + 1e-9)
    raise(ErrorCode::MediaInvalid, "audio/video duration mismatch");
}

std::vector<std::uint8_t> write_media(const MediaClip& clip) {
  validate_clip(clip);
  ByteWriter w;
  w.raw("ARCV", 4);
  w.u16(kContainerVersion);
  w.u16(clip.height());
  w.u16(clip.width());
  w.u8(clip.channels());
  w.u16(clip.frame_rate.num);
  w.u16(clip.frame_rate.den);
  w.u32(static_cast<std::uint32_t>(clip.frames.size()));
  w.u32(clip.sample_rate);
  w.u64(clip.audio.size());
  for (const Frame& f : clip.frames) w.raw(f.data.data(), f.data.size());
  for (std::int16_t s : clip.audio) w.i16(s);
  return w.take();
}

MediaClip read_media(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("ARCV");
  std::uint16_t version = r.u16();
  if (version != kContainerVersion)
    raise(ErrorCode::UnsupportedVersion, "container version " + std::to_string(version));
  MediaClip clip;
  std::uint16_t h = r.u16();
  std::uint16_t w = r.u16();
  std::uint8_t c = r.u8();
  clip.frame_rate.num = r.u16();
  clip.frame_rate.den = r.u16();
  std::uint32_t frame_count = r.u32();
  clip.sample_rate = r.u32();
  std::uint64_t sample_count = r.u64();

  std::size_t frame_bytes = static_cast<std::size_t>(h) * w * c;
  clip.frames.reserve(frame_count);
  for (std::uint32_t i = 0; i < frame_count; ++i) {
    Frame f;
    f.height = h;
    f.width = w;
    f.channels = c;
    auto payload = r.raw(frame_bytes);
    f.data.assign(payload.begin(), payload.end());
    clip.frames.push_back(std::move(f));
  }
  clip.audio.resize(sample_count);
  for (std::uint64_t i = 0; i < sample_count; ++i) clip.audio[i] = r.i16();
  if (!r.done()) raise(ErrorCode::TruncatedPayload, "trailing bytes after payload");
  validate_clip(clip);
  return clip;
}

void write_media_file(const MediaClip& clip, const std::string& path) {
  auto bytes = write_media(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

MediaClip read_media_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_media(bytes);
}

MediaClip synth_clip(int scene_count, double duration_s, std::uint64_t seed, SynthPreset preset) {
  if (scene_count < 1) raise(ErrorCode::MediaInvalid, "scene_count must be >= 1");
  if (duration_s <= 0.0) raise(ErrorCode::MediaInvalid, "duration must be positive");

  constexpr int kH = 64, kW = 64, kC = 3;
  constexpr int kFps = 10;
  constexpr std::uint32_t kRate = 8000;

  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 0xA5A5A5A5ULL);

  MediaClip clip;
  clip.frame_rate = {kFps, 1};
  clip.sample_rate = kRate;

  std::size_t total_frames = static_cast<std::size_t>(std::llround(duration_s * kFps));
  if (total_frames == 0) total_frames = 1;

  // Scene boundaries land on exact frame indices so the cut detector sees a
  // single-step background change.
  std::vector<std::size_t> bounds(scene_count + 1);
  for (int s = 0; s <= scene_count; ++s)
    bounds[s] = static_cast<std::size_t>(s) * total_frames / static_cast<std::size_t>(scene_count);

  // Per-scene backgrounds, kept far apart so consecutive scenes always trip
  // the SAD detector.
  std::vector<std::array<std::uint8_t, 3>> bg(scene_count);
  for (int s = 0; s < scene_count; ++s) {
    for (int attempt = 0;; ++attempt) {
      std::array<std::uint8_t, 3> c = {static_cast<std::uint8_t>(uniform_index(rng, 256)),
                                       static_cast<std::uint8_t>(uniform_index(rng, 256)),
                                       static_cast<std::uint8_t>(uniform_index(rng, 256))};
      if (s == 0) {
        bg[s] = c;
        break;
      }
      double diff = (std::abs(int(c[0]) - int(bg[s - 1][0])) + std::abs(int(c[1]) - int(bg[s - 1][1])) +
                     std::abs(int(c[2]) - int(bg[s - 1][2]))) /
                    3.0;
      if (diff > 80.0 || attempt > 64) {
        bg[s] = c;
        break;
      }
    }
  }

  std::vector<std::vector<RectSprite>> sprites(scene_count);
  for (int s = 0; s < scene_count; ++s) {
    int rect_count = preset == SynthPreset::Dynamic ? 2 : 1;
    for (int k = 0; k < rect_count; ++k) {
      RectSprite r;
      r.half_w = 6 + static_cast<int>(uniform_index(rng, 6));
      r.half_h = 6 + static_cast<int>(uniform_index(rng, 6));
      r.cx = uniform(rng, 16.0, kW - 16.0);
      r.cy = uniform(rng, 16.0, kH - 16.0);
      if (preset == SynthPreset::Dynamic) {
        r.ax = uniform(rng, 8.0, 16.0);
        r.ay = uniform(rng, 8.0, 16.0);
        r.fx = uniform(rng, 0.05, 0.35);
        r.fy = uniform(rng, 0.05, 0.35);
        r.px = uniform(rng, 0.0, 6.28318);
        r.py = uniform(rng, 0.0, 6.28318);
      } else {
        r.ax = r.ay = r.fx = r.fy = r.px = r.py = 0.0;  // stationary
      }
      for (int ch = 0; ch < 3; ++ch) {
        int v;
        do {
          v = static_cast<int>(uniform_index(rng, 256));
        } while (std::abs(v - int(bg[s][ch])) < 48);
        r.color[ch] = static_cast<std::uint8_t>(v);
      }
      sprites[s].push_back(r);
    }
  }

  // Per-scene audio: a small sinusoid mixture with seeded piecewise-linear
  // amplitude envelopes, so every block has temporal texture in the MFCC rows.
  double lo_hz = preset == SynthPreset::Static ? 300.0 : 200.0;
  double hi_hz = 1700.0;  // stays below Nyquist for every simulated resample
  std::vector<std::vector<ToneVoice>> voices(scene_count);
  double scene_secs_max = static_cast<double>(total_frames) / kFps;
  for (int s = 0; s < scene_count; ++s) {
    for (int k = 0; k < 3; ++k) {
      ToneVoice v;
      v.freq_hz = uniform(rng, lo_hz, hi_hz);
      v.knot_dt = 0.4;
      std::size_t knot_count = static_cast<std::size_t>(scene_secs_max / v.knot_dt) + 2;
      v.knots.resize(knot_count);
      for (auto& a : v.knots) a = uniform(rng, 0.15, 1.0);
      voices[s].push_back(std::move(v));
    }
  }

  clip.frames.reserve(total_frames);
  for (std::size_t i = 0; i < total_frames; ++i) {
    int scene = scene_count - 1;
    for (int s = 0; s < scene_count; ++s) {
      if (i >= bounds[s] && i < bounds[s + 1]) {
        scene = s;
        break;
      }
    }
    double t = static_cast<double>(i) / kFps;
    Frame f;
    f.height = kH;
    f.width = kW;
    f.channels = kC;
    f.data.resize(static_cast<std::size_t>(kH) * kW * kC);
    for (std::size_t px = 0; px < static_cast<std::size_t>(kH) * kW; ++px) {
      f.data[px * 3 + 0] = bg[scene][0];
      f.data[px * 3 + 1] = bg[scene][1];
      f.data[px * 3 + 2] = bg[scene][2];
    }
    for (const RectSprite& r : sprites[scene]) {
      double cx = r.cx + r.ax * std::sin(2 * 3.14159265358979 * r.fx * t + r.px);
      double cy = r.cy + r.ay * std::sin(2 * 3.14159265358979 * r.fy * t + r.py);
      int x0 = std::max(0, static_cast<int>(std::lround(cx)) - r.half_w);
      int x1 = std::min(kW - 1, static_cast<int>(std::lround(cx)) + r.half_w);
      int y0 = std::max(0, static_cast<int>(std::lround(cy)) - r.half_h);
      int y1 = std::min(kH - 1, static_cast<int>(std::lround(cy)) + r.half_h);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          f.at(y, x, 0) = r.color[0];
          f.at(y, x, 1) = r.color[1];
          f.at(y, x, 2) = r.color[2];
        }
      }
    }
    clip.frames.push_back(std::move(f));
  }

  std::size_t total_samples = static_cast<std::size_t>(total_frames) * kRate / kFps;
  clip.audio.resize(total_samples);
  for (std::size_t i = 0; i < total_samples; ++i) {
    double t = static_cast<double>(i) / kRate;
    std::size_t frame_idx = std::min<std::size_t>(static_cast<std::size_t>(t * kFps), total_frames - 1);
    int scene = scene_count - 1;
    for (int s = 0; s < scene_count; ++s) {
      if (frame_idx >= bounds[s] && frame_idx < bounds[s + 1]) {
        scene = s;
        break;
      }
    }
    double scene_t = t - static_cast<double>(bounds[scene]) / kFps;
    double v = 0.0;
    for (const ToneVoice& voice : voices[scene])
      v += voice.amp(scene_t) * std::sin(2 * 3.14159265358979 * voice.freq_hz * t);
    clip.audio[i] = clamp_i16(v * 3000.0);
  }

  return clip;
}

namespace {

void requantize(Frame& f, int q) {
  int half = q / 2;
  for (auto& v : f.data) {
    int nv = (v / q) * q + half;
    v = static_cast<std::uint8_t>(std::min(nv, 255));
  }
}

void box_blur(Frame& f, int radius) {
  const int h = f.height, w = f.width, c = f.channels;
  std::vector<double> tmp(f.data.size());
  // horizontal pass, clamp-to-edge
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int dx = -radius; dx <= radius; ++dx) {
          int xx = std::clamp(x + dx, 0, w - 1);
          acc += f.at(y, xx, ch);
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * c + ch] = acc / (2 * radius + 1);
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int dy = -radius; dy <= radius; ++dy) {
          int yy = std::clamp(y + dy, 0, h - 1);
          acc += tmp[(static_cast<std::size_t>(yy) * w + x) * c + ch];
        }
        f.at(y, x, ch) = clamp_u8(acc / (2 * radius + 1));
      }
    }
  }
}

std::vector<std::int16_t> resample_linear(const std::vector<std::int16_t>& in, std::uint32_t from_rate,
                                          std::uint32_t to_rate) {
  if (in.empty()) return {};
  std::size_t out_n = static_cast<std::size_t>(div_round(in.size() * static_cast<std::uint64_t>(to_rate), from_rate));
  std::vector<std::int16_t> out(out_n);
  for (std::size_t i = 0; i < out_n; ++i) {
    double pos = static_cast<double>(i) * from_rate / to_rate;
    std::size_t i0 = std::min<std::size_t>(static_cast<std::size_t>(pos), in.size() - 1);
    std::size_t i1 = std::min(i0 + 1, in.size() - 1);
    double frac = pos - static_cast<double>(i0);
    out[i] = clamp_i16(in[i0] * (1.0 - frac) + in[i1] * frac);
  }
  return out;
}

}  // namespace

MediaClip degrade(const MediaClip& clip, const DegradeParams& params, std::uint64_t seed) {
  validate_clip(clip);
  if (params.visual_quant_step < 1) raise(ErrorCode::MediaInvalid, "quant step must be >= 1");
  if (params.blur_radius < 0 || params.noise_sigma < 0) raise(ErrorCode::MediaInvalid, "negative degrade parameter");
  if (params.audio_bits < 4 || params.audio_bits > 16) raise(ErrorCode::MediaInvalid, "audio_bits out of [4,16]");

  MediaClip out = clip;
  std::mt19937_64 rng(seed ^ 0xDE6B7ADEULL);

  if (params.visual_quant_step > 1)
    for (Frame& f : out.frames) requantize(f, params.visual_quant_step);
  if (params.blur_radius > 0)
    for (Frame& f : out.frames) box_blur(f, params.blur_radius);
  if (params.noise_sigma > 0.0) {
    for (Frame& f : out.frames)
      for (auto& v : f.data) v = clamp_u8(v + params.noise_sigma * gaussian(rng));
  }
  if (params.target_fps.num != 0 && !(params.target_fps == out.frame_rate)) {
    const Rational src = out.frame_rate;
    const Rational dst = params.target_fps;
    std::uint64_t n = out.frames.size();
    std::uint64_t out_n = div_round(n * dst.num * src.den, static_cast<std::uint64_t>(dst.den) * src.num);
    if (out_n == 0) out_n = 1;
    std::vector<Frame> resampled;
    resampled.reserve(out_n);
    for (std::uint64_t j = 0; j < out_n; ++j) {
      std::uint64_t idx = div_round(j * src.num * dst.den, static_cast<std::uint64_t>(src.den) * dst.num);
      resampled.push_back(out.frames[std::min<std::uint64_t>(idx, n - 1)]);
    }
    out.frames = std::move(resampled);
    out.frame_rate = dst;
  }
  if (params.audio_rate != 0 && params.audio_rate != out.sample_rate) {
    out.audio = resample_linear(out.audio, out.sample_rate, params.audio_rate);
    out.sample_rate = params.audio_rate;
  }
  if (params.audio_bits < 16) {
    int step = 1 << (16 - params.audio_bits);
    for (auto& s : out.audio) {
      double q = std::round(static_cast<double>(s) / step) * step;
      s = clamp_i16(q);
    }
  }
  return out;
}

MediaClip apply_tamper(const MediaClip& clip, const TamperSpec& spec, std::uint64_t seed) {
  validate_clip(clip);
  double duration = clip.video_duration();
  if (spec.start_s < 0.0 || spec.duration_s < 0.0 || spec.start_s + spec.duration_s > duration + 1e-9)
    raise(ErrorCode::WindowOutOfRange, "tamper window outside clip");

  MediaClip out = clip;
  std::mt19937_64 rng(seed ^ 0x7A3B9C15ULL);
  double fps = clip.frame_rate.value();

  std::size_t f0 = static_cast<std::size_t>(std::llround(spec.start_s * fps));
  std::size_t nf = static_cast<std::size_t>(std::llround(spec.duration_s * fps));
  std::size_t a0 = static_cast<std::size_t>(std::llround(spec.start_s * clip.sample_rate));
  std::size_t na = static_cast<std::size_t>(std::llround(spec.duration_s * clip.sample_rate));
  f0 = std::min(f0, out.frames.size());
  nf = std::min(nf, out.frames.size() - f0);
  a0 = std::min(a0, out.audio.size());
  na = std::min(na, out.audio.size() - a0);

  switch (spec.kind) {
    case TamperKind::TemporalCut:
      out.frames.erase(out.frames.begin() + static_cast<std::ptrdiff_t>(f0),
                       out.frames.begin() + static_cast<std::ptrdiff_t>(f0 + nf));
      out.audio.erase(out.audio.begin() + static_cast<std::ptrdiff_t>(a0),
                      out.audio.begin() + static_cast<std::ptrdiff_t>(a0 + na));
      if (out.frames.empty()) raise(ErrorCode::WindowOutOfRange, "cut removes entire clip");
      break;
    case TamperKind::SpatialNoise:
      for (std::size_t i = f0; i < f0 + nf; ++i)
        for (auto& v : out.frames[i].data) v = static_cast<std::uint8_t>(uniform_index(rng, 256));
      break;
    case TamperKind::AudioNoise:
      for (std::size_t i = a0; i < a0 + na; ++i)
        out.audio[i] = static_cast<std::int16_t>(static_cast<int>(uniform_index(rng, 65536)) - 32768);
      break;
  }
  return out;
}

std::size_t keyframe_count(std::size_t frame_count, Rational fps) {
  // ceil(10 * frame_count * den / num)
  std::uint64_t numer = 10ULL * frame_count * fps.den;
  return static_cast<std::size_t>((numer + fps.num - 1) / fps.num);
}

std::vector<Frame> sample_keyframes(const MediaClip& clip) {
  validate_clip(clip);
  if (clip.frame_rate.value() < 1.0) raise(ErrorCode::MediaInvalid, "frame rate below 1 fps");
  std::size_t count = keyframe_count(clip.frames.size(), clip.frame_rate);
  std::vector<Frame> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    // source index round(i * fps / 10), exact in integers
    std::uint64_t idx =
        div_round(static_cast<std::uint64_t>(i) * clip.frame_rate.num, 10ULL * clip.frame_rate.den);
    out.push_back(clip.frames[std::min<std::size_t>(idx, clip.frames.size() - 1)]);
  }
  return out;
}

}  // namespace arcseal::media
