#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "arcseal/features.hpp"
#include "arcseal/media.hpp"

using namespace arcseal;
using namespace arcseal::features;
using arcseal::media::Frame;

namespace {

Frame solid_frame(std::uint8_t v, int h = 32, int w = 32, int c = 3) {
  Frame f;
  f.height = static_cast<std::uint16_t>(h);
  f.width = static_cast<std::uint16_t>(w);
  f.channels = static_cast<std::uint8_t>(c);
  f.data.assign(static_cast<std::size_t>(h) * w * c, v);
  return f;
}

Frame random_frame(std::mt19937_64& rng, int h = 24, int w = 24, int c = 3) {
  Frame f = solid_frame(0, h, w, c);
  for (auto& v : f.data) v = static_cast<std::uint8_t>(rng());
  return f;
}

Frame upsample(const Frame& f, int factor) {
  Frame out;
  out.height = static_cast<std::uint16_t>(f.height * factor);
  out.width = static_cast<std::uint16_t>(f.width * factor);
  out.channels = f.channels;
  out.data.resize(static_cast<std::size_t>(out.height) * out.width * out.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int ch = 0; ch < out.channels; ++ch) out.at(y, x, ch) = f.at(y / factor, x / factor, ch);
  return out;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("descriptor of all-black frame") {
  auto d = frame_descriptor(solid_frame(0));
  for (int i = 0; i < kLumaCells; ++i) CHECK(d[i] == doctest::Approx(0.0));
  for (int ch = 0; ch < 3; ++ch) {
    CHECK(d[kLumaCells + ch * kHistBins] == doctest::Approx(1.0));
    for (int b = 1; b < kHistBins; ++b) CHECK(d[kLumaCells + ch * kHistBins + b] == doctest::Approx(0.0));
  }
}

TEST_CASE("descriptor of all-white frame") {
  auto d = frame_descriptor(solid_frame(255));
  for (int i = 0; i < kLumaCells; ++i) CHECK(d[i] == doctest::Approx(1.0));
  for (int ch = 0; ch < 3; ++ch) CHECK(d[kLumaCells + ch * kHistBins + 31] == doctest::Approx(1.0));
}

TEST_CASE("descriptor of checkerboard against pixel-count oracle") {
  Frame f = solid_frame(0, 64, 64, 3);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if ((x + y) % 2 == 0)
        for (int ch = 0; ch < 3; ++ch) f.at(y, x, ch) = 255;
  auto d = frame_descriptor(f);
  // every 8x8 cell holds 32 white + 32 black pixels
  for (int i = 0; i < kLumaCells; ++i) CHECK(d[i] == doctest::Approx(0.5).epsilon(1e-9));
  for (int ch = 0; ch < 3; ++ch) {
    CHECK(d[kLumaCells + ch * kHistBins + 0] == doctest::Approx(0.5));
    CHECK(d[kLumaCells + ch * kHistBins + 31] == doctest::Approx(0.5));
  }
}

TEST_CASE("histogram section sums to 3 and descriptor is finite") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    Frame f = random_frame(rng, 17 + trial, 23, trial % 2 == 0 ? 3 : 1);
    auto d = frame_descriptor(f);
    double hist_sum = 0.0;
    for (int i = kLumaCells; i < kDescriptorDim; ++i) hist_sum += d[i];
    CHECK(hist_sum == doctest::Approx(3.0).epsilon(1e-6));
    for (double v : d) CHECK(std::isfinite(v));
  }
}

TEST_CASE("descriptor invariant under integer upsampling") {
  std::mt19937_64 rng(17);
  for (int factor : {2, 3}) {
    Frame f = random_frame(rng, 12, 20);
    auto a = frame_descriptor(f);
    auto b = frame_descriptor(upsample(f, factor));
    for (int i = 0; i < kDescriptorDim; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
  }
}

TEST_CASE("sad basics and brute-force oracle") {
  Frame a = solid_frame(10);
  CHECK(sad(a, a) == 0.0);
  Frame b = solid_frame(11);
  CHECK(sad(a, b) == doctest::Approx(1.0));

  std::mt19937_64 rng(3);
  Frame x = random_frame(rng), y = random_frame(rng);
  double expected = 0.0;
  for (int r = 0; r < x.height; ++r)
    for (int c = 0; c < x.width; ++c)
      for (int ch = 0; ch < x.channels; ++ch) expected += std::abs(int(x.at(r, c, ch)) - int(y.at(r, c, ch)));
  expected /= x.data.size();
  CHECK(sad(x, y) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sad dimension mismatch") {
  CHECK_THROWS_AS(sad(solid_frame(0, 8, 8), solid_frame(0, 8, 9)), Error);
}

TEST_CASE("sad is a metric on random triples") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Frame a = random_frame(rng), b = random_frame(rng), c = random_frame(rng);
    CHECK(sad(a, b) == sad(b, a));
    CHECK(sad(a, a) == 0.0);
    CHECK(sad(a, c) <= sad(a, b) + sad(b, c) + 1e-12);
  }
}

TEST_CASE("scene cuts: constant video has none, infinite threshold kills all") {
  std::vector<Frame> frames(20, solid_frame(100));
  CHECK(detect_scene_cuts(frames).empty());
  std::mt19937_64 rng(1);
  std::vector<Frame> noisy;
  for (int i = 0; i < 20; ++i) noisy.push_back(random_frame(rng));
  CHECK(detect_scene_cuts(noisy, std::numeric_limits<double>::infinity()).empty());
}

TEST_CASE("raising the threshold never adds cuts") {
  media::MediaClip clip = media::synth_clip(4, 40, 13);
  auto kf = media::sample_keyframes(clip);
  auto low = detect_scene_cuts(kf, 10.0);
  auto mid = detect_scene_cuts(kf, 30.0);
  auto high = detect_scene_cuts(kf, 90.0);
  CHECK(std::includes(low.begin(), low.end(), mid.begin(), mid.end()));
  CHECK(std::includes(mid.begin(), mid.end(), high.begin(), high.end()));
}

TEST_CASE("mfcc of silence: c0 = sqrt(26) log(1e-10), rest zero") {
  std::vector<double> window(200, 0.0);
  auto c = mfcc(window, 8000.0);
  REQUIRE(c.size() == 13);
  CHECK(c[0] == doctest::Approx(std::sqrt(26.0) * std::log(1e-10)).epsilon(1e-9));
  for (int k = 1; k < 13; ++k) CHECK(c[k] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("mfcc deterministic") {
  std::mt19937_64 rng(9);
  std::vector<double> window(200);
  for (auto& v : window) v = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);
  CHECK(mfcc(window, 8000.0) == mfcc(window, 8000.0));
}

TEST_CASE("sinusoid at a mel filter center maximizes that filter's energy") {
  const double rate = 8000.0;
  auto bank = mel_filterbank(kMelFilters, 256, rate);

  // center frequency of filter j = second mel edge; recompute independently
  auto hz_to_mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto mel_to_hz = [](double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); };
  const double mel_max = hz_to_mel(rate / 2.0);

  for (int j : {4, 10, 18}) {
    double center_hz = mel_to_hz(mel_max * (j + 1) / (kMelFilters + 1));
    std::vector<double> window(200);
    for (int i = 0; i < 200; ++i) window[i] = std::sin(2.0 * 3.14159265358979 * center_hz * i / rate);
    auto mag = magnitude_spectrum(window);

    int best = -1;
    double best_e = -1.0;
    for (int f = 0; f < kMelFilters; ++f) {
      // independent direct-summation oracle over the published triangle weights
      double e = 0.0;
      for (std::size_t k = 0; k < mag.size(); ++k) e += bank[f][k] * mag[k];
      if (e > best_e) {
        best_e = e;
        best = f;
      }
    }
    CHECK(best == j);
  }
}

TEST_CASE("mean shift: identical points give one mode") {
  std::vector<std::vector<double>> pts(5, {1.0, 2.0});
  auto r = mean_shift(pts, 0.5);
  REQUIRE(r.modes.size() == 1);
  CHECK(r.modes[0][0] == doctest::Approx(1.0));
  CHECK(r.modes[0][1] == doctest::Approx(2.0));
}

TEST_CASE("mean shift: single point") {
  auto r = mean_shift({{3.0, -1.0}}, 1.0);
  REQUIRE(r.modes.size() == 1);
  CHECK(r.modes[0][0] == doctest::Approx(3.0));
}

TEST_CASE("mean shift separates two tight groups; matches fixed-point oracle") {
  const double bw = 1.0;
  std::mt19937_64 rng(21);
  std::vector<std::vector<double>> pts;
  auto u = [&] { return (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 0.2; };
  for (int i = 0; i < 12; ++i) pts.push_back({0.0 + u(), 0.0 + u()});
  for (int i = 0; i < 12; ++i) pts.push_back({10.0 + u(), 10.0 + u()});

  auto r = mean_shift(pts, bw);
  REQUIRE(r.modes.size() == 2);

  // exhaustive fixed-point oracle: iterate the flat-kernel update to full
  // convergence from each group's first point
  for (int g = 0; g < 2; ++g) {
    std::vector<double> m = pts[g * 12];
    for (int it = 0; it < 10000; ++it) {
      std::vector<double> next(2, 0.0);
      int n = 0;
      for (const auto& q : pts) {
        double d = std::hypot(m[0] - q[0], m[1] - q[1]);
        if (d <= bw) {
          next[0] += q[0];
          next[1] += q[1];
          ++n;
        }
      }
      next[0] /= n;
      next[1] /= n;
      if (std::hypot(next[0] - m[0], next[1] - m[1]) < 1e-12) break;
      m = next;
    }
    CHECK(std::hypot(r.modes[g][0] - m[0], r.modes[g][1] - m[1]) < 1e-3);
  }

  // labels: first 12 points in one cluster, rest in the other
  for (int i = 0; i < 12; ++i) CHECK(r.label_of_point[i] == r.label_of_point[0]);
  for (int i = 12; i < 24; ++i) CHECK(r.label_of_point[i] == r.label_of_point[12]);
  CHECK(r.label_of_point[0] != r.label_of_point[12]);
}

TEST_CASE("mean shift mode count invariant to point order") {
  std::mt19937_64 rng(31);
  std::vector<std::vector<double>> pts;
  auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 10; ++i) pts.push_back({u(), u()});
  for (int i = 0; i < 10; ++i) pts.push_back({6.0 + u(), 6.0 + u()});
  auto base = mean_shift(pts, 1.5).modes.size();
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(pts.begin(), pts.end(), rng);
    CHECK(mean_shift(pts, 1.5).modes.size() == base);
  }
}

TEST_CASE("clip cluster assignment: majority and tie rules") {
  std::vector<int> all_one(10, 1);
  CHECK(assign_clip_cluster(all_one, 3) == 1);
  std::vector<int> sixty_forty;
  for (int i = 0; i < 6; ++i) sixty_forty.push_back(2);
  for (int i = 0; i < 4; ++i) sixty_forty.push_back(0);
  CHECK(assign_clip_cluster(sixty_forty, 3) == 2);
  std::vector<int> tie = {1, 1, 2, 2};
  CHECK(assign_clip_cluster(tie, 3) == 1);  // tie breaks to the lower id
}

TEST_CASE("partition covers the keyframe sequence") {
  media::MediaClip clip = media::synth_clip(3, 36, 19);
  auto kf = media::sample_keyframes(clip);
  auto part = partition_scenes(kf);
  REQUIRE(part.clips.size() == part.cut_indices.size() + 1);
  std::size_t covered = 0;
  std::size_t expected_start = 0;
  for (auto [s, e] : part.clips) {
    CHECK(s == expected_start);
    CHECK(e > s);
    covered += e - s;
    expected_start = e;
  }
  CHECK(covered == kf.size());
  CHECK(part.cluster_count >= 1);
  for (int c : part.cluster_of_clip) {
    CHECK(c >= 0);
    CHECK(c < part.cluster_count);
  }
}

}  // TEST_SUITE
