#include "arcseal/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "arcseal/error.hpp"

namespace arcseal::features {

namespace {

constexpr double kPi = 3.14159265358979323846;

double luma_of(const media::Frame& f, std::size_t y, std::size_t x) {
  if (f.channels == 1) return f.at(y, x, 0);
  return 0.299 * f.at(y, x, 0) + 0.587 * f.at(y, x, 1) + 0.114 * f.at(y, x, 2);
}

// In-place iterative radix-2 FFT; n must be a power of two.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * kPi / static_cast<double>(len);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        auto u = a[i + k];
        auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) raise(ErrorCode::DimensionMismatch, "vector size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::vector<double> frame_descriptor(const media::Frame& frame) {
  const int h = frame.height, w = frame.width, c = frame.channels;
  if (h == 0 || w == 0 || (c != 1 && c != 3)) raise(ErrorCode::MediaInvalid, "bad frame geometry");

  std::vector<double> out(kDescriptorDim, 0.0);

  // Area-exact 8x8 luma cell means: each pixel's unit square is distributed
  // over the (possibly fractional) grid cells it overlaps, which is what
  // makes the descriptor exactly invariant to integer upsampling.
  const double cell_h = h / 8.0, cell_w = w / 8.0;
  // rowacc[cell_row][x] accumulates luma weighted by vertical overlap
  std::vector<double> rowacc(8 * static_cast<std::size_t>(w), 0.0);
  for (int y = 0; y < h; ++y) {
    double y0 = y / cell_h, y1 = (y + 1) / cell_h;
    int r0 = std::min(7, static_cast<int>(y0));
    int r1 = std::min(7, static_cast<int>(y1 - 1e-12));
    for (int x = 0; x < w; ++x) {
      double lum = luma_of(frame, y, x);
      for (int r = r0; r <= r1; ++r) {
        double overlap = std::min<double>(y1, r + 1) - std::max<double>(y0, r);
        rowacc[static_cast<std::size_t>(r) * w + x] += lum * overlap;
      }
    }
  }
  for (int r = 0; r < 8; ++r) {
    for (int x = 0; x < w; ++x) {
      double x0 = x / cell_w, x1 = (x + 1) / cell_w;
      int c0 = std::min(7, static_cast<int>(x0));
      int c1 = std::min(7, static_cast<int>(x1 - 1e-12));
      double v = rowacc[static_cast<std::size_t>(r) * w + x];
      for (int cc = c0; cc <= c1; ++cc) {
        double overlap = std::min<double>(x1, cc + 1) - std::max<double>(x0, cc);
        out[r * 8 + cc] += v * overlap;
      }
    }
  }
  // Overlaps above are measured in cell units, so each cell's weights sum to
  // exactly 1 and the accumulator already holds the area-weighted mean.
  for (int i = 0; i < kLumaCells; ++i) out[i] /= 255.0;

  // Per-channel 32-bin histograms, L1-normalized. Single-channel frames
  // replicate their histogram into all three slots so S stays fixed.
  const double inv_count = 1.0 / (static_cast<double>(h) * w);
  for (int ch = 0; ch < 3; ++ch) {
    int src = c == 3 ? ch : 0;
    double* hist = out.data() + kLumaCells + ch * kHistBins;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) hist[frame.at(y, x, src) >> 3] += inv_count;
  }
  return out;
}

double sad(const media::Frame& a, const media::Frame& b) {
  if (a.height != b.height || a.width != b.width || a.channels != b.channels)
    raise(ErrorCode::DimensionMismatch, "frame shape mismatch");
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    acc += static_cast<std::uint64_t>(std::abs(int(a.data[i]) - int(b.data[i])));
  return static_cast<double>(acc) / static_cast<double>(a.data.size());
}

std::vector<std::size_t> detect_scene_cuts(const std::vector<media::Frame>& keyframes, double threshold) {
  std::vector<std::size_t> cuts;
  for (std::size_t i = 1; i < keyframes.size(); ++i)
    if (sad(keyframes[i - 1], keyframes[i]) > threshold) cuts.push_back(i);
  return cuts;
}

std::vector<double> magnitude_spectrum(std::span<const double> window) {
  const std::size_t n = window.size();
  const std::size_t nfft = next_pow2(n);
  std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    buf[i] = window[i] * hann;
  }
  fft(buf);
  std::vector<double> mag(nfft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

std::vector<std::vector<double>> mel_filterbank(int n_filters, int nfft, double sample_rate) {
  const int n_bins = nfft / 2 + 1;
  const double nyquist = sample_rate / 2.0;
  std::vector<double> edges_hz(n_filters + 2);
  const double mel_max = hz_to_mel(nyquist);
  for (int i = 0; i < n_filters + 2; ++i)
    edges_hz[i] = mel_to_hz(mel_max * static_cast<double>(i) / (n_filters + 1));

  std::vector<std::vector<double>> bank(n_filters, std::vector<double>(n_bins, 0.0));
  for (int j = 0; j < n_filters; ++j) {
    double lo = edges_hz[j], mid = edges_hz[j + 1], hi = edges_hz[j + 2];
    for (int k = 0; k < n_bins; ++k) {
      double f = static_cast<double>(k) * sample_rate / nfft;
      if (f > lo && f < mid)
        bank[j][k] = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        bank[j][k] = (hi - f) / (hi - mid);
    }
  }
  return bank;
}

std::vector<double> mfcc(std::span<const double> window, double sample_rate) {
  const std::size_t expected = static_cast<std::size_t>(std::lround(kMfccWindowSeconds * sample_rate));
  if (window.size() != expected)
    raise(ErrorCode::DimensionMismatch, "window must hold 25 ms of samples");

  auto mag = magnitude_spectrum(window);
  const int nfft = static_cast<int>((mag.size() - 1) * 2);
  auto bank = mel_filterbank(kMelFilters, nfft, sample_rate);

  std::vector<double> log_energy(kMelFilters);
  for (int j = 0; j < kMelFilters; ++j) {
    double e = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) e += bank[j][k] * mag[k];
    log_energy[j] = std::log(e + 1e-10);
  }

  // Orthonormal DCT-II, keep coefficients 0..12.
  std::vector<double> out(kMfccCoeffs, 0.0);
  const double m = kMelFilters;
  for (int k = 0; k < kMfccCoeffs; ++k) {
    double acc = 0.0;
    for (int i = 0; i < kMelFilters; ++i) acc += log_energy[i] * std::cos(kPi * k * (2 * i + 1) / (2.0 * m));
    out[k] = acc * (k == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m));
  }
  return out;
}

std::vector<std::vector<double>> mfcc_track(std::span<const std::int16_t> audio, std::uint32_t sample_rate) {
  const std::size_t win = static_cast<std::size_t>(std::lround(kMfccWindowSeconds * sample_rate));
  const std::size_t hop = static_cast<std::size_t>(std::lround(kMfccHopSeconds * sample_rate));
  std::vector<std::vector<double>> rows;
  if (audio.size() < win || win == 0) return rows;
  std::vector<double> window(win);
  for (std::size_t start = 0; start + win <= audio.size(); start += hop) {
    for (std::size_t i = 0; i < win; ++i) window[i] = audio[start + i] / 32768.0;
    rows.push_back(mfcc(window, sample_rate));
  }
  return rows;
}

MeanShiftResult mean_shift(const std::vector<std::vector<double>>& points, double bandwidth) {
  if (points.empty()) raise(ErrorCode::EmptyInput, "mean shift needs at least one point");
  if (bandwidth <= 0.0) raise(ErrorCode::EmptyInput, "bandwidth must be positive");
  const std::size_t dim = points[0].size();

  std::vector<std::vector<double>> converged(points.size());
  std::vector<double> shifted(dim), next(dim);
  for (std::size_t p = 0; p < points.size(); ++p) {
    shifted = points[p];
    for (int iter = 0; iter < 300; ++iter) {
      std::fill(next.begin(), next.end(), 0.0);
      std::size_t neighbors = 0;
      for (const auto& q : points) {
        if (euclidean(shifted, q) <= bandwidth) {
          for (std::size_t d = 0; d < dim; ++d) next[d] += q[d];
          ++neighbors;
        }
      }
      for (std::size_t d = 0; d < dim; ++d) next[d] /= static_cast<double>(neighbors);
      double delta = euclidean(shifted, next);
      shifted = next;
      if (delta < 1e-4) break;
    }
    converged[p] = shifted;
  }

  MeanShiftResult result;
  result.label_of_point.resize(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    int label = -1;
    for (std::size_t m = 0; m < result.modes.size(); ++m) {
      if (euclidean(converged[p], result.modes[m]) < bandwidth / 2.0) {
        label = static_cast<int>(m);
        break;
      }
    }
    if (label < 0) {
      result.modes.push_back(converged[p]);
      label = static_cast<int>(result.modes.size()) - 1;
    }
    result.label_of_point[p] = label;
  }
  return result;
}

int assign_clip_cluster(std::span<const int> frame_labels, int cluster_count) {
  std::vector<int> votes(std::max(cluster_count, 1), 0);
  for (int label : frame_labels)
    if (label >= 0 && label < cluster_count) ++votes[label];
  // modal cluster, ties to the lower id
  int best = 0;
  for (int k = 1; k < cluster_count; ++k)
    if (votes[k] > votes[best]) best = k;
  return best;
}

ScenePartition partition_scenes(const std::vector<media::Frame>& keyframes, double cut_threshold,
                                double bandwidth) {
  if (keyframes.empty()) raise(ErrorCode::EmptyInput, "no keyframes");
  ScenePartition part;
  part.cut_indices = detect_scene_cuts(keyframes, cut_threshold);

  std::size_t start = 0;
  for (std::size_t cut : part.cut_indices) {
    part.clips.emplace_back(start, cut);
    start = cut;
  }
  part.clips.emplace_back(start, keyframes.size());

  // Up to 100 evenly spaced keyframes per scene feed the clustering.
  std::vector<std::vector<double>> samples;
  std::vector<std::size_t> sample_clip;
  for (std::size_t ci = 0; ci < part.clips.size(); ++ci) {
    auto [s, e] = part.clips[ci];
    std::size_t len = e - s;
    std::size_t take = std::min<std::size_t>(len, 100);
    for (std::size_t k = 0; k < take; ++k) {
      std::size_t idx = s + k * len / take;
      samples.push_back(frame_descriptor(keyframes[idx]));
      sample_clip.push_back(ci);
    }
  }

  if (bandwidth <= 0.0) {
    // default: median pairwise distance of the sampled descriptors
    std::vector<double> dists;
    dists.reserve(samples.size() * (samples.size() - 1) / 2);
    for (std::size_t i = 0; i < samples.size(); ++i)
      for (std::size_t j = i + 1; j < samples.size(); ++j) dists.push_back(euclidean(samples[i], samples[j]));
    if (!dists.empty()) {
      std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
      bandwidth = dists[dists.size() / 2];
    }
  }

  if (bandwidth <= 1e-9 || samples.size() < 2) {
    part.cluster_of_clip.assign(part.clips.size(), 0);
    part.cluster_count = 1;
    return part;
  }

  auto ms = mean_shift(samples, bandwidth);
  part.cluster_count = static_cast<int>(ms.modes.size());
  part.cluster_of_clip.resize(part.clips.size());
  for (std::size_t ci = 0; ci < part.clips.size(); ++ci) {
    std::vector<int> labels;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (sample_clip[i] == ci) labels.push_back(ms.label_of_point[i]);
    part.cluster_of_clip[ci] = assign_clip_cluster(labels, part.cluster_count);
  }
  return part;
}

}  // namespace arcseal::features
