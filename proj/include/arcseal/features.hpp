#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "arcseal/media.hpp"

namespace arcseal::features {

// Frame descriptor layout: 64 area-averaged luma cell means in [0,1]
// followed by three 32-bin per-channel histograms, each L1-normalized.
inline constexpr int kLumaCells = 64;      // 8x8 grid
inline constexpr int kHistBins = 32;
inline constexpr int kDescriptorDim = kLumaCells + 3 * kHistBins;  // 160

inline constexpr double kDefaultCutThreshold = 30.0;  // 8-bit sample units

inline constexpr int kMfccCoeffs = 13;
inline constexpr int kMelFilters = 26;
inline constexpr double kMfccWindowSeconds = 0.025;
inline constexpr double kMfccHopSeconds = 0.010;

std::vector<double> frame_descriptor(const media::Frame& frame);

// Mean absolute sample difference between two equally-shaped frames.
double sad(const media::Frame& a, const media::Frame& b);

std::vector<std::size_t> detect_scene_cuts(const std::vector<media::Frame>& keyframes,
                                           double threshold = kDefaultCutThreshold);

// 13 MFCC coefficients for one 25 ms window:
// Hann window -> magnitude FFT -> 26 mel filters (0..Nyquist) -> log(x+1e-10)
// -> orthonormal DCT-II, coefficients 0..12.
std::vector<double> mfcc(std::span<const double> window, double sample_rate);

// Exposed pipeline stages (the filter-bank tests check these directly).
std::vector<double> magnitude_spectrum(std::span<const double> window);  // Hann + FFT, NFFT/2+1 bins
std::vector<std::vector<double>> mel_filterbank(int n_filters, int nfft, double sample_rate);

// Full-track MFCC matrix: one 13-coefficient row per 10 ms hop.
std::vector<std::vector<double>> mfcc_track(std::span<const std::int16_t> audio, std::uint32_t sample_rate);

struct MeanShiftResult {
  std::vector<std::vector<double>> modes;
  std::vector<int> label_of_point;  // nearest surviving mode per input point
};

// Flat-kernel mean shift; merges modes closer than bandwidth/2.
MeanShiftResult mean_shift(const std::vector<std::vector<double>>& points, double bandwidth);

struct ScenePartition {
  std::vector<std::size_t> cut_indices;                       // strictly ascending
  std::vector<std::pair<std::size_t, std::size_t>> clips;     // [start, end) keyframe ranges
  std::vector<int> cluster_of_clip;
  int cluster_count = 1;
};

// Scene cuts -> per-scene keyframe sampling (<= 100 frames per scene) ->
// mean shift over descriptors -> modal cluster per clip, ties to lower id.
ScenePartition partition_scenes(const std::vector<media::Frame>& keyframes,
                                double cut_threshold = kDefaultCutThreshold,
                                double bandwidth = 0.0 /* 0 => median pairwise distance */);

int assign_clip_cluster(std::span<const int> frame_labels, int cluster_count);

double euclidean(std::span<const double> a, std::span<const double> b);

}  // namespace arcseal::features
