#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "arcseal/bytes.hpp"

namespace arcseal::pq {

inline constexpr int kSubQuantizers = 32;   // M_sub
inline constexpr int kCentroids = 256;      // K_cent; 32 * log2(256) = 256 bits
inline constexpr std::size_t kCodeBytes = 32;

// 256-bit code: one 8-bit centroid index per sub-quantizer.
using PqCode = std::array<std::uint8_t, kCodeBytes>;

struct PqCodebook {
  std::uint16_t m_sub = 0;
  std::uint16_t k_cent = 0;  // may be lowered when training data is scarce
  std::uint32_t dim = 0;
  std::vector<double> centroids;  // [sub][centroid][sub_dim]

  std::size_t sub_dim() const { return dim / m_sub; }
  const double* centroid(std::size_t sub, std::size_t idx) const {
    return centroids.data() + (sub * k_cent + idx) * sub_dim();
  }
  double* centroid(std::size_t sub, std::size_t idx) {
    return centroids.data() + (sub * k_cent + idx) * sub_dim();
  }
};

// k-means++ seeding over points laid out flat (n x dim). Shared with the
// test oracle so Lloyd iterations can be compared from identical starts.
std::vector<std::size_t> kmeans_pp_init(std::span<const double> points, std::size_t n, std::size_t dim,
                                        std::size_t k, std::mt19937_64& rng);

// Per-subspace RNG stream; documented so oracles can replicate the init.
std::mt19937_64 subspace_rng(std::uint64_t seed, std::size_t sub);

PqCodebook train_pq(const std::vector<std::vector<double>>& vectors, int m_sub, int k_cent,
                    std::uint64_t seed);

PqCode pq_encode(const PqCodebook& cb, std::span<const double> z);
std::vector<double> pq_decode(const PqCodebook& cb, const PqCode& code);
double pq_asym_dist(const PqCodebook& cb, std::span<const double> z, const PqCode& code);

void serialize_codebook(ByteWriter& w, const PqCodebook& cb);
PqCodebook deserialize_codebook(ByteReader& r);
std::vector<std::uint8_t> write_codebook(const PqCodebook& cb);
PqCodebook read_codebook(std::span<const std::uint8_t> bytes);

}  // namespace arcseal::pq
