#include "arcseal/pq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arcseal/error.hpp"

namespace arcseal::pq {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double dist2(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

std::mt19937_64 subspace_rng(std::uint64_t seed, std::size_t sub) {
  return std::mt19937_64(seed ^ (0x9E3779B97F4A7C15ULL * (sub + 1)));
}

std::vector<std::size_t> kmeans_pp_init(std::span<const double> points, std::size_t n, std::size_t dim,
                                        std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  chosen.push_back(rng() % n);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < k) {
    const double* last = points.data() + chosen.back() * dim;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], dist2(points.data() + i * dim, last, dim));
      total += d2[i];
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng() % n;
    } else {
      const double r = uniform01(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
  }
  return chosen;
}

PqCodebook train_pq(const std::vector<std::vector<double>>& vectors, int m_sub, int k_cent,
                    std::uint64_t seed) {
  if (vectors.empty()) raise(ErrorCode::EmptyInput, "no training vectors");
  const std::size_t n = vectors.size();
  const std::size_t dim = vectors[0].size();
  if (m_sub <= 0 || dim % static_cast<std::size_t>(m_sub) != 0)
    raise(ErrorCode::DimensionMismatch, "sub-quantizer count must divide the dimension");
  for (const auto& v : vectors)
    if (v.size() != dim) raise(ErrorCode::DimensionMismatch, "inconsistent vector dimensions");

  // Scarce data lowers the centroid count; codes stay 256-bit with the high
  // index bits unused, and the header records the lowered K.
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_cent), n);

  PqCodebook cb;
  cb.m_sub = static_cast<std::uint16_t>(m_sub);
  cb.k_cent = static_cast<std::uint16_t>(k);
  cb.dim = static_cast<std::uint32_t>(dim);
  cb.centroids.assign(static_cast<std::size_t>(m_sub) * k * (dim / m_sub), 0.0);
  const std::size_t sd = cb.sub_dim();

  std::vector<double> pts(n * sd);
  std::vector<std::size_t> assign(n, 0);
  for (int sub = 0; sub < m_sub; ++sub) {
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(vectors[i].data() + sub * sd, sd, pts.data() + i * sd);

    std::mt19937_64 rng = subspace_rng(seed, static_cast<std::size_t>(sub));
    const auto seeds = kmeans_pp_init(pts, n, sd, k, rng);
    for (std::size_t c = 0; c < k; ++c)
      std::copy_n(pts.data() + seeds[c] * sd, sd, cb.centroid(sub, c));

    // Lloyd iterations, tolerance on the largest centroid displacement
    std::vector<double> sums(k * sd);
    std::vector<std::size_t> counts(k);
    for (int iter = 0; iter < 100; ++iter) {
      std::fill(sums.begin(), sums.end(), 0.0);
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
          const double d = dist2(pts.data() + i * sd, cb.centroid(sub, c), sd);
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        assign[i] = best;
        ++counts[best];
        for (std::size_t j = 0; j < sd; ++j) sums[best * sd + j] += pts[i * sd + j];
      }

      double shift = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        double* cent = cb.centroid(sub, c);
        if (counts[c] == 0) {
          // adopt the point farthest from its centroid
          std::size_t far_i = 0;
          double far_d = -1.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double d = dist2(pts.data() + i * sd, cb.centroid(sub, assign[i]), sd);
            if (d > far_d) {
              far_d = d;
              far_i = i;
            }
          }
          shift = std::max(shift, std::sqrt(dist2(cent, pts.data() + far_i * sd, sd)));
          std::copy_n(pts.data() + far_i * sd, sd, cent);
          continue;
        }
        double moved = 0.0;
        for (std::size_t j = 0; j < sd; ++j) {
          const double nv = sums[c * sd + j] / static_cast<double>(counts[c]);
          const double d = nv - cent[j];
          moved += d * d;
          cent[j] = nv;
        }
        shift = std::max(shift, std::sqrt(moved));
      }
      if (shift < 1e-6) break;
    }
  }
  return cb;
}

PqCode pq_encode(const PqCodebook& cb, std::span<const double> z) {
  if (z.size() != cb.dim) raise(ErrorCode::DimensionMismatch, "query dimension mismatch");
  PqCode code{};
  const std::size_t sd = cb.sub_dim();
  for (std::size_t sub = 0; sub < cb.m_sub; ++sub) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cb.k_cent; ++c) {
      const double d = dist2(z.data() + sub * sd, cb.centroid(sub, c), sd);
      if (d < best_d) {  // strict: ties resolve to the lower index
        best_d = d;
        best = c;
      }
    }
    code[sub] = static_cast<std::uint8_t>(best);
  }
  return code;
}

std::vector<double> pq_decode(const PqCodebook& cb, const PqCode& code) {
  std::vector<double> out(cb.dim);
  const std::size_t sd = cb.sub_dim();
  for (std::size_t sub = 0; sub < cb.m_sub; ++sub) {
    const std::size_t idx = code[sub];
    if (idx >= cb.k_cent) raise(ErrorCode::ParseError, "code index outside codebook");
    std::copy_n(cb.centroid(sub, idx), sd, out.data() + sub * sd);
  }
  return out;
}

double pq_asym_dist(const PqCodebook& cb, std::span<const double> z, const PqCode& code) {
  if (z.size() != cb.dim) raise(ErrorCode::DimensionMismatch, "query dimension mismatch");
  const std::size_t sd = cb.sub_dim();
  double acc = 0.0;
  for (std::size_t sub = 0; sub < cb.m_sub; ++sub) {
    const std::size_t idx = code[sub];
    if (idx >= cb.k_cent) raise(ErrorCode::ParseError, "code index outside codebook");
    acc += dist2(z.data() + sub * sd, cb.centroid(sub, idx), sd);
  }
  return std::sqrt(acc);
}

namespace {
constexpr std::uint16_t kCodebookVersion = 1;
}

void serialize_codebook(ByteWriter& w, const PqCodebook& cb) {
  w.raw("ARCQ", 4);
  w.u16(kCodebookVersion);
  w.u16(cb.m_sub);
  w.u16(cb.k_cent);
  w.u32(cb.dim);
  for (double v : cb.centroids) w.f64(v);
}

PqCodebook deserialize_codebook(ByteReader& r) {
  r.expect_magic("ARCQ");
  if (r.u16() != kCodebookVersion) raise(ErrorCode::UnsupportedVersion, "codebook version");
  PqCodebook cb;
  cb.m_sub = r.u16();
  cb.k_cent = r.u16();
  cb.dim = r.u32();
  if (cb.m_sub == 0 || cb.dim == 0 || cb.dim % cb.m_sub != 0)
    raise(ErrorCode::ParseError, "bad codebook geometry");
  cb.centroids.resize(static_cast<std::size_t>(cb.m_sub) * cb.k_cent * cb.sub_dim());
  for (double& v : cb.centroids) v = r.f64();
  return cb;
}

std::vector<std::uint8_t> write_codebook(const PqCodebook& cb) {
  ByteWriter w;
  serialize_codebook(w, cb);
  return w.take();
}

PqCodebook read_codebook(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  PqCodebook cb = deserialize_codebook(r);
  if (!r.done()) raise(ErrorCode::TruncatedPayload, "trailing bytes in codebook");
  return cb;
}

}  // namespace arcseal::pq
