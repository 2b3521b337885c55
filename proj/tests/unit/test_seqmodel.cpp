#include <doctest.h>

#include <cmath>
#include <random>

#include "arcseal/seqmodel.hpp"

using namespace arcseal;
using namespace arcseal::seqmodel;

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (auto& v : m.data) v = (2.0 * uniform01(rng) - 1.0) * scale;
  return m;
}

// Plain textbook LSTM recurrence, written independently of the production
// implementation; the oracle for encode_block.
std::vector<double> oracle_encode(const SeqModel& m, const Matrix& block) {
  const std::size_t h = m.enc_hidden;
  std::vector<double> hidden(h, 0.0), cell(h, 0.0);
  auto sigm = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  for (std::size_t t = 0; t < block.rows; ++t) {
    std::vector<double> next_h(h), next_c(h);
    for (std::size_t j = 0; j < h; ++j) {
      double pre_i = m.encoder.bias[j];
      double pre_f = m.encoder.bias[h + j];
      double pre_g = m.encoder.bias[2 * h + j];
      double pre_o = m.encoder.bias[3 * h + j];
      for (std::size_t k = 0; k < block.cols; ++k) {
        const double x = block.at(t, k);
        pre_i += m.encoder.w_x.at(j, k) * x;
        pre_f += m.encoder.w_x.at(h + j, k) * x;
        pre_g += m.encoder.w_x.at(2 * h + j, k) * x;
        pre_o += m.encoder.w_x.at(3 * h + j, k) * x;
      }
      for (std::size_t k = 0; k < h; ++k) {
        const double hp = hidden[k];
        pre_i += m.encoder.w_h.at(j, k) * hp;
        pre_f += m.encoder.w_h.at(h + j, k) * hp;
        pre_g += m.encoder.w_h.at(2 * h + j, k) * hp;
        pre_o += m.encoder.w_h.at(3 * h + j, k) * hp;
      }
      const double i = sigm(pre_i), f = sigm(pre_f), g = std::tanh(pre_g), o = sigm(pre_o);
      next_c[j] = f * cell[j] + i * g;
      next_h[j] = o * std::tanh(next_c[j]);
    }
    hidden = next_h;
    cell = next_c;
  }
  std::vector<double> z(m.bottleneck);
  for (std::size_t d = 0; d < m.bottleneck; ++d) {
    double acc = m.head_b[d];
    for (std::size_t k = 0; k < h; ++k) acc += m.head_w.at(d, k) * hidden[k];
    z[d] = acc;
  }
  return z;
}

double total_loss(const SeqModel& m, const Matrix& anchor, const Matrix* next, const Matrix* pos,
                  const Matrix* neg, double margin) {
  return compute_step(m, anchor, next, pos, neg, margin, nullptr).total();
}

double worst_grad_error(SeqModel& m, const Matrix& anchor, const Matrix* next, const Matrix* pos,
                        const Matrix* neg, double margin) {
  SeqModel grads = m;
  for_each_param(grads, [](double& v) { v = 0.0; });
  compute_step(m, anchor, next, pos, neg, margin, &grads);

  std::vector<double> analytic = flatten_params(grads);
  std::vector<double> theta = flatten_params(m);
  SeqModel probe = m;
  double worst = 0.0;
  // h = 1e-4 balances truncation against cancellation noise on the
  // near-zero gradient entries
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = 1e-4 * std::max(1.0, std::abs(theta[i]));
    std::vector<double> t = theta;
    t[i] = theta[i] + h;
    unflatten_params(probe, t);
    const double up = total_loss(probe, anchor, next, pos, neg, margin);
    t[i] = theta[i] - h;
    unflatten_params(probe, t);
    const double down = total_loss(probe, anchor, next, pos, neg, margin);
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace

TEST_SUITE("seqmodel") {

TEST_CASE("zero model encodes any block to the zero vector") {
  SeqModel m = make_model(6, 4, 5, 3, 10, 1);
  for_each_param(m, [](double& v) { v = 0.0; });
  std::mt19937_64 rng(2);
  Matrix block = random_matrix(10, 6, rng);
  auto z = encode_block(m, block);
  for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("encode_block is deterministic") {
  SeqModel m = make_model(8, 6, 4, 5, 12, 3);
  std::mt19937_64 rng(4);
  Matrix block = random_matrix(12, 8, rng);
  CHECK(encode_block(m, block) == encode_block(m, block));
}

TEST_CASE("encode_block matches step-by-step recurrence oracle") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    SeqModel m = make_model(7, 5, 4, 6, 9, seed);
    std::mt19937_64 rng(seed + 100);
    Matrix block = random_matrix(9, 7, rng);
    auto got = encode_block(m, block);
    auto want = oracle_encode(m, block);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
  }
}

TEST_CASE("encode_block rejects wrong feature width") {
  SeqModel m = make_model(7, 5, 4, 6, 9, 1);
  CHECK_THROWS_AS(encode_block(m, Matrix(4, 6)), Error);
}

TEST_CASE("reconstruction loss basics and elementwise oracle") {
  Matrix e(1, 2);
  e.at(0, 0) = 1.0;
  Matrix ehat(1, 2);
  CHECK(loss_reconstruction(e, e) == 0.0);
  CHECK(loss_reconstruction(e, ehat) == doctest::Approx(0.5));

  std::mt19937_64 rng(5);
  Matrix a = random_matrix(4, 6, rng), b = random_matrix(4, 6, rng);
  double want = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      want += 0.5 * (a.at(i, j) - b.at(i, j)) * (a.at(i, j) - b.at(i, j));
  CHECK(loss_reconstruction(a, b) == doctest::Approx(want).epsilon(1e-12));
  CHECK(loss_prediction(a, b) == doctest::Approx(want).epsilon(1e-12));

  Matrix wrong(3, 6);
  CHECK_THROWS_AS(loss_reconstruction(a, wrong), Error);
}

TEST_CASE("triplet loss endpoints") {
  std::vector<double> a = {1.0, 0.0};
  std::vector<double> perp = {0.0, 1.0};
  CHECK(loss_triplet(a, a, perp, 0.2) == doctest::Approx(0.0));
  CHECK(loss_triplet(a, perp, a, 0.2) == doctest::Approx(1.2));
  std::vector<double> zero = {0.0, 0.0};
  CHECK_THROWS_AS(loss_triplet(a, zero, perp, 0.2), Error);
}

TEST_CASE("triplet loss matches direct formula and is scale invariant") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> a(5), p(5), n(5);
    for (auto* v : {&a, &p, &n})
      for (auto& x : *v) x = 2.0 * uniform01(rng) - 1.0;
    auto cosine = [](const std::vector<double>& u, const std::vector<double>& v) {
      double uv = 0, uu = 0, vv = 0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
      }
      return uv / std::sqrt(uu * vv);
    };
    const double m = 0.2;
    const double want = std::max(0.0, cosine(a, n) - cosine(a, p) + m);
    CHECK(loss_triplet(a, p, n, m) == doctest::Approx(want).epsilon(1e-12));
    CHECK(loss_triplet(a, p, n, m) >= 0.0);
    CHECK(loss_triplet(a, p, n, m) <= 2.0 + m);

    // cosine similarity is scale invariant
    std::vector<double> a2 = a, p2 = p, n2 = n;
    for (auto& x : a2) x *= 7.5;
    for (auto& x : p2) x *= 0.03;
    for (auto& x : n2) x *= 312.0;
    CHECK(loss_triplet(a2, p2, n2, m) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  // S=4, N=6, h_e=5, h_d=7, D=3: the small-model configuration
  SeqModel m = make_model(4, 5, 3, 7, 6, 42);
  std::mt19937_64 rng(43);
  Matrix anchor = random_matrix(6, 4, rng);
  Matrix next = random_matrix(6, 4, rng);
  Matrix pos = random_matrix(6, 4, rng);
  Matrix neg = random_matrix(6, 4, rng);
  const double margin = 1.0;

  // hinge must be active so the triplet term contributes gradients
  SeqModel probe = m;
  CHECK(compute_step(probe, anchor, &next, &pos, &neg, margin, nullptr).triplet > 0.0);
  CHECK(worst_grad_error(m, anchor, &next, &pos, &neg, margin) <= 1e-4);
}

TEST_CASE("gradients without triplet or prediction terms also match") {
  SeqModel m = make_model(3, 4, 2, 5, 5, 7);
  std::mt19937_64 rng(8);
  Matrix anchor = random_matrix(5, 3, rng);
  CHECK(worst_grad_error(m, anchor, nullptr, nullptr, nullptr, 0.2) <= 1e-4);
}

TEST_CASE("compute_threshold is the exact max over positives") {
  SeqModel m = make_model(4, 5, 3, 5, 8, 11);
  std::mt19937_64 rng(12);
  Matrix block = random_matrix(8, 4, rng);

  CHECK(compute_threshold(m, block, {block, block}) == doctest::Approx(0.0));

  std::vector<Matrix> positives;
  for (int i = 0; i < 5; ++i) {
    Matrix p = block;
    for (auto& v : p.data) v += 0.1 * (2.0 * uniform01(rng) - 1.0);
    positives.push_back(std::move(p));
  }
  const double eps = compute_threshold(m, block, positives);
  const auto z = encode_block(m, block);
  double want = 0.0;
  for (const auto& p : positives) {
    const auto zp = encode_block(m, p);
    double d2 = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) d2 += (z[i] - zp[i]) * (z[i] - zp[i]);
    want = std::max(want, std::sqrt(d2));
  }
  CHECK(eps == doctest::Approx(want).epsilon(1e-12));
  CHECK(compute_threshold(m, block, positives) == eps);  // deterministic

  CHECK_THROWS_AS(compute_threshold(m, block, {}), Error);
}

TEST_CASE("blocks_from_rows pads the final block with zeros") {
  std::vector<std::vector<double>> rows(7, std::vector<double>(3, 1.0));
  auto blocks = blocks_from_rows(rows, 4, 3);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].rows == 4);
  CHECK(blocks[1].at(2, 0) == 1.0);
  CHECK(blocks[1].at(3, 0) == 0.0);  // padding
  auto empty = blocks_from_rows({}, 4, 3);
  REQUIRE(empty.size() == 1);  // B >= 1
}

TEST_CASE("training: accepted loss non-increasing, thresholds cover positives") {
  std::mt19937_64 rng(55);
  const std::size_t rows = 12, dim = 6;

  std::vector<ClipBlocks> clips(1);
  for (int b = 0; b < 3; ++b) {
    Matrix anchor = random_matrix(rows, dim, rng, 0.5);
    std::vector<Matrix> pos;
    for (int a = 0; a < 4; ++a) {
      Matrix p = anchor;
      for (auto& v : p.data) v += 0.05 * (2.0 * uniform01(rng) - 1.0);
      pos.push_back(std::move(p));
    }
    clips[0].blocks.push_back(std::move(anchor));
    clips[0].positives.push_back(std::move(pos));
  }

  TrainConfig cfg;
  cfg.enc_hidden = 6;
  cfg.dec_hidden = 8;
  cfg.bottleneck = 4;
  cfg.max_epochs = 12;
  cfg.learning_rate = 0.01;
  cfg.seed = 9;
  TrainResult r = train(clips, cfg);

  REQUIRE(!r.history.empty());
  for (std::size_t e = 1; e < r.history.size(); ++e)
    CHECK(r.history[e].best_valid <= r.history[e - 1].best_valid + 1e-12);
  CHECK(!r.model.triplet_disabled);

  // Eq.-5 coverage: every positive of block t lies within epsilon_t
  REQUIRE(r.thresholds.size() == 1);
  for (std::size_t t = 0; t < clips[0].blocks.size(); ++t) {
    const auto z = encode_block(r.model, clips[0].blocks[t]);
    for (const auto& p : clips[0].positives[t]) {
      const auto zp = encode_block(r.model, p);
      double d2 = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) d2 += (z[i] - zp[i]) * (z[i] - zp[i]);
      CHECK(std::sqrt(d2) <= r.thresholds[0][t] + 1e-12);
    }
  }

  // determinism: same inputs and seed give identical models
  TrainResult r2 = train(clips, cfg);
  CHECK(write_model_pack({r.model}) == write_model_pack({r2.model}));
}

TEST_CASE("single block with no negative trains with triplet disabled") {
  std::mt19937_64 rng(66);
  std::vector<ClipBlocks> clips(1);
  Matrix anchor = random_matrix(10, 4, rng, 0.5);
  std::vector<Matrix> pos;
  for (int a = 0; a < 3; ++a) {
    Matrix p = anchor;
    for (auto& v : p.data) v += 0.03;
    pos.push_back(std::move(p));
  }
  clips[0].blocks.push_back(std::move(anchor));
  clips[0].positives.push_back(std::move(pos));

  TrainConfig cfg;
  cfg.enc_hidden = 4;
  cfg.dec_hidden = 5;
  cfg.bottleneck = 3;
  cfg.max_epochs = 3;
  cfg.seed = 1;
  TrainResult r = train(clips, cfg);
  CHECK(r.model.triplet_disabled);  // recorded in model metadata
}

TEST_CASE("insufficient positives rejected") {
  std::vector<ClipBlocks> clips(1);
  clips[0].blocks.push_back(Matrix(4, 2));
  clips[0].positives.push_back({Matrix(4, 2)});  // only one positive
  TrainConfig cfg;
  cfg.enc_hidden = 3;
  cfg.dec_hidden = 3;
  cfg.bottleneck = 2;
  CHECK_THROWS_AS(train(clips, cfg), Error);
}

TEST_CASE("model pack serialization roundtrips byte-identically") {
  SeqModel a = make_model(6, 5, 4, 7, 20, 77);
  SeqModel b = make_model(6, 4, 4, 6, 20, 78);
  b.triplet_disabled = true;
  auto bytes = write_model_pack({a, b});
  auto models = read_model_pack(bytes);
  REQUIRE(models.size() == 2);
  CHECK(models[1].triplet_disabled);
  CHECK(write_model_pack(models) == bytes);  // serialize . deserialize . serialize

  std::mt19937_64 rng(3);
  Matrix block = random_matrix(5, 6, rng);
  CHECK(encode_block(a, block) == encode_block(models[0], block));
}

}  // TEST_SUITE
