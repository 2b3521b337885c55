#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "arcseal/bytes.hpp"

namespace arcseal::seqmodel {

inline constexpr std::size_t kVisualBlockRows = 300;   // keyframes per block (30 s at 10 fps)
inline constexpr std::size_t kAudioBlockRows = 3000;   // 10 ms MFCC hops per 30 s block
inline constexpr std::uint32_t kVisualBottleneck = 256;
inline constexpr std::uint32_t kAudioBottleneck = 128;

struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool operator==(const Matrix&) const = default;
};

// One single-layer LSTM; gate rows ordered [input, forget, cell, output].
struct LstmCell {
  std::size_t input_dim = 0, hidden_dim = 0;
  Matrix w_x;                  // 4h x input
  Matrix w_h;                  // 4h x hidden
  std::vector<double> bias;    // 4h
};

// Sequence autoencoder for one modality: an encoder LSTM whose last hidden
// state maps linearly to the bottleneck, plus reconstruction and prediction
// decoder LSTMs that are fed the bottleneck at every step.
struct SeqModel {
  std::uint32_t feat_dim = 0;     // S
  std::uint32_t enc_hidden = 0;   // h_e
  std::uint32_t bottleneck = 0;   // D
  std::uint32_t dec_hidden = 0;   // h_d

  LstmCell encoder;
  Matrix head_w;                  // D x h_e
  std::vector<double> head_b;     // D

  LstmCell dec_recon;             // input D
  Matrix recon_w;                 // S x h_d
  std::vector<double> recon_b;

  LstmCell dec_pred;
  Matrix pred_w;
  std::vector<double> pred_b;

  bool triplet_disabled = false;  // set when trained without negatives
};

SeqModel make_model(std::uint32_t feat_dim, std::uint32_t enc_hidden, std::uint32_t bottleneck,
                    std::uint32_t dec_hidden, std::size_t memory_horizon, std::uint64_t seed);

// Canonical visit order for every parameter; serialization, the optimizer
// and the gradient tests all share it.
template <typename Fn>
void for_each_param(SeqModel& m, Fn&& fn) {
  auto cell = [&](LstmCell& c) {
    for (double& v : c.w_x.data) fn(v);
    for (double& v : c.w_h.data) fn(v);
    for (double& v : c.bias) fn(v);
  };
  cell(m.encoder);
  for (double& v : m.head_w.data) fn(v);
  for (double& v : m.head_b) fn(v);
  cell(m.dec_recon);
  for (double& v : m.recon_w.data) fn(v);
  for (double& v : m.recon_b) fn(v);
  cell(m.dec_pred);
  for (double& v : m.pred_w.data) fn(v);
  for (double& v : m.pred_b) fn(v);
}

std::size_t param_count(const SeqModel& m);
std::vector<double> flatten_params(const SeqModel& m);
void unflatten_params(SeqModel& m, std::span<const double> params);

// Forward pass of the encoder alone; the hashing path at verify time.
std::vector<double> encode_block(const SeqModel& model, const Matrix& block);

double loss_reconstruction(const Matrix& target, const Matrix& output);
double loss_prediction(const Matrix& target, const Matrix& output);
double loss_triplet(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin);

struct StepLoss {
  double reconstruction = 0.0;
  double prediction = 0.0;
  double triplet = 0.0;
  double total() const { return reconstruction + prediction + triplet; }
};

// One Eq.-style training term: L_R on the anchor block, L_F against the next
// block when there is one, L_T over (anchor, positive, negative) bottlenecks.
// When `grads` is non-null, accumulates analytic gradients for every
// parameter (full backpropagation through the LSTM unrollings).
StepLoss compute_step(const SeqModel& model, const Matrix& anchor, const Matrix* next_block,
                      const Matrix* positive, const Matrix* negative, double margin, SeqModel* grads);

struct TrainConfig {
  double margin = 0.2;
  double learning_rate = 0.02;
  double momentum = 0.9;
  double lr_decay = 0.5;
  int max_epochs = 30;
  int patience = 3;      // stalled epochs before the rate decays
  int max_decays = 2;    // stop after this many decays without improvement
  double grad_clip = 5.0;
  int augment_count = 12;
  std::uint32_t enc_hidden = 128;
  std::uint32_t dec_hidden = 256;
  std::uint32_t bottleneck = kVisualBottleneck;
  std::uint64_t seed = 0;
};

// Blocks of one clip plus the same blocks cut from its transcoded variants.
struct ClipBlocks {
  std::vector<Matrix> blocks;                      // anchors, in temporal order
  std::vector<std::vector<Matrix>> positives;      // positives[t][variant]
};

struct EpochStats {
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double best_valid = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  SeqModel model;
  std::vector<std::vector<double>> thresholds;  // thresholds[clip][block]
  std::vector<EpochStats> history;
};

TrainResult train(const std::vector<ClipBlocks>& clips, const TrainConfig& config);

double compute_threshold(const SeqModel& model, const Matrix& block,
                         const std::vector<Matrix>& positives);

// Groups feature rows into fixed-row blocks, zero-padding the final one.
std::vector<Matrix> blocks_from_rows(const std::vector<std::vector<double>>& rows,
                                     std::size_t rows_per_block, std::size_t dim);

// ARCM model pack: the byte stream whose SHA-256 goes on-chain.
void serialize_models(ByteWriter& w, const std::vector<SeqModel>& models);
std::vector<SeqModel> deserialize_models(ByteReader& r);
std::vector<std::uint8_t> write_model_pack(const std::vector<SeqModel>& models);
std::vector<SeqModel> read_model_pack(std::span<const std::uint8_t> bytes);

}  // namespace arcseal::seqmodel
