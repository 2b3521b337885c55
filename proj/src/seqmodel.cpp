#include "arcseal/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "arcseal/error.hpp"

namespace arcseal::seqmodel {

namespace {

double sigmoid(double x) {
  if (x > 40.0) return 1.0;
  if (x < -40.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

// out += M x
void matvec_acc(const Matrix& m, const double* x, double* out) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    out[r] += acc;
  }
}

// out += M^T y
void matvec_t_acc(const Matrix& m, const double* y, double* out) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    const double* row = m.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += row[c] * yr;
  }
}

// m += y x^T
void outer_acc(Matrix& m, const double* y, const double* x) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    double* row = m.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) row[c] += yr * x[c];
  }
}

struct LstmTrace {
  Matrix gates;      // steps x 4h, post-activation [i f g o]
  Matrix cells;      // steps x h
  Matrix cell_tanh;  // steps x h
  Matrix hidden;     // steps x h
};

template <typename RowFn>
void lstm_forward(const LstmCell& cell, std::size_t steps, RowFn input_row, LstmTrace& tr) {
  const std::size_t h = cell.hidden_dim;
  tr.gates = Matrix(steps, 4 * h);
  tr.cells = Matrix(steps, h);
  tr.cell_tanh = Matrix(steps, h);
  tr.hidden = Matrix(steps, h);
  std::vector<double> pre(4 * h);
  for (std::size_t t = 0; t < steps; ++t) {
    std::copy(cell.bias.begin(), cell.bias.end(), pre.begin());
    matvec_acc(cell.w_x, input_row(t), pre.data());
    if (t > 0) matvec_acc(cell.w_h, tr.hidden.row(t - 1), pre.data());
    double* g_row = tr.gates.row(t);
    for (std::size_t j = 0; j < h; ++j) {
      const double i = sigmoid(pre[j]);
      const double f = sigmoid(pre[h + j]);
      const double g = std::tanh(pre[2 * h + j]);
      const double o = sigmoid(pre[3 * h + j]);
      const double c_prev = t > 0 ? tr.cells.at(t - 1, j) : 0.0;
      const double c = f * c_prev + i * g;
      const double ct = std::tanh(c);
      g_row[j] = i;
      g_row[h + j] = f;
      g_row[2 * h + j] = g;
      g_row[3 * h + j] = o;
      tr.cells.at(t, j) = c;
      tr.cell_tanh.at(t, j) = ct;
      tr.hidden.at(t, j) = o * ct;
    }
  }
}

// Backpropagation through time. d_hidden_out carries the per-step upstream
// gradient on the hidden state; d_inputs, when given, receives dL/dx_t.
template <typename RowFn>
void lstm_backward(const LstmCell& cell, std::size_t steps, RowFn input_row, const LstmTrace& tr,
                   const Matrix& d_hidden_out, LstmCell& grads, Matrix* d_inputs) {
  const std::size_t h = cell.hidden_dim;
  std::vector<double> dh(h, 0.0), dc(h, 0.0), dpre(4 * h);
  for (std::size_t ti = steps; ti-- > 0;) {
    const double* g_row = tr.gates.row(ti);
    for (std::size_t j = 0; j < h; ++j) {
      const double i = g_row[j];
      const double f = g_row[h + j];
      const double g = g_row[2 * h + j];
      const double o = g_row[3 * h + j];
      const double ct = tr.cell_tanh.at(ti, j);
      const double c_prev = ti > 0 ? tr.cells.at(ti - 1, j) : 0.0;

      const double dhid = dh[j] + d_hidden_out.at(ti, j);
      const double d_o = dhid * ct;
      const double d_c = dhid * o * (1.0 - ct * ct) + dc[j];
      const double d_i = d_c * g;
      const double d_g = d_c * i;
      const double d_f = d_c * c_prev;
      dc[j] = d_c * f;

      dpre[j] = d_i * i * (1.0 - i);
      dpre[h + j] = d_f * f * (1.0 - f);
      dpre[2 * h + j] = d_g * (1.0 - g * g);
      dpre[3 * h + j] = d_o * o * (1.0 - o);
    }
    for (std::size_t k = 0; k < 4 * h; ++k) grads.bias[k] += dpre[k];
    outer_acc(grads.w_x, dpre.data(), input_row(ti));
    if (ti > 0) outer_acc(grads.w_h, dpre.data(), tr.hidden.row(ti - 1));
    if (d_inputs) matvec_t_acc(cell.w_x, dpre.data(), d_inputs->row(ti));
    std::fill(dh.begin(), dh.end(), 0.0);
    matvec_t_acc(cell.w_h, dpre.data(), dh.data());
  }
}

std::vector<double> bottleneck_of(const SeqModel& m, const LstmTrace& tr) {
  std::vector<double> z(m.bottleneck);
  std::copy(m.head_b.begin(), m.head_b.end(), z.begin());
  matvec_acc(m.head_w, tr.hidden.row(tr.hidden.rows - 1), z.data());
  return z;
}

void encoder_backward(const SeqModel& m, const Matrix& block, const LstmTrace& tr,
                      std::span<const double> dz, SeqModel& grads) {
  const std::size_t steps = block.rows;
  outer_acc(grads.head_w, dz.data(), tr.hidden.row(steps - 1));
  for (std::size_t k = 0; k < m.bottleneck; ++k) grads.head_b[k] += dz[k];
  Matrix d_hidden(steps, m.enc_hidden);
  matvec_t_acc(m.head_w, dz.data(), d_hidden.row(steps - 1));
  lstm_backward(
      m.encoder, steps, [&](std::size_t t) { return block.row(t); }, tr, d_hidden, grads.encoder,
      nullptr);
}

// Runs one decoder against a target sequence; returns ½ Σ residual².
double decoder_forward(const LstmCell& cell, const Matrix& out_w, const std::vector<double>& out_b,
                       std::span<const double> z, const Matrix& target, LstmTrace& tr, Matrix* resid) {
  const std::size_t steps = target.rows;
  lstm_forward(
      cell, steps, [&](std::size_t) { return z.data(); }, tr);
  if (resid) *resid = Matrix(steps, target.cols);
  double loss = 0.0;
  std::vector<double> y(target.cols);
  for (std::size_t t = 0; t < steps; ++t) {
    std::copy(out_b.begin(), out_b.end(), y.begin());
    matvec_acc(out_w, tr.hidden.row(t), y.data());
    const double* tgt = target.row(t);
    for (std::size_t j = 0; j < target.cols; ++j) {
      const double d = y[j] - tgt[j];
      loss += 0.5 * d * d;
      if (resid) resid->at(t, j) = d;
    }
  }
  return loss;
}

void decoder_backward(const LstmCell& cell, const Matrix& out_w, std::span<const double> z,
                      const LstmTrace& tr, const Matrix& resid, LstmCell& cell_grads,
                      Matrix& out_w_grads, std::vector<double>& out_b_grads, std::vector<double>& dz) {
  const std::size_t steps = resid.rows;
  Matrix d_hidden(steps, cell.hidden_dim);
  for (std::size_t t = 0; t < steps; ++t) {
    outer_acc(out_w_grads, resid.row(t), tr.hidden.row(t));
    const double* res = resid.row(t);
    for (std::size_t j = 0; j < resid.cols; ++j) out_b_grads[j] += res[j];
    matvec_t_acc(out_w, res, d_hidden.row(t));
  }
  Matrix d_inputs(steps, z.size());
  lstm_backward(
      cell, steps, [&](std::size_t) { return z.data(); }, tr, d_hidden, cell_grads, &d_inputs);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* row = d_inputs.row(t);
    for (std::size_t j = 0; j < z.size(); ++j) dz[j] += row[j];
  }
}

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// out += scale * d cos(a,b) / da
void cos_grad_wrt_first(std::span<const double> a, std::span<const double> b, double scale,
                        std::vector<double>& out) {
  const double na = norm(a), nb = norm(b);
  const double c = dot(a, b) / (na * nb);
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] += scale * (b[i] / (na * nb) - c * a[i] / (na * na));
}

LstmCell make_cell_shape(std::size_t input, std::size_t hidden) {
  LstmCell c;
  c.input_dim = input;
  c.hidden_dim = hidden;
  c.w_x = Matrix(4 * hidden, input);
  c.w_h = Matrix(4 * hidden, hidden);
  c.bias.assign(4 * hidden, 0.0);
  return c;
}

SeqModel make_model_shape(std::uint32_t feat, std::uint32_t enc_h, std::uint32_t bottleneck,
                          std::uint32_t dec_h) {
  SeqModel m;
  m.feat_dim = feat;
  m.enc_hidden = enc_h;
  m.bottleneck = bottleneck;
  m.dec_hidden = dec_h;
  m.encoder = make_cell_shape(feat, enc_h);
  m.head_w = Matrix(bottleneck, enc_h);
  m.head_b.assign(bottleneck, 0.0);
  m.dec_recon = make_cell_shape(bottleneck, dec_h);
  m.recon_w = Matrix(feat, dec_h);
  m.recon_b.assign(feat, 0.0);
  m.dec_pred = make_cell_shape(bottleneck, dec_h);
  m.pred_w = Matrix(feat, dec_h);
  m.pred_b.assign(feat, 0.0);
  return m;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void init_cell(LstmCell& c, std::size_t memory_horizon, std::mt19937_64& rng) {
  const double rx = 1.0 / std::sqrt(static_cast<double>(c.input_dim));
  const double rh = 1.0 / std::sqrt(static_cast<double>(c.hidden_dim));
  for (double& v : c.w_x.data) v = (2.0 * uniform01(rng) - 1.0) * rx;
  for (double& v : c.w_h.data) v = (2.0 * uniform01(rng) - 1.0) * rh;
  // Chrono-style forget/input bias ladder: unit j holds state over a horizon
  // log-spaced in [1, memory_horizon], so early rows of a long block still
  // reach the final hidden state.
  const std::size_t h = c.hidden_dim;
  for (std::size_t j = 0; j < h; ++j) {
    const double frac = h > 1 ? static_cast<double>(j) / static_cast<double>(h - 1) : 0.0;
    const double horizon = 1.0 + frac * (static_cast<double>(memory_horizon) - 1.0);
    const double bf = std::log(horizon);
    c.bias[h + j] = bf;
    c.bias[j] = -bf;
  }
}

}  // namespace

SeqModel make_model(std::uint32_t feat_dim, std::uint32_t enc_hidden, std::uint32_t bottleneck,
                    std::uint32_t dec_hidden, std::size_t memory_horizon, std::uint64_t seed) {
  SeqModel m = make_model_shape(feat_dim, enc_hidden, bottleneck, dec_hidden);
  std::mt19937_64 rng(seed ^ 0x5EED5EEDULL);
  init_cell(m.encoder, memory_horizon, rng);
  const double rz = 1.0 / std::sqrt(static_cast<double>(enc_hidden));
  for (double& v : m.head_w.data) v = (2.0 * uniform01(rng) - 1.0) * rz;
  init_cell(m.dec_recon, memory_horizon, rng);
  const double rd = 1.0 / std::sqrt(static_cast<double>(dec_hidden));
  for (double& v : m.recon_w.data) v = (2.0 * uniform01(rng) - 1.0) * rd;
  init_cell(m.dec_pred, memory_horizon, rng);
  for (double& v : m.pred_w.data) v = (2.0 * uniform01(rng) - 1.0) * rd;
  return m;
}

std::size_t param_count(const SeqModel& m) {
  std::size_t n = 0;
  for_each_param(const_cast<SeqModel&>(m), [&](double&) { ++n; });
  return n;
}

std::vector<double> flatten_params(const SeqModel& m) {
  std::vector<double> out;
  out.reserve(param_count(m));
  for_each_param(const_cast<SeqModel&>(m), [&](double& v) { out.push_back(v); });
  return out;
}

void unflatten_params(SeqModel& m, std::span<const double> params) {
  std::size_t i = 0;
  for_each_param(m, [&](double& v) { v = params[i++]; });
  if (i != params.size()) raise(ErrorCode::ShapeMismatch, "parameter count mismatch");
}

std::vector<double> encode_block(const SeqModel& model, const Matrix& block) {
  if (block.cols != model.feat_dim)
    raise(ErrorCode::ShapeMismatch, "block feature dimension " + std::to_string(block.cols));
  if (block.rows == 0) raise(ErrorCode::ShapeMismatch, "empty block");
  LstmTrace tr;
  lstm_forward(
      model.encoder, block.rows, [&](std::size_t t) { return block.row(t); }, tr);
  return bottleneck_of(model, tr);
}

double loss_reconstruction(const Matrix& target, const Matrix& output) {
  if (!target.same_shape(output)) raise(ErrorCode::ShapeMismatch, "reconstruction shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < target.data.size(); ++i) {
    const double d = target.data[i] - output.data[i];
    acc += d * d;
  }
  return 0.5 * acc;
}

double loss_prediction(const Matrix& target, const Matrix& output) {
  if (!target.same_shape(output)) raise(ErrorCode::ShapeMismatch, "prediction shape mismatch");
  return loss_reconstruction(target, output);
}

double loss_triplet(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin) {
  if (anchor.size() != positive.size() || anchor.size() != negative.size())
    raise(ErrorCode::ShapeMismatch, "triplet dimension mismatch");
  const double na = norm(anchor), np = norm(positive), nn = norm(negative);
  if (na == 0.0 || np == 0.0 || nn == 0.0) raise(ErrorCode::ZeroVector, "triplet input has zero norm");
  const double cos_ap = dot(anchor, positive) / (na * np);
  const double cos_an = dot(anchor, negative) / (na * nn);
  return std::max(0.0, cos_an - cos_ap + margin);
}

StepLoss compute_step(const SeqModel& model, const Matrix& anchor, const Matrix* next_block,
                      const Matrix* positive, const Matrix* negative, double margin, SeqModel* grads) {
  StepLoss loss;

  LstmTrace enc_tr;
  lstm_forward(
      model.encoder, anchor.rows, [&](std::size_t t) { return anchor.row(t); }, enc_tr);
  std::vector<double> z_a = bottleneck_of(model, enc_tr);

  LstmTrace pos_tr, neg_tr;
  std::vector<double> z_p, z_n;
  const bool with_triplet = positive != nullptr && negative != nullptr;
  if (with_triplet) {
    lstm_forward(
        model.encoder, positive->rows, [&](std::size_t t) { return positive->row(t); }, pos_tr);
    z_p = bottleneck_of(model, pos_tr);
    lstm_forward(
        model.encoder, negative->rows, [&](std::size_t t) { return negative->row(t); }, neg_tr);
    z_n = bottleneck_of(model, neg_tr);
    loss.triplet = loss_triplet(z_a, z_p, z_n, margin);
  }

  LstmTrace recon_tr, pred_tr;
  Matrix recon_resid, pred_resid;
  loss.reconstruction = decoder_forward(model.dec_recon, model.recon_w, model.recon_b, z_a, anchor,
                                        recon_tr, grads ? &recon_resid : nullptr);
  if (next_block != nullptr) {
    loss.prediction = decoder_forward(model.dec_pred, model.pred_w, model.pred_b, z_a, *next_block,
                                      pred_tr, grads ? &pred_resid : nullptr);
  }

  if (grads) {
    std::vector<double> dz_a(model.bottleneck, 0.0);
    decoder_backward(model.dec_recon, model.recon_w, z_a, recon_tr, recon_resid, grads->dec_recon,
                     grads->recon_w, grads->recon_b, dz_a);
    if (next_block != nullptr) {
      decoder_backward(model.dec_pred, model.pred_w, z_a, pred_tr, pred_resid, grads->dec_pred,
                       grads->pred_w, grads->pred_b, dz_a);
    }
    if (with_triplet && loss.triplet > 0.0) {
      std::vector<double> dz_p(model.bottleneck, 0.0), dz_n(model.bottleneck, 0.0);
      cos_grad_wrt_first(z_a, z_n, 1.0, dz_a);
      cos_grad_wrt_first(z_a, z_p, -1.0, dz_a);
      cos_grad_wrt_first(z_n, z_a, 1.0, dz_n);
      cos_grad_wrt_first(z_p, z_a, -1.0, dz_p);
      encoder_backward(model, *positive, pos_tr, dz_p, *grads);
      encoder_backward(model, *negative, neg_tr, dz_n, *grads);
    }
    encoder_backward(model, anchor, enc_tr, dz_a, *grads);
  }
  return loss;
}

double compute_threshold(const SeqModel& model, const Matrix& block,
                         const std::vector<Matrix>& positives) {
  if (positives.empty()) raise(ErrorCode::EmptyPositives, "threshold needs at least one positive");
  const std::vector<double> z = encode_block(model, block);
  double eps = 0.0;
  for (const Matrix& p : positives) {
    const std::vector<double> zp = encode_block(model, p);
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double d = z[i] - zp[i];
      acc += d * d;
    }
    eps = std::max(eps, std::sqrt(acc));
  }
  return eps;
}

std::vector<Matrix> blocks_from_rows(const std::vector<std::vector<double>>& rows,
                                     std::size_t rows_per_block, std::size_t dim) {
  const std::size_t count = rows.size();
  const std::size_t block_count = count == 0 ? 1 : (count + rows_per_block - 1) / rows_per_block;
  std::vector<Matrix> out;
  out.reserve(block_count);
  for (std::size_t b = 0; b < block_count; ++b) {
    Matrix m(rows_per_block, dim);
    for (std::size_t r = 0; r < rows_per_block; ++r) {
      const std::size_t src = b * rows_per_block + r;
      if (src < count) {
        if (rows[src].size() != dim) raise(ErrorCode::ShapeMismatch, "feature row width mismatch");
        std::copy(rows[src].begin(), rows[src].end(), m.row(r));
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

struct StepRef {
  std::size_t clip;
  std::size_t block;
  std::size_t flat;
};

struct ParamView {
  std::vector<double*> model_params;
  std::vector<double*> grad_params;
};

ParamView make_view(SeqModel& model, SeqModel& grads) {
  ParamView v;
  for_each_param(model, [&](double& p) { v.model_params.push_back(&p); });
  for_each_param(grads, [&](double& p) { v.grad_params.push_back(&p); });
  return v;
}

void zero_grads(SeqModel& grads) {
  for_each_param(grads, [](double& p) { p = 0.0; });
}

}  // namespace

TrainResult train(const std::vector<ClipBlocks>& clips, const TrainConfig& config) {
  std::vector<StepRef> refs;
  std::size_t flat = 0;
  std::size_t feat_dim = 0, block_rows = 0;
  for (std::size_t c = 0; c < clips.size(); ++c) {
    if (clips[c].blocks.size() != clips[c].positives.size())
      raise(ErrorCode::ShapeMismatch, "positives list must match block list");
    for (std::size_t t = 0; t < clips[c].blocks.size(); ++t) {
      if (clips[c].positives[t].size() < 2)
        raise(ErrorCode::InsufficientData, "each block needs at least 2 augmented positives");
      feat_dim = clips[c].blocks[t].cols;
      block_rows = clips[c].blocks[t].rows;
      refs.push_back({c, t, flat++});
    }
  }
  if (refs.empty()) raise(ErrorCode::InsufficientData, "no blocks to train on");

  const bool triplet_enabled = refs.size() >= 2;

  std::mt19937_64 rng(config.seed ^ 0x7261696E5ULL);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  SeqModel model = make_model(static_cast<std::uint32_t>(feat_dim), config.enc_hidden,
                              config.bottleneck, config.dec_hidden, block_rows, config.seed);
  model.triplet_disabled = !triplet_enabled;

  // hold one positive per block out of training for early stopping
  std::vector<std::size_t> holdout(refs.size());
  for (const StepRef& r : refs) holdout[r.flat] = pick(clips[r.clip].positives[r.block].size());

  SeqModel grads = make_model_shape(static_cast<std::uint32_t>(feat_dim), config.enc_hidden,
                                    config.bottleneck, config.dec_hidden);
  ParamView view = make_view(model, grads);
  std::vector<double> velocity(view.model_params.size(), 0.0);

  auto anchor_of = [&](const StepRef& r) -> const Matrix& { return clips[r.clip].blocks[r.block]; };
  auto next_of = [&](const StepRef& r) -> const Matrix* {
    return r.block + 1 < clips[r.clip].blocks.size() ? &clips[r.clip].blocks[r.block + 1] : nullptr;
  };

  auto validation_loss = [&]() {
    double acc = 0.0;
    for (const StepRef& r : refs) {
      const Matrix& pos = clips[r.clip].positives[r.block][holdout[r.flat]];
      const Matrix* neg = nullptr;
      if (triplet_enabled) neg = &anchor_of(refs[(r.flat + 1) % refs.size()]);
      StepLoss l = compute_step(model, anchor_of(r), next_of(r), triplet_enabled ? &pos : nullptr,
                                neg, config.margin, nullptr);
      acc += l.total();
    }
    return acc / static_cast<double>(refs.size());
  };

  TrainResult result;
  double lr = config.learning_rate;
  double best_valid = std::numeric_limits<double>::infinity();
  std::vector<double> best_params = flatten_params(model);
  int stall = 0, decays = 0;

  std::vector<std::size_t> order(refs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[pick(i)]);

    double train_loss = 0.0;
    for (std::size_t oi : order) {
      const StepRef& r = refs[oi];
      const auto& pos_list = clips[r.clip].positives[r.block];
      const Matrix* pos = nullptr;
      const Matrix* neg = nullptr;
      if (triplet_enabled) {
        std::size_t pos_idx = pick(pos_list.size());
        if (pos_list.size() > 1 && pos_idx == holdout[r.flat]) pos_idx = (pos_idx + 1) % pos_list.size();
        pos = &pos_list[pos_idx];
        std::size_t other = pick(refs.size() - 1);
        if (other >= r.flat) ++other;
        neg = &anchor_of(refs[other]);
      }

      zero_grads(grads);
      StepLoss l = compute_step(model, anchor_of(r), next_of(r), pos, neg, config.margin, &grads);
      train_loss += l.total();

      double gnorm = 0.0;
      for (double* g : view.grad_params) gnorm += *g * *g;
      gnorm = std::sqrt(gnorm);
      const double scale = gnorm > config.grad_clip ? config.grad_clip / gnorm : 1.0;
      for (std::size_t i = 0; i < view.model_params.size(); ++i) {
        velocity[i] = config.momentum * velocity[i] - lr * scale * *view.grad_params[i];
        *view.model_params[i] += velocity[i];
      }
    }
    train_loss /= static_cast<double>(refs.size());

    const double valid = validation_loss();
    if (valid < best_valid - 1e-12) {
      best_valid = valid;
      best_params = flatten_params(model);
      stall = 0;
    } else {
      ++stall;
    }
    result.history.push_back({train_loss, valid, best_valid, lr});

    if (stall >= config.patience) {
      if (decays >= config.max_decays) break;
      lr *= config.lr_decay;
      ++decays;
      stall = 0;
    }
  }

  unflatten_params(model, best_params);
  result.model = std::move(model);

  // Per-block transcoding-tolerance thresholds over every augmented positive,
  // training and held-out alike.
  result.thresholds.resize(clips.size());
  for (std::size_t c = 0; c < clips.size(); ++c) {
    result.thresholds[c].resize(clips[c].blocks.size());
    for (std::size_t t = 0; t < clips[c].blocks.size(); ++t)
      result.thresholds[c][t] =
          compute_threshold(result.model, clips[c].blocks[t], clips[c].positives[t]);
  }
  return result;
}

namespace {

constexpr std::uint16_t kModelVersion = 1;

void serialize_cell(ByteWriter& w, const LstmCell& c) {
  for (double v : c.w_x.data) w.f64(v);
  for (double v : c.w_h.data) w.f64(v);
  for (double v : c.bias) w.f64(v);
}

void deserialize_cell(ByteReader& r, LstmCell& c) {
  for (double& v : c.w_x.data) v = r.f64();
  for (double& v : c.w_h.data) v = r.f64();
  for (double& v : c.bias) v = r.f64();
}

}  // namespace

void serialize_models(ByteWriter& w, const std::vector<SeqModel>& models) {
  w.raw("ARCM", 4);
  w.u16(kModelVersion);
  w.u16(static_cast<std::uint16_t>(models.size()));
  for (const SeqModel& m : models) {
    w.u32(m.feat_dim);
    w.u32(m.enc_hidden);
    w.u32(m.bottleneck);
    w.u32(m.dec_hidden);
    w.u8(m.triplet_disabled ? 1 : 0);
    serialize_cell(w, m.encoder);
    for (double v : m.head_w.data) w.f64(v);
    for (double v : m.head_b) w.f64(v);
    serialize_cell(w, m.dec_recon);
    for (double v : m.recon_w.data) w.f64(v);
    for (double v : m.recon_b) w.f64(v);
    serialize_cell(w, m.dec_pred);
    for (double v : m.pred_w.data) w.f64(v);
    for (double v : m.pred_b) w.f64(v);
  }
}

std::vector<SeqModel> deserialize_models(ByteReader& r) {
  r.expect_magic("ARCM");
  const std::uint16_t version = r.u16();
  if (version != kModelVersion) raise(ErrorCode::UnsupportedVersion, "model version");
  const std::uint16_t count = r.u16();
  std::vector<SeqModel> models;
  models.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    const std::uint32_t feat = r.u32();
    const std::uint32_t enc_h = r.u32();
    const std::uint32_t bott = r.u32();
    const std::uint32_t dec_h = r.u32();
    SeqModel m = make_model_shape(feat, enc_h, bott, dec_h);
    m.triplet_disabled = r.u8() != 0;
    deserialize_cell(r, m.encoder);
    for (double& v : m.head_w.data) v = r.f64();
    for (double& v : m.head_b) v = r.f64();
    deserialize_cell(r, m.dec_recon);
    for (double& v : m.recon_w.data) v = r.f64();
    for (double& v : m.recon_b) v = r.f64();
    deserialize_cell(r, m.dec_pred);
    for (double& v : m.pred_w.data) v = r.f64();
    for (double& v : m.pred_b) v = r.f64();
    models.push_back(std::move(m));
  }
  return models;
}

std::vector<std::uint8_t> write_model_pack(const std::vector<SeqModel>& models) {
  ByteWriter w;
  serialize_models(w, models);
  return w.take();
}

std::vector<SeqModel> read_model_pack(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto models = deserialize_models(r);
  if (!r.done()) raise(ErrorCode::TruncatedPayload, "trailing bytes in model pack");
  return models;
}

}  // namespace arcseal::seqmodel
