#include "bcdlog/tagger.hpp"

#include <cmath>
#include <string>

#include "bcdlog/errors.hpp"
#include "bcdlog/mask_codec.hpp"
#include "bcdlog/vocabulary.hpp"

namespace bcdlog {
namespace {

constexpr double kLayerNormEps = 1e-5;

template <typename T>
void layer_norm(const Matrix<T>& x, const Eigen::Map<const RowVector<T>>& gamma,
                const Eigen::Map<const RowVector<T>>& beta, Matrix<T>& hat, ColumnVector<T>& rstd,
                Matrix<T>& y) {
  const auto cols = static_cast<T>(x.cols());
  const ColumnVector<T> mean = x.rowwise().sum() / cols;
  hat = x.colwise() - mean;
  const ColumnVector<T> var = hat.array().square().rowwise().sum() / cols;
  rstd = (var.array() + T(kLayerNormEps)).rsqrt();
  hat = hat.array().colwise() * rstd.array();
  y = (hat.array().rowwise() * gamma.array()).rowwise() + beta.array();
}

template <typename T>
Matrix<T> layer_norm_backward(const Matrix<T>& dy, const Matrix<T>& hat, const ColumnVector<T>& rstd,
                              const Eigen::Map<const RowVector<T>>& gamma,
                              Eigen::Map<RowVector<T>> d_gamma, Eigen::Map<RowVector<T>> d_beta) {
  d_gamma += (dy.array() * hat.array()).colwise().sum().matrix();
  d_beta += dy.colwise().sum();
  const auto cols = static_cast<T>(dy.cols());
  const Matrix<T> d_hat = dy.array().rowwise() * gamma.array();
  const ColumnVector<T> mean_d = d_hat.rowwise().sum() / cols;
  const ColumnVector<T> mean_dh = (d_hat.array() * hat.array()).rowwise().sum() / cols;
  Matrix<T> dx = d_hat.colwise() - mean_d;
  dx -= (hat.array().colwise() * mean_dh.array()).matrix();
  return dx.array().colwise() * rstd.array();
}

// Inverted dropout: kept entries are scaled by 1 / (1 - p).
template <typename T>
Matrix<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64* rng) {
  if (rng == nullptr || p <= 0.0) return {};
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  Matrix<T> mask(rows, cols);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*rng) ? scale : T(0);
  return mask;
}

template <typename T>
void apply_mask(Matrix<T>& x, const Matrix<T>& mask) {
  if (mask.size() != 0) x.array() *= mask.array();
}

template <typename T>
void softmax_rows(Matrix<T>& s) {
  const ColumnVector<T> max = s.rowwise().maxCoeff();
  s = (s.colwise() - max).array().exp();
  const ColumnVector<T> sum = s.rowwise().sum();
  s = s.array().colwise() / sum.array();
}

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
void lstm_forward(const Matrix<T>& projected, const Eigen::Map<const Matrix<T>>& w_hh, bool reverse,
                  LstmTrace<T>& tr) {
  const Eigen::Index n = projected.rows();
  const Eigen::Index h = w_hh.cols();
  tr.gates.resize(n, 4 * h);
  tr.cell.resize(n, h);
  tr.cell_tanh.resize(n, h);
  tr.hidden.resize(n, h);
  RowVector<T> h_prev = RowVector<T>::Zero(h);
  RowVector<T> c_prev = RowVector<T>::Zero(h);
  RowVector<T> a(4 * h);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    a.noalias() = projected.row(t) + h_prev * w_hh.transpose();
    for (Eigen::Index j = 0; j < h; ++j) {
      const T i = sigmoid(a(j));
      const T f = sigmoid(a(h + j));
      const T g = std::tanh(a(2 * h + j));
      const T o = sigmoid(a(3 * h + j));
      const T c = f * c_prev(j) + i * g;
      const T ct = std::tanh(c);
      tr.gates(t, j) = i;
      tr.gates(t, h + j) = f;
      tr.gates(t, 2 * h + j) = g;
      tr.gates(t, 3 * h + j) = o;
      tr.cell(t, j) = c;
      tr.cell_tanh(t, j) = ct;
      tr.hidden(t, j) = o * ct;
    }
    h_prev = tr.hidden.row(t);
    c_prev = tr.cell.row(t);
  }
}

// Returns d(loss)/d(projected input) and accumulates into d_w_hh.
template <typename T>
Matrix<T> lstm_backward(const LstmTrace<T>& tr, const Eigen::Map<const Matrix<T>>& w_hh,
                        const Matrix<T>& d_hidden, bool reverse, Eigen::Map<Matrix<T>> d_w_hh) {
  const Eigen::Index n = tr.hidden.rows();
  const Eigen::Index h = w_hh.cols();
  Matrix<T> d_proj(n, 4 * h);
  RowVector<T> dh_next = RowVector<T>::Zero(h);
  RowVector<T> dc_next = RowVector<T>::Zero(h);
  RowVector<T> da(4 * h);
  for (Eigen::Index s = n - 1; s >= 0; --s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    const Eigen::Index tp = reverse ? t + 1 : t - 1;
    const bool has_prev = s > 0;
    for (Eigen::Index j = 0; j < h; ++j) {
      const T i = tr.gates(t, j);
      const T f = tr.gates(t, h + j);
      const T g = tr.gates(t, 2 * h + j);
      const T o = tr.gates(t, 3 * h + j);
      const T ct = tr.cell_tanh(t, j);
      const T dh = d_hidden(t, j) + dh_next(j);
      const T d_o = dh * ct;
      const T dc = dh * o * (T(1) - ct * ct) + dc_next(j);
      const T c_prev = has_prev ? tr.cell(tp, j) : T(0);
      da(j) = dc * g * i * (T(1) - i);
      da(h + j) = dc * c_prev * f * (T(1) - f);
      da(2 * h + j) = dc * i * (T(1) - g * g);
      da(3 * h + j) = d_o * o * (T(1) - o);
      dc_next(j) = dc * f;
    }
    d_proj.row(t) = da;
    if (has_prev) {
      d_w_hh.noalias() += da.transpose() * tr.hidden.row(tp);
    }
    dh_next.noalias() = da * w_hh;
  }
  return d_proj;
}

}  // namespace

template <typename T>
Matrix<T> sinusoidal_positions(std::size_t length, std::size_t dim) {
  Matrix<T> pe(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(dim));
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < dim; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(dim));
      const double angle = static_cast<double>(pos) * freq;
      pe(pos, i) = static_cast<T>(std::sin(angle));
      if (i + 1 < dim) pe(pos, i + 1) = static_cast<T>(std::cos(angle));
    }
  }
  return pe;
}

template <typename T>
Tagger<T>::Tagger(ModelConfig config, ParameterSet<T> params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
  if (!(params_.layout() == ParameterLayout(config_))) {
    throw Error("invalid_config", "parameter layout does not match model config");
  }
  positional_ = sinusoidal_positions<T>(config_.max_seq_len, config_.embed_dim);
}

template <typename T>
EmissionScores<T> Tagger<T>::forward(std::span<const std::int32_t> ids, std::mt19937_64* rng,
                                     TaggerTrace<T>* trace) const {
  const auto len = static_cast<Eigen::Index>(ids.size());
  if (ids.empty() || ids.size() % kGroupWidth != 0) {
    throw LengthMismatchError("tagger input length " + std::to_string(ids.size()) +
                              " is not a positive multiple of 4");
  }
  if (ids.size() > config_.max_seq_len) {
    throw LengthMismatchError("tagger input length " + std::to_string(ids.size()) +
                              " exceeds max_seq_len " + std::to_string(config_.max_seq_len));
  }
  const auto& p = params_;
  const auto e = static_cast<Eigen::Index>(config_.embed_dim);
  const auto heads = static_cast<Eigen::Index>(config_.attn_heads);
  const Eigen::Index dh = e / heads;
  const Eigen::Index groups = len / static_cast<Eigen::Index>(kGroupWidth);
  const Eigen::Index hidden = static_cast<Eigen::Index>(config_.lstm_hidden);
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  TaggerTrace<T> local;
  TaggerTrace<T>& tr = trace != nullptr ? *trace : local;
  const bool keep = trace != nullptr;
  tr.ids.assign(ids.begin(), ids.end());

  // Embedding and positions.
  const auto embed = p.mat(Param::CharEmbed);
  Matrix<T> x(len, e);
  for (Eigen::Index t = 0; t < len; ++t) {
    const auto id = ids[static_cast<std::size_t>(t)];
    if (id < 0 || id >= static_cast<std::int32_t>(Vocabulary::kSize)) {
      throw Error("invalid_input", "character id out of range");
    }
    x.row(t) = embed.row(id) + positional_.row(t);
  }
  tr.pos_mask = dropout_mask<T>(len, e, config_.pos_dropout, rng);
  apply_mask(x, tr.pos_mask);

  // Self-attention sub-block.
  Matrix<T> ln1_out;
  layer_norm<T>(x, p.vec(Param::Ln1Gamma), p.vec(Param::Ln1Beta), tr.ln1_hat, tr.ln1_rstd, ln1_out);
  Matrix<T> qkv = ln1_out * p.mat(Param::AttnInWeight).transpose();
  qkv.rowwise() += p.vec(Param::AttnInBias);
  Matrix<T> attn_heads(len, e);
  if (keep) tr.attn_probs.assign(static_cast<std::size_t>(heads), Matrix<T>());
  Matrix<T> scores;
  for (Eigen::Index hd = 0; hd < heads; ++hd) {
    const auto q = qkv.middleCols(hd * dh, dh);
    const auto k = qkv.middleCols(e + hd * dh, dh);
    const auto v = qkv.middleCols(2 * e + hd * dh, dh);
    scores.noalias() = (q * k.transpose()) * scale;
    softmax_rows(scores);
    attn_heads.middleCols(hd * dh, dh).noalias() = scores * v;
    if (keep) tr.attn_probs[static_cast<std::size_t>(hd)] = std::move(scores);
  }
  Matrix<T> x2 = x + attn_heads * p.mat(Param::AttnOutWeight).transpose();
  x2.rowwise() += p.vec(Param::AttnOutBias);

  // MLP sub-block.
  Matrix<T> ln2_out;
  layer_norm<T>(x2, p.vec(Param::Ln2Gamma), p.vec(Param::Ln2Beta), tr.ln2_hat, tr.ln2_rstd, ln2_out);
  Matrix<T> pre = ln2_out * p.mat(Param::MlpFcWeight).transpose();
  pre.rowwise() += p.vec(Param::MlpFcBias);
  Matrix<T> act = pre.cwiseMax(T(0));
  Matrix<T> encoded = x2 + act * p.mat(Param::MlpProjWeight).transpose();
  encoded.rowwise() += p.vec(Param::MlpProjBias);

  // Downsampling: each group of four rows is one convolution window.
  const Eigen::Map<const Matrix<T>> windows(encoded.data(), groups, 4 * e);
  Matrix<T> conv = windows * p.mat(Param::ConvWeight).transpose();
  conv.rowwise() += p.vec(Param::ConvBias);
  tr.conv_mask = dropout_mask<T>(groups, conv.cols(), config_.dropout, rng);
  apply_mask(conv, tr.conv_mask);

  // BiLSTM with residual connection.
  Matrix<T> proj_f = conv * p.mat(Param::LstmFwdWih).transpose();
  proj_f.rowwise() += p.vec(Param::LstmFwdBih) + p.vec(Param::LstmFwdBhh);
  Matrix<T> proj_b = conv * p.mat(Param::LstmBwdWih).transpose();
  proj_b.rowwise() += p.vec(Param::LstmBwdBih) + p.vec(Param::LstmBwdBhh);
  lstm_forward<T>(proj_f, p.mat(Param::LstmFwdWhh), false, tr.lstm_fwd);
  lstm_forward<T>(proj_b, p.mat(Param::LstmBwdWhh), true, tr.lstm_bwd);
  Matrix<T> summed(groups, 2 * hidden);
  summed.leftCols(hidden) = tr.lstm_fwd.hidden;
  summed.rightCols(hidden) = tr.lstm_bwd.hidden;
  summed += conv;

  Matrix<T> features;
  layer_norm<T>(summed, p.vec(Param::Ln3Gamma), p.vec(Param::Ln3Beta), tr.ln3_hat, tr.ln3_rstd,
                features);
  tr.out_mask = dropout_mask<T>(groups, features.cols(), config_.dropout, rng);
  apply_mask(features, tr.out_mask);

  EmissionScores<T> emissions = features * p.mat(Param::EmitWeight).transpose();
  emissions.rowwise() += p.vec(Param::EmitBias);

  if (keep) {
    tr.block_in = std::move(x);
    tr.ln1_out = std::move(ln1_out);
    tr.qkv = std::move(qkv);
    tr.attn_heads = std::move(attn_heads);
    tr.ln2_out = std::move(ln2_out);
    tr.mlp_pre = std::move(pre);
    tr.mlp_act = std::move(act);
    tr.encoded = std::move(encoded);
    tr.conv_out = std::move(conv);
    tr.features = std::move(features);
  }
  return emissions;
}

template <typename T>
void Tagger<T>::backward(const TaggerTrace<T>& tr, const EmissionScores<T>& d_em,
                         ParameterSet<T>& g) const {
  const auto& p = params_;
  const auto e = static_cast<Eigen::Index>(config_.embed_dim);
  const auto heads = static_cast<Eigen::Index>(config_.attn_heads);
  const Eigen::Index dh = e / heads;
  const Eigen::Index len = tr.encoded.rows();
  const Eigen::Index groups = tr.conv_out.rows();
  const Eigen::Index hidden = static_cast<Eigen::Index>(config_.lstm_hidden);
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  // Emission projection.
  g.mat(Param::EmitWeight).noalias() += d_em.transpose() * tr.features;
  g.vec(Param::EmitBias) += d_em.colwise().sum();
  Matrix<T> d_feat = d_em * p.mat(Param::EmitWeight);
  apply_mask(d_feat, tr.out_mask);

  Matrix<T> d_sum = layer_norm_backward<T>(d_feat, tr.ln3_hat, tr.ln3_rstd, p.vec(Param::Ln3Gamma),
                                           g.vec(Param::Ln3Gamma), g.vec(Param::Ln3Beta));

  // BiLSTM; the residual passes d_sum straight to the conv output.
  Matrix<T> d_conv = d_sum;
  const Matrix<T> dh_f = d_sum.leftCols(hidden);
  const Matrix<T> dh_b = d_sum.rightCols(hidden);
  const Matrix<T> dp_f =
      lstm_backward<T>(tr.lstm_fwd, p.mat(Param::LstmFwdWhh), dh_f, false, g.mat(Param::LstmFwdWhh));
  const Matrix<T> dp_b =
      lstm_backward<T>(tr.lstm_bwd, p.mat(Param::LstmBwdWhh), dh_b, true, g.mat(Param::LstmBwdWhh));
  g.mat(Param::LstmFwdWih).noalias() += dp_f.transpose() * tr.conv_out;
  g.mat(Param::LstmBwdWih).noalias() += dp_b.transpose() * tr.conv_out;
  const RowVector<T> db_f = dp_f.colwise().sum();
  const RowVector<T> db_b = dp_b.colwise().sum();
  g.vec(Param::LstmFwdBih) += db_f;
  g.vec(Param::LstmFwdBhh) += db_f;
  g.vec(Param::LstmBwdBih) += db_b;
  g.vec(Param::LstmBwdBhh) += db_b;
  d_conv.noalias() += dp_f * p.mat(Param::LstmFwdWih);
  d_conv.noalias() += dp_b * p.mat(Param::LstmBwdWih);
  apply_mask(d_conv, tr.conv_mask);

  // Convolution.
  const Eigen::Map<const Matrix<T>> windows(tr.encoded.data(), groups, 4 * e);
  g.mat(Param::ConvWeight).noalias() += d_conv.transpose() * windows;
  g.vec(Param::ConvBias) += d_conv.colwise().sum();
  Matrix<T> d_windows = d_conv * p.mat(Param::ConvWeight);
  Matrix<T> d_x = Eigen::Map<const Matrix<T>>(d_windows.data(), len, e);

  // MLP sub-block.
  g.mat(Param::MlpProjWeight).noalias() += d_x.transpose() * tr.mlp_act;
  g.vec(Param::MlpProjBias) += d_x.colwise().sum();
  Matrix<T> d_pre = d_x * p.mat(Param::MlpProjWeight);
  d_pre = (tr.mlp_pre.array() > T(0)).select(d_pre, T(0));
  g.mat(Param::MlpFcWeight).noalias() += d_pre.transpose() * tr.ln2_out;
  g.vec(Param::MlpFcBias) += d_pre.colwise().sum();
  const Matrix<T> d_ln2 = d_pre * p.mat(Param::MlpFcWeight);
  d_x += layer_norm_backward<T>(d_ln2, tr.ln2_hat, tr.ln2_rstd, p.vec(Param::Ln2Gamma),
                                g.vec(Param::Ln2Gamma), g.vec(Param::Ln2Beta));

  // Self-attention sub-block.
  g.mat(Param::AttnOutWeight).noalias() += d_x.transpose() * tr.attn_heads;
  g.vec(Param::AttnOutBias) += d_x.colwise().sum();
  const Matrix<T> d_heads = d_x * p.mat(Param::AttnOutWeight);
  Matrix<T> d_qkv(len, 3 * e);
  Matrix<T> d_probs;
  for (Eigen::Index hd = 0; hd < heads; ++hd) {
    const Matrix<T>& probs = tr.attn_probs[static_cast<std::size_t>(hd)];
    const auto q = tr.qkv.middleCols(hd * dh, dh);
    const auto k = tr.qkv.middleCols(e + hd * dh, dh);
    const auto v = tr.qkv.middleCols(2 * e + hd * dh, dh);
    const auto d_out = d_heads.middleCols(hd * dh, dh);
    d_probs.noalias() = d_out * v.transpose();
    d_qkv.middleCols(2 * e + hd * dh, dh).noalias() = probs.transpose() * d_out;
    const ColumnVector<T> row_dot = (d_probs.array() * probs.array()).rowwise().sum();
    Matrix<T> d_scores = probs.array() * (d_probs.colwise() - row_dot).array();
    d_scores *= scale;
    d_qkv.middleCols(hd * dh, dh).noalias() = d_scores * k;
    d_qkv.middleCols(e + hd * dh, dh).noalias() = d_scores.transpose() * q;
  }
  g.mat(Param::AttnInWeight).noalias() += d_qkv.transpose() * tr.ln1_out;
  g.vec(Param::AttnInBias) += d_qkv.colwise().sum();
  const Matrix<T> d_ln1 = d_qkv * p.mat(Param::AttnInWeight);
  d_x += layer_norm_backward<T>(d_ln1, tr.ln1_hat, tr.ln1_rstd, p.vec(Param::Ln1Gamma),
                                g.vec(Param::Ln1Gamma), g.vec(Param::Ln1Beta));

  apply_mask(d_x, tr.pos_mask);
  auto d_embed = g.mat(Param::CharEmbed);
  for (Eigen::Index t = 0; t < len; ++t) d_embed.row(tr.ids[static_cast<std::size_t>(t)]) += d_x.row(t);
}

template class Tagger<float>;
template class Tagger<double>;
template Matrix<float> sinusoidal_positions<float>(std::size_t, std::size_t);
template Matrix<double> sinusoidal_positions<double>(std::size_t, std::size_t);

}  // namespace bcdlog
