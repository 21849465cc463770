#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "bcdlog/model_config.hpp"
#include "bcdlog/parameters.hpp"

namespace bcdlog {

// One row per four-character group, one column per BCD class.
template <typename T>
using EmissionScores = Matrix<T>;

template <typename T>
using ColumnVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
struct LstmTrace {
  Matrix<T> gates;  // post-activation i, f, g, o; rows in time order
  Matrix<T> cell;
  Matrix<T> cell_tanh;
  Matrix<T> hidden;
};

// Activations kept by a training-mode forward pass for backpropagation.
template <typename T>
struct TaggerTrace {
  std::vector<std::int32_t> ids;
  Matrix<T> pos_mask;  // empty when dropout is off
  Matrix<T> block_in;
  Matrix<T> ln1_hat;
  ColumnVector<T> ln1_rstd;
  Matrix<T> ln1_out;
  Matrix<T> qkv;
  std::vector<Matrix<T>> attn_probs;  // one (L x L) matrix per head
  Matrix<T> attn_heads;
  Matrix<T> ln2_hat;
  ColumnVector<T> ln2_rstd;
  Matrix<T> ln2_out;
  Matrix<T> mlp_pre;
  Matrix<T> mlp_act;
  Matrix<T> encoded;  // (L x E) encoder output
  Matrix<T> conv_mask;
  Matrix<T> conv_out;  // (N x F) after dropout
  LstmTrace<T> lstm_fwd;
  LstmTrace<T> lstm_bwd;
  Matrix<T> ln3_hat;
  ColumnVector<T> ln3_rstd;
  Matrix<T> out_mask;
  Matrix<T> features;  // input of the emission projection
};

// Character embedding + fixed sinusoidal positions -> pre-norm residual
// self-attention block (MHA, then ReLU MLP) -> non-overlapping conv (k=s=4)
// -> dropout -> BiLSTM with residual -> LayerNorm -> dropout -> linear
// emission scores for the CRF.
template <typename T>
class Tagger {
 public:
  Tagger() = default;
  Tagger(ModelConfig config, ParameterSet<T> params);

  const ModelConfig& config() const noexcept { return config_; }
  const ParameterSet<T>& params() const noexcept { return params_; }
  ParameterSet<T>& params() noexcept { return params_; }

  // `ids` must have a length that is a positive multiple of 4 and at most
  // max_seq_len. Dropout is applied iff `dropout_rng` is non-null. When
  // `trace` is non-null it is filled for a subsequent backward() call.
  EmissionScores<T> forward(std::span<const std::int32_t> ids, std::mt19937_64* dropout_rng = nullptr,
                            TaggerTrace<T>* trace = nullptr) const;

  // Accumulates d(loss)/d(params) into `grads` given d(loss)/d(emissions).
  void backward(const TaggerTrace<T>& trace, const EmissionScores<T>& d_emissions,
                ParameterSet<T>& grads) const;

 private:
  ModelConfig config_;
  ParameterSet<T> params_;
  Matrix<T> positional_;  // (max_seq_len x E), not learned
};

template <typename T>
Matrix<T> sinusoidal_positions(std::size_t length, std::size_t dim);

}  // namespace bcdlog
