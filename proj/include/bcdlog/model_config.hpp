#pragma once

#include <cstddef>

namespace bcdlog {

struct ModelConfig {
  std::size_t embed_dim = 128;
  std::size_t attn_heads = 8;
  std::size_t attn_layers = 1;
  std::size_t mlp_hidden = 256;
  std::size_t conv_filters = 128;
  std::size_t conv_kernel = 4;
  std::size_t conv_stride = 4;
  std::size_t lstm_hidden = 64;  // per direction
  std::size_t num_classes = 16;
  double dropout = 0.4;
  double pos_dropout = 0.1;
  std::size_t max_seq_len = 2048;

  // Throws bcdlog::Error("invalid_config") when an invariant is violated:
  // kernel == stride == 4, 16 classes, heads divide embed_dim, a single
  // encoder layer, and conv_filters == 2 * lstm_hidden for the BiLSTM skip.
  void validate() const;

  // Small shape used for finite-difference gradient checks.
  static ModelConfig tiny();

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace bcdlog
