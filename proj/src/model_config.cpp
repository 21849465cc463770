#include "bcdlog/model_config.hpp"

#include <string>

#include "bcdlog/errors.hpp"
#include "bcdlog/mask_codec.hpp"

namespace bcdlog {

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error("invalid_config", what); };
  if (conv_kernel != kGroupWidth || conv_stride != kGroupWidth) {
    fail("conv_kernel and conv_stride must both be 4");
  }
  if (num_classes != 16) fail("num_classes must be 16");
  if (attn_layers != 1) fail("exactly one attention layer is supported");
  if (embed_dim == 0 || attn_heads == 0 || embed_dim % attn_heads != 0) {
    fail("embed_dim must be a positive multiple of attn_heads");
  }
  if (mlp_hidden == 0 || lstm_hidden == 0) fail("hidden sizes must be positive");
  if (conv_filters != 2 * lstm_hidden) fail("conv_filters must equal 2 * lstm_hidden");
  if (max_seq_len == 0 || max_seq_len % kGroupWidth != 0) {
    fail("max_seq_len must be a positive multiple of 4");
  }
  if (!(dropout >= 0.0 && dropout < 1.0) || !(pos_dropout >= 0.0 && pos_dropout < 1.0)) {
    fail("dropout rates must lie in [0, 1)");
  }
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.embed_dim = 8;
  c.attn_heads = 2;
  c.mlp_hidden = 8;
  c.conv_filters = 8;
  c.lstm_hidden = 4;
  c.max_seq_len = 64;
  return c;
}

}  // namespace bcdlog
