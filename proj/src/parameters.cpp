#include "bcdlog/parameters.hpp"

#include <cmath>
#include <random>

#include "bcdlog/vocabulary.hpp"

namespace bcdlog {

ParameterLayout::ParameterLayout(const ModelConfig& c) {
  const std::size_t e = c.embed_dim;
  const std::size_t h = c.lstm_hidden;
  const std::size_t f = c.conv_filters;
  const std::size_t k = c.num_classes;
  auto set = [&](Param p, std::string_view name, std::size_t rows, std::size_t cols) {
    shapes_[static_cast<std::size_t>(p)] = TensorShape{name, rows, cols, 0};
  };
  set(Param::CharEmbed, "char_embed", Vocabulary::kSize, e);
  set(Param::Ln1Gamma, "attn.ln_1.weight", 1, e);
  set(Param::Ln1Beta, "attn.ln_1.bias", 1, e);
  set(Param::AttnInWeight, "attn.in_proj.weight", 3 * e, e);
  set(Param::AttnInBias, "attn.in_proj.bias", 1, 3 * e);
  set(Param::AttnOutWeight, "attn.out_proj.weight", e, e);
  set(Param::AttnOutBias, "attn.out_proj.bias", 1, e);
  set(Param::Ln2Gamma, "attn.ln_2.weight", 1, e);
  set(Param::Ln2Beta, "attn.ln_2.bias", 1, e);
  set(Param::MlpFcWeight, "attn.mlp.fc.weight", c.mlp_hidden, e);
  set(Param::MlpFcBias, "attn.mlp.fc.bias", 1, c.mlp_hidden);
  set(Param::MlpProjWeight, "attn.mlp.proj.weight", e, c.mlp_hidden);
  set(Param::MlpProjBias, "attn.mlp.proj.bias", 1, e);
  set(Param::ConvWeight, "cnn_1d.weight", f, c.conv_kernel * e);
  set(Param::ConvBias, "cnn_1d.bias", 1, f);
  set(Param::LstmFwdWih, "lstm.weight_ih", 4 * h, f);
  set(Param::LstmFwdWhh, "lstm.weight_hh", 4 * h, h);
  set(Param::LstmFwdBih, "lstm.bias_ih", 1, 4 * h);
  set(Param::LstmFwdBhh, "lstm.bias_hh", 1, 4 * h);
  set(Param::LstmBwdWih, "lstm.weight_ih_reverse", 4 * h, f);
  set(Param::LstmBwdWhh, "lstm.weight_hh_reverse", 4 * h, h);
  set(Param::LstmBwdBih, "lstm.bias_ih_reverse", 1, 4 * h);
  set(Param::LstmBwdBhh, "lstm.bias_hh_reverse", 1, 4 * h);
  set(Param::Ln3Gamma, "ln_3.weight", 1, 2 * h);
  set(Param::Ln3Beta, "ln_3.bias", 1, 2 * h);
  set(Param::EmitWeight, "crf.emission.weight", k, 2 * h);
  set(Param::EmitBias, "crf.emission.bias", 1, k);
  set(Param::CrfTransitions, "crf.transitions", k, k);
  set(Param::CrfStart, "crf.start_transitions", 1, k);
  set(Param::CrfEnd, "crf.end_transitions", 1, k);
  for (auto& s : shapes_) {
    s.offset = total_;
    total_ += s.size();
  }
}

bool operator==(const ParameterLayout& a, const ParameterLayout& b) {
  if (a.total_ != b.total_) return false;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (a.shapes_[i].rows != b.shapes_[i].rows || a.shapes_[i].cols != b.shapes_[i].cols) {
      return false;
    }
  }
  return true;
}

template <typename T>
ParameterSet<T> initialize_parameters(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ParameterSet<T> params(config);
  std::mt19937_64 rng(seed);

  auto uniform = [&](Param p, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : params.values(p)) v = static_cast<T>(dist(rng));
  };
  auto constant = [&](Param p, double value) {
    for (auto& v : params.values(p)) v = static_cast<T>(value);
  };
  auto fan_in_bound = [](std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };

  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : params.values(Param::CharEmbed)) v = static_cast<T>(normal(rng));

  const std::size_t e = config.embed_dim;
  const std::size_t h = config.lstm_hidden;
  constant(Param::Ln1Gamma, 1.0);
  constant(Param::Ln1Beta, 0.0);
  uniform(Param::AttnInWeight, std::sqrt(6.0 / static_cast<double>(e + 3 * e)));
  constant(Param::AttnInBias, 0.0);
  uniform(Param::AttnOutWeight, fan_in_bound(e));
  constant(Param::AttnOutBias, 0.0);
  constant(Param::Ln2Gamma, 1.0);
  constant(Param::Ln2Beta, 0.0);
  uniform(Param::MlpFcWeight, fan_in_bound(e));
  uniform(Param::MlpFcBias, fan_in_bound(e));
  uniform(Param::MlpProjWeight, fan_in_bound(config.mlp_hidden));
  uniform(Param::MlpProjBias, fan_in_bound(config.mlp_hidden));
  uniform(Param::ConvWeight, fan_in_bound(e * config.conv_kernel));
  uniform(Param::ConvBias, fan_in_bound(e * config.conv_kernel));
  for (Param p : {Param::LstmFwdWih, Param::LstmFwdWhh, Param::LstmFwdBih, Param::LstmFwdBhh,
                  Param::LstmBwdWih, Param::LstmBwdWhh, Param::LstmBwdBih, Param::LstmBwdBhh}) {
    uniform(p, fan_in_bound(h));
  }
  constant(Param::Ln3Gamma, 1.0);
  constant(Param::Ln3Beta, 0.0);
  uniform(Param::EmitWeight, fan_in_bound(2 * h));
  uniform(Param::EmitBias, fan_in_bound(2 * h));
  uniform(Param::CrfTransitions, 0.1);
  uniform(Param::CrfStart, 0.1);
  uniform(Param::CrfEnd, 0.1);
  return params;
}

bool all_finite(std::span<const float> values) {
  for (float v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template ParameterSet<float> initialize_parameters<float>(const ModelConfig&, std::uint64_t);
template ParameterSet<double> initialize_parameters<double>(const ModelConfig&, std::uint64_t);

}  // namespace bcdlog
