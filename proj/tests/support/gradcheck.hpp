#pragma once

// Central-difference check of the tagger + CRF backward pass on random
// inputs, in double precision.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bcdlog/training.hpp"

namespace gradcheck {

struct GroupError {
  std::string name;
  double relative = 0.0;
};

// Per-tensor ||analytic - numeric|| / max(||analytic||, ||numeric||). With a
// dropout seed the same masks are replayed for every evaluation.
inline std::vector<GroupError> run(std::uint64_t seed, std::optional<std::uint64_t> dropout_seed = {},
                                   std::size_t length = 20, double h = 1e-5) {
  using namespace bcdlog;
  const ModelConfig config = ModelConfig::tiny();
  auto params = initialize_parameters<double>(config, seed);
  std::mt19937_64 rng(seed + 100);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (double& v : params.values()) v += noise(rng);
  std::vector<std::int32_t> ids(length);
  for (auto& id : ids) id = static_cast<std::int32_t>(rng() % Vocabulary::kSize);
  BcdSequence gold;
  for (std::size_t i = 0; i < length / 4; ++i) gold.digits.push_back(static_cast<std::uint8_t>(rng() % 16));

  Tagger<double> tagger(config, params);
  auto loss = [&](ParameterSet<double>* grads) {
    if (dropout_seed) {
      std::mt19937_64 d(*dropout_seed);
      return sequence_nll<double>(tagger, ids, gold, &d, grads);
    }
    return sequence_nll<double>(tagger, ids, gold, nullptr, grads);
  };
  ParameterSet<double> grads(config);
  loss(&grads);

  std::vector<GroupError> out;
  for (std::size_t k = 0; k < kParamCount; ++k) {
    const auto p = static_cast<Param>(k);
    auto values = tagger.params().values(p);
    const auto analytic = grads.values(p);
    double diff2 = 0, a2 = 0, n2 = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss(nullptr);
      values[i] = saved - h;
      const double down = loss(nullptr);
      values[i] = saved;
      const double numeric = (up - down) / (2 * h);
      diff2 += (numeric - analytic[i]) * (numeric - analytic[i]);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
    }
    const double denom = std::max({std::sqrt(a2), std::sqrt(n2), 1e-8});
    out.push_back({std::string(tagger.params().layout()[p].name), std::sqrt(diff2) / denom});
  }
  return out;
}

}  // namespace gradcheck
