#include "bcdlog/model.hpp"

#include <algorithm>

#include "bcdlog/crf.hpp"
#include "bcdlog/errors.hpp"

namespace bcdlog {

Model create_model(const ModelConfig& config, Vocabulary vocab, std::uint64_t seed) {
  return Model{std::move(vocab), Tagger<float>(config, initialize_parameters<float>(config, seed))};
}

std::size_t parameter_count(const ModelConfig& config) { return ParameterLayout(config).total(); }

template <typename T>
EmissionScores<T> forward(const Tagger<T>& tagger, const Vocabulary& vocab,
                          const CharSequence& padded, std::mt19937_64* dropout_rng) {
  if (padded.size() % kGroupWidth != 0) {
    throw LengthMismatchError("input of length " + std::to_string(padded.size()) +
                              " is not padded to a multiple of 4");
  }
  const auto ids = vocab.encode(padded);
  return tagger.forward(ids, dropout_rng);
}

MaskPrediction predict_mask(const Model& model, const CharSequence& message) {
  MaskPrediction out;
  if (message.empty()) return out;
  const std::size_t limit = model.config().max_seq_len;
  CharSequence visible = message;
  if (message.size() > limit) {
    visible = CharSequence(message.code_points().substr(0, limit));
    out.truncated = true;
  }
  const CharSequence padded = pad_to_multiple_of_four(visible);
  const auto emissions = forward(model.tagger, model.vocab, padded);
  const BcdSequence digits = crf::viterbi<float>(emissions, model.tagger.params());
  out.mask = decode_bcd(digits, visible.size());
  out.mask.bits.resize(message.size(), 0);
  return out;
}

template EmissionScores<float> forward<float>(const Tagger<float>&, const Vocabulary&,
                                              const CharSequence&, std::mt19937_64*);
template EmissionScores<double> forward<double>(const Tagger<double>&, const Vocabulary&,
                                                const CharSequence&, std::mt19937_64*);

}  // namespace bcdlog
