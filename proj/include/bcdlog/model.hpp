#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include "bcdlog/mask_codec.hpp"
#include "bcdlog/tagger.hpp"
#include "bcdlog/vocabulary.hpp"

namespace bcdlog {

// A trained (or freshly initialized) single-precision tagger together with
// its vocabulary. Immutable after construction; safe for concurrent readers.
struct Model {
  Vocabulary vocab;
  Tagger<float> tagger;

  const ModelConfig& config() const noexcept { return tagger.config(); }
};

Model create_model(const ModelConfig& config, Vocabulary vocab, std::uint64_t seed);

// Total learnable scalars for a configuration.
std::size_t parameter_count(const ModelConfig& config);

// `padded` must already be a multiple of 4 characters. Out-of-vocabulary
// characters map to UNK. Dropout applies iff `dropout_rng` is non-null.
template <typename T>
EmissionScores<T> forward(const Tagger<T>& tagger, const Vocabulary& vocab,
                          const CharSequence& padded, std::mt19937_64* dropout_rng = nullptr);

struct MaskPrediction {
  ParameterMask mask;
  // The message exceeded max_seq_len; characters past the limit were
  // labeled static without being seen by the model.
  bool truncated = false;
};

// pad -> forward (inference) -> Viterbi -> BCD decode, truncated to the
// message length.
MaskPrediction predict_mask(const Model& model, const CharSequence& message);

// Versioned binary format. All floats are stored bit-exactly, and the file
// carries the config and vocabulary. Errors: "io", "checkpoint_version",
// "checkpoint_corrupt".
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace bcdlog
