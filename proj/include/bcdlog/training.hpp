#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bcdlog/mask_codec.hpp"
#include "bcdlog/model.hpp"

namespace bcdlog {

// A raw annotated line as read from a structured log file.
struct LabeledMessage {
  std::string message;
  std::string template_text;
};

struct TrainingExample {
  CharSequence message;
  Template gold_template;
  ParameterMask gold_mask;
  BcdSequence gold_bcd;
};

// Throws AlignmentError when the template does not fit the message.
TrainingExample make_example(std::string_view message, std::string_view template_text);

struct AlignmentFailure {
  std::size_t index = 0;  // position in the input corpus
  std::string message;
  std::string template_text;
};

struct TrainingSet {
  std::vector<TrainingExample> examples;
  std::vector<AlignmentFailure> failures;
};

// Keeps at most `cap` lines per distinct template, chosen by seeded uniform
// sampling without replacement; surviving lines keep corpus order.
TrainingSet build_training_set(std::span<const LabeledMessage> corpus, std::size_t cap,
                               std::uint64_t seed);

struct TrainConfig {
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  std::size_t epochs = 10;
  std::size_t per_template_cap = 50;
  std::uint64_t seed = 0;
  std::optional<double> clip_norm;  // off by default

  void validate() const;
};

// NLL of `gold` for one sequence of character ids (already padded); when
// `grads` is non-null the gradient is accumulated into it.
template <typename T>
T sequence_nll(const Tagger<T>& tagger, std::span<const std::int32_t> ids, const BcdSequence& gold,
               std::mt19937_64* dropout_rng, ParameterSet<T>* grads);

struct TrainResult {
  Model model;
  std::vector<double> epoch_losses;  // mean per-example NLL of each epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// AdamW (beta 0.9/0.999, eps 1e-8) with decoupled weight decay and a fixed
// learning rate over shuffled mini-batches. Every sequence is scored over
// its own group count, so batching never introduces padding groups. The
// vocabulary is built from the training messages. Throws
// bcdlog::Error("non_finite_loss") if the loss diverges.
TrainResult train(std::span<const TrainingExample> examples, const ModelConfig& model_config,
                  const TrainConfig& train_config, const EpochCallback& on_epoch = {});

// Mean NLL with dropout off.
double evaluate_loss(const Model& model, std::span<const TrainingExample> examples);

}  // namespace bcdlog
