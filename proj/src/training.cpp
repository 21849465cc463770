#include "bcdlog/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "bcdlog/crf.hpp"
#include "bcdlog/errors.hpp"

namespace bcdlog {
namespace {

struct PreparedExample {
  std::vector<std::int32_t> ids;
  BcdSequence gold;
  std::size_t source = 0;
};

PreparedExample prepare(const TrainingExample& ex, const Vocabulary& vocab, std::size_t max_len) {
  CharSequence msg = ex.message;
  BcdSequence gold = ex.gold_bcd;
  if (msg.size() > max_len) {
    msg = CharSequence(msg.code_points().substr(0, max_len));
    gold.digits.resize(max_len / kGroupWidth);
  }
  return {vocab.encode(pad_to_multiple_of_four(msg)), std::move(gold), 0};
}

class AdamW {
 public:
  AdamW(std::size_t n, const TrainConfig& cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<float> params, std::span<const float> grads) {
    ++t_;
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    const double lr = cfg_.learning_rate;
    const double decay = 1.0 - lr * cfg_.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i];
      m_[i] = b1 * m_[i] + (1.0 - b1) * g;
      v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
      const double update = lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps);
      params[i] = static_cast<float>(params[i] * decay - update);
    }
  }

 private:
  const TrainConfig& cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

}  // namespace

TrainingExample make_example(std::string_view message, std::string_view template_text) {
  TrainingExample ex;
  ex.message = CharSequence::from_utf8(message);
  ex.gold_template = Template{std::string(template_text)};
  ex.gold_mask = derive_ground_truth_mask(ex.message, ex.gold_template);
  ex.gold_bcd = encode_mask(ex.gold_mask);
  return ex;
}

TrainingSet build_training_set(std::span<const LabeledMessage> corpus, std::size_t cap,
                               std::uint64_t seed) {
  if (corpus.empty()) throw Error("empty_input", "training corpus is empty");
  if (cap == 0) throw Error("invalid_config", "per-template cap must be at least 1");

  TrainingSet set;
  std::vector<std::optional<TrainingExample>> aligned(corpus.size());
  std::map<std::string, std::vector<std::size_t>> by_template;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    try {
      aligned[i] = make_example(corpus[i].message, corpus[i].template_text);
    } catch (const AlignmentError&) {
      set.failures.push_back({i, corpus[i].message, corpus[i].template_text});
      continue;
    }
    auto [it, inserted] = by_template.try_emplace(corpus[i].template_text);
    if (inserted) order.push_back(corpus[i].template_text);
    it->second.push_back(i);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  for (const auto& tmpl : order) {
    auto idx = by_template[tmpl];
    if (idx.size() > cap) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(cap);
    }
    keep.insert(keep.end(), idx.begin(), idx.end());
  }
  std::sort(keep.begin(), keep.end());
  set.examples.reserve(keep.size());
  for (std::size_t i : keep) set.examples.push_back(std::move(*aligned[i]));
  return set;
}

void TrainConfig::validate() const {
  if (batch_size == 0 || epochs == 0 || per_template_cap == 0 || !(learning_rate > 0.0) ||
      !(weight_decay >= 0.0) || (clip_norm && !(*clip_norm > 0.0))) {
    throw Error("invalid_config", "training hyperparameters must be positive");
  }
}

template <typename T>
T sequence_nll(const Tagger<T>& tagger, std::span<const std::int32_t> ids, const BcdSequence& gold,
               std::mt19937_64* dropout_rng, ParameterSet<T>* grads) {
  if (grads == nullptr) {
    const auto em = tagger.forward(ids, dropout_rng);
    return crf::nll<T>(em, gold, tagger.params());
  }
  TaggerTrace<T> trace;
  const auto em = tagger.forward(ids, dropout_rng, &trace);
  crf::CrfGradient<T> cg;
  const T loss = crf::nll<T>(em, gold, tagger.params(), &cg);
  grads->mat(Param::CrfTransitions) += cg.transitions;
  grads->vec(Param::CrfStart) += cg.start;
  grads->vec(Param::CrfEnd) += cg.end;
  tagger.backward(trace, cg.emissions, *grads);
  return loss;
}

TrainResult train(std::span<const TrainingExample> examples, const ModelConfig& model_config,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (examples.empty()) throw Error("empty_input", "no training examples");
  cfg.validate();
  model_config.validate();

  std::vector<CharSequence> messages;
  messages.reserve(examples.size());
  for (const auto& ex : examples) messages.push_back(ex.message);

  TrainResult result{create_model(model_config, Vocabulary::build(messages), cfg.seed), {}};
  Tagger<float>& tagger = result.model.tagger;

  // Empty messages have no groups and contribute nothing.
  std::vector<PreparedExample> data;
  data.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].message.empty()) continue;
    data.push_back(prepare(examples[i], result.model.vocab, model_config.max_seq_len));
    data.back().source = i;
  }
  if (data.empty()) throw Error("empty_input", "all training messages are empty");

  std::mt19937_64 order_rng(cfg.seed ^ 0x5eedba7c4ULL);
  std::mt19937_64 dropout_rng(cfg.seed ^ 0xd50b0a7ULL);
  ParameterSet<float> grads(model_config);
  AdamW optimizer(grads.size(), cfg);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      grads.set_zero();
      for (std::size_t b = start; b < stop; ++b) {
        const auto& ex = data[order[b]];
        const float loss = sequence_nll<float>(tagger, ex.ids, ex.gold, &dropout_rng, &grads);
        if (!std::isfinite(loss)) {
          std::ostringstream msg;
          msg << "non-finite loss at epoch " << epoch + 1 << ", example " << ex.source << " ('"
              << examples[ex.source].message.to_utf8() << "')";
          throw Error("non_finite_loss", msg.str());
        }
        epoch_loss += loss;
      }
      auto g = grads.values();
      const float inv = 1.0F / static_cast<float>(stop - start);
      for (auto& v : g) v *= inv;
      if (cfg.clip_norm) {
        double norm = 0.0;
        for (float v : g) norm += static_cast<double>(v) * v;
        norm = std::sqrt(norm);
        if (norm > *cfg.clip_norm) {
          const auto s = static_cast<float>(*cfg.clip_norm / norm);
          for (auto& v : g) v *= s;
        }
      }
      if (!all_finite(g)) throw Error("non_finite_loss", "non-finite gradient at epoch " + std::to_string(epoch + 1));
      optimizer.step(tagger.params().values(), g);
    }
    const double mean = epoch_loss / static_cast<double>(data.size());
    result.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return result;
}

double evaluate_loss(const Model& model, std::span<const TrainingExample> examples) {
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& ex : examples) {
    if (ex.message.empty()) continue;
    ++counted;
    const auto prepared = prepare(ex, model.vocab, model.config().max_seq_len);
    total += sequence_nll<float>(model.tagger, prepared.ids, prepared.gold, nullptr, nullptr);
  }
  return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

template float sequence_nll<float>(const Tagger<float>&, std::span<const std::int32_t>,
                                   const BcdSequence&, std::mt19937_64*, ParameterSet<float>*);
template double sequence_nll<double>(const Tagger<double>&, std::span<const std::int32_t>,
                                     const BcdSequence&, std::mt19937_64*, ParameterSet<double>*);

}  // namespace bcdlog
