#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bcdlog/cache.hpp"
#include "bcdlog/mask_codec.hpp"
#include "bcdlog/model.hpp"

namespace bcdlog {

// Anything that labels a message character by character. Implementations
// must be safe to call concurrently.
class MaskPredictor {
 public:
  virtual ~MaskPredictor() = default;
  virtual ParameterMask predict(const CharSequence& message) const = 0;
};

class ModelPredictor final : public MaskPredictor {
 public:
  explicit ModelPredictor(const Model& model) : model_(model) {}

  ParameterMask predict(const CharSequence& message) const override;

  // Messages that exceeded max_seq_len so far.
  std::size_t truncated() const noexcept { return truncated_.load(); }

 private:
  const Model& model_;
  mutable std::atomic<std::size_t> truncated_{0};
};

struct ParseResult {
  Template tmpl;
  ParameterMask mask;
  bool cache_hit = false;
};

struct ParseStats {
  std::size_t lines = 0;
  std::size_t cache_hits = 0;
  std::size_t model_calls = 0;
  std::size_t ambiguous_hits = 0;
  std::size_t inserted_templates = 0;

  double hit_rate() const noexcept {
    return lines == 0 ? 0.0 : static_cast<double>(cache_hits) / static_cast<double>(lines);
  }
};

// The full inference loop for one stream: cache lookup, and on a miss the
// predictor followed by template rendering and cache insertion. With the
// cache disabled every line goes to the predictor.
class LogParser {
 public:
  LogParser(const MaskPredictor& predictor, bool use_cache)
      : predictor_(predictor), use_cache_(use_cache) {}

  ParseResult parse(std::string_view message);

  const ParseStats& stats() const noexcept { return stats_; }
  const ParseCache& cache() const noexcept { return cache_; }
  void warm_start(ParseCache cache) { cache_ = std::move(cache); }

 private:
  const MaskPredictor& predictor_;
  bool use_cache_;
  ParseCache cache_;
  ParseStats stats_;
};

// Parses a batch. Cached parsing is sequential (the cache has a single
// writer); cacheless parsing fans out over `threads` workers with a static
// partition, so the output never depends on the thread count.
std::vector<ParseResult> parse_messages(const MaskPredictor& predictor,
                                        std::span<const std::string> messages, bool use_cache,
                                        std::size_t threads = 1, ParseStats* stats = nullptr);

struct BenchOptions {
  std::size_t warmup_lines = 32;
  std::size_t repeats = 1;  // best of n per mode
  std::size_t threads = 1;
};

struct BenchModeResult {
  double seconds = 0.0;
  double lines_per_second = 0.0;
};

struct BenchReport {
  std::size_t lines = 0;
  BenchModeResult cacheless;
  BenchModeResult cached;
  double hit_rate = 0.0;
  std::size_t cached_templates = 0;

  double speedup() const noexcept {
    return cacheless.lines_per_second == 0.0 ? 0.0
                                             : cached.lines_per_second / cacheless.lines_per_second;
  }
};

// Wall-clock throughput of the parse loop only. Throws
// bcdlog::Error("empty_input") on an empty corpus.
BenchReport run_benchmark(const MaskPredictor& predictor, std::span<const std::string> messages,
                          const BenchOptions& options = {});

}  // namespace bcdlog
