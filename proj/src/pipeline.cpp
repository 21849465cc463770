#include "bcdlog/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "bcdlog/errors.hpp"

namespace bcdlog {

ParameterMask ModelPredictor::predict(const CharSequence& message) const {
  auto result = predict_mask(model_, message);
  if (result.truncated) truncated_.fetch_add(1);
  return std::move(result.mask);
}

ParseResult LogParser::parse(std::string_view message) {
  ++stats_.lines;
  if (use_cache_) {
    if (auto hit = cache_.lookup(message)) {
      ++stats_.cache_hits;
      if (hit->matching_candidates > 1) ++stats_.ambiguous_hits;
      return ParseResult{std::move(hit->tmpl), std::move(hit->mask), true};
    }
  }
  const CharSequence seq = CharSequence::from_utf8(message);
  ParseResult out;
  out.mask = predictor_.predict(seq);
  ++stats_.model_calls;
  out.tmpl = render_template(seq, out.mask);
  if (use_cache_ && cache_.insert(out.tmpl)) ++stats_.inserted_templates;
  return out;
}

std::vector<ParseResult> parse_messages(const MaskPredictor& predictor,
                                        std::span<const std::string> messages, bool use_cache,
                                        std::size_t threads, ParseStats* stats) {
  std::vector<ParseResult> results(messages.size());
  if (use_cache || threads <= 1 || messages.size() < 2) {
    LogParser parser(predictor, use_cache);
    for (std::size_t i = 0; i < messages.size(); ++i) results[i] = parser.parse(messages[i]);
    if (stats != nullptr) *stats = parser.stats();
    return results;
  }

  const std::size_t workers = std::min(threads, messages.size());
  const std::size_t chunk = (messages.size() + workers - 1) / workers;
  std::vector<ParseStats> partial(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        LogParser parser(predictor, false);
        const std::size_t end = std::min(messages.size(), (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) results[i] = parser.parse(messages[i]);
        partial[w] = parser.stats();
      });
    }
  }
  if (stats != nullptr) {
    *stats = ParseStats{};
    for (const auto& s : partial) {
      stats->lines += s.lines;
      stats->model_calls += s.model_calls;
    }
  }
  return results;
}

BenchReport run_benchmark(const MaskPredictor& predictor, std::span<const std::string> messages,
                          const BenchOptions& options) {
  if (messages.empty()) throw Error("empty_input", "benchmark corpus is empty");
  using clock = std::chrono::steady_clock;

  const std::size_t warm = std::min(options.warmup_lines, messages.size());
  parse_messages(predictor, messages.first(warm), false, 1);

  BenchReport report;
  report.lines = messages.size();
  auto time_mode = [&](bool use_cache, ParseStats& stats) {
    double best = 0.0;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, options.repeats); ++r) {
      const auto start = clock::now();
      parse_messages(predictor, messages, use_cache, options.threads, &stats);
      const double secs = std::chrono::duration<double>(clock::now() - start).count();
      if (r == 0 || secs < best) best = secs;
    }
    BenchModeResult m;
    m.seconds = best;
    m.lines_per_second = best > 0.0 ? static_cast<double>(messages.size()) / best : 0.0;
    return m;
  };
  ParseStats cacheless_stats;
  ParseStats cached_stats;
  report.cacheless = time_mode(false, cacheless_stats);
  report.cached = time_mode(true, cached_stats);
  report.hit_rate = cached_stats.hit_rate();
  report.cached_templates = cached_stats.inserted_templates;
  return report;
}

}  // namespace bcdlog
