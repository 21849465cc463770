#include "bcdlog/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "bcdlog/errors.hpp"

namespace bcdlog {

Vocabulary::Vocabulary() = default;

Vocabulary Vocabulary::build(std::span<const CharSequence> corpus) {
  if (corpus.empty()) throw Error("empty_input", "cannot build a vocabulary from an empty corpus");
  std::map<char32_t, std::size_t> counts;
  for (const auto& seq : corpus) {
    for (char32_t cp : seq) {
      if (cp != kPadChar) ++counts[cp];
    }
  }
  std::vector<std::pair<char32_t, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<char32_t> symbols;
  for (const auto& [cp, count] : ranked) {
    if (symbols.size() == kSize - 2) break;
    symbols.push_back(cp);
  }
  return from_symbols(std::move(symbols));
}

Vocabulary Vocabulary::from_symbols(std::vector<char32_t> symbols) {
  if (symbols.size() > kSize - 2) {
    throw Error("invalid_vocabulary", "vocabulary holds at most 98 symbols");
  }
  Vocabulary v;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const char32_t cp = symbols[i];
    if (cp == kPadChar || v.index_.contains(cp)) {
      throw Error("invalid_vocabulary", "duplicate or reserved symbol in vocabulary");
    }
    v.index_.emplace(cp, static_cast<std::int32_t>(i + 2));
  }
  v.symbols_ = std::move(symbols);
  return v;
}

std::int32_t Vocabulary::id(char32_t cp) const {
  if (cp == kPadChar) return kPadId;
  const auto it = index_.find(cp);
  return it == index_.end() ? kUnkId : it->second;
}

std::vector<std::int32_t> Vocabulary::encode(const CharSequence& seq) const {
  std::vector<std::int32_t> ids;
  ids.reserve(seq.size());
  for (char32_t cp : seq) ids.push_back(id(cp));
  return ids;
}

}  // namespace bcdlog
