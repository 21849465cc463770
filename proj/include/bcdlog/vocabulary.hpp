#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "bcdlog/mask_codec.hpp"

namespace bcdlog {

// Character-to-row mapping for the embedding table. Id 0 is whitespace (also
// the padding character) and id 1 is reserved for unknown characters; the
// remaining ids go to the most frequent code points of the training corpus.
class Vocabulary {
 public:
  static constexpr std::size_t kSize = 100;
  static constexpr std::int32_t kPadId = 0;
  static constexpr std::int32_t kUnkId = 1;

  Vocabulary();

  // Throws bcdlog::Error("empty_input") on an empty corpus. Ties in frequency
  // are broken by ascending code point.
  static Vocabulary build(std::span<const CharSequence> corpus);

  // Rebuilds a vocabulary from the code points of ids 2.. in order.
  static Vocabulary from_symbols(std::vector<char32_t> symbols);

  std::int32_t id(char32_t cp) const;
  std::vector<std::int32_t> encode(const CharSequence& seq) const;

  bool contains(char32_t cp) const { return cp == kPadChar || index_.contains(cp); }
  // Number of ids in use, including PAD and UNK.
  std::size_t used() const noexcept { return symbols_.size() + 2; }
  // Code points for ids 2, 3, ... in id order.
  const std::vector<char32_t>& symbols() const noexcept { return symbols_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::vector<char32_t> symbols_;
  std::unordered_map<char32_t, std::int32_t> index_;
};

}  // namespace bcdlog
