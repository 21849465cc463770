#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bcdlog {

inline constexpr std::string_view kPlaceholder = "<*>";
inline constexpr char32_t kPadChar = U' ';
inline constexpr std::size_t kGroupWidth = 4;

// A log message as code points. One code point occupies one mask slot.
class CharSequence {
 public:
  CharSequence() = default;
  explicit CharSequence(std::u32string code_points) : cps_(std::move(code_points)) {}

  static CharSequence from_utf8(std::string_view text);
  std::string to_utf8() const;

  std::size_t size() const noexcept { return cps_.size(); }
  bool empty() const noexcept { return cps_.empty(); }
  char32_t operator[](std::size_t i) const { return cps_[i]; }
  const std::u32string& code_points() const noexcept { return cps_; }
  auto begin() const noexcept { return cps_.begin(); }
  auto end() const noexcept { return cps_.end(); }

  friend bool operator==(const CharSequence&, const CharSequence&) = default;

 private:
  std::u32string cps_;
};

// Per-character labels: 1 = variable, 0 = static.
struct ParameterMask {
  std::vector<std::uint8_t> bits;

  std::size_t size() const noexcept { return bits.size(); }

  // Fixture serialization: one '0'/'1' character per code point.
  static ParameterMask from_string(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const ParameterMask&, const ParameterMask&) = default;
};

// One label in [0, 15] per group of four mask bits, most significant bit first.
struct BcdSequence {
  std::vector<std::uint8_t> digits;

  std::size_t size() const noexcept { return digits.size(); }

  friend bool operator==(const BcdSequence&, const BcdSequence&) = default;
};

struct Template {
  std::string text;

  friend bool operator==(const Template&, const Template&) = default;
  friend auto operator<=>(const Template&, const Template&) = default;
};

// Right-pads with spaces to the next multiple of four.
CharSequence pad_to_multiple_of_four(const CharSequence& seq);

BcdSequence encode_mask(const ParameterMask& mask);

// Inverse of encode_mask, truncated to `original_length` bits.
ParameterMask decode_bcd(const BcdSequence& digits, std::size_t original_length);

// Copies static characters and replaces each maximal run of variable
// characters with a single placeholder.
Template render_template(const CharSequence& seq, const ParameterMask& mask);

// Merges adjacent placeholders ("<*><*>" -> "<*>").
Template collapse_placeholders(std::string_view template_text);

struct Alignment {
  ParameterMask mask;
  // Placeholders that could only be matched by the empty string; these do
  // not survive a render_template round trip.
  std::size_t empty_placeholders = 0;
};

// Lays the literal segments of `tmpl` over `message`, anchored at both ends.
// Placeholders are lazy: each literal is placed at its leftmost feasible
// position, with backtracking. Non-empty placeholder matches are preferred;
// empty matches are only admitted when no non-empty assignment exists.
// Throws AlignmentError when no assignment exists.
Alignment align_template(const CharSequence& message, const Template& tmpl);

ParameterMask derive_ground_truth_mask(const CharSequence& message, const Template& tmpl);

}  // namespace bcdlog
