#include "bcdlog/mask_codec.hpp"

#include <string>

#include "bcdlog/errors.hpp"
#include "bcdlog/utf8.hpp"

namespace bcdlog {

CharSequence CharSequence::from_utf8(std::string_view text) {
  return CharSequence(utf8::decode(text));
}

std::string CharSequence::to_utf8() const { return utf8::encode(cps_); }

ParameterMask ParameterMask::from_string(std::string_view text) {
  ParameterMask mask;
  mask.bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw InvalidMaskError(std::string("mask string contains '") + c + "'");
    }
    mask.bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return mask;
}

std::string ParameterMask::to_string() const {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits) out.push_back(static_cast<char>('0' + b));
  return out;
}

CharSequence pad_to_multiple_of_four(const CharSequence& seq) {
  std::u32string cps = seq.code_points();
  const std::size_t rem = cps.size() % kGroupWidth;
  if (rem != 0) cps.append(kGroupWidth - rem, kPadChar);
  return CharSequence(std::move(cps));
}

BcdSequence encode_mask(const ParameterMask& mask) {
  const std::size_t n = mask.size();
  BcdSequence out;
  out.digits.assign((n + kGroupWidth - 1) / kGroupWidth, 0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto bit = mask.bits[j];
    if (bit > 1) {
      throw InvalidMaskError("mask element " + std::to_string(j) + " has value " +
                             std::to_string(bit));
    }
    const std::size_t shift = kGroupWidth - 1 - j % kGroupWidth;
    out.digits[j / kGroupWidth] |= static_cast<std::uint8_t>(bit << shift);
  }
  return out;
}

ParameterMask decode_bcd(const BcdSequence& digits, std::size_t original_length) {
  if (original_length > kGroupWidth * digits.size()) {
    throw LengthMismatchError("cannot decode " + std::to_string(original_length) + " bits from " +
                              std::to_string(digits.size()) + " digits");
  }
  ParameterMask mask;
  mask.bits.resize(original_length);
  for (std::size_t n = 0; n < digits.size(); ++n) {
    const auto d = digits.digits[n];
    if (d > 15) throw InvalidDigitError("digit " + std::to_string(d) + " outside [0,15]");
    for (std::size_t k = 0; k < kGroupWidth; ++k) {
      const std::size_t j = n * kGroupWidth + k;
      if (j >= original_length) break;
      mask.bits[j] = (d >> (kGroupWidth - 1 - k)) & 1U;
    }
  }
  return mask;
}

Template render_template(const CharSequence& seq, const ParameterMask& mask) {
  if (seq.size() != mask.size()) {
    throw LengthMismatchError("mask length " + std::to_string(mask.size()) +
                              " != message length " + std::to_string(seq.size()));
  }
  std::u32string literal;
  std::string out;
  bool in_run = false;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    if (mask.bits[j] > 1) throw InvalidMaskError("mask element outside {0,1}");
    if (mask.bits[j] == 1) {
      if (!in_run) {
        out += utf8::encode(literal);
        literal.clear();
        out += kPlaceholder;
        in_run = true;
      }
    } else {
      literal.push_back(seq[j]);
      in_run = false;
    }
  }
  out += utf8::encode(literal);
  return Template{std::move(out)};
}

Template collapse_placeholders(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.substr(i, kPlaceholder.size()) == kPlaceholder) {
      out += kPlaceholder;
      i += kPlaceholder.size();
      while (text.substr(i, kPlaceholder.size()) == kPlaceholder) i += kPlaceholder.size();
    } else {
      out.push_back(text[i++]);
    }
  }
  return Template{std::move(out)};
}

namespace {

std::vector<std::u32string> split_literals(const Template& tmpl) {
  const std::u32string text = utf8::decode(collapse_placeholders(tmpl.text).text);
  const std::u32string ph = utf8::decode(kPlaceholder);
  std::vector<std::u32string> literals;
  std::size_t start = 0;
  while (true) {
    const std::size_t hit = text.find(ph, start);
    if (hit == std::u32string::npos) {
      literals.push_back(text.substr(start));
      return literals;
    }
    literals.push_back(text.substr(start, hit - start));
    start = hit + ph.size();
  }
}

class Aligner {
 public:
  Aligner(const std::u32string& msg, const std::vector<std::u32string>& literals,
          std::size_t min_len)
      : msg_(msg),
        lits_(literals),
        min_len_(min_len),
        starts_(literals.size(), 0),
        dead_(literals.size() * (msg.size() + 1), 0) {}

  // Places literal i onward, given that the previous literal ended at `pos`.
  bool place(std::size_t i, std::size_t pos) {
    const std::size_t n = msg_.size();
    const std::size_t last = lits_.size() - 1;
    if (i == last) {
      if (lits_[last].size() > n) return false;
      const std::size_t s = n - lits_[last].size();
      if (s < pos + min_len_) return false;
      if (msg_.compare(s, lits_[last].size(), lits_[last]) != 0) return false;
      starts_[i] = s;
      return true;
    }
    char& dead = dead_[i * (n + 1) + pos];
    if (dead) return false;
    const std::size_t tail = lits_[last].size();
    for (std::size_t s = msg_.find(lits_[i], pos + min_len_); s != std::u32string::npos;
         s = msg_.find(lits_[i], s + 1)) {
      // Remaining literals and placeholders need room before the anchored tail.
      if (s + lits_[i].size() + min_len_ + tail > n) break;
      starts_[i] = s;
      if (place(i + 1, s + lits_[i].size())) return true;
    }
    dead = 1;
    return false;
  }

  const std::vector<std::size_t>& starts() const { return starts_; }

 private:
  const std::u32string& msg_;
  const std::vector<std::u32string>& lits_;
  std::size_t min_len_;
  std::vector<std::size_t> starts_;
  std::vector<char> dead_;
};

}  // namespace

Alignment align_template(const CharSequence& message, const Template& tmpl) {
  const auto literals = split_literals(tmpl);
  const std::u32string& msg = message.code_points();
  Alignment result;

  if (literals.size() == 1) {
    if (msg != literals[0]) throw AlignmentError(message.to_utf8(), tmpl.text);
    result.mask.bits.assign(msg.size(), 0);
    return result;
  }
  if (msg.compare(0, literals[0].size(), literals[0]) != 0 || msg.size() < literals[0].size()) {
    throw AlignmentError(message.to_utf8(), tmpl.text);
  }

  for (std::size_t min_len : {std::size_t{1}, std::size_t{0}}) {
    Aligner aligner(msg, literals, min_len);
    if (!aligner.place(1, literals[0].size())) continue;

    const auto& starts = aligner.starts();
    result.mask.bits.assign(msg.size(), 1);
    for (std::size_t i = 0; i < literals.size(); ++i) {
      for (std::size_t j = 0; j < literals[i].size(); ++j) result.mask.bits[starts[i] + j] = 0;
    }
    std::size_t prev_end = literals[0].size();
    for (std::size_t i = 1; i < literals.size(); ++i) {
      if (starts[i] == prev_end) ++result.empty_placeholders;
      prev_end = starts[i] + literals[i].size();
    }
    return result;
  }
  throw AlignmentError(message.to_utf8(), tmpl.text);
}

ParameterMask derive_ground_truth_mask(const CharSequence& message, const Template& tmpl) {
  return align_template(message, tmpl).mask;
}

}  // namespace bcdlog
