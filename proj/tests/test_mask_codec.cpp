#include <random>

#include "bcdlog/errors.hpp"
#include "bcdlog/mask_codec.hpp"
#include "bcdlog/utf8.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace bcdlog;

namespace {

ParameterMask mask(std::string_view bits) { return ParameterMask::from_string(bits); }
CharSequence seq(std::string_view s) { return CharSequence::from_utf8(s); }
BcdSequence digits(std::initializer_list<int> d) {
  BcdSequence out;
  for (int v : d) out.digits.push_back(static_cast<std::uint8_t>(v));
  return out;
}

std::vector<std::u32string> literals_of(const std::string& tmpl) {
  std::vector<std::u32string> out;
  std::size_t start = 0;
  while (true) {
    const auto hit = tmpl.find("<*>", start);
    out.push_back(utf8::decode(tmpl.substr(start, hit == std::string::npos ? std::string::npos : hit - start)));
    if (hit == std::string::npos) return out;
    start = hit + 3;
  }
}

}  // namespace

TEST_CASE("padding rounds up to a multiple of four with spaces") {
  CHECK(pad_to_multiple_of_four(seq("abcde")).to_utf8() == "abcde   ");
  CHECK(pad_to_multiple_of_four(seq("abcdefgh")).to_utf8() == "abcdefgh");
  CHECK(pad_to_multiple_of_four(seq("")).empty());
}

TEST_CASE("encode_mask groups bits most significant first") {
  CHECK(encode_mask(mask("1000")) == digits({8}));
  CHECK(encode_mask(mask("00000000")) == digits({0, 0}));
  CHECK(encode_mask(mask("11011")) == digits({13, 8}));
  CHECK(encode_mask(mask("")).digits.empty());

  ParameterMask bad;
  bad.bits = {0, 2, 1};
  CHECK_THROWS_AS(encode_mask(bad), InvalidMaskError);
  CHECK_THROWS_AS(ParameterMask::from_string("01x"), InvalidMaskError);
}

TEST_CASE("decode_bcd inverts encoding") {
  CHECK(decode_bcd(digits({13, 8}), 5) == mask("11011"));
  CHECK(decode_bcd(digits({0}), 4) == mask("0000"));
  CHECK(decode_bcd(digits({15, 15}), 8) == mask("11111111"));
  CHECK_THROWS_AS(decode_bcd(digits({16}), 4), InvalidDigitError);
  CHECK_THROWS_AS(decode_bcd(digits({1}), 5), LengthMismatchError);
}

TEST_CASE("round trip and digit bound over random masks") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    ParameterMask m;
    const auto len = std::uniform_int_distribution<std::size_t>(0, 70)(rng);
    for (std::size_t i = 0; i < len; ++i) m.bits.push_back(static_cast<std::uint8_t>(rng() & 1U));
    const auto enc = encode_mask(m);
    CHECK(enc.size() == (len + 3) / 4);
    for (auto d : enc.digits) CHECK(d <= 15);
    CHECK(decode_bcd(enc, len) == m);
  }
}

TEST_CASE("render_template collapses variable runs") {
  CHECK(render_template(seq("cpu=97"), mask("000011")).text == "cpu=<*>");
  CHECK(render_template(seq("plain text"), mask("0000000000")).text == "plain text");

  const std::string msg = "ip 10.0.0.1 port 80";
  const std::string bits = "0001111111100000011";
  CHECK(oracle::collapse_runs(msg, bits) == "ip <*> port <*>");
  CHECK(render_template(seq(msg), mask(bits)).text == oracle::collapse_runs(msg, bits));

  CHECK_THROWS_AS(render_template(seq("abc"), mask("01")), LengthMismatchError);
}

TEST_CASE("render_template agrees with the regex oracle on random masks") {
  std::mt19937_64 rng(11);
  const std::string alphabet = "ab1 :=";
  for (int trial = 0; trial < 300; ++trial) {
    const auto len = std::uniform_int_distribution<std::size_t>(0, 30)(rng);
    std::string msg;
    std::string bits;
    for (std::size_t i = 0; i < len; ++i) {
      msg.push_back(alphabet[rng() % alphabet.size()]);
      bits.push_back((rng() % 3 == 0) ? '1' : '0');
    }
    CHECK(render_template(seq(msg), mask(bits)).text == oracle::collapse_runs(msg, bits));
  }
}

TEST_CASE("rendered templates are fixed points of placeholder rendering") {
  // Treat the rendered template as a message whose own "<*>" characters are
  // the variable part: rendering it again reproduces it.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::string msg;
    std::string bits;
    for (int i = 0; i < 20; ++i) {
      msg.push_back("xy.-"[rng() % 4]);
      bits.push_back(rng() % 2 ? '1' : '0');
    }
    const std::string rendered = render_template(seq(msg), mask(bits)).text;
    std::string own(rendered.size(), '0');
    for (auto p = rendered.find("<*>"); p != std::string::npos; p = rendered.find("<*>", p + 3)) {
      own.replace(p, 3, "111");
    }
    CHECK(render_template(seq(rendered), mask(own)).text == rendered);
  }
}

TEST_CASE("derive_ground_truth_mask examples") {
  CHECK(derive_ground_truth_mask(seq("ip 10.0.0.1 port 80"), Template{"ip <*> port <*>"}) ==
        mask("0001111111100000011"));
  CHECK(derive_ground_truth_mask(seq("static line"), Template{"static line"}) == mask("00000000000"));
  CHECK(derive_ground_truth_mask(seq("anything goes"), Template{"<*>"}) == mask("1111111111111"));
  CHECK(derive_ground_truth_mask(seq(""), Template{""}).bits.empty());
}

TEST_CASE("alignment handles repeated literals by backtracking") {
  const auto m = derive_ground_truth_mask(seq("a b b c"), Template{"a<*> b c"});
  CHECK(m == mask("0110000"));
  CHECK(render_template(seq("a b b c"), m).text == "a<*> b c");

  CHECK(derive_ground_truth_mask(seq("x=1,x=2"), Template{"x=<*>,x=<*>"}) == mask("0010001"));
  CHECK(derive_ground_truth_mask(seq("ab ab ab"), Template{"ab <*> ab"}) == mask("00011000"));
  // The only non-empty placement of "ab" is taken by the anchored tail, so
  // the leading placeholder falls back to the empty match.
  const auto a = align_template(seq("abab"), Template{"<*>ab<*>"});
  CHECK(a.mask == mask("0011"));
  CHECK(a.empty_placeholders == 1);
}

TEST_CASE("empty placeholder matches are a last resort") {
  const auto a = align_template(seq("value= end"), Template{"value=<*> end"});
  CHECK(a.empty_placeholders == 1);
  CHECK(a.mask == mask("0000000000"));

  const auto b = align_template(seq("value=3 end"), Template{"value=<*> end"});
  CHECK(b.empty_placeholders == 0);
}

TEST_CASE("adjacent placeholders in annotations are collapsed") {
  CHECK(collapse_placeholders("a<*><*>b<*>").text == "a<*>b<*>");
  CHECK(derive_ground_truth_mask(seq("a12b"), Template{"a<*><*>b"}) == mask("0110"));
}

TEST_CASE("unalignable pairs raise AlignmentError with context") {
  try {
    derive_ground_truth_mask(seq("shutdown complete"), Template{"startup <*>"});
    FAIL("expected an alignment failure");
  } catch (const AlignmentError& e) {
    CHECK(e.message() == "shutdown complete");
    CHECK(e.template_text() == "startup <*>");
    CHECK(e.code() == "alignment_failure");
  }
  CHECK_THROWS_AS(derive_ground_truth_mask(seq("abc"), Template{"abcd"}), AlignmentError);
  CHECK_THROWS_AS(derive_ground_truth_mask(seq("ab"), Template{"ab<*>b"}), AlignmentError);
}

TEST_CASE("alignment matches the brute-force enumerator") {
  std::mt19937_64 rng(2024);
  const std::string alphabet = "ab ";
  int alignable = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::string msg;
    const auto len = std::uniform_int_distribution<int>(0, 9)(rng);
    for (int i = 0; i < len; ++i) msg.push_back(alphabet[rng() % alphabet.size()]);
    std::string tmpl;
    const auto tlen = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int i = 0; i < tlen; ++i) {
      if (rng() % 3 == 0) {
        if (!tmpl.ends_with("<*>")) tmpl += "<*>";
      } else {
        tmpl.push_back(alphabet[rng() % alphabet.size()]);
      }
    }
    const auto expected = oracle::expected_mask(utf8::decode(msg), literals_of(tmpl));
    if (expected) {
      ++alignable;
      const auto a = align_template(seq(msg), Template{tmpl});
      CHECK_MESSAGE(a.mask.to_string() == *expected, "msg='" << msg << "' tmpl='" << tmpl << "'");
      if (a.empty_placeholders == 0) CHECK(render_template(seq(msg), a.mask).text == tmpl);
    } else {
      CHECK_THROWS_AS(align_template(seq(msg), Template{tmpl}), AlignmentError);
    }
  }
  CHECK(alignable > 200);
}

TEST_CASE("code points, not bytes, occupy mask slots") {
  const auto s = seq("naïve ✓");
  CHECK(s.size() == 7);
  const auto m = derive_ground_truth_mask(s, Template{"na<*> ✓"});
  CHECK(m == mask("0011100"));
  CHECK(render_template(s, m).text == "na<*> ✓");
}

TEST_CASE("invalid UTF-8 survives a decode/encode round trip") {
  const std::string raw = std::string("ok\xff\xfe") + "\xc3" + "x\xe2\x82";
  const auto s = seq(raw);
  // Each undecodable byte becomes its own escape unit.
  CHECK(s.size() == 8);
  CHECK(s.to_utf8() == raw);
}
