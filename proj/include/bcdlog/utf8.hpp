#pragma once

#include <string>
#include <string_view>

namespace bcdlog::utf8 {

// Decodes UTF-8 into code points. Bytes that are not part of a well-formed
// sequence are mapped to U+DC80..U+DCFF (one code point per byte) so that
// encode(decode(s)) == s for arbitrary input.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view code_points);

}  // namespace bcdlog::utf8
