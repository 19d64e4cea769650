#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace arsent::utf8 {

inline constexpr char32_t kReplacement = U'\uFFFD';

/// Decodes UTF-8; each invalid or truncated sequence becomes U+FFFD.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

/// True if `text` is well-formed UTF-8 (no overlongs, surrogates or
/// code points above U+10FFFF).
bool valid(std::string_view text);

/// Number of code points; invalid bytes count one each.
std::size_t length(std::string_view text);

bool is_space(char32_t cp);

}  // namespace arsent::utf8
