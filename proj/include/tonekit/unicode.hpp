#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tonekit/errors.hpp"

namespace tonekit {

// Combining diacritical marks block.
inline bool is_combining_mark(char32_t cp) {
  return cp >= 0x0300 && cp <= 0x036F;
}

// Basic multilingual plane private-use area, used for unified digraphs.
inline bool is_private_use(char32_t cp) {
  return cp >= 0xE000 && cp <= 0xF8FF;
}

inline bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r';
}

// --- UTF-8 codec -----------------------------------------------------------

inline std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const auto fail = [&](const char* what) -> char32_t {
    throw encoding_error(std::string(what) + " at byte " + std::to_string(i),
                         i);
  };
  while (i < text.size()) {
    const unsigned char b0 = static_cast<unsigned char>(text[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      fail("invalid UTF-8 lead byte");
    }
    if (i + len > text.size()) fail("truncated UTF-8 sequence");
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(text[i + k]);
      if ((bk & 0xC0) != 0x80) fail("invalid UTF-8 continuation byte");
      cp = (cp << 6) | (bk & 0x3F);
    }
    static constexpr char32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (len > 1 && cp < min_for_len[len]) fail("overlong UTF-8 sequence");
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      fail("UTF-8 sequence outside Unicode scalar range");
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

// --- Canonical form --------------------------------------------------------
//
// The toolkit's canonical form keeps tone marks as separate combining code
// points (so they can be read, moved, and rewritten positionally) while
// letter-forming diacritics (the diaeresis of missionary ë/ö) stay fused
// to their base letter. Both directions are table-driven over the letter
// inventory these orthographies draw from: a e i o u plus m/n with the
// acute, grave, circumflex, caron, and macron.

namespace detail {

struct decomp_entry {
  char32_t composed;
  char32_t base;
  char32_t mark;
};

// Precomposed letter+tone-mark pairs; lowercase then uppercase.
inline constexpr std::array<decomp_entry, 58> tone_decompositions{{
    {0x00E1, U'a', 0x0301}, {0x00E0, U'a', 0x0300}, {0x00E2, U'a', 0x0302},
    {0x01CE, U'a', 0x030C}, {0x0101, U'a', 0x0304},
    {0x00E9, U'e', 0x0301}, {0x00E8, U'e', 0x0300}, {0x00EA, U'e', 0x0302},
    {0x011B, U'e', 0x030C}, {0x0113, U'e', 0x0304},
    {0x00ED, U'i', 0x0301}, {0x00EC, U'i', 0x0300}, {0x00EE, U'i', 0x0302},
    {0x01D0, U'i', 0x030C}, {0x012B, U'i', 0x0304},
    {0x00F3, U'o', 0x0301}, {0x00F2, U'o', 0x0300}, {0x00F4, U'o', 0x0302},
    {0x01D2, U'o', 0x030C}, {0x014D, U'o', 0x0304},
    {0x00FA, U'u', 0x0301}, {0x00F9, U'u', 0x0300}, {0x00FB, U'u', 0x0302},
    {0x01D4, U'u', 0x030C}, {0x016B, U'u', 0x0304},
    {0x1E3F, U'm', 0x0301},
    {0x0144, U'n', 0x0301}, {0x01F9, U'n', 0x0300}, {0x0148, U'n', 0x030C},
    {0x00C1, U'A', 0x0301}, {0x00C0, U'A', 0x0300}, {0x00C2, U'A', 0x0302},
    {0x01CD, U'A', 0x030C}, {0x0100, U'A', 0x0304},
    {0x00C9, U'E', 0x0301}, {0x00C8, U'E', 0x0300}, {0x00CA, U'E', 0x0302},
    {0x011A, U'E', 0x030C}, {0x0112, U'E', 0x0304},
    {0x00CD, U'I', 0x0301}, {0x00CC, U'I', 0x0300}, {0x00CE, U'I', 0x0302},
    {0x01CF, U'I', 0x030C}, {0x012A, U'I', 0x0304},
    {0x00D3, U'O', 0x0301}, {0x00D2, U'O', 0x0300}, {0x00D4, U'O', 0x0302},
    {0x01D1, U'O', 0x030C}, {0x014C, U'O', 0x0304},
    {0x00DA, U'U', 0x0301}, {0x00D9, U'U', 0x0300}, {0x00DB, U'U', 0x0302},
    {0x01D3, U'U', 0x030C}, {0x016A, U'U', 0x0304},
    {0x1E3E, U'M', 0x0301},
    {0x0143, U'N', 0x0301}, {0x01F8, U'N', 0x0300}, {0x0147, U'N', 0x030C},
}};

struct trema_entry {
  char32_t base;
  char32_t composed;
};

// base + U+0308 pairs that fuse into a letter of the inventory.
inline constexpr std::array<trema_entry, 10> trema_compositions{{
    {U'a', 0x00E4}, {U'e', 0x00EB}, {U'i', 0x00EF}, {U'o', 0x00F6},
    {U'u', 0x00FC},
    {U'A', 0x00C4}, {U'E', 0x00CB}, {U'I', 0x00CF}, {U'O', 0x00D6},
    {U'U', 0x00DC},
}};

inline constexpr char32_t combining_diaeresis = 0x0308;

}  // namespace detail

// Rewrites text into canonical form: precomposed tone-marked letters are
// split into base + combining mark, and base + combining diaeresis fuses
// into the single trema letter. Idempotent.
inline std::u32string canonicalize(std::u32string_view text) {
  std::u32string split;
  split.reserve(text.size() + 4);
  for (char32_t cp : text) {
    bool done = false;
    for (const auto& e : detail::tone_decompositions) {
      if (e.composed == cp) {
        split.push_back(e.base);
        split.push_back(e.mark);
        done = true;
        break;
      }
    }
    if (!done) split.push_back(cp);
  }
  std::u32string out;
  out.reserve(split.size());
  for (char32_t cp : split) {
    if (cp == detail::combining_diaeresis && !out.empty()) {
      bool fused = false;
      for (const auto& e : detail::trema_compositions) {
        if (e.base == out.back()) {
          out.back() = e.composed;
          fused = true;
          break;
        }
      }
      if (fused) continue;
    }
    out.push_back(cp);
  }
  return out;
}

inline std::u32string canonicalize_utf8(std::string_view text) {
  return canonicalize(decode_utf8(text));
}

// Inverse presentation step for output boundaries: base + tone mark pairs
// become the precomposed letter where Unicode has one (ɛ and ɔ sequences
// stay decomposed). Trema letters are already fused.
inline std::u32string compose_display(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (is_combining_mark(cp) && !out.empty()) {
      bool fused = false;
      for (const auto& e : detail::tone_decompositions) {
        if (e.base == out.back() && e.mark == cp) {
          out.back() = e.composed;
          fused = true;
          break;
        }
      }
      if (fused) continue;
    }
    out.push_back(cp);
  }
  return out;
}

// Whitespace-delimited tokens of a code point string.
inline std::vector<std::u32string> split_words(std::u32string_view text) {
  std::vector<std::u32string> words;
  std::u32string current;
  for (char32_t cp : text) {
    if (is_space(cp)) {
      if (!current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(cp);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

}  // namespace tonekit
