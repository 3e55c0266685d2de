#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/text_model.hpp"
#include "tonekit/unicode.hpp"

namespace tonekit {

// Reversible one-to-one unification of multi-character graphemes into
// private-use code points, sorted for longest-match scanning.
struct normalization_table {
  struct entry {
    std::u32string source;   // 1..4 natural code points
    char32_t replacement;    // private-use
    bool vocalic;            // replacement can bear tone
  };
  std::vector<entry> entries;  // descending source length, stable
  std::string origin_profile;

  bool empty() const { return entries.empty(); }
};

// Builds the unification table from a profile's digraph list. Replacements
// come from the profile (assigned ascending through the private-use block
// at load time, in profile order).
inline normalization_table compile_table(const orthography_profile& profile) {
  normalization_table table;
  table.origin_profile = profile.id;
  for (const auto& [source, replacement] : profile.digraphs) {
    if (source.empty() || source.size() > 4)
      throw table_conflict("digraph source must be 1..4 code points");
    if (!is_private_use(replacement))
      throw table_conflict("replacement for \"" + encode_utf8(source) +
                           "\" is not a private-use code point");
    for (const auto& e : table.entries) {
      if (e.source == source)
        throw table_conflict("duplicate source \"" + encode_utf8(source) +
                             "\"");
      if (e.replacement == replacement)
        throw table_conflict("replacement collision on \"" +
                             encode_utf8(source) + "\"");
      if (e.source.find(replacement) != std::u32string::npos ||
          source.find(e.replacement) != std::u32string::npos)
        throw table_conflict("source/replacement chaining on \"" +
                             encode_utf8(source) + "\"");
    }
    table.entries.push_back(
        {source, replacement, is_vowel_letter(source.back())});
  }
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const auto& a, const auto& b) {
                     return a.source.size() > b.source.size();
                   });
  return table;
}

// Left-to-right longest-match replacement; unmatched text passes through.
inline std::u32string normalize(std::u32string_view text,
                                const normalization_table& table) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const normalization_table::entry* hit = nullptr;
    for (const auto& e : table.entries) {
      if (e.source.size() <= text.size() - i &&
          text.compare(i, e.source.size(), e.source) == 0) {
        hit = &e;
        break;
      }
    }
    if (hit) {
      out.push_back(hit->replacement);
      i += hit->source.size();
    } else {
      out.push_back(text[i]);
      ++i;
    }
  }
  return out;
}

// Expands every private-use code point back to its source string.
inline std::u32string denormalize(std::u32string_view text,
                                  const normalization_table& table) {
  std::unordered_map<char32_t, const std::u32string*> back;
  back.reserve(table.entries.size());
  for (const auto& e : table.entries) back.emplace(e.replacement, &e.source);
  std::u32string out;
  out.reserve(text.size() * 2);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char32_t cp = text[i];
    if (is_private_use(cp)) {
      auto it = back.find(cp);
      if (it == back.end())
        throw unknown_private_char(
            "private-use code point U+" +
            std::to_string(static_cast<unsigned>(cp)) + " at position " +
            std::to_string(i) + " is not in the table of profile " +
            table.origin_profile);
      out.append(*it->second);
    } else {
      out.push_back(cp);
    }
  }
  return out;
}

}  // namespace tonekit
