#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tonekit/errors.hpp"
#include "tonekit/unicode.hpp"

namespace tonekit {

// The four lexical tones: two registers and two contours.
enum class tone_mark : std::uint8_t { low, high, rising, falling };

inline constexpr std::array<tone_mark, 4> all_tones = {
    tone_mark::low, tone_mark::high, tone_mark::rising, tone_mark::falling};

inline const char* tone_name(tone_mark t) {
  switch (t) {
    case tone_mark::low: return "low";
    case tone_mark::high: return "high";
    case tone_mark::rising: return "rising";
    case tone_mark::falling: return "falling";
  }
  return "?";
}

inline std::optional<tone_mark> tone_from_name(std::string_view name) {
  for (tone_mark t : all_tones)
    if (name == tone_name(t)) return t;
  return std::nullopt;
}

// Letter classes. The vowel inventory is the 7 official letters plus the
// trema variants missionary spellings use; nasals can be syllabic and then
// bear tone.
inline bool is_vowel_letter(char32_t cp) {
  switch (cp) {
    case U'a': case U'e': case U'i': case U'o': case U'u':
    case 0x025B: case 0x0254:              // ɛ ɔ
    case U'A': case U'E': case U'I': case U'O': case U'U':
    case 0x0190: case 0x0186:              // Ɛ Ɔ
    case 0x00E4: case 0x00EB: case 0x00EF: case 0x00F6: case 0x00FC:  // ä ë ï ö ü
    case 0x00C4: case 0x00CB: case 0x00CF: case 0x00D6: case 0x00DC:
      return true;
    default:
      return false;
  }
}

inline bool is_nasal_letter(char32_t cp) {
  switch (cp) {
    case U'm': case U'n': case 0x014B:     // ŋ
    case U'M': case U'N': case 0x014A:     // Ŋ
      return true;
    default:
      return false;
  }
}

// The seven vowel letters every profile alphabet must contain.
inline constexpr std::array<char32_t, 7> required_vowels = {
    U'i', U'e', 0x025B, U'u', U'o', 0x0254, U'a'};

// --- Orthography profile ----------------------------------------------------

// One spelling system: its base letters, digraph unification table, and
// tone-diacritic conventions.
struct orthography_profile {
  std::string id;
  std::vector<char32_t> alphabet;  // ordered, unique base letters
  // source digraph -> private-use replacement, in declaration order
  std::vector<std::pair<std::u32string, char32_t>> digraphs;
  std::map<tone_mark, char32_t> tone_diacritics;  // marked tones only
  std::optional<tone_mark> unmarked_tone;         // declared "unmarked" entry
  bool allow_unmarked_low = false;

  bool in_alphabet(char32_t cp) const {
    return std::find(alphabet.begin(), alphabet.end(), cp) != alphabet.end();
  }

  std::optional<tone_mark> tone_for_mark(char32_t mark) const {
    for (const auto& [tone, cp] : tone_diacritics)
      if (cp == mark) return tone;
    return std::nullopt;
  }

  std::optional<char32_t> mark_for_tone(tone_mark t) const {
    auto it = tone_diacritics.find(t);
    if (it == tone_diacritics.end()) return std::nullopt;
    return it->second;
  }

  // A unified digraph inherits tone-bearing status from the final letter
  // of its source (covers long-vowel digraphs).
  bool private_char_is_vocalic(char32_t cp) const {
    for (const auto& [source, replacement] : digraphs)
      if (replacement == cp) return is_vowel_letter(source.back());
    return false;
  }

  bool can_bear_tone(char32_t cp) const {
    return is_vowel_letter(cp) || is_nasal_letter(cp) ||
           private_char_is_vocalic(cp);
  }
};

namespace detail {

inline char32_t single_code_point(const std::string& utf8,
                                  const std::string& path) {
  std::u32string cps;
  try {
    cps = decode_utf8(utf8);
  } catch (const encoding_error& e) {
    throw profile_error(path + ": " + e.what());
  }
  if (cps.size() != 1)
    throw profile_error(path + ": expected a single code point, got \"" +
                        utf8 + "\"");
  return cps[0];
}

}  // namespace detail

// Parses and validates a profile document, reporting the first violation
// with its JSON path.
inline orthography_profile profile_from_json(const nlohmann::json& doc) {
  using nlohmann::json;
  orthography_profile p;
  if (!doc.is_object()) throw profile_error("$: profile must be an object");
  for (const char* key : {"id", "alphabet", "digraphs", "tone_diacritics",
                          "allow_unmarked_low"})
    if (!doc.contains(key))
      throw profile_error(std::string(key) + ": missing required field");

  if (!doc["id"].is_string() || doc["id"].get<std::string>().empty())
    throw profile_error("id: must be a non-empty string");
  p.id = doc["id"].get<std::string>();

  if (!doc["alphabet"].is_array())
    throw profile_error("alphabet: must be an array");
  for (std::size_t i = 0; i < doc["alphabet"].size(); ++i) {
    const auto& item = doc["alphabet"][i];
    const std::string path = "alphabet[" + std::to_string(i) + "]";
    if (!item.is_string()) throw profile_error(path + ": must be a string");
    char32_t cp = detail::single_code_point(item.get<std::string>(), path);
    if (is_combining_mark(cp))
      throw profile_error(path + ": combining mark cannot be a base letter");
    if (p.in_alphabet(cp))
      throw profile_error(path + ": duplicate letter \"" +
                          item.get<std::string>() + "\"");
    p.alphabet.push_back(cp);
  }
  for (char32_t v : required_vowels)
    if (!p.in_alphabet(v))
      throw profile_error("alphabet: missing required vowel \"" +
                          encode_utf8(std::u32string(1, v)) + "\"");

  if (!doc["digraphs"].is_array())
    throw profile_error("digraphs: must be an array");
  char32_t next_auto = 0xE000;
  std::vector<char32_t> explicit_replacements;
  for (std::size_t i = 0; i < doc["digraphs"].size(); ++i) {
    const auto& item = doc["digraphs"][i];
    const std::string path = "digraphs[" + std::to_string(i) + "]";
    if (!item.is_array() || item.size() != 2 || !item[0].is_string() ||
        !item[1].is_string())
      throw profile_error(path + ": must be a 2-element array of strings");
    std::u32string source;
    try {
      source = canonicalize_utf8(item[0].get<std::string>());
    } catch (const encoding_error& e) {
      throw profile_error(path + "[0]: " + e.what());
    }
    if (source.size() < 2 || source.size() > 4)
      throw profile_error(path + "[0]: digraph source must be 2..4 code points");
    for (char32_t cp : source)
      if (is_combining_mark(cp) || is_private_use(cp))
        throw profile_error(path +
                            "[0]: digraph source must be plain base letters");
    const std::string repl_utf8 = item[1].get<std::string>();
    if (!repl_utf8.empty()) {
      char32_t cp =
          detail::single_code_point(repl_utf8, path + "[1]");
      if (!is_private_use(cp))
        throw profile_error(path + "[1]: replacement must be private-use");
      explicit_replacements.push_back(cp);
      p.digraphs.emplace_back(std::move(source), cp);
    } else {
      p.digraphs.emplace_back(std::move(source), char32_t(0));  // assign below
    }
  }
  // Auto-assign ascending private-use code points, in profile order,
  // skipping explicitly claimed ones.
  for (auto& [source, replacement] : p.digraphs) {
    if (replacement != 0) continue;
    while (std::find(explicit_replacements.begin(),
                     explicit_replacements.end(),
                     next_auto) != explicit_replacements.end())
      ++next_auto;
    replacement = next_auto++;
  }
  for (std::size_t i = 0; i < p.digraphs.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (p.digraphs[i].first == p.digraphs[j].first)
        throw profile_error("digraphs[" + std::to_string(i) +
                            "]: duplicate source");
      if (p.digraphs[i].second == p.digraphs[j].second)
        throw profile_error("digraphs[" + std::to_string(i) +
                            "]: replacement collision");
    }
  }
  // Longest-match ordering: a source must not precede a longer source it
  // prefixes.
  for (std::size_t i = 0; i < p.digraphs.size(); ++i)
    for (std::size_t j = i + 1; j < p.digraphs.size(); ++j) {
      const auto& a = p.digraphs[i].first;
      const auto& b = p.digraphs[j].first;
      if (b.size() > a.size() && b.compare(0, a.size(), a) == 0)
        throw profile_error("digraphs[" + std::to_string(j) +
                            "]: longer source prefixed by earlier entry; "
                            "list longer digraphs first");
    }

  if (!doc["tone_diacritics"].is_object())
    throw profile_error("tone_diacritics: must be an object");
  for (const auto& [key, value] : doc["tone_diacritics"].items()) {
    const std::string path = "tone_diacritics." + key;
    auto tone = tone_from_name(key);
    if (!tone)
      throw profile_error(path + ": unknown tone (expected low, high, "
                          "rising, or falling)");
    if (!value.is_string()) throw profile_error(path + ": must be a string");
    const std::string text = value.get<std::string>();
    if (text == "unmarked") {
      if (p.unmarked_tone)
        throw profile_error(path + ": at most one tone may be unmarked");
      p.unmarked_tone = *tone;
      continue;
    }
    char32_t mark = detail::single_code_point(text, path);
    if (!is_combining_mark(mark))
      throw profile_error(path + ": diacritic must be a combining mark "
                          "(U+0300..U+036F)");
    for (const auto& [other, cp] : p.tone_diacritics)
      if (cp == mark)
        throw profile_error(path + ": diacritic already assigned to " +
                            tone_name(other));
    p.tone_diacritics.emplace(*tone, mark);
  }

  if (!doc["allow_unmarked_low"].is_boolean())
    throw profile_error("allow_unmarked_low: must be a boolean");
  p.allow_unmarked_low = doc["allow_unmarked_low"].get<bool>();
  if (p.allow_unmarked_low) {
    if (p.tone_diacritics.count(tone_mark::low))
      throw profile_error("allow_unmarked_low: conflicts with an explicit "
                          "low diacritic");
    if (p.unmarked_tone && *p.unmarked_tone != tone_mark::low)
      throw profile_error("allow_unmarked_low: conflicts with tone_diacritics "
                          "declaring another tone unmarked");
    p.unmarked_tone = tone_mark::low;
  }
  return p;
}

inline nlohmann::json profile_to_json(const orthography_profile& p) {
  nlohmann::json doc;
  doc["id"] = p.id;
  auto alphabet = nlohmann::json::array();
  for (char32_t cp : p.alphabet)
    alphabet.push_back(encode_utf8(std::u32string(1, cp)));
  doc["alphabet"] = std::move(alphabet);
  auto digraphs = nlohmann::json::array();
  for (const auto& [source, replacement] : p.digraphs)
    digraphs.push_back({encode_utf8(source),
                        encode_utf8(std::u32string(1, replacement))});
  doc["digraphs"] = std::move(digraphs);
  auto tones = nlohmann::json::object();
  for (const auto& [tone, mark] : p.tone_diacritics)
    tones[tone_name(tone)] = encode_utf8(std::u32string(1, mark));
  if (p.unmarked_tone) tones[tone_name(*p.unmarked_tone)] = "unmarked";
  doc["tone_diacritics"] = std::move(tones);
  doc["allow_unmarked_low"] = p.allow_unmarked_low;
  return doc;
}

inline orthography_profile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open profile file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
  try {
    return profile_from_json(doc);
  } catch (const profile_error& e) {
    throw profile_error(path + ": " + e.what());
  }
}

// --- Toned text -------------------------------------------------------------

// Tone-annotated text: marks are lifted off the character stream into
// (nucleus index, tone) pairs over the bare base string.
struct toned_text {
  std::u32string base;  // no combining marks
  std::vector<std::pair<std::size_t, tone_mark>> tones;  // strictly increasing

  bool operator==(const toned_text&) const = default;
};

// Lifts combining tone marks off canonically decomposed text.
//
// A vowel is always a nucleus; a nasal counts as one exactly when it
// carries a mark. Unmarked vowels receive low tone when the profile says
// low is unmarked.
inline toned_text parse_tones(std::u32string_view text,
                              const orthography_profile& profile) {
  toned_text result;
  result.base.reserve(text.size());
  std::vector<std::optional<tone_mark>> tone_at;
  tone_at.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    const char32_t cp = text[pos];
    if (!is_combining_mark(cp)) {
      result.base.push_back(cp);
      tone_at.emplace_back();
      continue;
    }
    auto tone = profile.tone_for_mark(cp);
    if (!tone)
      throw unknown_diacritic("combining mark U+" +
                              std::to_string(static_cast<unsigned>(cp)) +
                              " at position " + std::to_string(pos) +
                              " is not a tone diacritic of profile " +
                              profile.id);
    if (result.base.empty())
      throw mark_on_non_nucleus("tone mark at position " +
                                std::to_string(pos) +
                                " has no base grapheme");
    const std::size_t idx = result.base.size() - 1;
    if (!profile.can_bear_tone(result.base[idx]))
      throw mark_on_non_nucleus(
          "tone mark at position " + std::to_string(pos) +
          " attached to non-nucleus grapheme \"" +
          encode_utf8(std::u32string(1, result.base[idx])) + "\"");
    if (tone_at[idx])
      throw conflicting_diacritics("two tone marks on the nucleus at base "
                                   "index " + std::to_string(idx));
    tone_at[idx] = *tone;
  }
  for (std::size_t i = 0; i < result.base.size(); ++i) {
    if (tone_at[i]) {
      result.tones.emplace_back(i, *tone_at[i]);
    } else if (profile.allow_unmarked_low &&
               (is_vowel_letter(result.base[i]) ||
                profile.private_char_is_vocalic(result.base[i]))) {
      result.tones.emplace_back(i, tone_mark::low);
    }
  }
  return result;
}

// Inverse of parse_tones: re-attaches tone marks per the profile's
// conventions, producing canonically decomposed text.
inline std::u32string render_tones(const toned_text& t,
                                   const orthography_profile& profile) {
  std::size_t last = 0;
  bool first = true;
  for (const auto& [idx, tone] : t.tones) {
    if (idx >= t.base.size())
      throw error("tone index " + std::to_string(idx) + " out of range");
    if (!first && idx <= last)
      throw error("tone indices must be strictly increasing");
    if (!profile.can_bear_tone(t.base[idx]))
      throw error("tone index " + std::to_string(idx) +
                  " does not point at a tone-bearing grapheme");
    last = idx;
    first = false;
  }
  std::u32string out;
  out.reserve(t.base.size() + t.tones.size());
  std::size_t next_tone = 0;
  for (std::size_t i = 0; i < t.base.size(); ++i) {
    out.push_back(t.base[i]);
    if (next_tone < t.tones.size() && t.tones[next_tone].first == i) {
      const tone_mark tone = t.tones[next_tone].second;
      ++next_tone;
      if (auto mark = profile.mark_for_tone(tone)) {
        out.push_back(*mark);
      } else if (profile.unmarked_tone && *profile.unmarked_tone == tone) {
        // written as the bare letter
      } else {
        throw unrepresentable_tone("profile " + profile.id +
                                   " has no spelling for " +
                                   tone_name(tone) + " tone");
      }
    }
  }
  return out;
}

}  // namespace tonekit
