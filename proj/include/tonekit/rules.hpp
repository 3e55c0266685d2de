#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tonekit/errors.hpp"
#include "tonekit/normalizer.hpp"
#include "tonekit/text_model.hpp"
#include "tonekit/unicode.hpp"

namespace tonekit {

// Ordered spelling correspondences between two orthographies, written in
// natural (un-unified) text.
struct rule_set {
  std::string source_profile;
  std::string target_profile;
  std::vector<std::pair<std::u32string, std::u32string>> substitutions;
};

inline rule_set rules_from_json(const nlohmann::json& doc) {
  rule_set rules;
  if (!doc.is_object()) throw parse_error("$: rule set must be an object");
  for (const char* key : {"source_profile", "target_profile", "substitutions"})
    if (!doc.contains(key))
      throw parse_error(std::string(key) + ": missing required field");
  if (!doc["source_profile"].is_string() || !doc["target_profile"].is_string())
    throw parse_error("source_profile/target_profile: must be strings");
  rules.source_profile = doc["source_profile"].get<std::string>();
  rules.target_profile = doc["target_profile"].get<std::string>();
  if (!doc["substitutions"].is_array())
    throw parse_error("substitutions: must be an array");
  for (std::size_t i = 0; i < doc["substitutions"].size(); ++i) {
    const auto& item = doc["substitutions"][i];
    const std::string path = "substitutions[" + std::to_string(i) + "]";
    if (!item.is_array() || item.size() != 2 || !item[0].is_string() ||
        !item[1].is_string())
      throw parse_error(path + ": must be a 2-element array of strings");
    std::u32string source = canonicalize_utf8(item[0].get<std::string>());
    std::u32string target = canonicalize_utf8(item[1].get<std::string>());
    if (source.empty()) throw parse_error(path + "[0]: source must be non-empty");
    for (const auto& [existing, unused] : rules.substitutions)
      if (existing == source)
        throw duplicate_source(path + "[0]: duplicate source \"" +
                               item[0].get<std::string>() + "\"");
    rules.substitutions.emplace_back(std::move(source), std::move(target));
  }
  return rules;
}

inline rule_set load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open rules file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
  try {
    return rules_from_json(doc);
  } catch (const parse_error& e) {
    throw parse_error(path + ": " + e.what());
  } catch (const duplicate_source& e) {
    throw duplicate_source(path + ": " + e.what());
  }
}

inline nlohmann::json rules_to_json(const rule_set& rules) {
  nlohmann::json doc;
  doc["source_profile"] = rules.source_profile;
  doc["target_profile"] = rules.target_profile;
  auto subs = nlohmann::json::array();
  for (const auto& [source, target] : rules.substitutions)
    subs.push_back({encode_utf8(source), encode_utf8(target)});
  doc["substitutions"] = std::move(subs);
  return doc;
}

// High Tone Spreading: one left-to-right pass turning every high-low pair
// into high-falling. A single pass suffices; the rewrite never creates a
// new high-low pair.
inline std::vector<tone_mark> apply_hts(std::vector<tone_mark> tones) {
  for (std::size_t i = 1; i < tones.size(); ++i)
    if (tones[i - 1] == tone_mark::high && tones[i] == tone_mark::low)
      tones[i] = tone_mark::falling;
  return tones;
}

struct convert_options {
  bool high_tone_spreading = true;
};

// Deterministic source-to-target converter. The pipeline per whitespace
// token is: digraph-unify, lift tones, apply substitutions (tones
// re-anchored by nucleus order), apply HTS word-internally, re-mark under
// the target conventions, and expand digraphs again. Substitution matching
// happens in the source profile's unified space.
class rule_converter {
 public:
  rule_converter(rule_set rules, orthography_profile source,
                 orthography_profile target, convert_options options = {})
      : rules_(std::move(rules)),
        source_(std::move(source)),
        target_(std::move(target)),
        options_(options),
        table_(compile_table(source_)) {
    for (const auto& [src, dst] : rules_.substitutions) {
      compiled_.push_back({normalize(src, table_), normalize(dst, table_)});
      auto& slots = slots_.emplace_back();
      const auto& unified = compiled_.back().second;
      for (std::size_t i = 0; i < unified.size(); ++i)
        if (can_anchor(unified[i])) slots.push_back(i);
    }
  }

  std::u32string convert_line(std::u32string_view line) const {
    std::u32string out;
    out.reserve(line.size());
    std::size_t i = 0;
    std::size_t token_index = 0;
    while (i < line.size()) {
      if (is_space(line[i])) {
        out.push_back(line[i]);
        ++i;
        continue;
      }
      std::size_t end = i;
      while (end < line.size() && !is_space(line[end])) ++end;
      out.append(convert_token(line.substr(i, end - i), token_index));
      ++token_index;
      i = end;
    }
    return out;
  }

  std::string convert_utf8(std::string_view line) const {
    return encode_utf8(convert_line(canonicalize_utf8(line)));
  }

  const rule_set& rules() const { return rules_; }
  const orthography_profile& source_profile() const { return source_; }
  const orthography_profile& target_profile() const { return target_; }

 private:
  bool can_anchor(char32_t cp) const {
    return is_vowel_letter(cp) || is_nasal_letter(cp) ||
           source_.private_char_is_vocalic(cp);
  }

  toned_text substitute(const toned_text& t, const std::u32string& src,
                        const std::u32string& dst,
                        const std::vector<std::size_t>& slots) const {
    toned_text out;
    out.base.reserve(t.base.size());
    std::size_t i = 0;
    std::size_t tp = 0;
    while (i < t.base.size()) {
      if (!src.empty() && src.size() <= t.base.size() - i &&
          t.base.compare(i, src.size(), src) == 0) {
        std::vector<tone_mark> anchored;
        while (tp < t.tones.size() && t.tones[tp].first < i + src.size()) {
          anchored.push_back(t.tones[tp].second);
          ++tp;
        }
        if (anchored.size() > slots.size())
          throw substitution_tone_conflict(
              "substitution \"" + encode_utf8(src) + "\" -> \"" +
              encode_utf8(dst) + "\" drops a tone: replacement has " +
              std::to_string(slots.size()) + " nuclei for " +
              std::to_string(anchored.size()) + " tones");
        const std::size_t offset = out.base.size();
        out.base.append(dst);
        for (std::size_t k = 0; k < anchored.size(); ++k)
          out.tones.emplace_back(offset + slots[k], anchored[k]);
        i += src.size();
      } else {
        if (tp < t.tones.size() && t.tones[tp].first == i) {
          out.tones.emplace_back(out.base.size(), t.tones[tp].second);
          ++tp;
        }
        out.base.push_back(t.base[i]);
        ++i;
      }
    }
    return out;
  }

  std::u32string convert_token(std::u32string_view token,
                               std::size_t token_index) const {
    try {
      const std::u32string unified = normalize(token, table_);
      toned_text t = parse_tones(unified, source_);
      for (std::size_t k = 0; k < compiled_.size(); ++k)
        t = substitute(t, compiled_[k].first, compiled_[k].second, slots_[k]);
      if (options_.high_tone_spreading) {
        std::vector<tone_mark> values;
        values.reserve(t.tones.size());
        for (const auto& [idx, tone] : t.tones) values.push_back(tone);
        values = apply_hts(std::move(values));
        for (std::size_t k = 0; k < t.tones.size(); ++k)
          t.tones[k].second = values[k];
      }
      return denormalize(render_tones(t, target_), table_);
    } catch (const error&) {
      rethrow_with_context(token_index, token);
    }
  }

  [[noreturn]] void rethrow_with_context(std::size_t token_index,
                                         std::u32string_view token) const {
    const std::string ctx = "token " + std::to_string(token_index) + " \"" +
                            encode_utf8(token) + "\": ";
    try {
      throw;
    } catch (const unknown_diacritic& e) {
      throw unknown_diacritic(ctx + e.what());
    } catch (const mark_on_non_nucleus& e) {
      throw mark_on_non_nucleus(ctx + e.what());
    } catch (const conflicting_diacritics& e) {
      throw conflicting_diacritics(ctx + e.what());
    } catch (const unrepresentable_tone& e) {
      throw unrepresentable_tone(ctx + e.what());
    } catch (const substitution_tone_conflict& e) {
      throw substitution_tone_conflict(ctx + e.what());
    } catch (const unknown_private_char& e) {
      throw unknown_private_char(ctx + e.what());
    } catch (const error& e) {
      throw error(ctx + e.what());
    }
  }

  rule_set rules_;
  orthography_profile source_;
  orthography_profile target_;
  convert_options options_;
  normalization_table table_;
  std::vector<std::pair<std::u32string, std::u32string>> compiled_;
  std::vector<std::vector<std::size_t>> slots_;
};

// One-shot form of the converter for single lines.
inline std::u32string convert(std::u32string_view line, const rule_set& rules,
                              const orthography_profile& source,
                              const orthography_profile& target,
                              convert_options options = {}) {
  return rule_converter(rules, source, target, options).convert_line(line);
}

}  // namespace tonekit
