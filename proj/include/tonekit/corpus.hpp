#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/rng.hpp"
#include "tonekit/rules.hpp"
#include "tonekit/text_model.hpp"
#include "tonekit/unicode.hpp"

namespace tonekit {

enum class split_label { train, valid, test };

inline std::string split_label_name(split_label label) {
  switch (label) {
    case split_label::train: return "train";
    case split_label::valid: return "valid";
    case split_label::test: return "test";
  }
  return "train";
}

// Aligned sentence pairs, stored as UTF-8 in canonical decomposed form.
struct parallel_corpus {
  struct example {
    std::string source;
    std::string target;
    std::optional<split_label> split;
  };
  std::vector<example> examples;

  std::size_t size() const { return examples.size(); }

  std::vector<example> subset(split_label label) const {
    std::vector<example> out;
    for (const auto& ex : examples)
      if (ex.split == label) out.push_back(ex);
    return out;
  }
};

// --- Plain line IO -------------------------------------------------------------

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Writes content to path via a sibling temp file plus rename, so readers
// never observe a half-written file and reruns are all-or-nothing.
inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw error("failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw error("cannot rename " + tmp + " to " + path);
  }
}

inline void write_lines(const std::string& path,
                        const std::vector<std::string>& lines) {
  std::string content;
  for (const auto& line : lines) {
    content += line;
    content += '\n';
  }
  atomic_write(path, content);
}

// --- TSV parallel corpus --------------------------------------------------------

// One pair per line, "source<TAB>target", no quoting. Both sides are
// canonically decomposed on load. Line numbers are 1-based in errors.
inline parallel_corpus load_parallel(const std::string& path) {
  parallel_corpus corpus;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const std::size_t line_no = i + 1;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw malformed_line(path + ":" + std::to_string(line_no) +
                               ": expected source<TAB>target",
                           line_no);
    if (line.find('\t', tab + 1) != std::string::npos)
      throw malformed_line(
          path + ":" + std::to_string(line_no) + ": more than one TAB",
          line_no);
    if (tab + 1 == line.size())
      throw malformed_line(
          path + ":" + std::to_string(line_no) + ": empty target side",
          line_no);
    try {
      parallel_corpus::example ex;
      ex.source = encode_utf8(canonicalize_utf8(line.substr(0, tab)));
      ex.target = encode_utf8(canonicalize_utf8(line.substr(tab + 1)));
      corpus.examples.push_back(std::move(ex));
    } catch (const encoding_error& e) {
      throw encoding_error(
          path + ":" + std::to_string(line_no) + ": " + e.what(),
          e.byte_offset);
    }
  }
  return corpus;
}

inline void save_parallel(const parallel_corpus& corpus,
                          const std::string& path) {
  std::string content;
  for (const auto& ex : corpus.examples) {
    if (ex.source.find('\t') != std::string::npos ||
        ex.target.find('\t') != std::string::npos ||
        ex.source.find('\n') != std::string::npos ||
        ex.target.find('\n') != std::string::npos)
      throw error("corpus text may not contain TAB or newline");
    if (ex.target.empty()) throw error("corpus example has empty target");
    content += ex.source;
    content += '\t';
    content += ex.target;
    content += '\n';
  }
  atomic_write(path, content);
}

// --- Deterministic splitting ----------------------------------------------------

// Shuffles the corpus with the seed, then labels the first n_train
// examples train, the next n_valid valid, the next n_test test. Any
// leftover examples stay in the corpus unlabeled.
inline parallel_corpus split_corpus(parallel_corpus corpus,
                                    std::size_t n_train, std::size_t n_valid,
                                    std::size_t n_test, std::uint64_t seed) {
  const std::size_t wanted = n_train + n_valid + n_test;
  if (wanted > corpus.size())
    throw insufficient_data("split needs " + std::to_string(wanted) +
                            " examples, corpus has " +
                            std::to_string(corpus.size()));
  std::mt19937_64 rng(seed);
  deterministic_shuffle(corpus.examples, rng);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& ex = corpus.examples[i];
    if (i < n_train)
      ex.split = split_label::train;
    else if (i < n_train + n_valid)
      ex.split = split_label::valid;
    else if (i < wanted)
      ex.split = split_label::test;
    else
      ex.split = std::nullopt;
  }
  return corpus;
}

// --- Synthetic corpus generation -------------------------------------------------

// Builds sentence pairs by sampling syllable-structured source text
// (CV/CVC, prenasalized onsets via the profile's digraphs, vowel nuclei,
// one of the four tones per nucleus) and converting it with the rule
// converter. A `noise` fraction of targets receives one random character
// edit, standing in for correspondences the rules cannot express.
inline parallel_corpus generate_synthetic(const orthography_profile& source,
                                          const orthography_profile& target,
                                          const rule_set& rules, std::size_t n,
                                          std::uint64_t seed, double noise) {
  if (noise < 0.0 || noise > 1.0)
    throw error("noise must lie in [0,1], got " + std::to_string(noise));

  // Sampling pools from the source profile.
  std::vector<std::u32string> onsets;
  std::vector<char32_t> nuclei;
  std::vector<char32_t> codas;
  for (const auto& [digraph_source, replacement] : source.digraphs)
    onsets.push_back(digraph_source);
  for (char32_t letter : source.alphabet) {
    if (is_vowel_letter(letter)) {
      nuclei.push_back(letter);
    } else {
      onsets.push_back(std::u32string(1, letter));
      codas.push_back(letter);
    }
  }
  if (nuclei.empty() || onsets.empty())
    throw profile_error("profile \"" + source.id +
                        "\" has no usable syllable inventory");

  // Pool for noise edits: the target profile's letters and tone marks.
  std::vector<char32_t> noise_pool;
  for (char32_t letter : target.alphabet) noise_pool.push_back(letter);
  for (const auto& [tone, mark] : target.tone_diacritics)
    noise_pool.push_back(mark);

  const rule_converter converter(rules, source, target);
  std::mt19937_64 rng(seed);

  const auto sample_word = [&]() {
    std::u32string base;
    std::vector<std::pair<std::size_t, tone_mark>> tones;
    const std::size_t syllables = 1 + rand_below(rng, 3);
    for (std::size_t s = 0; s < syllables; ++s) {
      base += onsets[rand_below(rng, onsets.size())];
      tones.emplace_back(base.size(),
                         all_tones[rand_below(rng, all_tones.size())]);
      base += nuclei[rand_below(rng, nuclei.size())];
      if (rand_below(rng, 10) < 3)
        base += codas[rand_below(rng, codas.size())];
    }
    return render_tones({std::move(base), std::move(tones)}, source);
  };

  const auto perturb = [&](std::u32string text) {
    std::size_t kind = rand_below(rng, 3);
    if (kind == 1 && text.size() <= 1) kind = 2;  // deletion would empty it
    if (kind == 0) {  // insert
      const std::size_t pos = rand_below(rng, text.size() + 1);
      text.insert(text.begin() + static_cast<std::ptrdiff_t>(pos),
                  noise_pool[rand_below(rng, noise_pool.size())]);
    } else if (kind == 1) {  // delete
      const std::size_t pos = rand_below(rng, text.size());
      text.erase(text.begin() + static_cast<std::ptrdiff_t>(pos));
    } else {  // substitute with a differing code point
      const std::size_t pos = rand_below(rng, text.size());
      char32_t replacement = text[pos];
      while (replacement == text[pos])
        replacement = noise_pool[rand_below(rng, noise_pool.size())];
      text[pos] = replacement;
    }
    return text;
  };

  parallel_corpus corpus;
  corpus.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t words = 2 + rand_below(rng, 3);
    std::u32string sentence;
    for (std::size_t w = 0; w < words; ++w) {
      if (w > 0) sentence += U' ';
      sentence += sample_word();
    }
    std::u32string converted = converter.convert_line(sentence);
    if (rand_unit(rng) < noise) converted = perturb(std::move(converted));
    parallel_corpus::example ex;
    ex.source = encode_utf8(sentence);
    ex.target = encode_utf8(converted);
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

}  // namespace tonekit
