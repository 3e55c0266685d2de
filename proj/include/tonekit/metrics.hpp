#pragma once

#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "tonekit/errors.hpp"
#include "tonekit/unicode.hpp"

namespace tonekit {

// Unit-cost Levenshtein distance over any comparable sequence, two-row DP.
template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  if (m == 0) return n;
  if (n == 0) return m;
  std::vector<std::size_t> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

// Corpus-level scores. Error rates are micro-averaged: total edit
// operations over all lines, scaled by total reference units, times 100.
// Rates can exceed 100 when hypotheses overshoot their references.
struct evaluation_report {
  std::size_t lines = 0;
  std::size_t char_edits = 0;
  std::size_t char_total = 0;
  std::size_t word_edits = 0;
  std::size_t word_total = 0;

  double cer() const {
    return 100.0 * static_cast<double>(char_edits) /
           static_cast<double>(char_total);
  }
  double wer() const {
    return 100.0 * static_cast<double>(word_edits) /
           static_cast<double>(word_total);
  }
};

// Renders a rate with exactly four decimal places.
inline std::string format_rate(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

// Scores hypothesis lines against reference lines. Characters are the
// canonically decomposed code points of each line; words are its
// whitespace-separated tokens.
inline evaluation_report evaluate(const std::vector<std::string>& hypotheses,
                                  const std::vector<std::string>& references) {
  if (hypotheses.size() != references.size())
    throw length_mismatch("hypothesis has " +
                          std::to_string(hypotheses.size()) +
                          " lines, reference has " +
                          std::to_string(references.size()));
  evaluation_report report;
  report.lines = hypotheses.size();
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const std::u32string hyp = canonicalize(decode_utf8(hypotheses[i]));
    const std::u32string ref = canonicalize(decode_utf8(references[i]));
    report.char_edits += edit_distance(hyp, ref);
    report.char_total += ref.size();
    const std::vector<std::u32string> hyp_words = split_words(hyp);
    const std::vector<std::u32string> ref_words = split_words(ref);
    report.word_edits += edit_distance(hyp_words, ref_words);
    report.word_total += ref_words.size();
  }
  if (report.char_total == 0)
    throw empty_reference("reference corpus has no characters");
  if (report.word_total == 0)
    throw empty_reference("reference corpus has no words");
  return report;
}

inline nlohmann::json report_to_json(const evaluation_report& report) {
  return nlohmann::json{{"lines", report.lines},
                        {"cer", report.cer()},
                        {"wer", report.wer()},
                        {"char_edits", report.char_edits},
                        {"char_total", report.char_total},
                        {"word_edits", report.word_edits},
                        {"word_total", report.word_total}};
}

inline std::string report_to_text(const evaluation_report& report) {
  std::string out;
  out += "lines " + std::to_string(report.lines) + "\n";
  out += "CER " + format_rate(report.cer()) + "\n";
  out += "WER " + format_rate(report.wer()) + "\n";
  return out;
}

}  // namespace tonekit
