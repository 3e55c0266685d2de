#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tonekit {

// Base class for all toolkit failures.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid UTF-8 on an input boundary. byte_offset is 0-based within the
// decoded unit (line or buffer).
struct encoding_error : error {
  std::size_t byte_offset;
  encoding_error(const std::string& what, std::size_t offset)
      : error(what), byte_offset(offset) {}
};

// Orthography profile failed schema or invariant validation. The message
// carries the JSON path of the first violation.
struct profile_error : error {
  using error::error;
};

// A combining mark not covered by the profile's tone inventory.
struct unknown_diacritic : error {
  using error::error;
};

// A tone mark attached to a grapheme that cannot bear tone.
struct mark_on_non_nucleus : error {
  using error::error;
};

// Two tone marks on the same nucleus.
struct conflicting_diacritics : error {
  using error::error;
};

// The profile has no way to write the requested tone.
struct unrepresentable_tone : error {
  using error::error;
};

// Duplicate source or replacement collision in a normalization table.
struct table_conflict : error {
  using error::error;
};

// A private-use code point with no entry in the normalization table.
struct unknown_private_char : error {
  using error::error;
};

// Malformed JSON input (rules, profiles, configs, checkpoints).
struct parse_error : error {
  using error::error;
};

// Two rule entries share a source string.
struct duplicate_source : error {
  using error::error;
};

// A substitution result has no position left for an anchored tone.
struct substitution_tone_conflict : error {
  using error::error;
};

// MERGE_HYPHEN with no following token to join.
struct dangling_merge : error {
  using error::error;
};

// Corpus line without exactly one TAB or with an empty target.
struct malformed_line : error {
  std::size_t line_no;
  malformed_line(const std::string& what, std::size_t line)
      : error(what), line_no(line) {}
};

// Requested split sizes exceed the corpus.
struct insufficient_data : error {
  using error::error;
};

// Hypothesis and reference lists differ in length.
struct length_mismatch : error {
  using error::error;
};

// References contain no characters or no words at all.
struct empty_reference : error {
  using error::error;
};

// Vocabulary construction over an empty corpus.
struct empty_corpus : error {
  using error::error;
};

// Training loss or parameters became non-finite.
struct divergence_error : error {
  using error::error;
};

}  // namespace tonekit
