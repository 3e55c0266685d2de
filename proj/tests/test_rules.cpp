#include <catch2/catch_amalgamated.hpp>

#include "tonekit/tonekit.hpp"

using namespace tonekit;

namespace {

std::string data_path(const std::string& rel) {
  return std::string(TONEKIT_DATA_DIR) + "/" + rel;
}

// Canonically decomposed UTF-8, so expected literals may be typed either way.
std::string canon8(const std::string& s) {
  return encode_utf8(canonicalize_utf8(s));
}

const orthography_profile& missionary() {
  static const orthography_profile p =
      load_profile(data_path("profiles/missionary.json"));
  return p;
}

const orthography_profile& official() {
  static const orthography_profile p =
      load_profile(data_path("profiles/official.json"));
  return p;
}

const rule_set& mission_rules() {
  static const rule_set r =
      load_rules(data_path("rules/missionary_to_official.json"));
  return r;
}

const rule_converter& mission_converter() {
  static const rule_converter c(mission_rules(), missionary(), official());
  return c;
}

}  // namespace

TEST_CASE("shipped rule set loads") {
  const rule_set& r = mission_rules();
  CHECK(r.source_profile == "missionary");
  CHECK(r.target_profile == "official");
  REQUIRE(r.substitutions.size() == 2);
  CHECK(r.substitutions[0].first == canonicalize_utf8("ë"));
  CHECK(r.substitutions[0].second == canonicalize_utf8("ɛ"));
  CHECK(r.substitutions[1].first == canonicalize_utf8("ö"));
  CHECK(r.substitutions[1].second == canonicalize_utf8("ɔ"));
}

TEST_CASE("rules_from_json validates") {
  nlohmann::json good = rules_to_json(mission_rules());
  const rule_set round = rules_from_json(good);
  CHECK(round.substitutions == mission_rules().substitutions);

  nlohmann::json missing = good;
  missing.erase("substitutions");
  CHECK_THROWS_AS(rules_from_json(missing), parse_error);

  nlohmann::json empty_src = good;
  empty_src["substitutions"] =
      nlohmann::json::array({nlohmann::json::array({"", "a"})});
  CHECK_THROWS_AS(rules_from_json(empty_src), parse_error);

  // Duplicate detection sees through encoding differences: precomposed
  // "é" and "e" + combining acute are the same source.
  nlohmann::json dup = good;
  dup["substitutions"] = nlohmann::json::array(
      {nlohmann::json::array({"é", "a"}),
       nlohmann::json::array({"é", "a"})});
  CHECK_THROWS_AS(rules_from_json(dup), duplicate_source);
}

TEST_CASE("rule conversion, pinned examples") {
  const rule_converter& conv = mission_converter();

  // Explicit low becomes the bare letter.
  CHECK(conv.convert_utf8("bà") == canon8("ba"));
  // High-low inside a word becomes high-falling.
  CHECK(conv.convert_utf8("bábà") == canon8("bábâ"));
  // Spreading never crosses a word boundary.
  CHECK(conv.convert_utf8("bá bà") == canon8("bá ba"));
  // Digraphs survive the round trip through private-use space.
  CHECK(conv.convert_utf8("ngá") == canon8("ngá"));
  // Vowel substitution keeps the tone on the replacement nucleus.
  CHECK(conv.convert_utf8("ndö̂k") == canon8("ndɔ̂k"));
  CHECK(conv.convert_utf8("yë̌btá") == canon8("yɛ̌btá"));
  // Sentence texture: several words, mixed phenomena.
  CHECK(conv.convert_utf8("mònyǒp mɛ̀yɔ́bú") == canon8("monyǒp mɛyɔ́bú"));
  CHECK(conv.convert_utf8("gípngì kɔ̌") == canon8("gípngî kɔ̌"));
  // Whitespace runs are preserved verbatim.
  CHECK(conv.convert_utf8("bà  bá") == canon8("ba  bá"));
  CHECK(conv.convert_utf8("") == std::string{});
}

TEST_CASE("spreading can be switched off") {
  const rule_converter plain(mission_rules(), missionary(), official(),
                             convert_options{false});
  // Without spreading the low is still re-marked per the target (bare).
  CHECK(plain.convert_utf8("bábà") == canon8("bába"));
  // The free-function form takes the same options.
  CHECK(encode_utf8(convert(canonicalize_utf8("bábà"), mission_rules(),
                            missionary(), official(),
                            convert_options{false})) == canon8("bába"));
}

TEST_CASE("conversion is idempotent on target-side text") {
  const rule_set noop{"official", "official", {}};
  const rule_converter conv(noop, official(), official());
  const char* samples[] = {"bá ba", "bâ bǎ", "ngá ndɔ̂k", "monyǒp mɛyɔ́bú"};
  for (const char* s : samples) {
    const std::string once = conv.convert_utf8(s);
    CHECK(conv.convert_utf8(once) == once);
  }
  // Missionary -> official output is already spreading-normalized: feeding
  // it through an official-to-official pass changes nothing.
  const std::string converted = mission_converter().convert_utf8("gípngì kɔ̌");
  CHECK(conv.convert_utf8(converted) == converted);
}

TEST_CASE("a substitution may not drop an anchored tone") {
  // "a" -> "k" erases the only nucleus; any toned "a" cannot carry over.
  const rule_set bad{"missionary", "official", {{U"a", U"k"}}};
  const rule_converter conv(bad, missionary(), official());
  CHECK_THROWS_AS(conv.convert_utf8("bá"), substitution_tone_conflict);
  try {
    conv.convert_utf8("ba bá");
    FAIL("expected substitution_tone_conflict");
  } catch (const substitution_tone_conflict& e) {
    // Errors carry the token position and spelling (decomposed).
    const std::string what = e.what();
    CHECK(what.find("token 1") != std::string::npos);
    CHECK(what.find(canon8("bá")) != std::string::npos);
  }
  // Untoned "a" substitutes cleanly.
  CHECK(conv.convert_utf8("bab") == canon8("bkb"));
}

TEST_CASE("conversion errors name the offending token") {
  const rule_converter& conv = mission_converter();
  // Macron is no tone mark in the missionary profile.
  try {
    conv.convert_utf8("bà bā");
    FAIL("expected unknown_diacritic");
  } catch (const unknown_diacritic& e) {
    CHECK(std::string(e.what()).find("token 1") != std::string::npos);
  }
  // Tone on a consonant.
  CHECK_THROWS_AS(conv.convert_utf8("b́a"), mark_on_non_nucleus);
  // Two marks on one nucleus.
  CHECK_THROWS_AS(conv.convert_utf8("bá̀"), conflicting_diacritics);
}
