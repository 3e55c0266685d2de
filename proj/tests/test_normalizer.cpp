#include <catch2/catch_amalgamated.hpp>

#include "tonekit/tonekit.hpp"

using namespace tonekit;

namespace {

orthography_profile test_profile() {
  nlohmann::json doc = {
      {"id", "t"},
      {"alphabet", {"a", "e", "i", "o", "u", "ɛ", "ɔ", "b", "d", "g",
                    "m", "n", "y"}},
      {"digraphs", nlohmann::json::array({
                       nlohmann::json::array({"mb", ""}),
                       nlohmann::json::array({"nd", ""}),
                       nlohmann::json::array({"ng", ""}),
                       nlohmann::json::array({"ny", ""}),
                   })},
      {"tone_diacritics", {{"high", "́"}, {"falling", "̂"}, {"rising", "̌"}}},
      {"allow_unmarked_low", true}};
  return profile_from_json(doc);
}

}  // namespace

TEST_CASE("compile_table maps digraphs to ascending private-use chars") {
  const normalization_table table = compile_table(test_profile());
  CHECK(normalize(U"mb", table) == std::u32string{0xE000});
  CHECK(normalize(U"nd", table) == std::u32string{0xE001});
  CHECK(normalize(U"ng", table) == std::u32string{0xE002});
  CHECK(normalize(U"ny", table) == std::u32string{0xE003});
}

TEST_CASE("normalize is longest-match leftmost") {
  const normalization_table table = compile_table(test_profile());
  // "ndy": nd wins at position 0, leaving bare y (ny never forms).
  CHECK(normalize(U"ndy", table) == (std::u32string{0xE001, U'y'}));
  // "nmb": n alone, then mb.
  CHECK(normalize(U"nmb", table) == (std::u32string{U'n', 0xE000}));
  // "mba ndɔ": replacements do not cross other letters or spaces.
  CHECK(normalize(U"mba ndɔ", table) ==
        (std::u32string{0xE000, U'a', U' ', 0xE001, 0x0254}));
  // Combining marks interrupt a match: "n" + acute + "d" is not "nd".
  CHECK(normalize(std::u32string{U'n', 0x0301, U'd'}, table) ==
        (std::u32string{U'n', 0x0301, U'd'}));
  CHECK(normalize(U"", table).empty());
}

TEST_CASE("longest source wins when sources nest") {
  // A 3-letter digraph must out-rank its 2-letter prefix.
  nlohmann::json doc = {
      {"id", "nest"},
      {"alphabet", {"a", "e", "i", "o", "u", "ɛ", "ɔ", "b", "g", "m", "n"}},
      {"digraphs", nlohmann::json::array({
                       nlohmann::json::array({"mbg", ""}),
                       nlohmann::json::array({"mb", ""}),
                   })},
      {"tone_diacritics", {{"high", "́"}}},
      {"allow_unmarked_low", true}};
  const orthography_profile p = profile_from_json(doc);
  const normalization_table table = compile_table(p);
  CHECK(normalize(U"mbg", table) == std::u32string{0xE000});
  CHECK(normalize(U"mba", table) == (std::u32string{0xE001, U'a'}));
}

TEST_CASE("denormalize inverts normalize") {
  const normalization_table table = compile_table(test_profile());
  const std::u32string samples[] = {
      U"mbandanga", U"nymbnd", U"ba mba", U"",
      std::u32string{U'n', 0x0301, U'd', U'a'},
  };
  for (const auto& s : samples) CHECK(denormalize(normalize(s, table), table) == s);
}

TEST_CASE("normalize then denormalize is the identity on random text") {
  const normalization_table table = compile_table(test_profile());
  const std::u32string letters = U"abdgmnyuɛ ";
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    std::u32string s;
    const std::size_t len = rand_below(rng, 16);
    for (std::size_t i = 0; i < len; ++i)
      s.push_back(letters[rand_below(rng, letters.size())]);
    CHECK(denormalize(normalize(s, table), table) == s);
  }
}

TEST_CASE("denormalize rejects foreign private-use characters") {
  const normalization_table table = compile_table(test_profile());
  // E007 belongs to no digraph of this profile.
  CHECK_THROWS_AS(denormalize(std::u32string{U'a', 0xE007}, table),
                  unknown_private_char);
  try {
    denormalize(std::u32string{U'a', 0xE007}, table);
    FAIL("expected unknown_private_char");
  } catch (const unknown_private_char& e) {
    const std::string what = e.what();
    CHECK(what.find("position 1") != std::string::npos);
    CHECK(what.find("profile t") != std::string::npos);
  }
}

TEST_CASE("compile_table rejects conflicting tables") {
  // Hand-built digraph lists that dodge the profile validator.
  orthography_profile p = test_profile();

  p.digraphs = {{U"mb", 0xE000}, {U"mb", 0xE001}};
  CHECK_THROWS_AS(compile_table(p), table_conflict);  // duplicate source

  p.digraphs = {{U"mb", 0xE000}, {U"nb", 0xE000}};
  CHECK_THROWS_AS(compile_table(p), table_conflict);  // replacement collision

  p.digraphs = {{U"mb", 0xE000},
                {std::u32string{0xE000, U'a'}, 0xE001}};
  CHECK_THROWS_AS(compile_table(p), table_conflict);  // chaining

  p.digraphs = {{U"mb", U'x'}};
  CHECK_THROWS_AS(compile_table(p), table_conflict);  // not private-use
}
