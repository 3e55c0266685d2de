#include <catch2/catch_amalgamated.hpp>

#include "tonekit/tonekit.hpp"

using namespace tonekit;

TEST_CASE("edit_distance, classic oracle") {
  CHECK(edit_distance(std::string("kitten"), std::string("sitting")) == 3);
  CHECK(edit_distance(std::string("flaw"), std::string("lawn")) == 2);
  CHECK(edit_distance(std::string(""), std::string("abc")) == 3);
  CHECK(edit_distance(std::string("abc"), std::string("")) == 3);
  CHECK(edit_distance(std::string("same"), std::string("same")) == 0);
  // Works over word sequences too.
  const std::vector<std::string> a{"the", "cat", "sat"};
  const std::vector<std::string> b{"the", "dog", "sat", "down"};
  CHECK(edit_distance(a, b) == 2);
}

TEST_CASE("edit_distance agrees with symmetry and bounds, randomized") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::string a(rand_below(rng, 9), 'x');
    std::string b(rand_below(rng, 9), 'x');
    for (auto& c : a) c = static_cast<char>('a' + rand_below(rng, 3));
    for (auto& c : b) c = static_cast<char>('a' + rand_below(rng, 3));
    const std::size_t d = edit_distance(a, b);
    CHECK(d == edit_distance(b, a));
    const std::size_t longer = std::max(a.size(), b.size());
    const std::size_t diff =
        longer - std::min(a.size(), b.size());
    CHECK(d <= longer);
    CHECK(d >= diff);
    CHECK((d == 0) == (a == b));
  }
}

TEST_CASE("evaluate, pinned single line") {
  // One substituted character out of two: CER 50. One word of one: WER 100.
  const evaluation_report r = evaluate({"aa"}, {"ab"});
  CHECK(r.lines == 1);
  CHECK(r.char_edits == 1);
  CHECK(r.char_total == 2);
  CHECK(r.word_edits == 1);
  CHECK(r.word_total == 1);
  CHECK(r.cer() == Catch::Approx(50.0));
  CHECK(r.wer() == Catch::Approx(100.0));
}

TEST_CASE("rates can exceed one hundred") {
  const evaluation_report r = evaluate({"aaaa"}, {"a"});
  CHECK(r.cer() == Catch::Approx(300.0));
  CHECK(r.wer() == Catch::Approx(100.0));
}

TEST_CASE("evaluate micro-averages across lines") {
  // 0 edits over 4 chars plus 1 edit over 1 char: micro CER is 1/5,
  // not the per-line mean of 0 and 100.
  const evaluation_report r = evaluate({"abcd", "q"}, {"abcd", "z"});
  CHECK(r.char_edits == 1);
  CHECK(r.char_total == 5);
  CHECK(r.cer() == Catch::Approx(20.0));
  CHECK(r.word_total == 2);
  CHECK(r.wer() == Catch::Approx(50.0));
}

TEST_CASE("characters are canonically decomposed code points") {
  // Precomposed and decomposed spellings of the same text are identical.
  const evaluation_report same = evaluate({"bá"}, {"bá"});
  CHECK(same.char_edits == 0);
  CHECK(same.char_total == 3);  // b a combining-acute

  // A missing tone mark costs exactly one character edit.
  const evaluation_report mark = evaluate({"ba"}, {"bá"});
  CHECK(mark.char_edits == 1);
  CHECK(mark.char_total == 3);
  // ... but a whole word edit.
  CHECK(mark.word_edits == 1);
  CHECK(mark.word_total == 1);
}

TEST_CASE("evaluate rejects mismatched or empty input") {
  try {
    evaluate({"a", "b"}, {"a"});
    FAIL("expected length_mismatch");
  } catch (const length_mismatch& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
  CHECK_THROWS_AS(evaluate({""}, {""}), empty_reference);
  // Whitespace-only references have characters but no words.
  CHECK_THROWS_AS(evaluate({" "}, {" "}), empty_reference);
  // Empty hypothesis against a real reference is fine (all edits).
  const evaluation_report r = evaluate({""}, {"ab"});
  CHECK(r.char_edits == 2);
}

TEST_CASE("format_rate pins four decimals") {
  CHECK(format_rate(50.0) == "50.0000");
  CHECK(format_rate(0.0) == "0.0000");
  CHECK(format_rate(123.45678) == "123.4568");
  CHECK(format_rate(2.0 / 3.0 * 100.0) == "66.6667");
}

TEST_CASE("report serialization carries the full tally") {
  const evaluation_report r = evaluate({"aa", "b c"}, {"ab", "b d"});
  const nlohmann::json j = report_to_json(r);
  CHECK(j["lines"] == 2);
  CHECK(j["char_edits"] == 2);
  CHECK(j["char_total"] == 5);
  CHECK(j["word_edits"] == 2);
  CHECK(j["word_total"] == 3);
  CHECK(j["cer"].get<double>() == Catch::Approx(r.cer()));
  CHECK(j["wer"].get<double>() == Catch::Approx(r.wer()));

  const std::string text = report_to_text(r);
  CHECK(text == "lines 2\nCER " + format_rate(r.cer()) + "\nWER " +
                    format_rate(r.wer()) + "\n");
}
