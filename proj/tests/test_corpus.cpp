#include <catch2/catch_amalgamated.hpp>

#include "tonekit/tonekit.hpp"

#include <filesystem>
#include <fstream>

using namespace tonekit;

namespace {

std::string data_path(const std::string& rel) {
  return std::string(TONEKIT_DATA_DIR) + "/" + rel;
}

std::string tmp_path(const std::string& name) {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "tonekit_corpus_tests";
    std::filesystem::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

void write_raw(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
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

}  // namespace

TEST_CASE("atomic_write and line IO round trip") {
  const std::string path = tmp_path("lines.txt");
  write_lines(path, {"one", "two", "drei"});
  CHECK(read_lines(path) == std::vector<std::string>{"one", "two", "drei"});

  // Overwrite is atomic from the reader's point of view; at the very
  // least the temp file must not linger.
  atomic_write(path, "x\n");
  CHECK(read_lines(path) == std::vector<std::string>{"x"});
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));

  CHECK_THROWS_AS(read_lines(tmp_path("no_such_file.txt")), error);
}

TEST_CASE("load_parallel reads and canonicalizes TSV pairs") {
  const std::string path = tmp_path("pairs.tsv");
  // Precomposed "á" on the source side, decomposed on the target side.
  write_raw(path, "bá\tbá\nplain\tcopy\n");
  const parallel_corpus corpus = load_parallel(path);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus.examples[0].source == "bá");
  CHECK(corpus.examples[0].target == "bá");
  CHECK(corpus.examples[1].source == "plain");
  CHECK_FALSE(corpus.examples[0].split.has_value());
}

TEST_CASE("load_parallel reports 1-based line errors") {
  const std::string path = tmp_path("bad.tsv");

  write_raw(path, "a\tb\nno_tab_here\n");
  try {
    load_parallel(path);
    FAIL("expected malformed_line");
  } catch (const malformed_line& e) {
    CHECK(e.line_no == 2);
    CHECK(std::string(e.what()).find(":2: expected source<TAB>target") !=
          std::string::npos);
  }

  write_raw(path, "a\tb\tc\n");
  try {
    load_parallel(path);
    FAIL("expected malformed_line");
  } catch (const malformed_line& e) {
    CHECK(e.line_no == 1);
    CHECK(std::string(e.what()).find("more than one TAB") !=
          std::string::npos);
  }

  write_raw(path, "a\t\n");
  CHECK_THROWS_AS(load_parallel(path), malformed_line);

  // Encoding failures carry the file position too.
  write_raw(path, "ok\tok\n\xFF\tx\n");
  try {
    load_parallel(path);
    FAIL("expected encoding_error");
  } catch (const encoding_error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("save_parallel round trips and rejects unserializable text") {
  const std::string path = tmp_path("saved.tsv");
  parallel_corpus corpus;
  corpus.examples.push_back({"bá", "ba", std::nullopt});
  corpus.examples.push_back({"mbɛ̀", "mbɛ", split_label::train});
  save_parallel(corpus, path);
  const parallel_corpus back = load_parallel(path);
  REQUIRE(back.size() == 2);
  CHECK(back.examples[0].source == corpus.examples[0].source);
  CHECK(back.examples[1].target == corpus.examples[1].target);
  // Split labels are not serialized in the pair file.
  CHECK_FALSE(back.examples[1].split.has_value());

  parallel_corpus bad;
  bad.examples.push_back({"a\tb", "c", std::nullopt});
  CHECK_THROWS_AS(save_parallel(bad, path), error);
  bad.examples[0] = {"a", "", std::nullopt};
  CHECK_THROWS_AS(save_parallel(bad, path), error);
  bad.examples[0] = {"a", "b\nc", std::nullopt};
  CHECK_THROWS_AS(save_parallel(bad, path), error);
}

TEST_CASE("split_corpus labels deterministically") {
  parallel_corpus corpus;
  for (int i = 0; i < 10; ++i)
    corpus.examples.push_back(
        {"src" + std::to_string(i), "tgt" + std::to_string(i), std::nullopt});

  const parallel_corpus a = split_corpus(corpus, 5, 2, 2, 7);
  CHECK(a.subset(split_label::train).size() == 5);
  CHECK(a.subset(split_label::valid).size() == 2);
  CHECK(a.subset(split_label::test).size() == 2);
  std::size_t unlabeled = 0;
  for (const auto& ex : a.examples)
    if (!ex.split) ++unlabeled;
  CHECK(unlabeled == 1);

  // Same seed, same result; the labels follow the shuffled order.
  const parallel_corpus b = split_corpus(corpus, 5, 2, 2, 7);
  REQUIRE(b.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.examples[i].source == b.examples[i].source);
    CHECK(a.examples[i].split == b.examples[i].split);
  }

  // A different seed reorders (10! orders; collision would be a miracle).
  const parallel_corpus c = split_corpus(corpus, 5, 2, 2, 8);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.examples[i].source != c.examples[i].source) any_difference = true;
  CHECK(any_difference);

  // No example vanishes or duplicates.
  std::vector<std::string> sources;
  for (const auto& ex : a.examples) sources.push_back(ex.source);
  std::sort(sources.begin(), sources.end());
  CHECK(std::adjacent_find(sources.begin(), sources.end()) == sources.end());
  CHECK(sources.size() == 10);

  CHECK_THROWS_AS(split_corpus(corpus, 8, 2, 2, 7), insufficient_data);
}

TEST_CASE("generate_synthetic obeys its contract") {
  const parallel_corpus corpus =
      generate_synthetic(missionary(), official(), mission_rules(), 60, 11,
                         0.0);
  REQUIRE(corpus.size() == 60);

  const rule_converter conv(mission_rules(), missionary(), official());
  for (const auto& ex : corpus.examples) {
    REQUIRE_FALSE(ex.source.empty());
    REQUIRE_FALSE(ex.target.empty());
    // Sentences are two to four space-separated words.
    const auto words = split_words(decode_utf8(ex.source));
    CHECK(words.size() >= 2);
    CHECK(words.size() <= 4);
    // With zero noise the target is exactly the rule conversion.
    CHECK(conv.convert_utf8(ex.source) == ex.target);
  }
}

TEST_CASE("generate_synthetic noise perturbs targets") {
  const parallel_corpus noisy =
      generate_synthetic(missionary(), official(), mission_rules(), 40, 11,
                         1.0);
  const rule_converter conv(mission_rules(), missionary(), official());
  // Every example was edited away from the clean conversion.
  for (const auto& ex : noisy.examples)
    CHECK(conv.convert_utf8(ex.source) != ex.target);
}

TEST_CASE("generate_synthetic is seed-deterministic") {
  const auto a =
      generate_synthetic(missionary(), official(), mission_rules(), 25, 3,
                         0.5);
  const auto b =
      generate_synthetic(missionary(), official(), mission_rules(), 25, 3,
                         0.5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.examples[i].source == b.examples[i].source);
    CHECK(a.examples[i].target == b.examples[i].target);
  }
  const auto c =
      generate_synthetic(missionary(), official(), mission_rules(), 25, 4,
                         0.5);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.examples[i].source != c.examples[i].source) differs = true;
  CHECK(differs);

  CHECK_THROWS_AS(generate_synthetic(missionary(), official(),
                                     mission_rules(), 5, 3, -0.1),
                  error);
  CHECK_THROWS_AS(generate_synthetic(missionary(), official(),
                                     mission_rules(), 5, 3, 1.5),
                  error);
}

TEST_CASE("generated corpora survive the TSV round trip") {
  const parallel_corpus corpus =
      generate_synthetic(missionary(), official(), mission_rules(), 30, 21,
                         0.3);
  const std::string path = tmp_path("generated.tsv");
  save_parallel(corpus, path);
  const parallel_corpus back = load_parallel(path);
  REQUIRE(back.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(back.examples[i].source == corpus.examples[i].source);
    CHECK(back.examples[i].target == corpus.examples[i].target);
  }
}
