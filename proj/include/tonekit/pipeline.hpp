#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tonekit/corpus.hpp"
#include "tonekit/errors.hpp"
#include "tonekit/metrics.hpp"
#include "tonekit/normalizer.hpp"
#include "tonekit/rules.hpp"
#include "tonekit/seq2seq.hpp"
#include "tonekit/text_model.hpp"
#include "tonekit/unicode.hpp"

namespace tonekit {

// End-to-end run description: which profiles and rules to use, which
// corpus to consume, how to split and train, and where artifacts land.
struct pipeline_config {
  std::map<std::string, std::string> profile_paths;  // profile id → file
  std::string source_profile;                        // id into profile_paths
  std::string target_profile;                        // id into profile_paths
  std::string rules_path;
  std::string corpus_path;
  std::array<std::size_t, 3> split_sizes = {0, 0, 0};
  std::uint64_t split_seed = 42;
  train_config train;
  std::string model_out;
  std::string report_out;
};

inline pipeline_config pipeline_config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw parse_error("pipeline config: expected a JSON object");
  for (const char* key : {"profiles", "source_profile", "target_profile",
                          "rules", "corpus", "split", "model_out",
                          "report_out"})
    if (!j.contains(key))
      throw parse_error(std::string("pipeline config: missing \"") + key +
                        "\"");

  pipeline_config config;
  if (!j["profiles"].is_object() || j["profiles"].empty())
    throw parse_error("pipeline config.profiles: expected a non-empty "
                      "object of id → path");
  for (const auto& [id, path] : j["profiles"].items()) {
    if (!path.is_string())
      throw parse_error("pipeline config.profiles." + id +
                        ": expected a file path string");
    config.profile_paths[id] = path.get<std::string>();
  }
  for (const char* key : {"source_profile", "target_profile", "rules",
                          "corpus", "model_out", "report_out"})
    if (!j[key].is_string())
      throw parse_error(std::string("pipeline config.") + key +
                        ": expected a string");
  config.source_profile = j["source_profile"].get<std::string>();
  config.target_profile = j["target_profile"].get<std::string>();
  config.rules_path = j["rules"].get<std::string>();
  config.corpus_path = j["corpus"].get<std::string>();
  config.model_out = j["model_out"].get<std::string>();
  config.report_out = j["report_out"].get<std::string>();

  const nlohmann::json& split = j["split"];
  if (!split.is_object() || !split.contains("sizes") ||
      !split["sizes"].is_array() || split["sizes"].size() != 3)
    throw parse_error("pipeline config.split: expected {sizes: [train, "
                      "valid, test], seed}");
  for (std::size_t i = 0; i < 3; ++i) {
    if (!split["sizes"][i].is_number_unsigned())
      throw parse_error("pipeline config.split.sizes: expected counts");
    config.split_sizes[i] = split["sizes"][i].get<std::size_t>();
  }
  if (split.contains("seed")) {
    if (!split["seed"].is_number_unsigned())
      throw parse_error("pipeline config.split.seed: expected an integer");
    config.split_seed = split["seed"].get<std::uint64_t>();
  }
  config.train =
      j.contains("train") ? config_from_json(j["train"]) : train_config{};

  for (const auto& [id, path] : config.profile_paths)
    if (!std::filesystem::exists(path))
      throw parse_error("pipeline config.profiles." + id + ": " + path +
                        " does not exist");
  if (!config.profile_paths.count(config.source_profile))
    throw parse_error("pipeline config.source_profile: \"" +
                      config.source_profile + "\" not in profiles");
  if (!config.profile_paths.count(config.target_profile))
    throw parse_error("pipeline config.target_profile: \"" +
                      config.target_profile + "\" not in profiles");
  if (!std::filesystem::exists(config.rules_path))
    throw parse_error("pipeline config.rules: " + config.rules_path +
                      " does not exist");
  if (!std::filesystem::exists(config.corpus_path))
    throw parse_error("pipeline config.corpus: " + config.corpus_path +
                      " does not exist");
  return config;
}

inline pipeline_config load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open pipeline config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
  return pipeline_config_from_json(j);
}

struct pipeline_result {
  evaluation_report model_report;
  evaluation_report baseline_report;
  std::vector<double> loss_log;
  std::size_t truncated = 0;
  std::array<std::size_t, 3> split_sizes = {0, 0, 0};
};

inline nlohmann::json pipeline_report_json(const pipeline_result& result) {
  return nlohmann::json{
      {"model", report_to_json(result.model_report)},
      {"rule_baseline", report_to_json(result.baseline_report)},
      {"loss_log", result.loss_log},
      {"truncated_examples", result.truncated},
      {"split", {{"train", result.split_sizes[0]},
                 {"valid", result.split_sizes[1]},
                 {"test", result.split_sizes[2]}}}};
}

// Runs normalize → train → predict → denormalize → evaluate over the
// configured corpus, scores the rule baseline on the same test split,
// and writes the model checkpoint and JSON report atomically. Aborts at
// the first failing stage, naming it.
inline pipeline_result run_pipeline(const pipeline_config& config) {
  std::string stage = "load";
  try {
    const orthography_profile source =
        load_profile(config.profile_paths.at(config.source_profile));
    const orthography_profile target =
        load_profile(config.profile_paths.at(config.target_profile));
    const rule_set rules = load_rules(config.rules_path);
    parallel_corpus corpus = load_parallel(config.corpus_path);

    stage = "split";
    corpus = split_corpus(std::move(corpus), config.split_sizes[0],
                          config.split_sizes[1], config.split_sizes[2],
                          config.split_seed);
    const auto train_set = corpus.subset(split_label::train);
    const auto test_set = corpus.subset(split_label::test);

    stage = "normalize";
    const normalization_table source_table = compile_table(source);
    const normalization_table target_table = compile_table(target);
    parallel_corpus train_normalized;
    for (const auto& ex : train_set)
      train_normalized.examples.push_back(
          {encode_utf8(normalize(decode_utf8(ex.source), source_table)),
           encode_utf8(normalize(decode_utf8(ex.target), target_table)),
           std::nullopt});

    stage = "train";
    train_result trained = train(train_normalized, config.train);

    stage = "predict";
    std::vector<std::string> hypotheses;
    hypotheses.reserve(test_set.size());
    for (const auto& ex : test_set)
      hypotheses.push_back(encode_utf8(predict(
          trained.model, normalize(decode_utf8(ex.source), source_table))));

    stage = "denormalize";
    for (auto& hyp : hypotheses)
      hyp = encode_utf8(denormalize(decode_utf8(hyp), target_table));

    stage = "evaluate";
    std::vector<std::string> references;
    references.reserve(test_set.size());
    for (const auto& ex : test_set) references.push_back(ex.target);
    pipeline_result result;
    result.model_report = evaluate(hypotheses, references);

    const rule_converter converter(rules, source, target);
    std::vector<std::string> baseline;
    baseline.reserve(test_set.size());
    for (const auto& ex : test_set)
      baseline.push_back(converter.convert_utf8(ex.source));
    result.baseline_report = evaluate(baseline, references);

    result.loss_log = std::move(trained.loss_log);
    result.truncated = trained.truncated;
    result.split_sizes = config.split_sizes;

    stage = "write";
    save_model(trained.model, config.model_out);
    atomic_write(config.report_out,
                 pipeline_report_json(result).dump(2) + "\n");
    return result;
  } catch (const divergence_error& e) {
    throw divergence_error("pipeline stage " + stage + ": " + e.what());
  } catch (const error& e) {
    throw error("pipeline stage " + stage + ": " + e.what());
  }
}

}  // namespace tonekit
