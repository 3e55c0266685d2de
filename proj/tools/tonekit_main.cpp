// tonekit command-line tool: orthography normalization, rule-based
// conversion, edit tagging, synthetic corpus generation, seq2seq
// training/prediction/sweeps, evaluation, and the end-to-end pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error (bad files, bad
// flags' referents, mismatched inputs), 3 runtime error (divergence).
// Diagnostics go to stderr; data goes to stdout or the --out file.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tonekit/tonekit.hpp"

namespace {

std::vector<std::string> input_lines(const std::string& path) {
  if (path.empty()) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(std::cin, line)) lines.push_back(line);
    return lines;
  }
  return tonekit::read_lines(path);
}

void output_lines(const std::string& path,
                  const std::vector<std::string>& lines) {
  if (path.empty()) {
    for (const auto& line : lines) std::cout << line << "\n";
  } else {
    tonekit::write_lines(path, lines);
  }
}

void output_text(const std::string& path, const std::string& text) {
  if (path.empty())
    std::cout << text;
  else
    tonekit::atomic_write(path, text);
}

template <typename F>
std::vector<std::string> map_lines(const std::vector<std::string>& lines,
                                   F transform) {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(transform(lines[i]));
    } catch (const tonekit::error& e) {
      throw tonekit::error("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  for (const auto& word : tonekit::split_words(tonekit::decode_utf8(line)))
    tokens.push_back(tonekit::encode_utf8(word));
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

// Splits a semicolon-joined tag field, honouring backslash escapes.
std::vector<std::string> split_tag_field(const std::string& field) {
  std::vector<std::string> parts;
  std::string current;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const char c = field[i];
    if (c == '\\' && i + 1 < field.size()) {
      current.push_back(c);
      current.push_back(field[++i]);
    } else if (c == ';') {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tonekit::parse_error("cannot open " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw tonekit::parse_error(path + ": " + e.what());
  }
}

void parse_sizes(const std::string& text, std::size_t& a, std::size_t& b,
                 std::size_t& c) {
  std::size_t first = text.find(',');
  std::size_t second = first == std::string::npos
                           ? std::string::npos
                           : text.find(',', first + 1);
  if (first == std::string::npos || second == std::string::npos ||
      text.find(',', second + 1) != std::string::npos)
    throw tonekit::parse_error("--sizes expects train,valid,test counts");
  try {
    a = std::stoull(text.substr(0, first));
    b = std::stoull(text.substr(first + 1, second - first - 1));
    c = std::stoull(text.substr(second + 1));
  } catch (const std::exception&) {
    throw tonekit::parse_error("--sizes expects three non-negative counts");
  }
}

std::string maybe_compose(const std::u32string& text, bool compose) {
  return tonekit::encode_utf8(compose ? tonekit::compose_display(text)
                                      : text);
}

void check_rule_profiles(const tonekit::rule_set& rules,
                         const tonekit::orthography_profile& source,
                         const tonekit::orthography_profile& target) {
  if (rules.source_profile != source.id)
    throw tonekit::parse_error("rule set is for source profile \"" +
                               rules.source_profile +
                               "\" but the loaded profile is \"" + source.id +
                               "\"");
  if (rules.target_profile != target.id)
    throw tonekit::parse_error("rule set is for target profile \"" +
                               rules.target_profile +
                               "\" but the loaded profile is \"" + target.id +
                               "\"");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tonekit: tonal-orthography conversion toolkit"};
  app.require_subcommand(1);

  // --- normalize / denormalize ------------------------------------------------
  struct {
    std::string profile, in, out;
  } norm;
  auto* normalize_cmd = app.add_subcommand(
      "normalize", "Unify digraphs into single code points");
  normalize_cmd->add_option("--profile", norm.profile, "profile JSON file")
      ->required();
  normalize_cmd->add_option("--in", norm.in, "input file (default stdin)");
  normalize_cmd->add_option("--out", norm.out, "output file (default stdout)");

  auto* denormalize_cmd = app.add_subcommand(
      "denormalize", "Expand unified code points back into digraphs");
  denormalize_cmd->add_option("--profile", norm.profile, "profile JSON file")
      ->required();
  denormalize_cmd->add_option("--in", norm.in, "input file (default stdin)");
  denormalize_cmd->add_option("--out", norm.out,
                              "output file (default stdout)");

  // --- convert-rules ------------------------------------------------------------
  struct {
    std::string rules, from_profile, to_profile, in, out;
    bool no_hts = false;
    bool compose = false;
  } conv;
  auto* convert_cmd = app.add_subcommand(
      "convert-rules", "Rule-based conversion between orthographies");
  convert_cmd->add_option("--rules", conv.rules, "rule set JSON file")
      ->required();
  convert_cmd
      ->add_option("--from-profile", conv.from_profile,
                   "source profile JSON file")
      ->required();
  convert_cmd
      ->add_option("--to-profile", conv.to_profile,
                   "target profile JSON file")
      ->required();
  convert_cmd->add_option("--in", conv.in, "input file (default stdin)");
  convert_cmd->add_option("--out", conv.out, "output file (default stdout)");
  convert_cmd->add_flag("--no-hts", conv.no_hts,
                        "skip the high-tone-spreading rule");
  convert_cmd->add_flag("--compose", conv.compose,
                        "emit precomposed characters");

  // --- derive-tags / apply-tags --------------------------------------------------
  struct {
    std::string src, tgt, tags, out;
  } tags;
  auto* derive_cmd = app.add_subcommand(
      "derive-tags", "Derive per-token edit tags from parallel sentences");
  derive_cmd->add_option("--src", tags.src, "source sentences, one per line")
      ->required();
  derive_cmd->add_option("--tgt", tags.tgt, "target sentences, one per line")
      ->required();
  derive_cmd->add_option("--out", tags.out, "tags TSV (default stdout)");

  auto* apply_cmd = app.add_subcommand(
      "apply-tags", "Apply a tags TSV back into sentences");
  apply_cmd->add_option("--tags", tags.tags, "tags TSV file")->required();
  apply_cmd->add_option("--out", tags.out, "output file (default stdout)");

  // --- generate / split -----------------------------------------------------------
  struct {
    std::string profile_src, profile_tgt, rules, out;
    std::size_t n = 0;
    std::uint64_t seed = 42;
    double noise = 0.0;
  } gen;
  auto* generate_cmd = app.add_subcommand(
      "generate", "Generate a synthetic parallel corpus");
  generate_cmd
      ->add_option("--profile-src", gen.profile_src,
                   "source profile JSON file")
      ->required();
  generate_cmd
      ->add_option("--profile-tgt", gen.profile_tgt,
                   "target profile JSON file")
      ->required();
  generate_cmd->add_option("--rules", gen.rules, "rule set JSON file")
      ->required();
  generate_cmd->add_option("-n", gen.n, "number of sentence pairs")
      ->required();
  generate_cmd->add_option("--seed", gen.seed, "generator seed");
  generate_cmd->add_option("--noise", gen.noise,
                           "fraction of targets perturbed by one edit");
  generate_cmd->add_option("--out", gen.out, "output TSV file")->required();

  struct {
    std::string in, sizes, out_prefix;
    std::uint64_t seed = 42;
  } spl;
  auto* split_cmd = app.add_subcommand(
      "split", "Deterministically split a corpus into train/valid/test");
  split_cmd->add_option("--in", spl.in, "corpus TSV file")->required();
  split_cmd->add_option("--sizes", spl.sizes, "train,valid,test counts")
      ->required();
  split_cmd->add_option("--seed", spl.seed, "shuffle seed");
  split_cmd
      ->add_option("--out-prefix", spl.out_prefix,
                   "writes PREFIX.train.tsv, PREFIX.valid.tsv, "
                   "PREFIX.test.tsv")
      ->required();

  // --- train / predict / sweep ------------------------------------------------------
  struct {
    std::string corpus, config, out, model, in;
    std::size_t epochs = 0, max_len = 0, embed_dim = 0, hidden_dim = 0,
                batch_size = 0;
    double learning_rate = 0.0, teacher_forcing = 0.0;
    std::uint64_t seed = 0;
    bool compose = false;
  } nn;
  auto* train_cmd =
      app.add_subcommand("train", "Train the character seq2seq model");
  train_cmd->add_option("--corpus", nn.corpus, "training corpus TSV")
      ->required();
  train_cmd->add_option("--config", nn.config, "train config JSON file");
  train_cmd->add_option("--out", nn.out, "checkpoint output path")
      ->required();
  auto* opt_epochs = train_cmd->add_option("--epochs", nn.epochs);
  auto* opt_max_len = train_cmd->add_option("--max-len", nn.max_len);
  auto* opt_embed = train_cmd->add_option("--embed-dim", nn.embed_dim);
  auto* opt_hidden = train_cmd->add_option("--hidden-dim", nn.hidden_dim);
  auto* opt_batch = train_cmd->add_option("--batch-size", nn.batch_size);
  auto* opt_lr = train_cmd->add_option("--learning-rate", nn.learning_rate);
  auto* opt_tf =
      train_cmd->add_option("--teacher-forcing", nn.teacher_forcing);
  auto* opt_seed = train_cmd->add_option("--seed", nn.seed);

  auto* predict_cmd = app.add_subcommand(
      "predict", "Greedy decoding with a trained checkpoint");
  predict_cmd->add_option("--model", nn.model, "checkpoint JSON file")
      ->required();
  predict_cmd->add_option("--in", nn.in, "input file (default stdin)");
  predict_cmd->add_option("--out", nn.out, "output file (default stdout)");
  predict_cmd->add_flag("--compose", nn.compose,
                        "emit precomposed characters");

  struct {
    std::string train, eval, grid, out;
    bool json = false;
  } sw;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Train one model per grid row and report CER/WER");
  sweep_cmd->add_option("--train", sw.train, "training corpus TSV")
      ->required();
  sweep_cmd->add_option("--eval", sw.eval, "evaluation corpus TSV")
      ->required();
  sweep_cmd->add_option("--grid", sw.grid, "grid JSON file")->required();
  sweep_cmd->add_flag("--json", sw.json, "machine-readable report");
  sweep_cmd->add_option("--out", sw.out, "also write the report here");

  // --- evaluate / pipeline ------------------------------------------------------------
  struct {
    std::string hyp, ref, normalize_profile;
    bool json = false;
  } ev;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Score hypotheses against references");
  evaluate_cmd->add_option("--hyp", ev.hyp, "hypothesis file")->required();
  evaluate_cmd->add_option("--ref", ev.ref, "reference file")->required();
  evaluate_cmd->add_flag("--json", ev.json, "machine-readable report");
  evaluate_cmd->add_option(
      "--normalize-profile", ev.normalize_profile,
      "score in digraph-unified space using this profile");

  struct {
    std::string config;
    bool json = false;
  } pl;
  auto* pipeline_cmd = app.add_subcommand(
      "pipeline", "generate-independent end-to-end run: normalize, train, "
                  "predict, denormalize, evaluate");
  pipeline_cmd->add_option("--config", pl.config, "pipeline config JSON")
      ->required();
  pipeline_cmd->add_flag("--json", pl.json, "machine-readable report");

  try {
    app.parse(argc, argv);

    if (normalize_cmd->parsed() || denormalize_cmd->parsed()) {
      const tonekit::orthography_profile profile =
          tonekit::load_profile(norm.profile);
      const tonekit::normalization_table table =
          tonekit::compile_table(profile);
      const bool forward = normalize_cmd->parsed();
      output_lines(norm.out,
                   map_lines(input_lines(norm.in), [&](const std::string& s) {
                     const std::u32string text = tonekit::canonicalize_utf8(s);
                     return tonekit::encode_utf8(
                         forward ? tonekit::normalize(text, table)
                                 : tonekit::denormalize(text, table));
                   }));
    } else if (convert_cmd->parsed()) {
      const tonekit::orthography_profile source =
          tonekit::load_profile(conv.from_profile);
      const tonekit::orthography_profile target =
          tonekit::load_profile(conv.to_profile);
      const tonekit::rule_set rules = tonekit::load_rules(conv.rules);
      check_rule_profiles(rules, source, target);
      tonekit::convert_options options;
      options.high_tone_spreading = !conv.no_hts;
      const tonekit::rule_converter converter(rules, source, target, options);
      output_lines(conv.out,
                   map_lines(input_lines(conv.in), [&](const std::string& s) {
                     return maybe_compose(
                         converter.convert_line(tonekit::canonicalize_utf8(s)),
                         conv.compose);
                   }));
    } else if (derive_cmd->parsed()) {
      const std::vector<std::string> src_lines = input_lines(tags.src);
      const std::vector<std::string> tgt_lines = input_lines(tags.tgt);
      if (src_lines.size() != tgt_lines.size())
        throw tonekit::length_mismatch(
            "--src has " + std::to_string(src_lines.size()) +
            " lines, --tgt has " + std::to_string(tgt_lines.size()));
      std::string out;
      for (std::size_t i = 0; i < src_lines.size(); ++i) {
        const tonekit::tagged_sentence sentence = tonekit::derive_tags(
            tokenize(src_lines[i]), tokenize(tgt_lines[i]));
        for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
          out += sentence.tokens[t];
          out += '\t';
          for (std::size_t k = 0; k < sentence.tags[t].size(); ++k) {
            if (k > 0) out += ';';
            out += tonekit::tag_to_string(sentence.tags[t][k]);
          }
          out += '\n';
        }
        out += '\n';  // blank line ends each sentence block
      }
      output_text(tags.out, out);
    } else if (apply_cmd->parsed()) {
      const std::vector<std::string> rows = tonekit::read_lines(tags.tags);
      std::vector<std::string> sentences;
      tonekit::tagged_sentence current;
      const auto finish = [&]() {
        if (current.tokens.empty()) return;
        current = tonekit::resolve_conflicts(std::move(current));
        sentences.push_back(join_tokens(tonekit::apply_tags(current)));
        current = {};
      };
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string& row = rows[i];
        if (row.empty()) {
          finish();
          continue;
        }
        const std::size_t tab = row.find('\t');
        if (tab == std::string::npos || tab + 1 == row.size())
          throw tonekit::malformed_line(
              tags.tags + ":" + std::to_string(i + 1) +
                  ": expected token<TAB>tags",
              i + 1);
        current.tokens.push_back(row.substr(0, tab));
        auto& list = current.tags.emplace_back();
        for (const std::string& item : split_tag_field(row.substr(tab + 1)))
          list.push_back(tonekit::tag_from_string(item));
      }
      finish();
      output_lines(tags.out, sentences);
    } else if (generate_cmd->parsed()) {
      const tonekit::orthography_profile source =
          tonekit::load_profile(gen.profile_src);
      const tonekit::orthography_profile target =
          tonekit::load_profile(gen.profile_tgt);
      const tonekit::rule_set rules = tonekit::load_rules(gen.rules);
      check_rule_profiles(rules, source, target);
      const tonekit::parallel_corpus corpus = tonekit::generate_synthetic(
          source, target, rules, gen.n, gen.seed, gen.noise);
      tonekit::save_parallel(corpus, gen.out);
      std::cerr << "wrote " << corpus.size() << " pairs to " << gen.out
                << "\n";
    } else if (split_cmd->parsed()) {
      std::size_t n_train = 0, n_valid = 0, n_test = 0;
      parse_sizes(spl.sizes, n_train, n_valid, n_test);
      tonekit::parallel_corpus corpus = tonekit::split_corpus(
          tonekit::load_parallel(spl.in), n_train, n_valid, n_test, spl.seed);
      const auto save_subset = [&](tonekit::split_label label,
                                   const std::string& suffix) {
        tonekit::parallel_corpus part;
        part.examples = corpus.subset(label);
        tonekit::save_parallel(part, spl.out_prefix + suffix);
        std::cerr << spl.out_prefix << suffix << ": "
                  << part.examples.size() << " pairs\n";
      };
      save_subset(tonekit::split_label::train, ".train.tsv");
      save_subset(tonekit::split_label::valid, ".valid.tsv");
      save_subset(tonekit::split_label::test, ".test.tsv");
      tonekit::parallel_corpus rest;
      for (const auto& ex : corpus.examples)
        if (!ex.split) rest.examples.push_back(ex);
      if (!rest.examples.empty()) {
        tonekit::save_parallel(rest, spl.out_prefix + ".rest.tsv");
        std::cerr << spl.out_prefix << ".rest.tsv: "
                  << rest.examples.size() << " pairs\n";
      }
    } else if (train_cmd->parsed()) {
      tonekit::train_config config =
          nn.config.empty()
              ? tonekit::train_config{}
              : tonekit::config_from_json(read_json_file(nn.config));
      if (opt_epochs->count()) config.epochs = nn.epochs;
      if (opt_max_len->count()) config.max_len = nn.max_len;
      if (opt_embed->count()) config.embed_dim = nn.embed_dim;
      if (opt_hidden->count()) config.hidden_dim = nn.hidden_dim;
      if (opt_batch->count()) config.batch_size = nn.batch_size;
      if (opt_lr->count()) config.learning_rate = nn.learning_rate;
      if (opt_tf->count()) config.teacher_forcing = nn.teacher_forcing;
      if (opt_seed->count()) config.seed = nn.seed;
      config.validate();
      const tonekit::parallel_corpus corpus =
          tonekit::load_parallel(nn.corpus);
      const tonekit::train_result result = tonekit::train(corpus, config);
      for (std::size_t e = 0; e < result.loss_log.size(); ++e)
        std::cerr << "epoch " << (e + 1) << " loss "
                  << tonekit::format_rate(result.loss_log[e]) << "\n";
      if (result.truncated > 0)
        std::cerr << result.truncated << " examples truncated to max_len "
                  << config.max_len << "\n";
      tonekit::save_model(result.model, nn.out);
      std::cerr << "wrote checkpoint " << nn.out << "\n";
    } else if (predict_cmd->parsed()) {
      const tonekit::seq2seq_model model = tonekit::load_model(nn.model);
      output_lines(nn.out,
                   map_lines(input_lines(nn.in), [&](const std::string& s) {
                     return maybe_compose(
                         tonekit::predict(model, tonekit::canonicalize_utf8(s)),
                         nn.compose);
                   }));
    } else if (sweep_cmd->parsed()) {
      const nlohmann::json grid_doc = read_json_file(sw.grid);
      if (!grid_doc.is_object() || !grid_doc.contains("grid") ||
          !grid_doc["grid"].is_array() || grid_doc["grid"].empty())
        throw tonekit::parse_error(
            sw.grid + ": expected {\"base\": {...}, \"grid\": [{...}, ...]}");
      const nlohmann::json base =
          grid_doc.value("base", nlohmann::json::object());
      std::vector<tonekit::train_config> grid;
      for (const auto& row : grid_doc["grid"]) {
        nlohmann::json merged = base;
        merged.update(row);
        grid.push_back(tonekit::config_from_json(merged));
      }
      const std::vector<tonekit::sweep_row> rows = tonekit::run_sweep(
          tonekit::load_parallel(sw.train), tonekit::load_parallel(sw.eval),
          grid);
      const std::string report = sw.json
                                     ? tonekit::sweep_to_json(rows).dump(2) +
                                           "\n"
                                     : tonekit::sweep_table(rows);
      std::cout << report;
      if (!sw.out.empty()) tonekit::atomic_write(sw.out, report);
    } else if (evaluate_cmd->parsed()) {
      std::vector<std::string> hyps = tonekit::read_lines(ev.hyp);
      std::vector<std::string> refs = tonekit::read_lines(ev.ref);
      if (!ev.normalize_profile.empty()) {
        const tonekit::normalization_table table = tonekit::compile_table(
            tonekit::load_profile(ev.normalize_profile));
        const auto unify = [&](std::vector<std::string>& lines) {
          for (auto& line : lines)
            line = tonekit::encode_utf8(
                tonekit::normalize(tonekit::canonicalize_utf8(line), table));
        };
        unify(hyps);
        unify(refs);
      }
      const tonekit::evaluation_report report = tonekit::evaluate(hyps, refs);
      if (ev.json)
        std::cout << tonekit::report_to_json(report).dump(2) << "\n";
      else
        std::cout << tonekit::report_to_text(report);
    } else if (pipeline_cmd->parsed()) {
      const tonekit::pipeline_result result =
          tonekit::run_pipeline(tonekit::load_pipeline_config(pl.config));
      if (pl.json) {
        std::cout << tonekit::pipeline_report_json(result).dump(2) << "\n";
      } else {
        std::cout << "model         CER "
                  << tonekit::format_rate(result.model_report.cer())
                  << "  WER "
                  << tonekit::format_rate(result.model_report.wer()) << "\n";
        std::cout << "rule baseline CER "
                  << tonekit::format_rate(result.baseline_report.cer())
                  << "  WER "
                  << tonekit::format_rate(result.baseline_report.wer())
                  << "\n";
      }
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 1;
  } catch (const tonekit::divergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const tonekit::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
