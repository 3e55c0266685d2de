#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tonekit/errors.hpp"

namespace tonekit {

// Per-token transformation tag. REPLACE and APPEND carry a token payload.
struct edit_tag {
  enum class kind { keep, del, replace, append, merge_hyphen };
  kind k = kind::keep;
  std::string token;

  static edit_tag keep() { return {kind::keep, {}}; }
  static edit_tag del() { return {kind::del, {}}; }
  static edit_tag replace(std::string t) { return {kind::replace, std::move(t)}; }
  static edit_tag append(std::string t) { return {kind::append, std::move(t)}; }
  static edit_tag merge_hyphen() { return {kind::merge_hyphen, {}}; }

  bool operator==(const edit_tag&) const = default;
};

inline std::string tag_to_string(const edit_tag& tag) {
  const auto escape = [](const std::string& raw) {
    std::string out;
    for (char c : raw) {
      if (c == '\\' || c == ';') out.push_back('\\');
      out.push_back(c);
    }
    return out;
  };
  switch (tag.k) {
    case edit_tag::kind::keep: return "KEEP";
    case edit_tag::kind::del: return "DELETE";
    case edit_tag::kind::replace: return "REPLACE_" + escape(tag.token);
    case edit_tag::kind::append: return "APPEND_" + escape(tag.token);
    case edit_tag::kind::merge_hyphen: return "MERGE_HYPHEN";
  }
  return "KEEP";
}

inline edit_tag tag_from_string(std::string_view text) {
  const auto unescape = [](std::string_view raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 1 < raw.size()) ++i;
      out.push_back(raw[i]);
    }
    return out;
  };
  if (text == "KEEP") return edit_tag::keep();
  if (text == "DELETE") return edit_tag::del();
  if (text == "MERGE_HYPHEN") return edit_tag::merge_hyphen();
  if (text.rfind("REPLACE_", 0) == 0)
    return edit_tag::replace(unescape(text.substr(8)));
  if (text.rfind("APPEND_", 0) == 0)
    return edit_tag::append(unescape(text.substr(7)));
  throw parse_error("unknown edit tag \"" + std::string(text) + "\"");
}

// Virtual sentence-start token. It anchors insertions before the first
// real token and is stripped again on realization.
inline constexpr std::string_view sentence_start = "<s>";

// A tokenized sentence with one tag list per token. tokens[0] is always
// the virtual sentence start.
struct tagged_sentence {
  std::vector<std::string> tokens;
  std::vector<std::vector<edit_tag>> tags;

  bool all_keep() const {
    for (const auto& list : tags)
      for (const auto& tag : list)
        if (tag.k != edit_tag::kind::keep) return false;
    return true;
  }
};

// --- Token-level alignment ---------------------------------------------------

enum class edit_op_kind { match, substitute, erase, insert };

struct edit_op {
  edit_op_kind kind;
  std::size_t src_index;  // token consumed (match/substitute/erase)
  std::size_t tgt_index;  // token produced (match/substitute/insert)
};

// Minimal-cost token edit script under unit costs. Among minimal scripts
// the one with the most matches wins; remaining ties resolve in script
// order by preferring match, then substitute, then erase, then insert.
// The DP therefore runs on suffixes so the script can be read off front
// to back.
inline std::vector<edit_op> align(const std::vector<std::string>& source,
                                  const std::vector<std::string>& target) {
  const std::size_t m = source.size();
  const std::size_t n = target.size();
  // cost[i][j] / matches[i][j]: distance between source[i:] and target[j:]
  // and the most matches attainable at that distance.
  std::vector<std::vector<std::size_t>> cost(m + 1,
                                             std::vector<std::size_t>(n + 1));
  std::vector<std::vector<std::size_t>> matches(
      m + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 0; i <= m; ++i) cost[i][n] = m - i;
  for (std::size_t j = 0; j <= n; ++j) cost[m][j] = n - j;
  for (std::size_t i = m; i-- > 0;)
    for (std::size_t j = n; j-- > 0;) {
      const bool eq = source[i] == target[j];
      std::size_t best = cost[i + 1][j + 1] + (eq ? 0 : 1);
      std::size_t best_matches = matches[i + 1][j + 1] + (eq ? 1 : 0);
      const auto consider = [&](std::size_t c, std::size_t mt) {
        if (c < best || (c == best && mt > best_matches)) {
          best = c;
          best_matches = mt;
        }
      };
      consider(cost[i + 1][j] + 1, matches[i + 1][j]);
      consider(cost[i][j + 1] + 1, matches[i][j + 1]);
      cost[i][j] = best;
      matches[i][j] = best_matches;
    }
  std::vector<edit_op> ops;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < m || j < n) {
    const bool can_diag = i < m && j < n;
    if (can_diag && source[i] == target[j] &&
        cost[i][j] == cost[i + 1][j + 1] &&
        matches[i][j] == matches[i + 1][j + 1] + 1) {
      ops.push_back({edit_op_kind::match, i, j});
      ++i, ++j;
    } else if (can_diag && cost[i][j] == cost[i + 1][j + 1] + 1 &&
               matches[i][j] == matches[i + 1][j + 1]) {
      ops.push_back({edit_op_kind::substitute, i, j});
      ++i, ++j;
    } else if (i < m && cost[i][j] == cost[i + 1][j] + 1 &&
               matches[i][j] == matches[i + 1][j]) {
      ops.push_back({edit_op_kind::erase, i, 0});
      ++i;
    } else {
      ops.push_back({edit_op_kind::insert, 0, j});
      ++j;
    }
  }
  return ops;
}

inline std::size_t alignment_cost(const std::vector<edit_op>& ops) {
  std::size_t cost = 0;
  for (const auto& op : ops)
    if (op.kind != edit_op_kind::match) ++cost;
  return cost;
}

// --- Tag derivation -----------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_hyphen(const std::string& token) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : token) {
    if (c == '-') {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

}  // namespace detail

// Drops KEEP from any tag list that also carries a competing content tag
// (DELETE or REPLACE). KEEP may coexist with APPEND and MERGE_HYPHEN,
// which add material rather than rewrite the token itself.
inline tagged_sentence resolve_conflicts(tagged_sentence sentence) {
  for (auto& list : sentence.tags) {
    const bool has_other = std::any_of(
        list.begin(), list.end(), [](const edit_tag& t) {
          return t.k == edit_tag::kind::del || t.k == edit_tag::kind::replace;
        });
    if (!has_other) continue;
    list.erase(std::remove_if(list.begin(), list.end(),
                              [](const edit_tag& t) {
                                return t.k == edit_tag::kind::keep;
                              }),
               list.end());
  }
  return sentence;
}

// Derives transformation tags that rewrite source into target in one
// application: match -> KEEP, substitute -> REPLACE, erase -> DELETE,
// insert -> APPEND on the previous token. A run of source tokens that
// collapses into one hyphenated target token becomes per-token
// MERGE_HYPHEN (+ REPLACE where the stem changes).
inline tagged_sentence derive_tags(const std::vector<std::string>& source,
                                   const std::vector<std::string>& target) {
  std::vector<edit_op> ops = align(source, target);

  tagged_sentence out;
  out.tokens.reserve(source.size() + 1);
  out.tokens.emplace_back(sentence_start);
  out.tokens.insert(out.tokens.end(), source.begin(), source.end());
  out.tags.assign(out.tokens.size(), {});

  // Hyphen-merge refinement: one substitute op whose target splits on "-"
  // into as many parts as the substitute plus its adjacent erases cover.
  std::vector<bool> consumed(ops.size(), false);
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (ops[k].kind != edit_op_kind::substitute) continue;
    if (target[ops[k].tgt_index].find('-') == std::string::npos) continue;
    const std::vector<std::string> parts =
        detail::split_hyphen(target[ops[k].tgt_index]);
    if (std::any_of(parts.begin(), parts.end(),
                    [](const std::string& s) { return s.empty(); }))
      continue;
    // Extend over neighbouring erase ops (consecutive source tokens).
    std::size_t lo = k;
    while (lo > 0 && ops[lo - 1].kind == edit_op_kind::erase &&
           !consumed[lo - 1])
      --lo;
    std::size_t hi = k;
    while (hi + 1 < ops.size() && ops[hi + 1].kind == edit_op_kind::erase &&
           !consumed[hi + 1])
      ++hi;
    // Shrink to exactly parts.size() source tokens, keeping op k inside.
    while (hi - lo + 1 > parts.size() && lo < k) ++lo;
    while (hi - lo + 1 > parts.size() && hi > k) --hi;
    if (hi - lo + 1 != parts.size()) continue;
    for (std::size_t r = lo; r <= hi; ++r) {
      const std::size_t token_pos = ops[r].src_index + 1;
      const std::string& part = parts[r - lo];
      if (out.tokens[token_pos] == part)
        out.tags[token_pos].push_back(edit_tag::keep());
      else
        out.tags[token_pos].push_back(edit_tag::replace(part));
      if (r != hi) out.tags[token_pos].push_back(edit_tag::merge_hyphen());
      consumed[r] = true;
    }
  }

  std::size_t last_source_pos = 0;  // sentence start
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const edit_op& op = ops[k];
    if (consumed[k]) {
      if (op.kind != edit_op_kind::insert) last_source_pos = op.src_index + 1;
      continue;
    }
    switch (op.kind) {
      case edit_op_kind::match:
        out.tags[op.src_index + 1].push_back(edit_tag::keep());
        last_source_pos = op.src_index + 1;
        break;
      case edit_op_kind::substitute:
        out.tags[op.src_index + 1].push_back(
            edit_tag::replace(target[op.tgt_index]));
        last_source_pos = op.src_index + 1;
        break;
      case edit_op_kind::erase:
        out.tags[op.src_index + 1].push_back(edit_tag::del());
        last_source_pos = op.src_index + 1;
        break;
      case edit_op_kind::insert:
        out.tags[last_source_pos].push_back(
            edit_tag::append(target[op.tgt_index]));
        break;
    }
  }
  for (auto& list : out.tags)
    if (list.empty()) list.push_back(edit_tag::keep());
  return resolve_conflicts(std::move(out));
}

// Realizes a tagged sentence left to right. MERGE_HYPHEN joins a token's
// final output with the next realized token using "-".
inline std::vector<std::string> apply_tags(const tagged_sentence& sentence) {
  if (sentence.tokens.size() != sentence.tags.size())
    throw error("tagged sentence: tokens and tags differ in length");
  std::vector<std::string> out;
  bool merge_pending = false;
  const auto emit = [&](const std::string& token) {
    if (merge_pending && !out.empty()) {
      out.back() += "-" + token;
      merge_pending = false;
    } else {
      out.push_back(token);
    }
  };
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const bool is_start =
        i == 0 && sentence.tokens[i] == std::string(sentence_start);
    bool deleted = is_start;
    const std::string* replacement = nullptr;
    bool merge_here = false;
    for (const auto& tag : sentence.tags[i]) {
      switch (tag.k) {
        case edit_tag::kind::del: deleted = true; break;
        case edit_tag::kind::replace: replacement = &tag.token; break;
        case edit_tag::kind::merge_hyphen: merge_here = true; break;
        default: break;
      }
    }
    if (!deleted) emit(replacement ? *replacement : sentence.tokens[i]);
    for (const auto& tag : sentence.tags[i])
      if (tag.k == edit_tag::kind::append) emit(tag.token);
    if (merge_here && !deleted) merge_pending = true;
  }
  if (merge_pending)
    throw dangling_merge("MERGE_HYPHEN has no following token to join");
  return out;
}

// --- Iterative application ----------------------------------------------------

// A predictor sees the sentence-start-prefixed token list and returns one
// tag list per token.
using tag_predictor =
    std::function<std::vector<std::vector<edit_tag>>(
        const std::vector<std::string>&)>;

struct iterate_result {
  std::vector<std::string> tokens;
  std::size_t iterations = 0;
  bool converged = false;
};

// Predict-and-apply until every tag is KEEP or max_iters applying passes
// have run. `iterations` counts the passes that applied tags; the final
// all-KEEP confirmation is not an iteration. Non-convergence is reported
// through the flag, not an error.
inline iterate_result iterate(std::vector<std::string> source,
                              const tag_predictor& predictor,
                              std::size_t max_iters) {
  if (max_iters < 1) throw error("iterate: max_iters must be at least 1");
  iterate_result result;
  result.tokens = std::move(source);
  while (true) {
    tagged_sentence sentence;
    sentence.tokens.reserve(result.tokens.size() + 1);
    sentence.tokens.emplace_back(sentence_start);
    sentence.tokens.insert(sentence.tokens.end(), result.tokens.begin(),
                           result.tokens.end());
    sentence.tags = predictor(sentence.tokens);
    if (sentence.tags.size() != sentence.tokens.size())
      throw error("predictor returned " +
                  std::to_string(sentence.tags.size()) + " tag lists for " +
                  std::to_string(sentence.tokens.size()) + " tokens");
    sentence = resolve_conflicts(std::move(sentence));
    if (sentence.all_keep()) {
      result.converged = true;
      break;
    }
    if (result.iterations == max_iters) break;
    ++result.iterations;
    result.tokens = apply_tags(sentence);
  }
  return result;
}

// Test-grade oracle: tags the current tokens against a fixed target.
inline tag_predictor make_gold_oracle(std::vector<std::string> target) {
  return [target = std::move(target)](const std::vector<std::string>& tokens) {
    std::vector<std::string> current(tokens.begin() + 1, tokens.end());
    return derive_tags(current, target).tags;
  };
}

// Frequency predictor: memorizes the most common resolved tag list per
// token string from derived training tags; unseen tokens keep.
class unigram_tagger {
 public:
  void train(const std::vector<std::pair<std::vector<std::string>,
                                         std::vector<std::string>>>& pairs) {
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    std::map<std::string, std::map<std::string, std::vector<edit_tag>>> lists;
    for (const auto& [source, target] : pairs) {
      const tagged_sentence tagged = derive_tags(source, target);
      for (std::size_t i = 0; i < tagged.tokens.size(); ++i) {
        std::string key;
        for (const auto& tag : tagged.tags[i]) {
          if (!key.empty()) key.push_back(';');
          key += tag_to_string(tag);
        }
        counts[tagged.tokens[i]][key] += 1;
        lists[tagged.tokens[i]].emplace(key, tagged.tags[i]);
      }
    }
    table_.clear();
    for (const auto& [token, by_key] : counts) {
      std::size_t best_count = 0;
      const std::string* best_key = nullptr;
      for (const auto& [key, count] : by_key) {
        // std::map iterates keys in sorted order, so ties resolve to the
        // lexicographically smallest serialization.
        if (count > best_count) {
          best_count = count;
          best_key = &key;
        }
      }
      table_[token] = lists[token][*best_key];
    }
  }

  std::vector<std::vector<edit_tag>> predict(
      const std::vector<std::string>& tokens) const {
    std::vector<std::vector<edit_tag>> tags;
    tags.reserve(tokens.size());
    for (const auto& token : tokens) {
      auto it = table_.find(token);
      if (it == table_.end())
        tags.push_back({edit_tag::keep()});
      else
        tags.push_back(it->second);
    }
    return tags;
  }

  tag_predictor as_predictor() const {
    return [this](const std::vector<std::string>& tokens) {
      return predict(tokens);
    };
  }

  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::vector<edit_tag>> table_;
};

}  // namespace tonekit
