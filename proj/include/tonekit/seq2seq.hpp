#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tonekit/corpus.hpp"
#include "tonekit/errors.hpp"
#include "tonekit/metrics.hpp"
#include "tonekit/rng.hpp"
#include "tonekit/unicode.hpp"

namespace tonekit {

// --- Vocabulary -----------------------------------------------------------------

// Dense character ids: four specials, then the corpus code points in
// ascending order.
struct vocabulary {
  static constexpr int pad = 0;
  static constexpr int bos = 1;
  static constexpr int eos = 2;
  static constexpr int unk = 3;

  std::vector<char32_t> chars;  // ascending, ids 4..4+chars.size()-1
  std::unordered_map<char32_t, int> ids;

  int size() const { return 4 + static_cast<int>(chars.size()); }

  int id_of(char32_t cp) const {
    auto it = ids.find(cp);
    return it == ids.end() ? unk : it->second;
  }

  char32_t char_of(int id) const {
    return chars.at(static_cast<std::size_t>(id - 4));
  }

  void index() {
    ids.clear();
    for (std::size_t i = 0; i < chars.size(); ++i)
      ids[chars[i]] = 4 + static_cast<int>(i);
  }
};

inline vocabulary build_vocab(const parallel_corpus& corpus) {
  if (corpus.examples.empty())
    throw empty_corpus("cannot build a vocabulary from an empty corpus");
  std::set<char32_t> seen;
  for (const auto& ex : corpus.examples) {
    for (char32_t cp : decode_utf8(ex.source)) seen.insert(cp);
    for (char32_t cp : decode_utf8(ex.target)) seen.insert(cp);
  }
  vocabulary vocab;
  vocab.chars.assign(seen.begin(), seen.end());
  vocab.index();
  return vocab;
}

inline nlohmann::json vocab_to_json(const vocabulary& vocab) {
  std::vector<std::uint32_t> points;
  points.reserve(vocab.chars.size());
  for (char32_t cp : vocab.chars) points.push_back(cp);
  return nlohmann::json{{"chars", points}};
}

inline vocabulary vocab_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("chars") || !j["chars"].is_array())
    throw parse_error("vocab: expected object with a \"chars\" array");
  vocabulary vocab;
  for (const auto& item : j["chars"]) {
    if (!item.is_number_unsigned())
      throw parse_error("vocab.chars: entries must be code point numbers");
    vocab.chars.push_back(static_cast<char32_t>(item.get<std::uint32_t>()));
  }
  if (!std::is_sorted(vocab.chars.begin(), vocab.chars.end()) ||
      std::adjacent_find(vocab.chars.begin(), vocab.chars.end()) !=
          vocab.chars.end())
    throw parse_error("vocab.chars: must be strictly ascending");
  vocab.index();
  return vocab;
}

// --- Training configuration ------------------------------------------------------

struct train_config {
  std::size_t epochs = 30;
  std::size_t max_len = 40;  // characters per side, post-normalization
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 128;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  double teacher_forcing = 1.0;

  void validate() const {
    if (epochs < 1) throw parse_error("config.epochs must be >= 1");
    if (max_len < 2) throw parse_error("config.max_len must be >= 2");
    if (embed_dim < 1 || hidden_dim < 1)
      throw parse_error("config dimensions must be >= 1");
    if (!(learning_rate > 0.0))
      throw parse_error("config.learning_rate must be positive");
    if (batch_size < 1) throw parse_error("config.batch_size must be >= 1");
    if (teacher_forcing < 0.0 || teacher_forcing > 1.0)
      throw parse_error("config.teacher_forcing must lie in [0,1]");
  }
};

inline nlohmann::json config_to_json(const train_config& c) {
  return nlohmann::json{{"epochs", c.epochs},
                        {"max_len", c.max_len},
                        {"embed_dim", c.embed_dim},
                        {"hidden_dim", c.hidden_dim},
                        {"learning_rate", c.learning_rate},
                        {"batch_size", c.batch_size},
                        {"seed", c.seed},
                        {"teacher_forcing", c.teacher_forcing}};
}

// Missing keys fall back to defaults; unknown keys are rejected so that a
// typo cannot silently run with defaults.
inline train_config config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw parse_error("config: expected a JSON object");
  static const std::set<std::string> known = {
      "epochs",     "max_len",       "embed_dim", "hidden_dim",
      "learning_rate", "batch_size", "seed",      "teacher_forcing"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw parse_error("config: unknown key \"" + key + "\"");
  train_config c;
  const auto count_field = [&](const char* key, std::size_t& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_unsigned())
      throw parse_error(std::string("config.") + key +
                        ": expected a non-negative integer");
    out = j[key].get<std::size_t>();
  };
  count_field("epochs", c.epochs);
  count_field("max_len", c.max_len);
  count_field("embed_dim", c.embed_dim);
  count_field("hidden_dim", c.hidden_dim);
  count_field("batch_size", c.batch_size);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned())
      throw parse_error("config.seed: expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  const auto real_field = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number())
      throw parse_error(std::string("config.") + key + ": expected a number");
    out = j[key].get<double>();
  };
  real_field("learning_rate", c.learning_rate);
  real_field("teacher_forcing", c.teacher_forcing);
  c.validate();
  return c;
}

// --- Parameters -------------------------------------------------------------------

// All 26 parameter tensors of the model. Biases and the attention score
// vector are stored as single-column matrices so one field table drives
// initialization, serialization, norms, and updates uniformly.
struct parameter_set {
  Eigen::MatrixXd src_embed, tgt_embed;
  Eigen::MatrixXd enc_wz, enc_uz, enc_bz, enc_wr, enc_ur, enc_br, enc_wc,
      enc_uc, enc_bc;
  Eigen::MatrixXd dec_wz, dec_uz, dec_bz, dec_wr, dec_ur, dec_br, dec_wc,
      dec_uc, dec_bc;
  Eigen::MatrixXd attn_query, attn_key, attn_bias, attn_score;
  Eigen::MatrixXd out_w, out_b;

  using field = Eigen::MatrixXd parameter_set::*;

  static const std::vector<std::pair<std::string, field>>& fields() {
    static const std::vector<std::pair<std::string, field>> table = {
        {"src_embed", &parameter_set::src_embed},
        {"tgt_embed", &parameter_set::tgt_embed},
        {"enc_wz", &parameter_set::enc_wz},
        {"enc_uz", &parameter_set::enc_uz},
        {"enc_bz", &parameter_set::enc_bz},
        {"enc_wr", &parameter_set::enc_wr},
        {"enc_ur", &parameter_set::enc_ur},
        {"enc_br", &parameter_set::enc_br},
        {"enc_wc", &parameter_set::enc_wc},
        {"enc_uc", &parameter_set::enc_uc},
        {"enc_bc", &parameter_set::enc_bc},
        {"dec_wz", &parameter_set::dec_wz},
        {"dec_uz", &parameter_set::dec_uz},
        {"dec_bz", &parameter_set::dec_bz},
        {"dec_wr", &parameter_set::dec_wr},
        {"dec_ur", &parameter_set::dec_ur},
        {"dec_br", &parameter_set::dec_br},
        {"dec_wc", &parameter_set::dec_wc},
        {"dec_uc", &parameter_set::dec_uc},
        {"dec_bc", &parameter_set::dec_bc},
        {"attn_query", &parameter_set::attn_query},
        {"attn_key", &parameter_set::attn_key},
        {"attn_bias", &parameter_set::attn_bias},
        {"attn_score", &parameter_set::attn_score},
        {"out_w", &parameter_set::out_w},
        {"out_b", &parameter_set::out_b}};
    return table;
  }

  // Allocates every tensor for the given sizes, zero-filled.
  void shape(int vocab_size, int embed_dim, int hidden_dim) {
    const int V = vocab_size, D = embed_dim, H = hidden_dim;
    const int X = D + H;  // decoder input: embedding + attention context
    src_embed = Eigen::MatrixXd::Zero(V, D);
    tgt_embed = Eigen::MatrixXd::Zero(V, D);
    enc_wz = Eigen::MatrixXd::Zero(H, D);
    enc_uz = Eigen::MatrixXd::Zero(H, H);
    enc_bz = Eigen::MatrixXd::Zero(H, 1);
    enc_wr = Eigen::MatrixXd::Zero(H, D);
    enc_ur = Eigen::MatrixXd::Zero(H, H);
    enc_br = Eigen::MatrixXd::Zero(H, 1);
    enc_wc = Eigen::MatrixXd::Zero(H, D);
    enc_uc = Eigen::MatrixXd::Zero(H, H);
    enc_bc = Eigen::MatrixXd::Zero(H, 1);
    dec_wz = Eigen::MatrixXd::Zero(H, X);
    dec_uz = Eigen::MatrixXd::Zero(H, H);
    dec_bz = Eigen::MatrixXd::Zero(H, 1);
    dec_wr = Eigen::MatrixXd::Zero(H, X);
    dec_ur = Eigen::MatrixXd::Zero(H, H);
    dec_br = Eigen::MatrixXd::Zero(H, 1);
    dec_wc = Eigen::MatrixXd::Zero(H, X);
    dec_uc = Eigen::MatrixXd::Zero(H, H);
    dec_bc = Eigen::MatrixXd::Zero(H, 1);
    attn_query = Eigen::MatrixXd::Zero(H, H);
    attn_key = Eigen::MatrixXd::Zero(H, H);
    attn_bias = Eigen::MatrixXd::Zero(H, 1);
    attn_score = Eigen::MatrixXd::Zero(H, 1);
    out_w = Eigen::MatrixXd::Zero(V, H);
    out_b = Eigen::MatrixXd::Zero(V, 1);
  }

  // Uniform init in [-0.08, 0.08], filled row-major in field-table order
  // so the draw sequence is pinned by the seed alone.
  void init(std::mt19937_64& rng) {
    for (const auto& [name, member] : fields()) {
      Eigen::MatrixXd& m = this->*member;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
          m(r, c) = rand_range(rng, -0.08, 0.08);
    }
  }

  void set_zero() {
    for (const auto& [name, member] : fields()) (this->*member).setZero();
  }

  double squared_norm() const {
    double total = 0.0;
    for (const auto& [name, member] : fields())
      total += (this->*member).squaredNorm();
    return total;
  }

  void scale(double factor) {
    for (const auto& [name, member] : fields()) (this->*member) *= factor;
  }

  // this += factor * other
  void add_scaled(const parameter_set& other, double factor) {
    for (const auto& [name, member] : fields())
      (this->*member) += factor * (other.*member);
  }

  bool all_finite() const {
    for (const auto& [name, member] : fields())
      if (!(this->*member).allFinite()) return false;
    return true;
  }
};

struct seq2seq_model {
  vocabulary vocab;
  train_config config;
  parameter_set params;
};

// --- Encoding ---------------------------------------------------------------------

struct encoded_example {
  std::vector<int> src;  // source code point ids, truncated to max_len
  std::vector<int> tgt;  // target ids plus EOS, chars truncated to max_len
  bool truncated = false;
};

inline encoded_example encode_example(const vocabulary& vocab,
                                      const std::string& source,
                                      const std::string& target,
                                      std::size_t max_len) {
  encoded_example ex;
  const std::u32string src = decode_utf8(source);
  const std::u32string tgt = decode_utf8(target);
  ex.truncated = src.size() > max_len || tgt.size() > max_len;
  for (std::size_t i = 0; i < src.size() && i < max_len; ++i)
    ex.src.push_back(vocab.id_of(src[i]));
  for (std::size_t i = 0; i < tgt.size() && i < max_len; ++i)
    ex.tgt.push_back(vocab.id_of(tgt[i]));
  ex.tgt.push_back(vocabulary::eos);
  return ex;
}

// --- Forward / backward core --------------------------------------------------------

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct gru_cache {
  Eigen::VectorXd x, h_prev, z, r, c, h;
};

// One GRU step: h = (1-z) ⊙ h_prev + z ⊙ c. `w*` weigh the input, `u*`
// the previous state.
inline gru_cache gru_forward(const Eigen::MatrixXd& wz,
                             const Eigen::MatrixXd& uz,
                             const Eigen::MatrixXd& bz,
                             const Eigen::MatrixXd& wr,
                             const Eigen::MatrixXd& ur,
                             const Eigen::MatrixXd& br,
                             const Eigen::MatrixXd& wc,
                             const Eigen::MatrixXd& uc,
                             const Eigen::MatrixXd& bc,
                             const Eigen::VectorXd& x,
                             const Eigen::VectorXd& h_prev) {
  gru_cache cache;
  cache.x = x;
  cache.h_prev = h_prev;
  cache.z = (wz * x + uz * h_prev + bz.col(0)).unaryExpr(&sigmoid);
  cache.r = (wr * x + ur * h_prev + br.col(0)).unaryExpr(&sigmoid);
  cache.c = (wc * x + uc * (cache.r.cwiseProduct(h_prev)) + bc.col(0))
                .array()
                .tanh()
                .matrix();
  cache.h = ((1.0 - cache.z.array()) * h_prev.array() +
             cache.z.array() * cache.c.array())
                .matrix();
  return cache;
}

struct gru_grads {
  Eigen::VectorXd dx, dh_prev;
};

// Backward through one GRU step. `dh` is the loss gradient at the step's
// output state; weight gradients accumulate into the g_* references.
inline gru_grads gru_backward(
    const Eigen::MatrixXd& wz, const Eigen::MatrixXd& uz,
    const Eigen::MatrixXd& wr, const Eigen::MatrixXd& ur,
    const Eigen::MatrixXd& wc, const Eigen::MatrixXd& uc,
    Eigen::MatrixXd& g_wz, Eigen::MatrixXd& g_uz, Eigen::MatrixXd& g_bz,
    Eigen::MatrixXd& g_wr, Eigen::MatrixXd& g_ur, Eigen::MatrixXd& g_br,
    Eigen::MatrixXd& g_wc, Eigen::MatrixXd& g_uc, Eigen::MatrixXd& g_bc,
    const gru_cache& cache, const Eigen::VectorXd& dh) {
  const Eigen::ArrayXd z = cache.z.array();
  const Eigen::ArrayXd r = cache.r.array();
  const Eigen::ArrayXd c = cache.c.array();
  const Eigen::ArrayXd hp = cache.h_prev.array();

  const Eigen::VectorXd dz = (dh.array() * (c - hp)).matrix();
  const Eigen::VectorXd dc = (dh.array() * z).matrix();
  Eigen::VectorXd dh_prev = (dh.array() * (1.0 - z)).matrix();

  const Eigen::VectorXd dc_pre = (dc.array() * (1.0 - c * c)).matrix();
  g_wc += dc_pre * cache.x.transpose();
  g_uc += dc_pre * (r * hp).matrix().transpose();
  g_bc.col(0) += dc_pre;
  Eigen::VectorXd dx = wc.transpose() * dc_pre;
  const Eigen::VectorXd d_rh = uc.transpose() * dc_pre;
  const Eigen::VectorXd dr = (d_rh.array() * hp).matrix();
  dh_prev += (d_rh.array() * r).matrix();

  const Eigen::VectorXd dz_pre = (dz.array() * z * (1.0 - z)).matrix();
  g_wz += dz_pre * cache.x.transpose();
  g_uz += dz_pre * cache.h_prev.transpose();
  g_bz.col(0) += dz_pre;
  dx += wz.transpose() * dz_pre;
  dh_prev += uz.transpose() * dz_pre;

  const Eigen::VectorXd dr_pre = (dr.array() * r * (1.0 - r)).matrix();
  g_wr += dr_pre * cache.x.transpose();
  g_ur += dr_pre * cache.h_prev.transpose();
  g_br.col(0) += dr_pre;
  dx += wr.transpose() * dr_pre;
  dh_prev += ur.transpose() * dr_pre;

  return {std::move(dx), std::move(dh_prev)};
}

struct decode_step_cache {
  Eigen::VectorXd s_prev, q, alpha, ctx, probs;
  Eigen::MatrixXd u;  // tanh(q + key_j), one column per source position
  gru_cache gru;
  int prev_id = vocabulary::bos;
  int target_id = vocabulary::pad;
};

struct example_trace {
  std::vector<gru_cache> enc;          // encoder steps
  Eigen::MatrixXd enc_states;          // H × S
  Eigen::MatrixXd enc_keys;            // H × S, attn_key·h_j + attn_bias
  std::vector<decode_step_cache> dec;  // decoder steps
  double loss = 0.0;                   // summed CE over non-PAD targets
  std::size_t tokens = 0;              // non-PAD target count
};

// Runs the full forward pass for one example. When `sample_feed` is
// non-null and teacher forcing is below 1, it decides per step whether
// the decoder sees the gold symbol or its own argmax.
inline example_trace forward_example(const seq2seq_model& model,
                                     const encoded_example& ex,
                                     std::mt19937_64* sample_feed) {
  const parameter_set& p = model.params;
  const int H = static_cast<int>(model.config.hidden_dim);
  const std::size_t S = ex.src.size();

  example_trace trace;
  trace.enc_states.resize(H, static_cast<Eigen::Index>(S));
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
  for (std::size_t j = 0; j < S; ++j) {
    const Eigen::VectorXd x = p.src_embed.row(ex.src[j]).transpose();
    gru_cache cache =
        gru_forward(p.enc_wz, p.enc_uz, p.enc_bz, p.enc_wr, p.enc_ur,
                    p.enc_br, p.enc_wc, p.enc_uc, p.enc_bc, x, h);
    h = cache.h;
    trace.enc_states.col(static_cast<Eigen::Index>(j)) = h;
    trace.enc.push_back(std::move(cache));
  }
  if (S > 0)
    trace.enc_keys = (p.attn_key * trace.enc_states).colwise() +
                     Eigen::VectorXd(p.attn_bias.col(0));

  Eigen::VectorXd s = h;  // decoder state starts at the final encoder state
  int prev_id = vocabulary::bos;
  for (std::size_t t = 0; t < ex.tgt.size(); ++t) {
    decode_step_cache step;
    step.s_prev = s;
    step.prev_id = prev_id;
    step.target_id = ex.tgt[t];

    Eigen::VectorXd ctx = Eigen::VectorXd::Zero(H);
    if (S > 0) {
      step.q = p.attn_query * s;
      step.u = ((trace.enc_keys.colwise() + step.q).array().tanh()).matrix();
      Eigen::VectorXd scores = step.u.transpose() * p.attn_score.col(0);
      const double peak = scores.maxCoeff();
      const Eigen::VectorXd weights = (scores.array() - peak).exp().matrix();
      step.alpha = weights / weights.sum();
      ctx = trace.enc_states * step.alpha;
    }
    step.ctx = ctx;

    Eigen::VectorXd x(p.tgt_embed.cols() + H);
    x << p.tgt_embed.row(prev_id).transpose(), ctx;
    step.gru = gru_forward(p.dec_wz, p.dec_uz, p.dec_bz, p.dec_wr, p.dec_ur,
                           p.dec_br, p.dec_wc, p.dec_uc, p.dec_bc, x, s);
    s = step.gru.h;

    Eigen::VectorXd logits = p.out_w * s + p.out_b.col(0);
    const double peak = logits.maxCoeff();
    const Eigen::VectorXd exps = (logits.array() - peak).exp().matrix();
    step.probs = exps / exps.sum();

    if (step.target_id != vocabulary::pad) {
      trace.loss -= std::log(std::max(step.probs(step.target_id), 1e-300));
      trace.tokens += 1;
    }

    int next_feed = step.target_id;
    if (sample_feed != nullptr && model.config.teacher_forcing < 1.0 &&
        rand_unit(*sample_feed) >= model.config.teacher_forcing) {
      Eigen::Index best = 0;
      step.probs.maxCoeff(&best);
      next_feed = static_cast<int>(best);
    }
    prev_id = next_feed;
    trace.dec.push_back(std::move(step));
  }
  return trace;
}

// Accumulates this example's parameter gradients (of summed CE) into
// `grads`. Must be called with the trace produced by forward_example on
// the same model.
inline void backward_example(const seq2seq_model& model,
                             const encoded_example& ex,
                             const example_trace& trace,
                             parameter_set& grads) {
  const parameter_set& p = model.params;
  const int H = static_cast<int>(model.config.hidden_dim);
  const int D = static_cast<int>(model.config.embed_dim);
  const std::size_t S = ex.src.size();

  Eigen::MatrixXd d_enc_states =
      Eigen::MatrixXd::Zero(H, static_cast<Eigen::Index>(S));
  Eigen::VectorXd ds = Eigen::VectorXd::Zero(H);

  for (std::size_t ti = trace.dec.size(); ti-- > 0;) {
    const decode_step_cache& step = trace.dec[ti];

    if (step.target_id != vocabulary::pad) {
      Eigen::VectorXd dlogits = step.probs;
      dlogits(step.target_id) -= 1.0;
      grads.out_w += dlogits * step.gru.h.transpose();
      grads.out_b.col(0) += dlogits;
      ds += p.out_w.transpose() * dlogits;
    }

    gru_grads g = gru_backward(
        p.dec_wz, p.dec_uz, p.dec_wr, p.dec_ur, p.dec_wc, p.dec_uc,
        grads.dec_wz, grads.dec_uz, grads.dec_bz, grads.dec_wr, grads.dec_ur,
        grads.dec_br, grads.dec_wc, grads.dec_uc, grads.dec_bc, step.gru, ds);

    grads.tgt_embed.row(step.prev_id) += g.dx.head(D).transpose();
    Eigen::VectorXd ds_prev = std::move(g.dh_prev);

    if (S > 0) {
      const Eigen::VectorXd dctx = g.dx.tail(H);
      Eigen::VectorXd dalpha = trace.enc_states.transpose() * dctx;
      d_enc_states += dctx * step.alpha.transpose();
      // Softmax backward: de = α ⊙ (dα − α·dα).
      const double mix = step.alpha.dot(dalpha);
      const Eigen::VectorXd de =
          (step.alpha.array() * (dalpha.array() - mix)).matrix();
      grads.attn_score.col(0) += step.u * de;
      const Eigen::MatrixXd du_pre =
          ((1.0 - step.u.array().square()).colwise() *
           p.attn_score.col(0).array())
              .rowwise() *
          de.transpose().array();
      grads.attn_key += du_pre * trace.enc_states.transpose();
      grads.attn_bias.col(0) += du_pre.rowwise().sum();
      d_enc_states += p.attn_key.transpose() * du_pre;
      const Eigen::VectorXd dq = du_pre.rowwise().sum();
      grads.attn_query += dq * step.s_prev.transpose();
      ds_prev += p.attn_query.transpose() * dq;
    }
    ds = std::move(ds_prev);
  }

  // The decoder's initial state is the final encoder state.
  if (S > 0) {
    d_enc_states.col(static_cast<Eigen::Index>(S - 1)) += ds;
    Eigen::VectorXd dh = Eigen::VectorXd::Zero(H);
    for (std::size_t j = S; j-- > 0;) {
      dh += d_enc_states.col(static_cast<Eigen::Index>(j));
      gru_grads g = gru_backward(p.enc_wz, p.enc_uz, p.enc_wr, p.enc_ur,
                                 p.enc_wc, p.enc_uc, grads.enc_wz,
                                 grads.enc_uz, grads.enc_bz, grads.enc_wr,
                                 grads.enc_ur, grads.enc_br, grads.enc_wc,
                                 grads.enc_uc, grads.enc_bc, trace.enc[j], dh);
      grads.src_embed.row(ex.src[j]) += g.dx.transpose();
      dh = std::move(g.dh_prev);
    }
  }
}

}  // namespace detail

// Summed loss, token count, and summed-CE gradients over a batch.
struct batch_gradients {
  double loss_sum = 0.0;
  std::size_t tokens = 0;
  parameter_set grads;
};

// Gradients of the summed cross-entropy over the batch (teacher forcing 1;
// divide by `tokens` for the per-token mean used by training).
inline batch_gradients compute_gradients(
    const seq2seq_model& model, const std::vector<encoded_example>& batch) {
  batch_gradients out;
  out.grads.shape(model.vocab.size(),
                  static_cast<int>(model.config.embed_dim),
                  static_cast<int>(model.config.hidden_dim));
  for (const auto& ex : batch) {
    const detail::example_trace trace =
        detail::forward_example(model, ex, nullptr);
    detail::backward_example(model, ex, trace, out.grads);
    out.loss_sum += trace.loss;
    out.tokens += trace.tokens;
  }
  return out;
}

// --- Training ---------------------------------------------------------------------

struct train_result {
  seq2seq_model model;
  std::vector<double> loss_log;  // one mean per-token CE entry per epoch
  std::size_t truncated = 0;     // examples clipped by max_len
};

inline constexpr double grad_clip_norm = 5.0;

inline train_result train(const parallel_corpus& corpus,
                          const train_config& config) {
  config.validate();
  train_result result;
  result.model.vocab = build_vocab(corpus);
  result.model.config = config;
  result.model.params.shape(result.model.vocab.size(),
                            static_cast<int>(config.embed_dim),
                            static_cast<int>(config.hidden_dim));

  std::mt19937_64 rng(config.seed);
  result.model.params.init(rng);

  std::vector<encoded_example> examples;
  examples.reserve(corpus.size());
  for (const auto& ex : corpus.examples) {
    examples.push_back(encode_example(result.model.vocab, ex.source,
                                      ex.target, config.max_len));
    if (examples.back().truncated) result.truncated += 1;
  }

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  parameter_set grads;
  grads.shape(result.model.vocab.size(), static_cast<int>(config.embed_dim),
              static_cast<int>(config.hidden_dim));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    deterministic_shuffle(order, rng);
    double epoch_loss = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + config.batch_size);
      grads.set_zero();
      double batch_loss = 0.0;
      std::size_t batch_tokens = 0;
      for (std::size_t k = start; k < stop; ++k) {
        const encoded_example& ex = examples[order[k]];
        const detail::example_trace trace =
            detail::forward_example(result.model, ex, &rng);
        detail::backward_example(result.model, ex, trace, grads);
        batch_loss += trace.loss;
        batch_tokens += trace.tokens;
      }
      if (!std::isfinite(batch_loss))
        throw divergence_error("training loss became non-finite in epoch " +
                               std::to_string(epoch + 1));
      if (batch_tokens == 0) continue;
      grads.scale(1.0 / static_cast<double>(batch_tokens));
      const double norm = std::sqrt(grads.squared_norm());
      if (norm > grad_clip_norm) grads.scale(grad_clip_norm / norm);
      result.model.params.add_scaled(grads, -config.learning_rate);
      if (!result.model.params.all_finite())
        throw divergence_error("parameters became non-finite in epoch " +
                               std::to_string(epoch + 1));
      epoch_loss += batch_loss;
      epoch_tokens += batch_tokens;
    }
    result.loss_log.push_back(
        epoch_tokens == 0 ? 0.0
                          : epoch_loss / static_cast<double>(epoch_tokens));
  }
  return result;
}

// --- Prediction -------------------------------------------------------------------

// Greedy decode; PAD/BOS/UNK are masked out, so the output consists of
// vocabulary characters only and stops at EOS or max_len characters.
inline std::u32string predict(const seq2seq_model& model,
                              std::u32string_view input) {
  const parameter_set& p = model.params;
  const int H = static_cast<int>(model.config.hidden_dim);

  std::vector<int> src;
  for (std::size_t i = 0; i < input.size() && i < model.config.max_len; ++i)
    src.push_back(model.vocab.id_of(input[i]));
  const std::size_t S = src.size();

  Eigen::MatrixXd enc_states(H, static_cast<Eigen::Index>(S));
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
  for (std::size_t j = 0; j < S; ++j) {
    const Eigen::VectorXd x = p.src_embed.row(src[j]).transpose();
    h = detail::gru_forward(p.enc_wz, p.enc_uz, p.enc_bz, p.enc_wr, p.enc_ur,
                            p.enc_br, p.enc_wc, p.enc_uc, p.enc_bc, x, h)
            .h;
    enc_states.col(static_cast<Eigen::Index>(j)) = h;
  }
  Eigen::MatrixXd enc_keys;
  if (S > 0)
    enc_keys = (p.attn_key * enc_states).colwise() +
               Eigen::VectorXd(p.attn_bias.col(0));

  std::u32string output;
  Eigen::VectorXd s = h;
  int prev_id = vocabulary::bos;
  for (std::size_t t = 0; t < model.config.max_len; ++t) {
    Eigen::VectorXd ctx = Eigen::VectorXd::Zero(H);
    if (S > 0) {
      const Eigen::VectorXd q = p.attn_query * s;
      const Eigen::MatrixXd u =
          ((enc_keys.colwise() + q).array().tanh()).matrix();
      Eigen::VectorXd scores = u.transpose() * p.attn_score.col(0);
      const Eigen::VectorXd weights =
          (scores.array() - scores.maxCoeff()).exp().matrix();
      ctx = enc_states * (weights / weights.sum());
    }
    Eigen::VectorXd x(p.tgt_embed.cols() + H);
    x << p.tgt_embed.row(prev_id).transpose(), ctx;
    s = detail::gru_forward(p.dec_wz, p.dec_uz, p.dec_bz, p.dec_wr, p.dec_ur,
                            p.dec_br, p.dec_wc, p.dec_uc, p.dec_bc, x, s)
            .h;
    Eigen::VectorXd logits = p.out_w * s + p.out_b.col(0);
    logits(vocabulary::pad) = -1e300;
    logits(vocabulary::bos) = -1e300;
    logits(vocabulary::unk) = -1e300;
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    if (best == vocabulary::eos) break;
    output.push_back(model.vocab.char_of(static_cast<int>(best)));
    prev_id = static_cast<int>(best);
  }
  return output;
}

inline std::string predict_utf8(const seq2seq_model& model,
                                const std::string& input) {
  return encode_utf8(predict(model, decode_utf8(input)));
}

// --- Gradient check ---------------------------------------------------------------

struct gradient_check_result {
  std::map<std::string, double> per_tensor;  // max relative error per tensor
  double max_error = 0.0;
};

// Compares analytic gradients against central finite differences on a
// tiny batch, sampling at least 50 coordinates per tensor (all of them
// for smaller tensors). `corrupt_tensor` flips the sign of one tensor's
// analytic gradient — a fault-injection hook for tests that must see the
// check fail.
inline gradient_check_result gradient_check(
    const parallel_corpus& batch_corpus, const train_config& config,
    std::size_t samples_per_tensor = 50,
    const std::string& corrupt_tensor = "") {
  config.validate();
  if (config.teacher_forcing != 1.0)
    throw error("gradient check requires teacher_forcing = 1.0");

  seq2seq_model model;
  model.vocab = build_vocab(batch_corpus);
  model.config = config;
  model.params.shape(model.vocab.size(), static_cast<int>(config.embed_dim),
                     static_cast<int>(config.hidden_dim));
  std::mt19937_64 init_rng(config.seed);
  model.params.init(init_rng);

  std::vector<encoded_example> batch;
  for (const auto& ex : batch_corpus.examples)
    batch.push_back(
        encode_example(model.vocab, ex.source, ex.target, config.max_len));

  batch_gradients analytic = compute_gradients(model, batch);
  const double denom =
      analytic.tokens == 0 ? 1.0 : static_cast<double>(analytic.tokens);
  analytic.grads.scale(1.0 / denom);

  const auto batch_loss = [&]() {
    double loss = 0.0;
    for (const auto& ex : batch)
      loss += detail::forward_example(model, ex, nullptr).loss;
    return loss / denom;
  };

  constexpr double step = 1e-5;
  std::mt19937_64 pick_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  gradient_check_result result;
  for (const auto& [name, member] : parameter_set::fields()) {
    Eigen::MatrixXd& tensor = model.params.*member;
    Eigen::MatrixXd& grad = analytic.grads.*member;
    if (name == corrupt_tensor) grad = -grad;

    const std::size_t total = static_cast<std::size_t>(tensor.size());
    std::vector<std::size_t> coords;
    if (total <= samples_per_tensor) {
      coords.resize(total);
      for (std::size_t i = 0; i < total; ++i) coords[i] = i;
    } else {
      std::set<std::size_t> picked;
      while (picked.size() < samples_per_tensor)
        picked.insert(rand_below(pick_rng, total));
      coords.assign(picked.begin(), picked.end());
    }

    double worst = 0.0;
    for (std::size_t flat : coords) {
      double& value = tensor.data()[flat];
      const double saved = value;
      value = saved + step;
      const double up = batch_loss();
      value = saved - step;
      const double down = batch_loss();
      value = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = grad.data()[flat];
      // The denominator floor keeps finite-difference roundoff (about
      // ulp(loss) / (2·step) ≈ 1e-11 in absolute terms) from registering
      // as error on coordinates whose true gradient is essentially zero,
      // while a wrong gradient of any consequential size still reads as
      // relative error ≈ 1.
      const double rel = std::abs(a - numeric) /
                         std::max(std::abs(a) + std::abs(numeric), 1e-6);
      worst = std::max(worst, rel);
    }
    result.per_tensor[name] = worst;
    result.max_error = std::max(result.max_error, worst);
  }
  return result;
}

// --- Checkpoints ------------------------------------------------------------------

inline constexpr int checkpoint_format_version = 1;

inline nlohmann::json model_to_json(const seq2seq_model& model) {
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, member] : parameter_set::fields()) {
    const Eigen::MatrixXd& m = model.params.*member;
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    tensors[name] = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
  }
  return nlohmann::json{{"format_version", checkpoint_format_version},
                        {"vocab", vocab_to_json(model.vocab)},
                        {"config", config_to_json(model.config)},
                        {"tensors", tensors}};
}

inline seq2seq_model model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw parse_error("checkpoint: expected a JSON object");
  if (!j.contains("format_version") ||
      !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != checkpoint_format_version)
    throw parse_error("checkpoint: unsupported format_version (expected " +
                      std::to_string(checkpoint_format_version) + ")");
  for (const char* key : {"vocab", "config", "tensors"})
    if (!j.contains(key))
      throw parse_error(std::string("checkpoint: missing \"") + key + "\"");

  seq2seq_model model;
  model.vocab = vocab_from_json(j["vocab"]);
  model.config = config_from_json(j["config"]);
  model.params.shape(model.vocab.size(),
                     static_cast<int>(model.config.embed_dim),
                     static_cast<int>(model.config.hidden_dim));

  const nlohmann::json& tensors = j["tensors"];
  if (!tensors.is_object())
    throw parse_error("checkpoint.tensors: expected an object");
  std::set<std::string> expected;
  for (const auto& [name, member] : parameter_set::fields())
    expected.insert(name);
  for (const auto& [name, value] : tensors.items())
    if (!expected.count(name))
      throw parse_error("checkpoint.tensors: unknown tensor \"" + name +
                        "\"");

  for (const auto& [name, member] : parameter_set::fields()) {
    if (!tensors.contains(name))
      throw parse_error("checkpoint.tensors: missing tensor \"" + name +
                        "\"");
    const nlohmann::json& t = tensors[name];
    Eigen::MatrixXd& m = model.params.*member;
    if (!t.contains("rows") || !t.contains("cols") || !t.contains("data") ||
        !t["rows"].is_number_integer() || !t["cols"].is_number_integer() ||
        !t["data"].is_array())
      throw parse_error("checkpoint.tensors." + name +
                        ": expected rows, cols, data");
    if (t["rows"].get<Eigen::Index>() != m.rows() ||
        t["cols"].get<Eigen::Index>() != m.cols())
      throw parse_error("checkpoint.tensors." + name +
                        ": shape does not match config/vocab");
    const auto& data = t["data"];
    if (static_cast<Eigen::Index>(data.size()) != m.size())
      throw parse_error("checkpoint.tensors." + name +
                        ": data length does not match shape");
    std::size_t flat = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (!data[flat].is_number())
          throw parse_error("checkpoint.tensors." + name +
                            ": non-numeric entry");
        m(r, c) = data[flat].get<double>();
        ++flat;
      }
    if (!m.allFinite())
      throw parse_error("checkpoint.tensors." + name + ": non-finite value");
  }
  return model;
}

inline void save_model(const seq2seq_model& model, const std::string& path) {
  atomic_write(path, model_to_json(model).dump() + "\n");
}

inline seq2seq_model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
  return model_from_json(j);
}

// --- Hyperparameter sweep -----------------------------------------------------------

struct sweep_row {
  train_config config;
  bool failed = false;
  std::string error_message;
  double cer = 0.0;
  double wer = 0.0;
  bool best = false;
};

// Trains one model per config on the train examples and scores it on the
// eval examples. A failing row (e.g. divergence) is recorded and the
// sweep continues. The best row has the lowest WER, ties broken by CER.
inline std::vector<sweep_row> run_sweep(
    const parallel_corpus& train_corpus, const parallel_corpus& eval_corpus,
    const std::vector<train_config>& grid) {
  if (grid.empty()) throw error("sweep grid is empty");
  std::vector<sweep_row> rows;
  for (const train_config& config : grid) {
    sweep_row row;
    row.config = config;
    try {
      const train_result trained = train(train_corpus, config);
      std::vector<std::string> hyps, refs;
      for (const auto& ex : eval_corpus.examples) {
        hyps.push_back(predict_utf8(trained.model, ex.source));
        refs.push_back(ex.target);
      }
      const evaluation_report report = evaluate(hyps, refs);
      row.cer = report.cer();
      row.wer = report.wer();
    } catch (const error& e) {
      row.failed = true;
      row.error_message = e.what();
    }
    rows.push_back(std::move(row));
  }
  const sweep_row* best = nullptr;
  for (const auto& row : rows) {
    if (row.failed) continue;
    if (best == nullptr || row.wer < best->wer ||
        (row.wer == best->wer && row.cer < best->cer))
      best = &row;
  }
  if (best != nullptr)
    for (auto& row : rows) row.best = (&row == best);
  return rows;
}

// Plain-text report: one row per config — parameters, CER, WER — with the
// winning row flagged.
inline std::string sweep_table(const std::vector<sweep_row>& rows) {
  std::string out = "parameters          CER        WER\n";
  for (const auto& row : rows) {
    std::string label = std::to_string(row.config.epochs) + " ep., length " +
                        std::to_string(row.config.max_len);
    label.resize(20, ' ');
    out += label;
    if (row.failed) {
      out += "failed: " + row.error_message + "\n";
      continue;
    }
    std::string cer = format_rate(row.cer);
    cer.resize(11, ' ');
    out += cer + format_rate(row.wer);
    if (row.best) out += "  (best)";
    out += "\n";
  }
  return out;
}

inline nlohmann::json sweep_to_json(const std::vector<sweep_row>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json item = {{"epochs", row.config.epochs},
                           {"max_len", row.config.max_len},
                           {"failed", row.failed},
                           {"best", row.best}};
    if (row.failed)
      item["error"] = row.error_message;
    else {
      item["cer"] = row.cer;
      item["wer"] = row.wer;
    }
    arr.push_back(std::move(item));
  }
  return arr;
}

}  // namespace tonekit
