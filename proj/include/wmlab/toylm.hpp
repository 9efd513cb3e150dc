#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wmlab/mathutil.hpp"
#include "wmlab/rng.hpp"

// Tabular order-n Markov language models with an additive copy-bias term.
//
// A model holds one logit row per window state (the last `order` tokens,
// left-padded with token 0 at the start of a document). On top of the base
// row, a conditioning bag of token counts contributes
// copy_strength * ln(1 + count[v]) to token v, which gives the model a
// document-level conditioning channel with exactly computable probabilities.

namespace wmlab::lm {

inline constexpr std::int32_t kMaxOrder = 4;
inline constexpr std::int64_t kMaxTableEntries = 1ll << 28;

struct Vocab {
  std::int32_t size = 0;
};

struct TokenSeq {
  std::vector<std::int32_t> tokens;
  std::int32_t vocab_size = 0;

  std::int64_t length() const { return static_cast<std::int64_t>(tokens.size()); }
};

inline void validate_tokens(std::span<const std::int32_t> tokens, std::int32_t vocab_size) {
  for (std::int32_t t : tokens) {
    if (t < 0 || t >= vocab_size) {
      throw std::out_of_range("token id " + std::to_string(t) + " outside vocabulary of size " +
                              std::to_string(vocab_size));
    }
  }
}

/// Token-count conditioning bag. An empty `counts` vector means "no bag".
struct ConditioningBag {
  std::vector<std::int64_t> counts;

  static ConditioningBag none() { return {}; }
  bool empty() const { return counts.empty(); }
};

inline ConditioningBag make_bag(const TokenSeq& seq) {
  validate_tokens(seq.tokens, seq.vocab_size);
  ConditioningBag bag;
  bag.counts.assign(static_cast<std::size_t>(seq.vocab_size), 0);
  for (std::int32_t t : seq.tokens) ++bag.counts[static_cast<std::size_t>(t)];
  return bag;
}

struct LmParams {
  Vocab vocab;
  std::int32_t order = 0;
  double copy_strength = 0.0;
  std::uint64_t seed = 0;  // build seed, kept for provenance
  std::vector<double> table;  // row-major [state][token]

  std::int64_t num_states() const {
    std::int64_t s = 1;
    for (std::int32_t i = 0; i < order; ++i) s *= vocab.size;
    return s;
  }
};

/// Index of the window state for the given left context. Windows shorter
/// than `order` read missing leading positions as token 0.
inline std::int64_t state_index(std::int32_t order, std::int32_t vocab_size,
                                std::span<const std::int32_t> context) {
  std::int64_t state = 0;
  const std::int64_t n = static_cast<std::int64_t>(context.size());
  for (std::int32_t i = 0; i < order; ++i) {
    const std::int64_t pos = n - order + i;
    const std::int32_t tok = pos >= 0 ? context[static_cast<std::size_t>(pos)] : 0;
    state = state * vocab_size + tok;
  }
  return state;
}

inline LmParams build_lm(std::int32_t vocab_size, std::int32_t order, double copy_strength,
                         std::uint64_t seed) {
  if (vocab_size < 2) throw std::invalid_argument("build_lm: vocab_size must be at least 2");
  if (order < 0 || order > kMaxOrder) {
    throw std::invalid_argument("build_lm: order must be in [0, " + std::to_string(kMaxOrder) + "]");
  }
  if (!(copy_strength >= 0.0)) throw std::invalid_argument("build_lm: copy_strength must be >= 0");

  LmParams lm;
  lm.vocab = Vocab{vocab_size};
  lm.order = order;
  lm.copy_strength = copy_strength;
  lm.seed = seed;

  std::int64_t entries = vocab_size;
  for (std::int32_t i = 0; i < order; ++i) {
    entries *= vocab_size;
    if (entries > kMaxTableEntries) {
      throw std::invalid_argument("build_lm: table of " + std::to_string(vocab_size) + "^" +
                                  std::to_string(order + 1) + " entries exceeds the supported size");
    }
  }

  lm.table.resize(static_cast<std::size_t>(entries));
  for (std::int64_t k = 0; k < entries; ++k) {
    rng::Stream s(rng::split_seed(seed, static_cast<std::uint64_t>(k)));
    lm.table[static_cast<std::size_t>(k)] = s.next_standardish();
  }
  return lm;
}

/// Base row for the context window plus the copy-bias contribution of `bag`.
inline std::vector<double> logits(const LmParams& lm, std::span<const std::int32_t> context,
                                  const ConditioningBag& bag) {
  validate_tokens(context, lm.vocab.size);
  const std::size_t v = static_cast<std::size_t>(lm.vocab.size);
  const std::size_t row = static_cast<std::size_t>(state_index(lm.order, lm.vocab.size, context)) * v;
  std::vector<double> out(lm.table.begin() + static_cast<std::ptrdiff_t>(row),
                          lm.table.begin() + static_cast<std::ptrdiff_t>(row + v));
  if (!bag.empty() && lm.copy_strength != 0.0) {
    if (bag.counts.size() != v) throw std::invalid_argument("logits: bag size does not match vocabulary");
    for (std::size_t i = 0; i < v; ++i) {
      out[i] += lm.copy_strength * std::log1p(static_cast<double>(bag.counts[i]));
    }
  }
  return out;
}

/// Per-step hook applied to the logits before sampling. Receives the tokens
/// generated so far (not the prompt), which is all a detector can later see.
using LogitTransform =
    std::function<void(std::span<double> step_logits, std::span<const std::int32_t> generated)>;

/// Conditional next-token distribution at the given context.
inline std::vector<double> conditional(const LmParams& lm, std::span<const std::int32_t> context,
                                       const ConditioningBag& bag) {
  std::vector<double> p = logits(lm, context, bag);
  math::softmax_inplace(p);
  return p;
}

namespace detail {

inline std::int32_t sample_categorical(std::span<const double> probs, double u) {
  double c = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    c += probs[i];
    if (u < c) return static_cast<std::int32_t>(i);
  }
  return static_cast<std::int32_t>(probs.size() - 1);  // u landed in rounding slack
}

}  // namespace detail

/// Samples `length` tokens autoregressively after `prompt`; returns only the
/// continuation. Draw t uses the split seed (seed, t), so prefixes of a run
/// are reproducible independently of total length.
inline TokenSeq sample_sequence(const LmParams& lm, const TokenSeq& prompt, const ConditioningBag& bag,
                                std::int32_t length, const LogitTransform& transform,
                                std::uint64_t seed) {
  if (length < 0) throw std::invalid_argument("sample_sequence: length must be >= 0");
  validate_tokens(prompt.tokens, lm.vocab.size);

  std::vector<std::int32_t> context(prompt.tokens);
  TokenSeq out;
  out.vocab_size = lm.vocab.size;
  out.tokens.reserve(static_cast<std::size_t>(length));

  for (std::int32_t t = 0; t < length; ++t) {
    std::vector<double> l = logits(lm, context, bag);
    if (transform) transform(l, out.tokens);
    math::softmax_inplace(l);
    rng::Stream s(rng::split_seed(seed, static_cast<std::uint64_t>(t)));
    const std::int32_t tok = detail::sample_categorical(l, s.next_unit());
    out.tokens.push_back(tok);
    context.push_back(tok);
  }
  return out;
}

/// Chain-rule log probability of `continuation` after `prompt` under the
/// (possibly transformed) per-step conditionals.
inline double sequence_logprob(const LmParams& lm, const TokenSeq& prompt, const ConditioningBag& bag,
                               const TokenSeq& continuation, const LogitTransform& transform = {}) {
  validate_tokens(prompt.tokens, lm.vocab.size);
  validate_tokens(continuation.tokens, lm.vocab.size);

  std::vector<std::int32_t> context(prompt.tokens);
  std::vector<std::int32_t> generated;
  generated.reserve(continuation.tokens.size());
  double lp = 0.0;
  for (std::int32_t tok : continuation.tokens) {
    std::vector<double> l = logits(lm, context, bag);
    if (transform) transform(l, generated);
    const double lse = math::log_sum_exp(l);
    lp += l[static_cast<std::size_t>(tok)] - lse;
    context.push_back(tok);
    generated.push_back(tok);
  }
  return lp;
}

// --- serialization ---------------------------------------------------------

inline constexpr int kLmFormatVersion = 1;

inline nlohmann::json to_json(const LmParams& lm) {
  return nlohmann::json{{"version", kLmFormatVersion},
                        {"vocab_size", lm.vocab.size},
                        {"order", lm.order},
                        {"copy_strength", lm.copy_strength},
                        {"seed", lm.seed},
                        {"table", lm.table}};
}

inline LmParams lm_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kLmFormatVersion) {
    throw std::invalid_argument("lm_from_json: unsupported format version");
  }
  LmParams lm;
  lm.vocab.size = j.at("vocab_size").get<std::int32_t>();
  lm.order = j.at("order").get<std::int32_t>();
  lm.copy_strength = j.at("copy_strength").get<double>();
  lm.seed = j.at("seed").get<std::uint64_t>();
  lm.table = j.at("table").get<std::vector<double>>();
  if (lm.vocab.size < 2 || lm.order < 0 || lm.order > kMaxOrder) {
    throw std::invalid_argument("lm_from_json: parameters outside supported range");
  }
  const std::int64_t expected = lm.num_states() * lm.vocab.size;
  if (static_cast<std::int64_t>(lm.table.size()) != expected) {
    throw std::invalid_argument("lm_from_json: table size does not match vocab/order");
  }
  for (double x : lm.table) {
    if (!std::isfinite(x)) throw std::invalid_argument("lm_from_json: non-finite logit");
  }
  return lm;
}

}  // namespace wmlab::lm
