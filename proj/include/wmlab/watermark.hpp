#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmlab/mathutil.hpp"
#include "wmlab/rng.hpp"
#include "wmlab/toylm.hpp"

// Keyed green-list watermarking. A keyed hash splits the vocabulary into a
// green set of expected rate q at each step; generation adds a logit bias to
// green tokens and detection tests the green count with a z statistic.
//
// Three variants:
//   unigram       - context-free green list (empty hash window)
//   windowed      - green list keyed by the last prefix_length tokens
//   entropy_gated - windowed, but steps whose next-token entropy is at or
//                   below a threshold are left untouched and uncounted
//
// Positions whose window is shorter than prefix_length are neither biased
// nor counted, on both the embedding and the detection side, so the two
// sides always agree on which positions carry signal.

namespace wmlab::wm {

enum class Variant { unigram, windowed, entropy_gated };

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::unigram: return "unigram";
    case Variant::windowed: return "windowed";
    case Variant::entropy_gated: return "entropy_gated";
  }
  throw std::logic_error("variant_name: unknown variant");
}

inline Variant variant_from_name(const std::string& s) {
  if (s == "unigram") return Variant::unigram;
  if (s == "windowed") return Variant::windowed;
  if (s == "entropy_gated") return Variant::entropy_gated;
  throw std::invalid_argument("unknown watermark variant: " + s);
}

struct WatermarkScheme {
  Variant variant = Variant::windowed;
  std::uint64_t key = 15485863;
  double green_rate = 0.5;
  double bias = 2.0;
  std::int32_t prefix_length = 4;
  std::optional<double> entropy_threshold;  // nats; entropy_gated only
};

inline void validate_scheme(const WatermarkScheme& s) {
  if (!(s.green_rate > 0.0 && s.green_rate < 1.0)) {
    throw std::invalid_argument("watermark: green_rate must lie in (0, 1)");
  }
  if (!(s.bias >= 0.0)) throw std::invalid_argument("watermark: bias must be >= 0");
  if (s.prefix_length < 0) throw std::invalid_argument("watermark: prefix_length must be >= 0");
  if (s.variant == Variant::unigram && s.prefix_length != 0) {
    throw std::invalid_argument("watermark: unigram variant requires prefix_length 0");
  }
  if (s.variant == Variant::entropy_gated && !s.entropy_threshold.has_value()) {
    throw std::invalid_argument("watermark: entropy_gated variant requires an entropy threshold");
  }
  if (s.entropy_threshold && !(*s.entropy_threshold >= 0.0)) {
    throw std::invalid_argument("watermark: entropy threshold must be >= 0");
  }
}

/// Keyed hash of (window, token) in [0, 1). Bit-exact by construction: the
/// key is folded with each window token and the candidate token through the
/// splitmix64 finalizer, then the 64-bit state is scaled to a unit double.
inline double token_hash(std::uint64_t key, std::span<const std::int32_t> window, std::int32_t token) {
  std::uint64_t h = key;
  const auto fold = [](std::uint64_t a, std::int32_t v) {
    return rng::mix64(a ^ (static_cast<std::uint64_t>(static_cast<std::int64_t>(v)) + rng::kGolden));
  };
  for (std::int32_t w : window) h = fold(h, w);
  h = fold(h, token);
  return static_cast<double>(h) * 0x1.0p-64;
}

/// Green membership per token. Only the last prefix_length tokens of
/// `window` are hashed, so unigram masks (prefix 0) are window-independent.
inline std::vector<std::uint8_t> green_mask(const WatermarkScheme& scheme,
                                            std::span<const std::int32_t> window,
                                            std::int32_t vocab_size) {
  const std::size_t take =
      std::min(window.size(), static_cast<std::size_t>(scheme.prefix_length));
  const auto hashed = window.last(take);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(vocab_size));
  for (std::int32_t v = 0; v < vocab_size; ++v) {
    mask[static_cast<std::size_t>(v)] =
        token_hash(scheme.key, hashed, v) < scheme.green_rate ? 1 : 0;
  }
  return mask;
}

/// Adds `bias` to the masked logits. When an entropy threshold is supplied
/// and the softmax entropy of the incoming logits is at or below it, the
/// logits pass through unchanged (the gate is closed).
inline void bias_transform(std::span<double> step_logits, std::span<const std::uint8_t> mask,
                           double bias, std::optional<double> entropy_threshold = {}) {
  if (step_logits.size() != mask.size()) {
    throw std::invalid_argument("bias_transform: logits and mask lengths differ");
  }
  if (entropy_threshold && math::softmax_entropy_nats(step_logits) <= *entropy_threshold) return;
  for (std::size_t i = 0; i < step_logits.size(); ++i) {
    if (mask[i]) step_logits[i] += bias;
  }
}

/// Logit transform that embeds `scheme` during sampling. Hash windows are
/// drawn from the generated tokens only, never the prompt.
inline lm::LogitTransform make_watermark_transform(const WatermarkScheme& scheme) {
  validate_scheme(scheme);
  return [scheme](std::span<double> step_logits, std::span<const std::int32_t> generated) {
    if (static_cast<std::int64_t>(generated.size()) < scheme.prefix_length) return;
    const auto mask = green_mask(scheme, generated, static_cast<std::int32_t>(step_logits.size()));
    bias_transform(step_logits, mask, scheme.bias, scheme.entropy_threshold);
  };
}

struct DetectionResult {
  std::int64_t counted_positions = 0;
  std::int64_t green_hits = 0;
  double z_score = 0.0;
  double threshold = 0.0;
  bool detected = false;
};

/// Standard green-count z statistic for g hits out of T positions at rate q.
inline double green_z(std::int64_t green_hits, std::int64_t counted, double green_rate) {
  if (counted <= 0) throw std::invalid_argument("green_z: no counted positions");
  const double t = static_cast<double>(counted);
  return (static_cast<double>(green_hits) - green_rate * t) /
         std::sqrt(t * green_rate * (1.0 - green_rate));
}

/// Reconstructs each position's green mask from the sequence and tests the
/// green count. The entropy_gated variant recomputes the generation-time
/// gates, which requires the victim model and the generation prompt; gate
/// entropies assume the victim's plain sampling configuration (no bag, no
/// logit scaling).
inline DetectionResult detect(const lm::TokenSeq& sequence, const WatermarkScheme& scheme,
                              double threshold, const lm::LmParams* victim = nullptr,
                              const lm::TokenSeq* prompt = nullptr) {
  validate_scheme(scheme);
  if (sequence.tokens.empty()) throw std::invalid_argument("detect: empty sequence");
  lm::validate_tokens(sequence.tokens, sequence.vocab_size);
  const bool gated = scheme.variant == Variant::entropy_gated;
  if (gated && victim == nullptr) {
    throw std::invalid_argument("detect: entropy_gated detection requires the victim model");
  }

  std::vector<std::int32_t> context;
  if (prompt != nullptr) context = prompt->tokens;

  std::int64_t counted = 0;
  std::int64_t hits = 0;
  const std::span<const std::int32_t> toks(sequence.tokens);
  for (std::size_t t = 0; t < toks.size(); ++t) {
    if (static_cast<std::int64_t>(t) >= scheme.prefix_length) {
      bool open = true;
      if (gated) {
        const std::vector<double> l = lm::logits(*victim, context, lm::ConditioningBag::none());
        open = math::softmax_entropy_nats(l) > *scheme.entropy_threshold;
      }
      if (open) {
        const auto window = toks.first(t).last(static_cast<std::size_t>(scheme.prefix_length));
        if (token_hash(scheme.key, window, toks[t]) < scheme.green_rate) ++hits;
        ++counted;
      }
    }
    context.push_back(toks[t]);
  }

  if (counted == 0) {
    throw std::runtime_error("detect: no countable positions (sequence too short or all gates closed)");
  }

  DetectionResult r;
  r.counted_positions = counted;
  r.green_hits = hits;
  r.z_score = green_z(hits, counted, scheme.green_rate);
  r.threshold = threshold;
  r.detected = r.z_score > threshold;
  return r;
}

// --- serialization ---------------------------------------------------------

inline nlohmann::json to_json(const WatermarkScheme& s) {
  nlohmann::json j{{"variant", variant_name(s.variant)},
                   {"key", s.key},
                   {"green_rate", s.green_rate},
                   {"bias", s.bias},
                   {"prefix_length", s.prefix_length}};
  j["entropy_threshold"] = s.entropy_threshold ? nlohmann::json(*s.entropy_threshold)
                                               : nlohmann::json(nullptr);
  return j;
}

inline WatermarkScheme scheme_from_json(const nlohmann::json& j) {
  WatermarkScheme s;
  s.variant = variant_from_name(j.at("variant").get<std::string>());
  s.key = j.at("key").get<std::uint64_t>();
  s.green_rate = j.at("green_rate").get<double>();
  s.bias = j.at("bias").get<double>();
  s.prefix_length = j.at("prefix_length").get<std::int32_t>();
  if (j.contains("entropy_threshold") && !j.at("entropy_threshold").is_null()) {
    s.entropy_threshold = j.at("entropy_threshold").get<double>();
  }
  validate_scheme(s);
  return s;
}

}  // namespace wmlab::wm
