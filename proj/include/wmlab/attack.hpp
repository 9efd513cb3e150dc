#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wmlab/mathutil.hpp"
#include "wmlab/rng.hpp"
#include "wmlab/toylm.hpp"
#include "wmlab/watermark.hpp"

// Policy-gradient watermark remover.
//
// The attacker is a copy-bias language model trained on (question,
// watermarked response) pairs. It samples paraphrases conditioned on the
// question (prompt) and the watermarked response (conditioning bag), and
// ascends a group-relative surrogate objective
//
//   J = mean_i mean_t [ ratio_{i,t} (w1 A^_i + w2 Delta_{i,t} - w3 ppl_i)
//                       - beta k3(p_ref, q_theta) ]
//
// where ratio is the importance ratio against the sampling snapshot, A^ the
// group-normalized semantic reward, Delta the per-token difference between
// the KL pull toward the watermark-conditioned reference and the pull
// toward the question-conditioned reference, ppl a fluency penalty, and the
// beta term a KL leash to the frozen reference. All rewards are treated as
// constants of the optimization; the gradient flows through ratio and the
// leash only. Probabilities are exact, so gradients are exact as well.

namespace wmlab::attack {

struct QaPair {
  lm::TokenSeq question;
  lm::TokenSeq response;
};

/// Which model scores the fluency penalty.
enum class PplModel { reference, policy_snapshot };

struct GrpoConfig {
  double w1_prime = 6.0;   // base weight of the dynamic semantic channel
  double w2 = 0.1;         // token-wise KL reward weight
  double w3 = 0.1;         // perplexity penalty weight
  double beta = 0.04;      // reference-KL leash coefficient
  std::int32_t group_size = 12;
  double learning_rate = 1e-2;
  std::int32_t epochs = 10;
  std::int32_t batch_size = 10;
  double sem_center = 0.85;      // semantic score mapped to reward 0
  double sem_half_range = 0.15;  // scores center +- half_range map to +-0.95
  PplModel ppl_model = PplModel::reference;
};

inline void validate_config(const GrpoConfig& c) {
  if (c.group_size < 2) throw std::invalid_argument("grpo: group_size must be >= 2");
  if (!(c.learning_rate > 0.0)) throw std::invalid_argument("grpo: learning_rate must be > 0");
  if (c.epochs < 1) throw std::invalid_argument("grpo: epochs must be >= 1");
  if (c.batch_size < 1) throw std::invalid_argument("grpo: batch_size must be >= 1");
  if (!(c.w1_prime >= 0.0 && c.beta >= 0.0)) {
    throw std::invalid_argument("grpo: w1_prime and beta must be >= 0");
  }
  for (double w : {c.w2, c.w3, c.sem_center, c.sem_half_range}) {
    if (!std::isfinite(w)) throw std::invalid_argument("grpo: non-finite config value");
  }
}

struct PolicyState {
  lm::LmParams params;      // trainable
  lm::LmParams old_params;  // sampling snapshot, refreshed after each step
  lm::LmParams ref_params;  // frozen reference
  std::int64_t step = 0;
};

inline PolicyState make_policy(const lm::LmParams& init) {
  return PolicyState{init, init, init, 0};
}

/// Trainable parameters: every table logit plus the copy strength.
inline std::size_t param_count(const lm::LmParams& lm) { return lm.table.size() + 1; }

// --- rewards ----------------------------------------------------------------

/// Cosine similarity of the two sequences' token-count vectors.
inline double semantic_surrogate(const lm::TokenSeq& original, const lm::TokenSeq& paraphrase) {
  if (original.tokens.empty() || paraphrase.tokens.empty()) {
    throw std::invalid_argument("semantic_surrogate: empty sequence");
  }
  if (original.vocab_size != paraphrase.vocab_size) {
    throw std::invalid_argument("semantic_surrogate: vocabulary mismatch");
  }
  const lm::ConditioningBag a = lm::make_bag(original);
  const lm::ConditioningBag b = lm::make_bag(paraphrase);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    const double x = static_cast<double>(a.counts[i]);
    const double y = static_cast<double>(b.counts[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  return dot / std::sqrt(na * nb);
}

/// Sigmoid-shaped reward in (-1, 1), zero at `center`, reaching +-0.95 at
/// center +- half_range. The gain ln 39 pins sigmoid(ln 39) = 39/40.
inline double semantic_reward(double score, double center = 0.85, double half_range = 0.15) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw std::invalid_argument("semantic_reward: score must lie in [0, 1]");
  }
  const double gain = std::log(39.0);
  return 2.0 * math::sigmoid(gain * (score - center) / half_range) - 1.0;
}

/// Group-normalized advantages (population std). A group with spread below
/// 1e-12 yields all-zero advantages instead of dividing by noise.
inline std::vector<double> group_advantage(std::span<const double> rewards) {
  if (rewards.size() < 2) throw std::invalid_argument("group_advantage: need at least 2 rewards");
  const double mean = math::sample_mean(rewards);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(rewards.size());
  const double sd = std::sqrt(var);
  std::vector<double> out(rewards.size(), 0.0);
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

inline constexpr double kRatioClampLo = 1e-6;
inline constexpr double kRatioClampHi = 1e6;

/// Non-negative KL estimator r - ln r - 1 with r = p_target / q_policy,
/// the ratio clamped to [1e-6, 1e6]. Zero exactly when the ratio is 1.
inline double k3_term(double p_target, double q_policy) {
  if (!(p_target > 0.0 && p_target <= 1.0) || !(q_policy > 0.0 && q_policy <= 1.0)) {
    throw std::invalid_argument("k3_term: probabilities must lie in (0, 1]");
  }
  const double r = std::clamp(p_target / q_policy, kRatioClampLo, kRatioClampHi);
  return r - std::log(r) - 1.0;
}

/// Token-wise KL reward: how much further the policy's token probability
/// sits from the watermark-conditioned reference than from the
/// question-conditioned one. Positive values mean the token has moved away
/// from the watermark distribution.
inline double token_kl_reward(const PolicyState& policy, const lm::TokenSeq& wm_context,
                              const lm::TokenSeq& question, std::span<const std::int32_t> output_prefix,
                              std::int32_t token) {
  const lm::ConditioningBag bag_wm = lm::make_bag(wm_context);
  const lm::ConditioningBag bag_q = lm::make_bag(question);
  std::vector<std::int32_t> ctx(question.tokens);
  ctx.insert(ctx.end(), output_prefix.begin(), output_prefix.end());
  const std::size_t v = static_cast<std::size_t>(token);
  const double q = lm::conditional(policy.params, ctx, bag_wm)[v];
  const double p_wm = lm::conditional(policy.ref_params, ctx, bag_wm)[v];
  const double p_h = lm::conditional(policy.ref_params, ctx, bag_q)[v];
  return k3_term(p_wm, q) - k3_term(p_h, q);
}

/// Reference-model perplexity of `output` given `question`, with no bag.
inline double perplexity(const lm::LmParams& ref, const lm::TokenSeq& question,
                         const lm::TokenSeq& output) {
  if (output.tokens.empty()) throw std::invalid_argument("perplexity: empty output");
  const double lp = lm::sequence_logprob(ref, question, lm::ConditioningBag::none(), output);
  return std::exp(-lp / static_cast<double>(output.tokens.size()));
}

// --- rollouts and the surrogate objective -----------------------------------

struct RolloutSample {
  lm::TokenSeq output;
  double sem_score = 0.0;
  double reward = 0.0;     // sigmoid semantic reward A_i
  double advantage = 0.0;  // group-normalized A^_i
  double ppl = 0.0;
  std::vector<double> q_old;       // sampling-snapshot probability per token
  std::vector<double> p_ref;       // watermark-conditioned reference prob per token
  std::vector<double> delta_kl;    // per-token KL reward
  std::vector<double> reward_coef; // w1 A^ + w2 delta - w3 ppl, per token
};

struct RolloutGroup {
  lm::TokenSeq question;
  lm::TokenSeq wm_response;
  lm::ConditioningBag bag_wm;
  double w1 = 1.0;
  std::vector<RolloutSample> samples;
};

struct Rollout {
  std::vector<RolloutGroup> groups;
};

/// Samples G paraphrases per pair from the policy snapshot and precomputes
/// every reward the surrogate objective needs. Output length is pinned to
/// the watermarked response length.
inline Rollout collect_rollout(const PolicyState& policy, std::span<const QaPair> batch,
                               const GrpoConfig& config, std::uint64_t seed) {
  validate_config(config);
  if (batch.empty()) throw std::invalid_argument("collect_rollout: empty batch");

  Rollout rollout;
  rollout.groups.reserve(batch.size());
  const std::int32_t g_count = config.group_size;

  for (std::size_t pi = 0; pi < batch.size(); ++pi) {
    const QaPair& pair = batch[pi];
    if (pair.response.tokens.empty()) {
      throw std::invalid_argument("collect_rollout: empty watermarked response");
    }
    RolloutGroup group;
    group.question = pair.question;
    group.wm_response = pair.response;
    group.bag_wm = lm::make_bag(pair.response);
    const lm::ConditioningBag bag_q = pair.question.tokens.empty()
                                          ? lm::ConditioningBag::none()
                                          : lm::make_bag(pair.question);
    const std::int32_t len = static_cast<std::int32_t>(pair.response.tokens.size());
    const std::uint64_t pair_seed = rng::split_seed(seed, static_cast<std::uint64_t>(pi));

    std::vector<double> rewards(static_cast<std::size_t>(g_count));
    for (std::int32_t gi = 0; gi < g_count; ++gi) {
      RolloutSample s;
      const std::uint64_t sample_seed = rng::split_seed(pair_seed, static_cast<std::uint64_t>(gi));
      s.output = lm::sample_sequence(policy.old_params, pair.question, group.bag_wm, len, {},
                                     sample_seed);
      s.sem_score = semantic_surrogate(pair.response, s.output);
      s.reward = semantic_reward(s.sem_score, config.sem_center, config.sem_half_range);
      rewards[static_cast<std::size_t>(gi)] = s.reward;

      const lm::LmParams& ppl_model =
          config.ppl_model == PplModel::reference ? policy.ref_params : policy.old_params;
      s.ppl = perplexity(ppl_model, pair.question, s.output);

      std::vector<std::int32_t> ctx(pair.question.tokens);
      s.q_old.reserve(s.output.tokens.size());
      s.p_ref.reserve(s.output.tokens.size());
      s.delta_kl.reserve(s.output.tokens.size());
      for (std::int32_t tok : s.output.tokens) {
        const std::size_t v = static_cast<std::size_t>(tok);
        const double q_old = lm::conditional(policy.old_params, ctx, group.bag_wm)[v];
        const double p_wm = lm::conditional(policy.ref_params, ctx, group.bag_wm)[v];
        const double p_h = lm::conditional(policy.ref_params, ctx, bag_q)[v];
        s.q_old.push_back(q_old);
        s.p_ref.push_back(p_wm);
        s.delta_kl.push_back(k3_term(p_wm, q_old) - k3_term(p_h, q_old));
        ctx.push_back(tok);
      }
      group.samples.push_back(std::move(s));
    }

    const double mean_reward = math::sample_mean(rewards);
    group.w1 = std::max(config.w1_prime * (1.0 - mean_reward), 1.0);
    const std::vector<double> adv = group_advantage(rewards);
    for (std::int32_t gi = 0; gi < g_count; ++gi) {
      RolloutSample& s = group.samples[static_cast<std::size_t>(gi)];
      s.advantage = adv[static_cast<std::size_t>(gi)];
      s.reward_coef.resize(s.output.tokens.size());
      for (std::size_t t = 0; t < s.output.tokens.size(); ++t) {
        s.reward_coef[t] = group.w1 * s.advantage + config.w2 * s.delta_kl[t] - config.w3 * s.ppl;
      }
    }
    rollout.groups.push_back(std::move(group));
  }
  return rollout;
}

namespace detail {

// d k3(p, q) / d q, honoring the flat regions introduced by the ratio clamp.
inline double k3_dq(double p, double q) {
  const double raw = p / q;
  if (raw < kRatioClampLo || raw > kRatioClampHi) return 0.0;
  return (1.0 - raw) / q;
}

}  // namespace detail

/// Surrogate objective for fixed rollouts as a function of the live policy
/// parameters. Pure: repeated evaluation at perturbed parameters is how the
/// finite-difference checks drive it.
inline double grpo_objective(const lm::LmParams& theta, const Rollout& rollout,
                             const GrpoConfig& config) {
  std::vector<double> group_terms;
  group_terms.reserve(rollout.groups.size());
  for (const RolloutGroup& group : rollout.groups) {
    std::vector<double> sample_terms;
    sample_terms.reserve(group.samples.size());
    for (const RolloutSample& s : group.samples) {
      std::vector<std::int32_t> ctx(group.question.tokens);
      double acc = 0.0;
      for (std::size_t t = 0; t < s.output.tokens.size(); ++t) {
        const std::int32_t tok = s.output.tokens[t];
        const double q = lm::conditional(theta, ctx, group.bag_wm)[static_cast<std::size_t>(tok)];
        const double ratio = q / s.q_old[t];
        acc += ratio * s.reward_coef[t] - config.beta * k3_term(s.p_ref[t], q);
        ctx.push_back(tok);
      }
      sample_terms.push_back(acc / static_cast<double>(s.output.tokens.size()));
    }
    group_terms.push_back(math::pairwise_sum(sample_terms) /
                          static_cast<double>(sample_terms.size()));
  }
  return math::pairwise_sum(group_terms) / static_cast<double>(group_terms.size());
}

/// Exact gradient of grpo_objective with respect to [table..., copy_strength].
/// Accumulation walks groups, samples, and tokens in a fixed index order.
inline std::vector<double> grpo_gradient(const lm::LmParams& theta, const Rollout& rollout,
                                         const GrpoConfig& config) {
  std::vector<double> grad(param_count(theta), 0.0);
  const std::size_t vocab = static_cast<std::size_t>(theta.vocab.size);
  const double n_groups = static_cast<double>(rollout.groups.size());

  std::vector<double> log1p_bag(vocab, 0.0);
  for (const RolloutGroup& group : rollout.groups) {
    for (std::size_t i = 0; i < vocab; ++i) {
      log1p_bag[i] = group.bag_wm.empty()
                         ? 0.0
                         : std::log1p(static_cast<double>(group.bag_wm.counts[i]));
    }
    const double n_samples = static_cast<double>(group.samples.size());
    for (const RolloutSample& s : group.samples) {
      const double w = 1.0 / (n_groups * n_samples * static_cast<double>(s.output.tokens.size()));
      std::vector<std::int32_t> ctx(group.question.tokens);
      for (std::size_t t = 0; t < s.output.tokens.size(); ++t) {
        const std::int32_t tok = s.output.tokens[t];
        const std::vector<double> q = lm::conditional(theta, ctx, group.bag_wm);
        const double q_tok = q[static_cast<std::size_t>(tok)];

        // d objective / d q_tok, combining the ratio channel and the leash.
        const double dj_dq =
            s.reward_coef[t] / s.q_old[t] - config.beta * detail::k3_dq(s.p_ref[t], q_tok);

        // Softmax backprop: d q_tok / d logit_v = q_tok (1[v=tok] - q_v).
        const std::size_t row = static_cast<std::size_t>(
                                    lm::state_index(theta.order, theta.vocab.size, ctx)) *
                                vocab;
        double mean_log1p = 0.0;
        for (std::size_t v = 0; v < vocab; ++v) mean_log1p += q[v] * log1p_bag[v];
        for (std::size_t v = 0; v < vocab; ++v) {
          const double indicator = v == static_cast<std::size_t>(tok) ? 1.0 : 0.0;
          grad[row + v] += w * dj_dq * q_tok * (indicator - q[v]);
        }
        grad.back() += w * dj_dq * q_tok *
                       (log1p_bag[static_cast<std::size_t>(tok)] - mean_log1p);
        ctx.push_back(tok);
      }
    }
  }
  return grad;
}

struct StepStats {
  double objective = 0.0;
  double mean_z = 0.0;
  double mean_semantic = 0.0;
  double mean_delta_kl = 0.0;
  double mean_ppl = 0.0;
  double grad_norm = 0.0;
};

/// One sampling round plus one ascent step. The sampling snapshot is
/// refreshed to the updated parameters afterwards, and the copy strength is
/// projected back onto [0, inf) if the step drove it negative.
inline StepStats grpo_step(PolicyState& policy, std::span<const QaPair> batch,
                           const GrpoConfig& config, const wm::WatermarkScheme& scheme,
                           double z_threshold, std::uint64_t seed) {
  const Rollout rollout = collect_rollout(policy, batch, config, seed);
  const double objective = grpo_objective(policy.params, rollout, config);
  const std::vector<double> grad = grpo_gradient(policy.params, rollout, config);

  double norm2 = 0.0;
  for (double g : grad) norm2 += g * g;
  if (!std::isfinite(norm2) || !std::isfinite(objective)) {
    throw std::runtime_error("grpo_step: non-finite objective or gradient at step " +
                             std::to_string(policy.step) + "; aborting before the update");
  }

  for (std::size_t i = 0; i < policy.params.table.size(); ++i) {
    policy.params.table[i] += config.learning_rate * grad[i];
  }
  policy.params.copy_strength =
      std::max(policy.params.copy_strength + config.learning_rate * grad.back(), 0.0);
  policy.old_params = policy.params;
  ++policy.step;

  StepStats stats;
  stats.objective = objective;
  stats.grad_norm = std::sqrt(norm2);
  std::int64_t n_out = 0;
  std::int64_t n_scored = 0;
  std::int64_t n_tok = 0;
  for (const RolloutGroup& group : rollout.groups) {
    for (const RolloutSample& s : group.samples) {
      if (s.output.length() > scheme.prefix_length) {
        stats.mean_z += wm::detect(s.output, scheme, z_threshold).z_score;
        ++n_scored;
      }
      stats.mean_semantic += s.sem_score;
      stats.mean_ppl += s.ppl;
      for (double d : s.delta_kl) {
        stats.mean_delta_kl += d;
        ++n_tok;
      }
      ++n_out;
    }
  }
  if (n_scored > 0) stats.mean_z /= static_cast<double>(n_scored);
  stats.mean_semantic /= static_cast<double>(n_out);
  stats.mean_ppl /= static_cast<double>(n_out);
  stats.mean_delta_kl /= static_cast<double>(n_tok);
  return stats;
}

struct EpochStats {
  std::int32_t epoch = 0;
  StepStats stats;
};

struct TrainingReport {
  std::vector<EpochStats> epochs;
};

/// Epochs of seeded-shuffled batches over the dataset. Deterministic for a
/// fixed seed: shuffles, sampling, and updates all derive from it.
inline TrainingReport train(PolicyState& policy, std::span<const QaPair> dataset,
                            const GrpoConfig& config, const wm::WatermarkScheme& scheme,
                            double z_threshold, std::uint64_t seed) {
  validate_config(config);
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");

  TrainingReport report;
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::int32_t epoch = 0; epoch < config.epochs; ++epoch) {
    const std::uint64_t epoch_seed = rng::split_seed(seed, static_cast<std::uint64_t>(epoch));
    rng::Stream shuffle(rng::split_seed(epoch_seed, 0));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle.next_u64() % i);
      std::swap(order[i - 1], order[j]);
    }

    StepStats epoch_mean;
    std::int32_t n_steps = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<QaPair> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(dataset[order[i]]);
      const StepStats s = grpo_step(policy, batch, config, scheme, z_threshold,
                                    rng::split_seed(epoch_seed, 1 + static_cast<std::uint64_t>(n_steps)));
      epoch_mean.objective += s.objective;
      epoch_mean.mean_z += s.mean_z;
      epoch_mean.mean_semantic += s.mean_semantic;
      epoch_mean.mean_delta_kl += s.mean_delta_kl;
      epoch_mean.mean_ppl += s.mean_ppl;
      epoch_mean.grad_norm += s.grad_norm;
      ++n_steps;
    }
    const double inv = 1.0 / static_cast<double>(n_steps);
    epoch_mean.objective *= inv;
    epoch_mean.mean_z *= inv;
    epoch_mean.mean_semantic *= inv;
    epoch_mean.mean_delta_kl *= inv;
    epoch_mean.mean_ppl *= inv;
    epoch_mean.grad_norm *= inv;
    report.epochs.push_back(EpochStats{epoch, epoch_mean});
  }
  return report;
}

// --- pass@k oracle attack ----------------------------------------------------

struct PasskOutcome {
  lm::TokenSeq best;
  std::int32_t best_index = 0;
  std::vector<std::pair<double, double>> z_and_semantic;  // one entry per candidate
};

/// Draws k candidates from the policy conditioned on the watermarked text's
/// bag and keeps the one with the lowest detector score (oracle detector
/// access; ties resolve to the lowest candidate index). Candidate i uses the
/// split seed (seed, i), so growing k keeps earlier candidates fixed.
inline PasskOutcome passk_attack(const PolicyState& policy, const lm::TokenSeq& watermarked,
                                 std::int32_t k, const wm::WatermarkScheme& scheme, double threshold,
                                 std::uint64_t seed, const lm::LmParams* victim = nullptr,
                                 const lm::TokenSeq* prompt = nullptr) {
  if (k < 1) throw std::invalid_argument("passk_attack: k must be >= 1");
  if (watermarked.tokens.empty()) throw std::invalid_argument("passk_attack: empty input");

  const lm::ConditioningBag bag = lm::make_bag(watermarked);
  const lm::TokenSeq empty_prompt{{}, watermarked.vocab_size};
  const std::int32_t len = static_cast<std::int32_t>(watermarked.tokens.size());

  PasskOutcome out;
  double best_z = std::numeric_limits<double>::infinity();
  for (std::int32_t i = 0; i < k; ++i) {
    lm::TokenSeq cand = lm::sample_sequence(policy.params, prompt ? *prompt : empty_prompt, bag, len,
                                            {}, rng::split_seed(seed, static_cast<std::uint64_t>(i)));
    const double z = wm::detect(cand, scheme, threshold, victim, prompt).z_score;
    const double sem = semantic_surrogate(watermarked, cand);
    out.z_and_semantic.emplace_back(z, sem);
    if (z < best_z) {
      best_z = z;
      out.best = std::move(cand);
      out.best_index = i;
    }
  }
  return out;
}

// --- serialization ------------------------------------------------------------

inline constexpr int kPolicyFormatVersion = 1;

inline nlohmann::json to_json(const PolicyState& p) {
  return nlohmann::json{{"version", kPolicyFormatVersion},
                        {"step", p.step},
                        {"params", lm::to_json(p.params)},
                        {"ref_params", lm::to_json(p.ref_params)}};
}

inline PolicyState policy_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kPolicyFormatVersion) {
    throw std::invalid_argument("policy_from_json: unsupported format version");
  }
  PolicyState p;
  p.params = lm::lm_from_json(j.at("params"));
  p.old_params = p.params;
  p.ref_params = lm::lm_from_json(j.at("ref_params"));
  p.step = j.at("step").get<std::int64_t>();
  return p;
}

inline nlohmann::json to_json(const TrainingReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochStats& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"objective", e.stats.objective},
                      {"mean_z", e.stats.mean_z},
                      {"mean_semantic", e.stats.mean_semantic},
                      {"mean_delta_kl", e.stats.mean_delta_kl},
                      {"ppl", e.stats.mean_ppl},
                      {"grad_norm", e.stats.grad_norm}});
  }
  return nlohmann::json{{"version", 1}, {"epochs", epochs}};
}

}  // namespace wmlab::attack
