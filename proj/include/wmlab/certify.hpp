#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmlab/mathutil.hpp"
#include "wmlab/rng.hpp"
#include "wmlab/toylm.hpp"
#include "wmlab/watermark.hpp"

// Robustness certificates for green-list watermarks.
//
// Treat the detector score f of a watermarked output as a random variable
// with mean mu and sub-Gaussian variance proxy sigma^2. Any attack
// distribution Q within KL divergence rho of the watermarked output
// distribution P satisfies
//
//     E_Q[f] >= mu - sqrt(2 sigma^2 KL(Q||P)),
//
// so detection at threshold delta survives every Q inside the KL ball of
// radius rho* = (mu - delta)_+^2 / (2 sigma^2). Exponential tilting supplies
// the distributions that saturate the bound when the score is Gaussian, and
// the tail/union bounds quantify single-shot and best-of-k evasion.

namespace wmlab::certify {

enum class ProxyMode { empirical_variance, range_hoeffding };

inline std::string proxy_mode_name(ProxyMode m) {
  return m == ProxyMode::empirical_variance ? "empirical_variance" : "range_hoeffding";
}

struct MomentEstimate {
  double mean = 0.0;
  double variance = 0.0;
  double stderr_mean = 0.0;
  std::int64_t n = 0;
  ProxyMode proxy_mode = ProxyMode::empirical_variance;
};

/// Draw `index` is sampled with the split seed (seed, index).
using ScoreSampler = std::function<double(std::uint64_t draw_seed)>;

/// Monte Carlo mean and variance proxy of a score sampler. All reductions
/// are pairwise trees over the draw index, so the estimate is independent
/// of evaluation order.
inline MomentEstimate estimate_moments(const ScoreSampler& sampler, std::int64_t n,
                                       std::uint64_t seed,
                                       ProxyMode mode = ProxyMode::empirical_variance) {
  if (n < 2) throw std::invalid_argument("estimate_moments: need at least 2 samples");
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] = sampler(rng::split_seed(seed, static_cast<std::uint64_t>(i)));
  }
  const double mean = math::sample_mean(xs);

  double variance = 0.0;
  if (mode == ProxyMode::empirical_variance) {
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    variance = math::pairwise_sum(sq) / static_cast<double>(n - 1);
  } else {
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    const double range = *hi - *lo;
    variance = range * range / 4.0;
  }

  MomentEstimate e;
  e.mean = mean;
  e.variance = variance;
  e.stderr_mean = std::sqrt(variance / static_cast<double>(n));
  e.n = n;
  e.proxy_mode = mode;
  return e;
}

struct RobustnessCertificate {
  double mu = 0.0;
  double sigma2 = 0.0;
  double delta_detect = 0.0;
  double rho_star = 0.0;
  std::int64_t n = 0;
};

/// rho* = (mu - delta)_+^2 / (2 sigma^2); zero whenever mu <= delta.
/// All certificate arithmetic is IEEE double precision.
inline RobustnessCertificate certificate(double mu, double sigma2, double delta_detect,
                                         std::int64_t n = 0) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("certificate: sigma2 must be positive");
  RobustnessCertificate c;
  c.mu = mu;
  c.sigma2 = sigma2;
  c.delta_detect = delta_detect;
  c.n = n;
  const double gap = mu - delta_detect;
  c.rho_star = gap > 0.0 ? gap * gap / (2.0 * sigma2) : 0.0;
  return c;
}

/// Lower bound mu - sqrt(2 sigma^2 kl) on the expected score of any
/// distribution within KL divergence `kl` of the watermarked outputs.
inline double dv_lower_bound(double mu, double sigma2, double kl) {
  if (kl < 0.0) throw std::invalid_argument("dv_lower_bound: kl must be >= 0");
  if (sigma2 < 0.0) throw std::invalid_argument("dv_lower_bound: sigma2 must be >= 0");
  return mu - std::sqrt(2.0 * sigma2 * kl);
}

struct TiltedDistribution {
  std::vector<double> base;
  double lambda = 0.0;
  std::vector<double> score;
  std::vector<double> tilted;
};

/// Exponential tilt Q(i) proportional to base(i) * exp(-lambda * score(i)),
/// normalized with log-sum-exp so that |lambda * score| up to 700 cannot
/// overflow. lambda = 0 reproduces the base distribution.
inline TiltedDistribution tilt(std::span<const double> base, std::span<const double> score,
                               double lambda) {
  if (base.size() != score.size() || base.empty()) {
    throw std::invalid_argument("tilt: base and score must be non-empty and equal length");
  }
  if (lambda < 0.0) throw std::invalid_argument("tilt: lambda must be >= 0");
  double total = 0.0;
  for (double p : base) {
    if (!(p >= 0.0)) throw std::invalid_argument("tilt: base probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("tilt: base distribution is not normalized");
  for (double s : score) {
    if (!std::isfinite(s)) throw std::invalid_argument("tilt: scores must be finite");
  }

  TiltedDistribution out;
  out.base.assign(base.begin(), base.end());
  out.score.assign(score.begin(), score.end());
  out.lambda = lambda;
  out.tilted.resize(base.size());

  if (lambda == 0.0) {
    for (std::size_t i = 0; i < base.size(); ++i) out.tilted[i] = base[i] / total;
    return out;
  }

  std::vector<double> logw(base.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i] > 0.0) logw[i] = std::log(base[i]) - lambda * score[i];
  }
  const double lse = math::log_sum_exp(logw);
  for (std::size_t i = 0; i < base.size(); ++i) {
    out.tilted[i] = base[i] > 0.0 ? std::exp(logw[i] - lse) : 0.0;
  }
  return out;
}

inline double expectation(std::span<const double> probs, std::span<const double> values) {
  if (probs.size() != values.size()) throw std::invalid_argument("expectation: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) s += probs[i] * values[i];
  return s;
}

inline double discrete_variance(std::span<const double> probs, std::span<const double> values) {
  const double m = expectation(probs, values);
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) s += probs[i] * (values[i] - m) * (values[i] - m);
  return s;
}

/// Exact KL divergence sum q ln(q/p) with the 0 ln 0 = 0 convention.
/// Rejects q-mass on p-null outcomes instead of returning infinity.
inline double kl_exact(std::span<const double> q, std::span<const double> p) {
  if (q.size() != p.size() || q.empty()) {
    throw std::invalid_argument("kl_exact: distributions must be non-empty and equal length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] < 0.0 || p[i] < 0.0) throw std::invalid_argument("kl_exact: negative probability");
    if (q[i] == 0.0) continue;
    if (p[i] == 0.0) {
      throw std::domain_error("kl_exact: q puts mass on an outcome with zero p probability");
    }
    s += q[i] * std::log(q[i] / p[i]);
  }
  return s > 0.0 ? s : 0.0;
}

/// Tail bound on the evasion probability of a single attempt:
/// Q(f <= delta) <= exp(KL - rho*).
inline double single_shot_bound(double kl, double rho_star) {
  if (kl < 0.0) throw std::invalid_argument("single_shot_bound: kl must be >= 0");
  if (rho_star < 0.0) throw std::invalid_argument("single_shot_bound: rho_star must be >= 0");
  return std::min(1.0, std::exp(kl - rho_star));
}

struct PasskAttempt {
  double kl = 0.0;
  double rho_star = 0.0;
};

struct PasskBoundInput {
  std::int64_t k = 1;
  double eta = 1.0;
  // One entry per attempt, or a single entry shared by all k attempts.
  std::vector<PasskAttempt> attempts;
};

struct PasskBounds {
  double union_bound = 0.0;
  double budget_per_attempt = 0.0;
  bool infeasible = false;
};

/// Union bound over k attempts plus the per-attempt KL budget
/// rho* - ln(k/eta) needed to keep total evasion probability below eta.
/// A negative budget is returned as-is with the infeasible flag set. With
/// heterogeneous attempts the budget is computed from the smallest rho*.
inline PasskBounds passk_bounds(const PasskBoundInput& in) {
  if (in.k < 1) throw std::invalid_argument("passk_bounds: k must be >= 1");
  if (!(in.eta > 0.0 && in.eta <= 1.0)) throw std::invalid_argument("passk_bounds: eta must lie in (0, 1]");
  if (in.attempts.empty()) throw std::invalid_argument("passk_bounds: no attempts given");
  if (in.attempts.size() != 1 && static_cast<std::int64_t>(in.attempts.size()) != in.k) {
    throw std::invalid_argument("passk_bounds: attempts must have 1 or k entries");
  }

  double sum = 0.0;
  double min_rho = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < in.k; ++i) {
    const PasskAttempt& a =
        in.attempts.size() == 1 ? in.attempts.front() : in.attempts[static_cast<std::size_t>(i)];
    if (a.kl < 0.0 || a.rho_star < 0.0) {
      throw std::invalid_argument("passk_bounds: kl and rho_star must be >= 0");
    }
    sum += std::exp(a.kl - a.rho_star);
    min_rho = std::min(min_rho, a.rho_star);
  }

  PasskBounds out;
  out.union_bound = std::min(1.0, sum);
  out.budget_per_attempt = min_rho - std::log(static_cast<double>(in.k) / in.eta);
  out.infeasible = out.budget_per_attempt < 0.0;
  return out;
}

// --- sub-Gaussian diagnostic ------------------------------------------------

struct SubgaussianDiagnostic {
  double max_curvature_ratio = 0.0;  // max over the grid of 2 psi(l) / (l^2 proxy)
  double worst_lambda = 0.0;
  bool warn = false;
};

/// Fits the empirical log-MGF curvature 2 psi(lambda) / lambda^2 of the
/// centered samples on a lambda grid and compares it with the chosen
/// variance proxy. Ratios above 1.2 raise the warning flag: the proxy is
/// then understating the score's tail behaviour.
inline SubgaussianDiagnostic subgaussian_diagnostic(std::span<const double> samples,
                                                    double sigma2_proxy,
                                                    std::span<const double> lambda_grid) {
  if (samples.size() < 2) throw std::invalid_argument("subgaussian_diagnostic: need >= 2 samples");
  if (!(sigma2_proxy > 0.0)) throw std::invalid_argument("subgaussian_diagnostic: proxy must be > 0");
  const double mean = math::sample_mean(samples);

  SubgaussianDiagnostic d;
  std::vector<double> expo(samples.size());
  for (double l : lambda_grid) {
    if (l == 0.0) continue;
    for (std::size_t i = 0; i < samples.size(); ++i) expo[i] = l * (samples[i] - mean);
    const double psi = math::log_sum_exp(expo) - std::log(static_cast<double>(samples.size()));
    const double ratio = 2.0 * psi / (l * l * sigma2_proxy);
    if (ratio > d.max_curvature_ratio) {
      d.max_curvature_ratio = ratio;
      d.worst_lambda = l;
    }
  }
  d.warn = d.max_curvature_ratio > 1.2;
  return d;
}

// --- worst case over strategy grids ----------------------------------------

/// One adversary strategy: a conditioning context, a model variant with a
/// temperature-like logit scale, and whether generation feeds the context
/// back through the conditioning bag.
struct StrategySpec {
  std::string context_id;
  std::string lm_variant_id;
  double logit_scale = 1.0;
  bool use_bag = false;
};

struct StrategyRegistry {
  std::map<std::string, lm::TokenSeq> contexts;
  std::map<std::string, lm::LmParams> lm_variants;
};

struct StrategyCertificate {
  StrategySpec spec;
  MomentEstimate moments;
  RobustnessCertificate cert;
};

struct WorstCaseResult {
  double radius = 0.0;
  std::vector<StrategyCertificate> per_strategy;
};

inline std::string strategy_label(const StrategySpec& s) {
  return s.context_id + "/" + s.lm_variant_id + "/scale=" + std::to_string(s.logit_scale) +
         (s.use_bag ? "/bag" : "");
}

/// Samples watermarked outputs under each strategy, scores them with the
/// detector, and certifies the radius per strategy. The grid radius is the
/// minimum over strategies, so enlarging the grid can only shrink it.
inline WorstCaseResult worst_case_radius(std::span<const StrategySpec> strategies,
                                         const StrategyRegistry& registry,
                                         const wm::WatermarkScheme& scheme, double threshold,
                                         std::int64_t n_samples, std::int32_t gen_length,
                                         std::uint64_t seed,
                                         ProxyMode mode = ProxyMode::empirical_variance) {
  if (strategies.empty()) throw std::invalid_argument("worst_case_radius: empty strategy list");
  validate_scheme(scheme);

  WorstCaseResult result;
  result.radius = std::numeric_limits<double>::infinity();

  const lm::LogitTransform embed = wm::make_watermark_transform(scheme);
  for (std::size_t si = 0; si < strategies.size(); ++si) {
    const StrategySpec& spec = strategies[si];
    const auto ctx_it = registry.contexts.find(spec.context_id);
    const auto lm_it = registry.lm_variants.find(spec.lm_variant_id);
    if (ctx_it == registry.contexts.end()) {
      throw std::invalid_argument("worst_case_radius: unknown context id " + spec.context_id);
    }
    if (lm_it == registry.lm_variants.end()) {
      throw std::invalid_argument("worst_case_radius: unknown lm variant id " + spec.lm_variant_id);
    }
    const lm::TokenSeq& context = ctx_it->second;
    const lm::LmParams& model = lm_it->second;
    const lm::ConditioningBag bag =
        spec.use_bag ? lm::make_bag(context) : lm::ConditioningBag::none();
    const double scale = spec.logit_scale;

    lm::LogitTransform step = [scale, &embed](std::span<double> l, std::span<const std::int32_t> g) {
      if (scale != 1.0) {
        for (double& x : l) x *= scale;
      }
      embed(l, g);
    };

    const ScoreSampler sampler = [&](std::uint64_t draw_seed) {
      const lm::TokenSeq out =
          lm::sample_sequence(model, context, bag, gen_length, step, draw_seed);
      return wm::detect(out, scheme, threshold, &model, &context).z_score;
    };

    const std::uint64_t strategy_seed = rng::split_seed(seed, static_cast<std::uint64_t>(si));
    StrategyCertificate sc;
    sc.spec = spec;
    sc.moments = estimate_moments(sampler, n_samples, strategy_seed, mode);
    sc.cert = certificate(sc.moments.mean, sc.moments.variance, threshold, n_samples);
    result.radius = std::min(result.radius, sc.cert.rho_star);
    result.per_strategy.push_back(std::move(sc));
  }
  return result;
}

}  // namespace wmlab::certify
