// Acceptance harness: runs every release criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.
//
// Build: part of the CMake test suite (`ctest -R acceptance`), or run the
// `acceptance` binary directly from the build tree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wmlab/attack.hpp"
#include "wmlab/certify.hpp"
#include "wmlab/cli.hpp"
#include "wmlab/harness.hpp"

using namespace wmlab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%s] criterion %2d: %-38s %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run(int id, const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    std::tie(pass, detail) = fn();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, name, pass, detail, secs);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const wm::WatermarkScheme kWindowed{wm::Variant::windowed, 15485863, 0.5, 2.0, 4, {}};
const wm::WatermarkScheme kUnigram{wm::Variant::unigram, 15485863, 0.5, 2.0, 0, {}};
constexpr double kZThreshold = 4.0;
constexpr double kSemThreshold = 0.7;

// ---------------------------------------------------------------------------

std::pair<bool, std::string> dv_bound_suite() {
  int cases = 0, holds = 0;
  double worst_margin = 1e300;
  for (const auto& [mu, sigma, outcomes] :
       {std::tuple{6.0, 1.0, std::size_t{64}}, std::tuple{5.0, 1.5, std::size_t{48}},
        std::tuple{0.0, 2.0, std::size_t{32}}, std::tuple{4.5, 0.8, std::size_t{16}}}) {
    const auto dist = oracles::gaussian_discretization(mu, sigma, outcomes);
    const double m = oracles::mean_of(dist);
    const double s2 = oracles::variance_of(dist);
    for (int i = 0; i <= 20; ++i) {
      const double lambda = 0.1 * i;
      const auto q = certify::tilt(dist.probs, dist.score, lambda);
      const double eq = certify::expectation(q.tilted, dist.score);
      const double kl = certify::kl_exact(q.tilted, dist.probs);
      const double margin = eq - certify::dv_lower_bound(m, s2, kl);
      worst_margin = std::min(worst_margin, margin);
      ++cases;
      if (margin >= -1e-9) ++holds;
    }
  }
  std::ostringstream d;
  d << holds << "/" << cases << " hold, worst margin " << worst_margin;
  return {holds == cases, d.str()};
}

std::pair<bool, std::string> certificate_tightness() {
  const double mu = 6.0, sigma = 1.0, delta = 4.0;
  const auto dist = oracles::gaussian_discretization(mu, sigma, 10001);
  const double rho = certify::certificate(mu, sigma * sigma, delta).rho_star;

  // KL(Q_lambda || P) is increasing in lambda; bisect to land on KL = rho*.
  double lo = 0.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto q = certify::tilt(dist.probs, dist.score, mid);
    (certify::kl_exact(q.tilted, dist.probs) < rho ? lo : hi) = mid;
  }
  const auto q = certify::tilt(dist.probs, dist.score, 0.5 * (lo + hi));
  const double expected_score = certify::expectation(q.tilted, dist.score);
  const double rel = std::abs(expected_score - delta) / std::abs(delta);

  std::ostringstream d;
  d << "E_Q[f] at KL=rho* is " << expected_score << " vs delta " << delta << " (rel " << rel << ")";
  return {rel <= 0.02, d.str()};
}

std::pair<bool, std::string> collapse_and_monotonicity() {
  bool ok = true;
  std::ostringstream d;

  for (double mu : {3.99, 4.0, 2.0, -1.0}) {
    if (certify::certificate(mu, 1.7, 4.0).rho_star != 0.0) ok = false;
  }
  d << "collapse exact; ";

  const auto victim = lm::build_lm(48, 1, 0.3, 17);
  certify::StrategyRegistry registry;
  registry.lm_variants["victim"] = victim;
  const lm::TokenSeq empty{{}, 48};
  for (int c = 0; c < 3; ++c) {
    registry.contexts["ctx" + std::to_string(c)] =
        lm::sample_sequence(victim, empty, lm::ConditioningBag::none(), 8, {},
                            rng::split_seed(900, static_cast<std::uint64_t>(c)));
  }
  std::vector<certify::StrategySpec> grid;
  std::vector<double> radii;
  for (int c = 0; c < 3; ++c) {
    grid.push_back({"ctx" + std::to_string(c), "victim", c == 0 ? 1.0 : (c == 1 ? 0.8 : 1.2),
                    c == 2});
    const auto r = certify::worst_case_radius(grid, registry, kWindowed, kZThreshold, 48, 96, 33);
    radii.push_back(r.radius);
  }
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (radii[i] > radii[i - 1]) ok = false;
  }
  d << "nested radii";
  for (double r : radii) d << " " << r;
  return {ok, d.str()};
}

std::pair<bool, std::string> tail_and_union_bounds() {
  bool ok = true;
  std::ostringstream d;

  const double mu = 6.0, sigma = 1.0, delta = 4.0;
  const auto dist = oracles::gaussian_discretization(mu, sigma, 4001);
  const double rho = certify::certificate(mu, sigma * sigma, delta).rho_star;

  {  // single-shot bound over 1e5 draws
    const auto q = certify::tilt(dist.probs, dist.score, 1.5);
    const double kl = certify::kl_exact(q.tilted, dist.probs);
    const double bound = certify::single_shot_bound(kl, rho);
    constexpr int kDraws = 100000;
    int evade = 0;
    for (int i = 0; i < kDraws; ++i) {
      rng::Stream s(rng::split_seed(1009, static_cast<std::uint64_t>(i)));
      if (dist.score[oracles::draw_index(q.tilted, s.next_unit())] <= delta) ++evade;
    }
    const double freq = static_cast<double>(evade) / kDraws;
    const double se = std::sqrt(freq * (1.0 - freq) / kDraws);
    if (freq > bound + 3.0 * se) ok = false;
    d << "single-shot " << freq << " <= " << bound << "; ";
  }

  {  // pass@k union bound over 1e4 trials
    const int k = 5;
    const auto q = certify::tilt(dist.probs, dist.score, 0.5);
    const double kl = certify::kl_exact(q.tilted, dist.probs);
    const auto b = certify::passk_bounds({k, 0.5, {{kl, rho}}});
    constexpr int kTrials = 10000;
    int evade = 0;
    for (int i = 0; i < kTrials; ++i) {
      rng::Stream s(rng::split_seed(2027, static_cast<std::uint64_t>(i)));
      for (int j = 0; j < k; ++j) {
        if (dist.score[oracles::draw_index(q.tilted, s.next_unit())] <= delta) {
          ++evade;
          break;
        }
      }
    }
    const double freq = static_cast<double>(evade) / kTrials;
    const double se = std::sqrt(freq * (1.0 - freq) / kTrials);
    if (freq > b.union_bound + 3.0 * se) ok = false;
    d << "pass@5 " << freq << " <= " << b.union_bound << "; ";
  }

  {  // budget feasibility flips exactly at zero
    const auto feas = certify::passk_bounds({2, 0.5, {{0.0, 2.0}}});
    const auto infeas = certify::passk_bounds({20, 0.1, {{0.0, 5.0}}});
    if (feas.infeasible || feas.budget_per_attempt != 2.0 - std::log(4.0)) ok = false;
    if (!infeas.infeasible || infeas.budget_per_attempt >= 0.0) ok = false;
    d << "budget flags exact";
  }
  return {ok, d.str()};
}

std::pair<bool, std::string> detector_calibration() {
  const auto victim = lm::build_lm(64, 1, 0.0, 42);

  const auto marked = harness::generate_corpus(victim, kWindowed, 1000, 200, 8, 501);
  int tp = 0;
  for (const auto& r : marked) tp += r.z > kZThreshold ? 1 : 0;
  const double tpr = tp / 1000.0;

  const lm::TokenSeq empty{{}, 64};
  int fp = 0;
  constexpr int kNulls = 10000;
  for (int i = 0; i < kNulls; ++i) {
    const auto seq = lm::sample_sequence(victim, empty, lm::ConditioningBag::none(), 200, {},
                                         rng::split_seed(777, static_cast<std::uint64_t>(i)));
    if (wm::detect(seq, kWindowed, kZThreshold).detected) ++fp;
  }
  const double fpr = static_cast<double>(fp) / kNulls;

  std::ostringstream d;
  d << "TPR " << tpr << " (need >= 0.99), FPR " << fpr << " (need <= 0.001)";
  return {tpr >= 0.99 && fpr <= 0.001, d.str()};
}

std::pair<bool, std::string> k3_estimator() {
  rng::Stream gen(86);
  int agree = 0;
  bool nonneg = true;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> q(8), p(8);
    double sq = 0.0, sp = 0.0;
    for (int i = 0; i < 8; ++i) {
      q[static_cast<std::size_t>(i)] = 0.05 + gen.next_unit();
      p[static_cast<std::size_t>(i)] = 0.05 + gen.next_unit();
      sq += q[static_cast<std::size_t>(i)];
      sp += p[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < 8; ++i) {
      q[static_cast<std::size_t>(i)] /= sq;
      p[static_cast<std::size_t>(i)] /= sp;
    }
    const double exact = certify::kl_exact(q, p);

    constexpr int kN = 100000;
    std::vector<double> vals(kN);
    for (int i = 0; i < kN; ++i) {
      rng::Stream s(rng::split_seed(static_cast<std::uint64_t>(3000 + trial),
                                    static_cast<std::uint64_t>(i)));
      const std::size_t idx = oracles::draw_index(q, s.next_unit());
      vals[static_cast<std::size_t>(i)] = attack::k3_term(p[idx], q[idx]);
      if (vals[static_cast<std::size_t>(i)] < 0.0) nonneg = false;
    }
    const double mean = math::sample_mean(vals);
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= (kN - 1);
    if (std::abs(mean - exact) <= 3.0 * std::sqrt(var / kN)) ++agree;
  }
  std::ostringstream d;
  d << agree << "/20 within 3 stderr, estimator " << (nonneg ? "never negative" : "WENT NEGATIVE");
  return {agree == 20 && nonneg, d.str()};
}

std::pair<bool, std::string> gradient_check() {
  auto policy = attack::make_policy(lm::build_lm(4, 1, 0.6, 11));
  policy.ref_params = lm::build_lm(4, 1, 0.4, 12);
  const std::vector<attack::QaPair> batch{
      {lm::TokenSeq{{0, 2}, 4}, lm::TokenSeq{{1, 3, 3, 0, 2, 1}, 4}},
      {lm::TokenSeq{{3}, 4}, lm::TokenSeq{{2, 2, 0, 1, 0, 3}, 4}}};

  struct Toggle {
    double w1p, w2, w3, beta;
  };
  double worst = 0.0;
  for (const auto ppl_model : {attack::PplModel::reference, attack::PplModel::policy_snapshot}) {
    for (const Toggle& t : {Toggle{6, 0, 0, 0}, Toggle{0, 0.9, 0, 0}, Toggle{0, 0, 0.4, 0},
                            Toggle{0, 0, 0, 0.3}, Toggle{6, 0.9, 0.4, 0.04}}) {
      attack::GrpoConfig cfg;
      cfg.group_size = 3;
      cfg.w1_prime = t.w1p;
      cfg.w2 = t.w2;
      cfg.w3 = t.w3;
      cfg.beta = t.beta;
      cfg.ppl_model = ppl_model;
      const auto rollout = attack::collect_rollout(policy, batch, cfg, 987);
      const auto analytic = attack::grpo_gradient(policy.params, rollout, cfg);
      for (std::size_t i = 0; i < analytic.size(); ++i) {
        auto plus = policy.params;
        auto minus = policy.params;
        const double eps = 1e-5;
        if (i < plus.table.size()) {
          plus.table[i] += eps;
          minus.table[i] -= eps;
        } else {
          plus.copy_strength += eps;
          minus.copy_strength -= eps;
        }
        const double fd = (attack::grpo_objective(plus, rollout, cfg) -
                           attack::grpo_objective(minus, rollout, cfg)) /
                          (2.0 * eps);
        const double rel = std::abs(analytic[i] - fd) / std::max(std::abs(fd), 1e-9);
        worst = std::max(worst, rel);
      }
    }
  }
  std::ostringstream d;
  d << "worst relative error " << worst << " (need <= 1e-4)";
  return {worst <= 1e-4, d.str()};
}

struct TrainedArtifacts {
  attack::PolicyState untrained;
  attack::PolicyState trained;
  std::vector<harness::CorpusRecord> heldout;
  lm::LmParams victim;
  harness::AttackMetrics untrained_metrics;
  harness::AttackMetrics trained_metrics;
  bool ready = false;
};

TrainedArtifacts g_trained;

std::pair<bool, std::string> rl_training_trend() {
  const auto victim = lm::build_lm(64, 1, 0.0, 42);
  const auto train_corpus = harness::generate_corpus(victim, kWindowed, 100, 64, 8, 601);
  const auto heldout = harness::generate_corpus(victim, kWindowed, 100, 64, 8, 602);

  std::vector<attack::QaPair> dataset;
  for (const auto& r : train_corpus) dataset.push_back({r.prompt, r.response});

  attack::GrpoConfig cfg;
  cfg.group_size = 12;
  cfg.epochs = 10;
  cfg.batch_size = 10;
  cfg.learning_rate = 0.1;
  cfg.w1_prime = 10.0;
  cfg.w2 = 0.1;
  cfg.w3 = 0.1;
  cfg.beta = 0.04;

  const auto init = lm::build_lm(64, 0, 0.35, 7);
  auto policy = attack::make_policy(init);
  const auto report = attack::train(policy, dataset, cfg, kWindowed, kZThreshold, 603);

  const auto untrained = attack::make_policy(init);
  const auto m0 = harness::evaluate_attack(harness::policy_attacker(untrained), heldout, victim,
                                           kZThreshold, kSemThreshold, 604);
  const auto m1 = harness::evaluate_attack(harness::policy_attacker(policy), heldout, victim,
                                           kZThreshold, kSemThreshold, 604);

  g_trained = {untrained, policy, heldout, victim, m0, m1, true};

  const double gain = m1.esr - m0.esr;
  std::ostringstream d;
  d << "held-out ESR " << m0.esr << " -> " << m1.esr << " (gain " << gain
    << ", need >= 0.30), semantic " << m1.mean_semantic << " (need >= 0.7), trained alpha "
    << policy.params.copy_strength << ", final epoch z " << report.epochs.back().stats.mean_z;
  return {gain >= 0.30 && m1.mean_semantic >= 0.7, d.str()};
}

std::pair<bool, std::string> passk_trend() {
  // Oracle best-of-k against the unigram watermark, where copied tokens stay
  // green and the detector is the binding constraint.
  const auto victim = lm::build_lm(64, 1, 0.0, 42);
  const auto corpus = harness::generate_corpus(victim, kUnigram, 100, 64, 8, 701);
  const auto policy = attack::make_policy(lm::build_lm(64, 1, 2.0, 13));

  int evade1 = 0, evade20 = 0;
  for (const auto& r : corpus) {
    const std::uint64_t seed = rng::split_seed(702, static_cast<std::uint64_t>(r.id));
    const auto outcome = attack::passk_attack(policy, r.response, 20, r.scheme, kZThreshold, seed);
    const auto& first = outcome.z_and_semantic.front();
    const auto& best = outcome.z_and_semantic[static_cast<std::size_t>(outcome.best_index)];
    if (first.first <= kZThreshold && first.second > kSemThreshold) ++evade1;
    if (best.first <= kZThreshold && best.second > kSemThreshold) ++evade20;
  }
  const double esr1 = evade1 / 100.0;
  const double esr20 = evade20 / 100.0;
  std::ostringstream d;
  d << "pass@1 ESR " << esr1 << ", pass@20 ESR " << esr20 << " (need gain >= 0.20)";
  return {esr20 - esr1 >= 0.20, d.str()};
}

std::pair<bool, std::string> distribution_shift() {
  if (!g_trained.ready) return {false, "training artifacts unavailable"};
  const auto& m = g_trained.trained_metrics;
  const double attacked = m.attacked.mean();
  const double unmarked = m.unwatermarked.mean();
  const double marked = m.watermarked.mean();
  std::ostringstream d;
  d << "mean z: unwatermarked " << unmarked << ", attacked " << attacked << ", watermarked "
    << marked;
  return {std::abs(attacked - unmarked) < std::abs(attacked - marked), d.str()};
}

std::pair<bool, std::string> cli_determinism() {
  // The same pipeline, same paths, run twice: every artifact must come back
  // byte for byte.
  const fs::path dir = fs::temp_directory_path() / "wmlab_acceptance";
  fs::create_directories(dir);
  const fs::path corpus = dir / "corpus.jsonl";
  const fs::path policy = dir / "policy.json";
  const fs::path treport = dir / "train.json";
  const fs::path ereport = dir / "eval.json";

  const auto pipeline = [&]() {
    if (cli::run_cli({"gen", "--n", "24", "--len", "64", "--seed", "11", "--out",
                      corpus.string()}) != 0)
      return std::string();
    if (cli::run_cli({"train", "--data", corpus.string(), "--seed", "12", "--epochs", "2",
                      "--group-size", "4", "--batch-size", "8", "--out-policy", policy.string(),
                      "--report", treport.string()}) != 0)
      return std::string();
    if (cli::run_cli({"eval", "--in", corpus.string(), "--attacker", "policy", "--policy",
                      policy.string(), "--seed", "13", "--out", ereport.string()}) != 0)
      return std::string();
    return slurp(corpus) + "\x1e" + slurp(policy) + "\x1e" + slurp(treport) + "\x1e" +
           slurp(ereport) + "\x1e" + slurp(dir / "eval_hist_attacked.csv");
  };

  const std::string a = pipeline();
  const std::string b = pipeline();
  std::ostringstream d;
  d << "gen+train+eval artifacts " << (a == b && !a.empty() ? "byte-identical" : "DIFFER");
  return {!a.empty() && a == b, d.str()};
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  run(1, "DV lower bound on tilted scores", dv_bound_suite);
  run(2, "certificate tightness at the Gaussian", certificate_tightness);
  run(3, "certificate collapse / grid monotonicity", collapse_and_monotonicity);
  run(4, "single-shot and pass@k bounds", tail_and_union_bounds);
  run(5, "detector calibration (TPR/FPR)", detector_calibration);
  run(6, "k3 estimator vs exact KL", k3_estimator);
  run(7, "surrogate gradient finite differences", gradient_check);
  run(8, "RL training raises held-out ESR", rl_training_trend);
  run(9, "pass@20 vs pass@1 trend", passk_trend);
  run(10, "attacked scores shift to unwatermarked", distribution_shift);
  run(11, "CLI pipeline byte determinism", cli_determinism);

  std::printf("================\n%s (%d failure%s)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
              g_failures, g_failures == 1 ? "" : "s");
  return g_failures;
}
