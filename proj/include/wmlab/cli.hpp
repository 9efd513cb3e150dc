#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmlab/attack.hpp"
#include "wmlab/certify.hpp"
#include "wmlab/harness.hpp"
#include "wmlab/toylm.hpp"
#include "wmlab/watermark.hpp"

// Command-line front end. Subcommands:
//   gen      sample a watermarked corpus from a victim model
//   detect   re-run detection over a corpus file
//   certify  estimate robustness certificates over a strategy grid
//   passk    oracle best-of-k attack over a corpus, or bound calculations
//   train    fit the paraphraser policy on a corpus
//   eval     score an attacker on a corpus and export a report
//
// Exit codes: 0 success, 1 validation or runtime failure, 2 usage errors.

namespace wmlab::cli {

namespace detail {

struct LmFlags {
  std::string victim_file;
  std::int32_t vocab = 64;
  std::int32_t order = 1;
  double alpha = 0.0;
  std::uint64_t lm_seed = 42;
};

inline void add_lm_flags(CLI::App* cmd, LmFlags& f) {
  cmd->add_option("--victim", f.victim_file, "Load the victim model from a JSON file");
  cmd->add_option("--vocab", f.vocab, "Victim vocabulary size")->capture_default_str();
  cmd->add_option("--order", f.order, "Victim Markov order")->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "Victim copy strength")->capture_default_str();
  cmd->add_option("--lm-seed", f.lm_seed, "Victim build seed")->capture_default_str();
}

inline lm::LmParams build_victim(const LmFlags& f) {
  if (!f.victim_file.empty()) {
    std::ifstream in(f.victim_file);
    if (!in) throw std::runtime_error("cannot open model file " + f.victim_file);
    return lm::lm_from_json(nlohmann::json::parse(in));
  }
  return lm::build_lm(f.vocab, f.order, f.alpha, f.lm_seed);
}

struct SchemeFlags {
  std::string variant = "windowed";
  double q = 0.5;
  double bias = 2.0;
  std::uint64_t key = 15485863;
  std::int32_t prefix = -1;  // -1: per-variant default
  double entropy_threshold = 0.9;
};

inline void add_scheme_flags(CLI::App* cmd, SchemeFlags& f) {
  cmd->add_option("--scheme", f.variant, "Watermark variant: unigram|windowed|entropy_gated")
      ->capture_default_str();
  cmd->add_option("--q", f.q, "Green-list rate")->capture_default_str();
  cmd->add_option("--bias", f.bias, "Green logit bias")->capture_default_str();
  cmd->add_option("--key", f.key, "Watermark hash key")->capture_default_str();
  cmd->add_option("--prefix", f.prefix, "Hash window length (default: 0 unigram, 4 windowed, 1 entropy_gated)");
  cmd->add_option("--entropy-threshold", f.entropy_threshold,
                  "Entropy gate in nats (entropy_gated only)")
      ->capture_default_str();
}

inline wm::WatermarkScheme build_scheme(const SchemeFlags& f) {
  wm::WatermarkScheme s;
  s.variant = wm::variant_from_name(f.variant);
  s.key = f.key;
  s.green_rate = f.q;
  s.bias = f.bias;
  switch (s.variant) {
    case wm::Variant::unigram: s.prefix_length = 0; break;
    case wm::Variant::windowed: s.prefix_length = 4; break;
    case wm::Variant::entropy_gated: s.prefix_length = 1; break;
  }
  if (f.prefix >= 0) s.prefix_length = f.prefix;
  if (s.variant == wm::Variant::entropy_gated) s.entropy_threshold = f.entropy_threshold;
  wm::validate_scheme(s);
  return s;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline attack::PolicyState load_or_build_policy(const std::string& policy_file, std::int32_t vocab,
                                                std::int32_t order, double alpha,
                                                std::uint64_t policy_seed) {
  if (!policy_file.empty()) {
    return attack::policy_from_json(load_json_file(policy_file));
  }
  return attack::make_policy(lm::build_lm(vocab, order, alpha, policy_seed));
}

}  // namespace detail

inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"Desk-scale lab for green-list text watermarks: embedding, detection,\n"
               "KL robustness certificates, and learned paraphrase attacks."};
  app.require_subcommand(1);

  // --- gen -------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate a watermarked corpus");
  detail::LmFlags gen_lm;
  detail::SchemeFlags gen_scheme;
  std::int64_t gen_n = 100;
  std::int32_t gen_len = 200, gen_prompt_len = 8;
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_victim_out;
  std::vector<std::uint64_t> gen_keys;
  detail::add_lm_flags(gen, gen_lm);
  detail::add_scheme_flags(gen, gen_scheme);
  gen->add_option("--n", gen_n, "Number of records")->capture_default_str();
  gen->add_option("--len", gen_len, "Response length in tokens")->capture_default_str();
  gen->add_option("--prompt-len", gen_prompt_len, "Prompt length in tokens")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Corpus seed")->required();
  gen->add_option("--out", gen_out, "Output JSONL path")->required();
  gen->add_option("--keys", gen_keys, "Mixed-key mode: comma-separated hash keys, cycled round-robin")
      ->delimiter(',');
  gen->add_option("--victim-out", gen_victim_out, "Also write the victim model JSON here");

  // --- detect ----------------------------------------------------------
  auto* det = app.add_subcommand("detect", "Re-run detection over a corpus");
  detail::LmFlags det_lm;
  std::string det_in, det_out;
  double det_threshold = 4.0;
  detail::add_lm_flags(det, det_lm);
  det->add_option("--in", det_in, "Corpus JSONL path")->required();
  det->add_option("--threshold", det_threshold, "Detection z threshold")->capture_default_str();
  det->add_option("--out", det_out, "Optional per-record detection JSONL");

  // --- certify ---------------------------------------------------------
  auto* cert = app.add_subcommand("certify", "Certificates over a context/model strategy grid");
  detail::LmFlags cert_lm;
  detail::SchemeFlags cert_scheme;
  std::int64_t cert_n = 200;
  std::int32_t cert_len = 128, cert_contexts = 3, cert_prompt_len = 8;
  double cert_threshold = 4.0;
  std::uint64_t cert_seed = 0;
  std::vector<double> cert_scales{1.0, 0.85, 1.25};
  std::string cert_proxy = "empirical";
  std::string cert_bag = "both";
  std::string cert_out;
  detail::add_lm_flags(cert, cert_lm);
  detail::add_scheme_flags(cert, cert_scheme);
  cert->add_option("--n-samples", cert_n, "Monte Carlo samples per strategy")->capture_default_str();
  cert->add_option("--len", cert_len, "Generation length")->capture_default_str();
  cert->add_option("--contexts", cert_contexts, "Number of seeded context prompts")
      ->capture_default_str();
  cert->add_option("--prompt-len", cert_prompt_len, "Context prompt length")->capture_default_str();
  cert->add_option("--scales", cert_scales, "Logit scales defining model variants")
      ->delimiter(',')
      ->capture_default_str();
  cert->add_option("--bag", cert_bag, "Conditioning-bag strategies: off|on|both")
      ->capture_default_str();
  cert->add_option("--threshold", cert_threshold, "Detection z threshold")->capture_default_str();
  cert->add_option("--proxy", cert_proxy, "Variance proxy: empirical|range")->capture_default_str();
  cert->add_option("--seed", cert_seed, "Sampling seed")->required();
  cert->add_option("--out", cert_out, "Report JSON path")->required();

  // --- passk -----------------------------------------------------------
  auto* passk = app.add_subcommand("passk", "Oracle best-of-k attack, or bound calculations");
  detail::LmFlags passk_lm;
  std::string passk_in, passk_out, passk_policy;
  std::int32_t passk_k = 20;
  double passk_threshold = 4.0, passk_sem = 0.7;
  std::uint64_t passk_seed = 0;
  std::int32_t passk_policy_order = 1;
  double passk_policy_alpha = 1.0;
  std::uint64_t passk_policy_seed = 7;
  bool passk_bound_only = false;
  double passk_rho = 0.0, passk_kl = 0.0, passk_eta = 0.1;
  detail::add_lm_flags(passk, passk_lm);
  passk->add_option("--in", passk_in, "Corpus JSONL path");
  passk->add_option("--k", passk_k, "Candidates per record")->capture_default_str();
  passk->add_option("--threshold", passk_threshold, "Detection z threshold")->capture_default_str();
  passk->add_option("--sem-threshold", passk_sem, "Semantic floor for ESR")->capture_default_str();
  passk->add_option("--seed", passk_seed, "Attack seed");
  passk->add_option("--policy", passk_policy, "Policy JSON (default: fresh copy-bias model)");
  passk->add_option("--policy-order", passk_policy_order, "Fresh policy Markov order")
      ->capture_default_str();
  passk->add_option("--policy-alpha", passk_policy_alpha, "Fresh policy copy strength")
      ->capture_default_str();
  passk->add_option("--policy-seed", passk_policy_seed, "Fresh policy build seed")
      ->capture_default_str();
  passk->add_flag("--bound-only", passk_bound_only,
                  "Evaluate the union bound and KL budget instead of attacking");
  passk->add_option("--rho-star", passk_rho, "Certificate for --bound-only");
  passk->add_option("--kl", passk_kl, "Per-attempt KL for --bound-only")->capture_default_str();
  passk->add_option("--eta", passk_eta, "Target evasion probability for --bound-only")
      ->capture_default_str();
  passk->add_option("--out", passk_out, "Report JSON path");

  // --- train -----------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train the paraphraser policy");
  std::string train_data, train_policy_out, train_report, train_ppl_model = "ref";
  std::uint64_t train_seed = 0;
  attack::GrpoConfig train_cfg;
  std::int32_t train_policy_order = 0;
  double train_policy_alpha = 0.35;
  std::uint64_t train_policy_seed = 7;
  double train_threshold = 4.0;
  double train_lr = 0.1;
  train->add_option("--data", train_data, "Training corpus JSONL")->required();
  train->add_option("--seed", train_seed, "Training seed")->required();
  train->add_option("--epochs", train_cfg.epochs, "Training epochs")->capture_default_str();
  train->add_option("--group-size", train_cfg.group_size, "Samples per pair")->capture_default_str();
  train->add_option("--batch-size", train_cfg.batch_size, "Pairs per step")->capture_default_str();
  train->add_option("--lr", train_lr, "Learning rate")->capture_default_str();
  train->add_option("--w1-prime", train_cfg.w1_prime, "Dynamic semantic weight base")
      ->capture_default_str();
  train->add_option("--w2", train_cfg.w2, "KL reward weight")->capture_default_str();
  train->add_option("--w3", train_cfg.w3, "Perplexity penalty weight")->capture_default_str();
  train->add_option("--beta", train_cfg.beta, "Reference KL coefficient")->capture_default_str();
  train->add_option("--sem-center", train_cfg.sem_center, "Semantic reward center")
      ->capture_default_str();
  train->add_option("--ppl-model", train_ppl_model, "Perplexity model: ref|policy")
      ->capture_default_str();
  train->add_option("--policy-order", train_policy_order, "Policy Markov order")
      ->capture_default_str();
  train->add_option("--policy-alpha", train_policy_alpha, "Initial policy copy strength")
      ->capture_default_str();
  train->add_option("--policy-seed", train_policy_seed, "Policy build seed")->capture_default_str();
  train->add_option("--threshold", train_threshold, "Detection z threshold for statistics")
      ->capture_default_str();
  train->add_option("--out-policy", train_policy_out, "Trained policy JSON path");
  train->add_option("--report", train_report, "Training report JSON path");

  // --- eval ------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Evaluate an attacker on a corpus");
  detail::LmFlags eval_lm;
  std::string eval_in, eval_attacker, eval_policy, eval_out;
  double eval_threshold = 4.0, eval_sem = 0.7;
  std::uint64_t eval_seed = 0;
  std::int32_t eval_k = 20;
  std::int32_t eval_policy_order = 0;
  double eval_policy_alpha = 0.35;
  std::uint64_t eval_policy_seed = 7;
  detail::add_lm_flags(eval, eval_lm);
  eval->add_option("--in", eval_in, "Corpus JSONL path")->required();
  eval->add_option("--attacker", eval_attacker,
                   "Attacker: identity|resample|unrelated|policy|passk")
      ->required();
  eval->add_option("--policy", eval_policy, "Policy JSON for policy/passk/resample/unrelated");
  eval->add_option("--k", eval_k, "Candidates for the passk attacker")->capture_default_str();
  eval->add_option("--threshold", eval_threshold, "Detection z threshold")->capture_default_str();
  eval->add_option("--sem-threshold", eval_sem, "Semantic floor for ESR")->capture_default_str();
  eval->add_option("--policy-order", eval_policy_order, "Fresh policy Markov order")
      ->capture_default_str();
  eval->add_option("--policy-alpha", eval_policy_alpha, "Fresh policy copy strength")
      ->capture_default_str();
  eval->add_option("--policy-seed", eval_policy_seed, "Fresh policy build seed")
      ->capture_default_str();
  eval->add_option("--seed", eval_seed, "Evaluation seed")->required();
  eval->add_option("--out", eval_out, "Report JSON path")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      std::cout << app.help();
      return 0;
    }
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) {
      const lm::LmParams victim = detail::build_victim(gen_lm);
      const wm::WatermarkScheme scheme = detail::build_scheme(gen_scheme);
      const auto corpus = harness::generate_corpus(victim, scheme, gen_n, gen_len, gen_prompt_len,
                                                   gen_seed, gen_keys);
      harness::write_corpus(corpus, gen_out);
      if (!gen_victim_out.empty()) detail::write_json_file(lm::to_json(victim), gen_victim_out);
      std::cout << "wrote " << corpus.size() << " records to " << gen_out << "\n";
      return 0;
    }

    if (det->parsed()) {
      const auto corpus = harness::load_corpus(det_in);
      std::optional<lm::LmParams> victim;
      const bool needs_model =
          !corpus.empty() && corpus.front().scheme.variant == wm::Variant::entropy_gated;
      if (needs_model || !det_lm.victim_file.empty()) victim = detail::build_victim(det_lm);

      std::ofstream out;
      if (!det_out.empty()) {
        out.open(det_out);
        if (!out) throw std::runtime_error("cannot open " + det_out);
      }
      std::int64_t detected = 0;
      double max_dev = 0.0;
      for (const auto& r : corpus) {
        const auto d = wm::detect(r.response, r.scheme, det_threshold,
                                  victim ? &*victim : nullptr, &r.prompt);
        max_dev = std::max(max_dev, std::abs(d.z_score - r.z));
        if (d.detected) ++detected;
        if (out) {
          out << nlohmann::json{{"id", r.id},
                                {"z", d.z_score},
                                {"green_hits", d.green_hits},
                                {"counted", d.counted_positions},
                                {"detected", d.detected}}
                     .dump()
              << '\n';
        }
      }
      std::cout << "records=" << corpus.size() << " detected=" << detected
                << " max_z_deviation=" << max_dev << "\n";
      if (max_dev > 1e-9) {
        std::cerr << "stored z scores do not match recomputed detection\n";
        return 1;
      }
      return 0;
    }

    if (cert->parsed()) {
      const lm::LmParams victim = detail::build_victim(cert_lm);
      const wm::WatermarkScheme scheme = detail::build_scheme(cert_scheme);
      const certify::ProxyMode mode = cert_proxy == "range"
                                          ? certify::ProxyMode::range_hoeffding
                                          : certify::ProxyMode::empirical_variance;
      if (cert_proxy != "range" && cert_proxy != "empirical") {
        throw std::invalid_argument("--proxy must be empirical or range");
      }
      std::vector<bool> bag_modes;
      if (cert_bag == "off") bag_modes = {false};
      else if (cert_bag == "on") bag_modes = {true};
      else if (cert_bag == "both") bag_modes = {false, true};
      else throw std::invalid_argument("--bag must be off, on, or both");

      certify::StrategyRegistry registry;
      std::vector<certify::StrategySpec> strategies;
      const lm::TokenSeq empty{{}, victim.vocab.size};
      for (std::int32_t c = 0; c < cert_contexts; ++c) {
        const std::string cid = "ctx" + std::to_string(c);
        registry.contexts[cid] =
            lm::sample_sequence(victim, empty, lm::ConditioningBag::none(), cert_prompt_len, {},
                                rng::split_seed(cert_seed, 0xC0'0000 + static_cast<std::uint64_t>(c)));
        for (double scale : cert_scales) {
          for (bool bag : bag_modes) {
            strategies.push_back(certify::StrategySpec{cid, "victim", scale, bag});
          }
        }
      }
      registry.lm_variants["victim"] = victim;

      const auto result = certify::worst_case_radius(strategies, registry, scheme, cert_threshold,
                                                     cert_n, cert_len, cert_seed, mode);
      nlohmann::json per = nlohmann::json::array();
      std::string argmin;
      for (const auto& sc : result.per_strategy) {
        if (sc.cert.rho_star == result.radius && argmin.empty()) {
          argmin = certify::strategy_label(sc.spec);
        }
        per.push_back({{"strategy_id", certify::strategy_label(sc.spec)},
                       {"context_id", sc.spec.context_id},
                       {"lm_variant_id", sc.spec.lm_variant_id},
                       {"logit_scale", sc.spec.logit_scale},
                       {"use_bag", sc.spec.use_bag},
                       {"mu", sc.moments.mean},
                       {"sigma2", sc.moments.variance},
                       {"stderr", sc.moments.stderr_mean},
                       {"rho_star", sc.cert.rho_star},
                       {"n", sc.moments.n},
                       {"proxy_mode", certify::proxy_mode_name(sc.moments.proxy_mode)}});
      }
      const nlohmann::json report{{"version", 1},
                                  {"scheme", wm::to_json(scheme)},
                                  {"threshold", cert_threshold},
                                  {"n_samples", cert_n},
                                  {"length", cert_len},
                                  {"seed", cert_seed},
                                  {"strategies", per},
                                  {"min_rho_star", result.radius},
                                  {"argmin_strategy", argmin}};
      detail::write_json_file(report, cert_out);
      std::cout << "min rho* = " << result.radius << " over " << strategies.size()
                << " strategies (" << argmin << ")\n";
      return 0;
    }

    if (passk->parsed()) {
      if (passk_bound_only) {
        const auto b = certify::passk_bounds(
            {passk_k, passk_eta, {certify::PasskAttempt{passk_kl, passk_rho}}});
        const nlohmann::json out{{"version", 1},
                                 {"k", passk_k},
                                 {"eta", passk_eta},
                                 {"kl", passk_kl},
                                 {"rho_star", passk_rho},
                                 {"union_bound", b.union_bound},
                                 {"budget_per_attempt", b.budget_per_attempt},
                                 {"infeasible", b.infeasible}};
        if (!passk_out.empty()) detail::write_json_file(out, passk_out);
        std::cout << out.dump(2) << "\n";
        return 0;
      }

      if (passk_in.empty() || passk->count("--seed") == 0) {
        std::cerr << "passk: --in and --seed are required unless --bound-only\n\n"
                  << passk->help();
        return 2;
      }
      const auto corpus = harness::load_corpus(passk_in);
      if (corpus.empty()) throw std::invalid_argument("passk: empty corpus");
      const lm::LmParams victim = detail::build_victim(passk_lm);
      const attack::PolicyState policy = detail::load_or_build_policy(
          passk_policy, corpus.front().prompt.vocab_size, passk_policy_order, passk_policy_alpha,
          passk_policy_seed);

      nlohmann::json results = nlohmann::json::array();
      std::int64_t evade1 = 0, evadek = 0;
      for (const auto& r : corpus) {
        const std::uint64_t rec_seed = rng::split_seed(passk_seed, static_cast<std::uint64_t>(r.id));
        const auto outcome =
            attack::passk_attack(policy, r.response, passk_k, r.scheme, passk_threshold, rec_seed);
        const auto& first = outcome.z_and_semantic.front();
        const auto& best = outcome.z_and_semantic[static_cast<std::size_t>(outcome.best_index)];
        if (first.first <= passk_threshold && first.second > passk_sem) ++evade1;
        if (best.first <= passk_threshold && best.second > passk_sem) ++evadek;
        results.push_back({{"id", r.id},
                           {"best_index", outcome.best_index},
                           {"best_z", best.first},
                           {"best_semantic", best.second},
                           {"first_z", first.first},
                           {"first_semantic", first.second}});
      }
      const double n = static_cast<double>(corpus.size());
      const nlohmann::json report{{"version", 1},
                                  {"k", passk_k},
                                  {"threshold", passk_threshold},
                                  {"sem_threshold", passk_sem},
                                  {"seed", passk_seed},
                                  {"esr_pass1", static_cast<double>(evade1) / n},
                                  {"esr_passk", static_cast<double>(evadek) / n},
                                  {"records", results}};
      if (!passk_out.empty()) detail::write_json_file(report, passk_out);
      std::cout << "pass@1 ESR = " << static_cast<double>(evade1) / n
                << ", pass@" << passk_k << " ESR = " << static_cast<double>(evadek) / n << "\n";
      return 0;
    }

    if (train->parsed()) {
      const auto corpus = harness::load_corpus(train_data);
      if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
      train_cfg.learning_rate = train_lr;
      if (train_ppl_model == "policy") train_cfg.ppl_model = attack::PplModel::policy_snapshot;
      else if (train_ppl_model != "ref") throw std::invalid_argument("--ppl-model must be ref or policy");

      std::vector<attack::QaPair> dataset;
      dataset.reserve(corpus.size());
      for (const auto& r : corpus) dataset.push_back({r.prompt, r.response});

      attack::PolicyState policy =
          attack::make_policy(lm::build_lm(corpus.front().prompt.vocab_size, train_policy_order,
                                           train_policy_alpha, train_policy_seed));
      const auto report = attack::train(policy, dataset, train_cfg, corpus.front().scheme,
                                        train_threshold, train_seed);
      for (const auto& e : report.epochs) {
        std::cout << "epoch " << e.epoch << ": objective=" << e.stats.objective
                  << " mean_z=" << e.stats.mean_z << " mean_semantic=" << e.stats.mean_semantic
                  << " ppl=" << e.stats.mean_ppl << "\n";
      }
      if (!train_policy_out.empty()) detail::write_json_file(attack::to_json(policy), train_policy_out);
      if (!train_report.empty()) detail::write_json_file(attack::to_json(report), train_report);
      return 0;
    }

    if (eval->parsed()) {
      const auto corpus = harness::load_corpus(eval_in);
      if (corpus.empty()) throw std::invalid_argument("eval: empty corpus");
      const lm::LmParams victim = detail::build_victim(eval_lm);
      const attack::PolicyState policy = detail::load_or_build_policy(
          eval_policy, corpus.front().prompt.vocab_size, eval_policy_order, eval_policy_alpha,
          eval_policy_seed);

      harness::Attacker attacker;
      if (eval_attacker == "identity") attacker = harness::identity_attacker();
      else if (eval_attacker == "resample") attacker = harness::resample_attacker(policy.params);
      else if (eval_attacker == "unrelated") attacker = harness::unrelated_attacker(policy.params);
      else if (eval_attacker == "policy") attacker = harness::policy_attacker(policy);
      else if (eval_attacker == "passk")
        attacker = harness::passk_attacker(policy, eval_k, eval_threshold);
      else throw std::invalid_argument("unknown attacker: " + eval_attacker);

      const auto metrics = harness::evaluate_attack(attacker, corpus, victim, eval_threshold,
                                                    eval_sem, eval_seed);
      const nlohmann::json config{{"in", eval_in},
                                  {"attacker", eval_attacker},
                                  {"policy", eval_policy},
                                  {"k", eval_k},
                                  {"threshold", eval_threshold},
                                  {"sem_threshold", eval_sem},
                                  {"seed", eval_seed},
                                  {"scheme", wm::to_json(corpus.front().scheme)}};
      harness::export_report(metrics, config, eval_out);
      std::cout << "esr=" << metrics.esr << " removal=" << metrics.removal_rate
                << " mean_semantic=" << metrics.mean_semantic << " n=" << metrics.n << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::move(args));
}

}  // namespace wmlab::cli
