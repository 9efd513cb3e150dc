#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wmlab/attack.hpp"
#include "wmlab/rng.hpp"
#include "wmlab/toylm.hpp"
#include "wmlab/watermark.hpp"

// Corpus generation, attack evaluation, and report files.
//
// Corpora are JSONL (one record per line), reports are JSON, histograms are
// CSV. Every artifact embeds the seeds and configuration needed to
// regenerate it byte for byte.

namespace wmlab::harness {

inline constexpr int kCorpusFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;
inline constexpr double kHistogramBinWidth = 0.25;

struct CorpusRecord {
  std::int64_t id = 0;
  lm::TokenSeq prompt;
  lm::TokenSeq response;
  wm::WatermarkScheme scheme;
  std::int32_t key_id = 0;
  double z = 0.0;
  std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const CorpusRecord& r) {
  return nlohmann::json{{"version", kCorpusFormatVersion},
                        {"id", r.id},
                        {"prompt", r.prompt.tokens},
                        {"response", r.response.tokens},
                        {"vocab_size", r.prompt.vocab_size},
                        {"scheme", wm::to_json(r.scheme)},
                        {"key_id", r.key_id},
                        {"z", r.z},
                        {"seed", r.seed}};
}

inline CorpusRecord record_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kCorpusFormatVersion) {
    throw std::invalid_argument("corpus record: unsupported format version");
  }
  CorpusRecord r;
  r.id = j.at("id").get<std::int64_t>();
  const std::int32_t vocab = j.at("vocab_size").get<std::int32_t>();
  r.prompt = lm::TokenSeq{j.at("prompt").get<std::vector<std::int32_t>>(), vocab};
  r.response = lm::TokenSeq{j.at("response").get<std::vector<std::int32_t>>(), vocab};
  r.scheme = wm::scheme_from_json(j.at("scheme"));
  r.key_id = j.at("key_id").get<std::int32_t>();
  r.z = j.at("z").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

/// Samples n (prompt, watermarked response) records from the victim model
/// and writes them as JSONL. With a key list, records cycle through the
/// keys round-robin; key_id records the index used.
inline std::vector<CorpusRecord> generate_corpus(const lm::LmParams& victim,
                                                 const wm::WatermarkScheme& scheme, std::int64_t n,
                                                 std::int32_t length, std::int32_t prompt_length,
                                                 std::uint64_t seed,
                                                 std::span<const std::uint64_t> keys = {}) {
  if (n < 0) throw std::invalid_argument("generate_corpus: n must be >= 0");
  if (length <= scheme.prefix_length) {
    throw std::invalid_argument("generate_corpus: length must exceed the scheme prefix length");
  }
  if (prompt_length < 0) throw std::invalid_argument("generate_corpus: prompt_length must be >= 0");
  wm::validate_scheme(scheme);

  std::vector<CorpusRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  const lm::TokenSeq empty{{}, victim.vocab.size};
  for (std::int64_t i = 0; i < n; ++i) {
    CorpusRecord r;
    r.id = i;
    r.seed = rng::split_seed(seed, static_cast<std::uint64_t>(i));
    r.scheme = scheme;
    if (!keys.empty()) {
      r.key_id = static_cast<std::int32_t>(i % static_cast<std::int64_t>(keys.size()));
      r.scheme.key = keys[static_cast<std::size_t>(r.key_id)];
    }
    r.prompt = lm::sample_sequence(victim, empty, lm::ConditioningBag::none(), prompt_length, {},
                                   rng::split_seed(r.seed, 0));
    r.response = lm::sample_sequence(victim, r.prompt, lm::ConditioningBag::none(), length,
                                     wm::make_watermark_transform(r.scheme),
                                     rng::split_seed(r.seed, 1));
    r.z = wm::detect(r.response, r.scheme, /*threshold=*/0.0, &victim, &r.prompt).z_score;
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_corpus(std::span<const CorpusRecord> corpus, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_corpus: cannot open " + path.string());
  for (const CorpusRecord& r : corpus) f << to_json(r).dump() << '\n';
  if (!f) throw std::runtime_error("write_corpus: write failed for " + path.string());
}

inline std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_corpus: cannot open " + path.string());
  std::vector<CorpusRecord> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

// --- evaluation ---------------------------------------------------------------

/// Fixed-width detector-score histogram anchored at z = 0; bin b covers
/// [b * width, (b + 1) * width).
struct Histogram {
  double bin_width = kHistogramBinWidth;
  std::int32_t first_bin = 0;
  std::vector<std::int64_t> counts;

  void add(double z) {
    const std::int32_t b = static_cast<std::int32_t>(std::floor(z / bin_width));
    if (counts.empty()) {
      first_bin = b;
      counts.assign(1, 0);
    } else if (b < first_bin) {
      counts.insert(counts.begin(), static_cast<std::size_t>(first_bin - b), 0);
      first_bin = b;
    } else if (b >= first_bin + static_cast<std::int32_t>(counts.size())) {
      counts.resize(static_cast<std::size_t>(b - first_bin) + 1, 0);
    }
    ++counts[static_cast<std::size_t>(b - first_bin)];
  }

  std::int64_t total() const {
    std::int64_t t = 0;
    for (std::int64_t c : counts) t += c;
    return t;
  }

  double mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double center = (first_bin + static_cast<double>(i) + 0.5) * bin_width;
      s += center * static_cast<double>(counts[i]);
    }
    return s / static_cast<double>(total());
  }
};

struct AttackMetrics {
  double esr = 0.0;
  double removal_rate = 0.0;
  double mean_semantic = 0.0;
  std::int64_t n = 0;
  Histogram unwatermarked, watermarked, attacked;
};

/// One paraphrase per corpus record; the seed is already split per record.
using Attacker = std::function<lm::TokenSeq(const CorpusRecord&, std::uint64_t seed)>;

/// Runs the attacker over the corpus and scores the result. A record counts
/// toward removal when its attacked z is at or below the threshold, and
/// toward ESR when it additionally keeps semantic similarity above the
/// floor; ESR can therefore never exceed the removal rate. The victim model
/// supplies the unwatermarked score population for the histograms.
inline AttackMetrics evaluate_attack(const Attacker& attacker, std::span<const CorpusRecord> corpus,
                                     const lm::LmParams& victim, double z_threshold,
                                     double sem_threshold, std::uint64_t seed) {
  if (corpus.empty()) throw std::invalid_argument("evaluate_attack: empty corpus");

  AttackMetrics m;
  m.n = static_cast<std::int64_t>(corpus.size());
  std::int64_t removed = 0;
  std::int64_t evaded = 0;
  std::vector<double> sems;
  sems.reserve(corpus.size());

  for (const CorpusRecord& r : corpus) {
    const std::uint64_t rec_seed = rng::split_seed(seed, static_cast<std::uint64_t>(r.id));

    const lm::TokenSeq plain = lm::sample_sequence(
        victim, r.prompt, lm::ConditioningBag::none(),
        static_cast<std::int32_t>(r.response.tokens.size()), {}, rng::split_seed(rec_seed, 0));
    m.unwatermarked.add(wm::detect(plain, r.scheme, z_threshold, &victim, &r.prompt).z_score);
    m.watermarked.add(r.z);

    const lm::TokenSeq attacked = attacker(r, rng::split_seed(rec_seed, 1));
    const double z = wm::detect(attacked, r.scheme, z_threshold, &victim, &r.prompt).z_score;
    const double sem = attack::semantic_surrogate(r.response, attacked);
    m.attacked.add(z);
    sems.push_back(sem);
    if (z <= z_threshold) {
      ++removed;
      if (sem > sem_threshold) ++evaded;
    }
  }

  m.removal_rate = static_cast<double>(removed) / static_cast<double>(m.n);
  m.esr = static_cast<double>(evaded) / static_cast<double>(m.n);
  m.mean_semantic = math::pairwise_sum(sems) / static_cast<double>(m.n);
  return m;
}

// --- baseline attackers ---------------------------------------------------------

inline Attacker identity_attacker() {
  return [](const CorpusRecord& r, std::uint64_t) { return r.response; };
}

/// Single unbiased resample conditioned on the record's response bag.
inline Attacker resample_attacker(lm::LmParams model) {
  return [model = std::move(model)](const CorpusRecord& r, std::uint64_t seed) {
    return lm::sample_sequence(model, r.prompt, lm::make_bag(r.response),
                               static_cast<std::int32_t>(r.response.tokens.size()), {}, seed);
  };
}

/// Fresh text that ignores the input entirely: removes watermarks but
/// abandons the semantics.
inline Attacker unrelated_attacker(lm::LmParams model) {
  return [model = std::move(model)](const CorpusRecord& r, std::uint64_t seed) {
    const lm::TokenSeq empty{{}, model.vocab.size};
    return lm::sample_sequence(model, empty, lm::ConditioningBag::none(),
                               static_cast<std::int32_t>(r.response.tokens.size()), {}, seed);
  };
}

inline Attacker policy_attacker(attack::PolicyState policy) {
  return [policy = std::move(policy)](const CorpusRecord& r, std::uint64_t seed) {
    return lm::sample_sequence(policy.params, r.prompt, lm::make_bag(r.response),
                               static_cast<std::int32_t>(r.response.tokens.size()), {}, seed);
  };
}

/// Oracle best-of-k attacker: needs detector access to pick the candidate.
inline Attacker passk_attacker(attack::PolicyState policy, std::int32_t k, double threshold) {
  return [policy = std::move(policy), k, threshold](const CorpusRecord& r, std::uint64_t seed) {
    return attack::passk_attack(policy, r.response, k, r.scheme, threshold, seed).best;
  };
}

// --- reports ------------------------------------------------------------------

inline nlohmann::json to_json(const Histogram& h) {
  return nlohmann::json{
      {"bin_width", h.bin_width}, {"first_bin", h.first_bin}, {"counts", h.counts}};
}

inline Histogram histogram_from_json(const nlohmann::json& j) {
  Histogram h;
  h.bin_width = j.at("bin_width").get<double>();
  h.first_bin = j.at("first_bin").get<std::int32_t>();
  h.counts = j.at("counts").get<std::vector<std::int64_t>>();
  return h;
}

inline nlohmann::json to_json(const AttackMetrics& m, const nlohmann::json& config_echo) {
  return nlohmann::json{{"version", kReportFormatVersion},
                        {"config", config_echo},
                        {"metrics",
                         {{"esr", m.esr},
                          {"removal", m.removal_rate},
                          {"mean_semantic", m.mean_semantic},
                          {"n", m.n}}},
                        {"histograms",
                         {{"unwatermarked", to_json(m.unwatermarked)},
                          {"watermarked", to_json(m.watermarked)},
                          {"attacked", to_json(m.attacked)}}}};
}

/// Writes the JSON report to `path` and one CSV per score population next
/// to it (<stem>_hist_<population>.csv with bin bounds and counts).
inline void export_report(const AttackMetrics& m, const nlohmann::json& config_echo,
                          const std::filesystem::path& path) {
  if (m.n <= 0) throw std::invalid_argument("export_report: metrics cover no records");

  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_report: cannot open " + path.string());
  f << to_json(m, config_echo).dump(2) << '\n';
  if (!f) throw std::runtime_error("export_report: write failed for " + path.string());

  const auto write_csv = [&](const Histogram& h, const std::string& name) {
    std::filesystem::path csv = path;
    csv.replace_filename(path.stem().string() + "_hist_" + name + ".csv");
    std::ofstream c(csv);
    if (!c) throw std::runtime_error("export_report: cannot open " + csv.string());
    c << "z_lo,z_hi,count\n";
    std::ostringstream row;
    row.precision(17);
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      row.str("");
      row << (h.first_bin + static_cast<double>(i)) * h.bin_width << ','
          << (h.first_bin + static_cast<double>(i) + 1.0) * h.bin_width << ',' << h.counts[i]
          << '\n';
      c << row.str();
    }
  };
  write_csv(m.unwatermarked, "unwatermarked");
  write_csv(m.watermarked, "watermarked");
  write_csv(m.attacked, "attacked");
}

}  // namespace wmlab::harness
