#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wmlab/cli.hpp"
#include "wmlab/harness.hpp"

using namespace wmlab;
namespace fs = std::filesystem;

namespace {

const wm::WatermarkScheme kWindowed{wm::Variant::windowed, 15485863, 0.5, 2.0, 4, {}};

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / "wmlab_harness_tests";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("generate_corpus basics") {
  const auto victim = lm::build_lm(64, 1, 0.0, 42);

  SECTION("n = 0 gives a valid empty file") {
    const auto corpus = harness::generate_corpus(victim, kWindowed, 0, 64, 8, 1);
    REQUIRE(corpus.empty());
    const fs::path out = temp_dir() / "empty.jsonl";
    harness::write_corpus(corpus, out);
    REQUIRE(harness::load_corpus(out).empty());
  }

  SECTION("same seed reproduces byte-identical files") {
    const fs::path a = temp_dir() / "a.jsonl";
    const fs::path b = temp_dir() / "b.jsonl";
    harness::write_corpus(harness::generate_corpus(victim, kWindowed, 20, 64, 8, 7), a);
    harness::write_corpus(harness::generate_corpus(victim, kWindowed, 20, 64, 8, 7), b);
    REQUIRE(slurp(a) == slurp(b));
    REQUIRE(!slurp(a).empty());
  }

  SECTION("stored z matches re-run detection") {
    const auto corpus = harness::generate_corpus(victim, kWindowed, 10, 64, 8, 3);
    for (const auto& r : corpus) {
      const auto d = wm::detect(r.response, r.scheme, 4.0, &victim, &r.prompt);
      REQUIRE(std::abs(d.z_score - r.z) <= 1e-9);
    }
  }

  SECTION("strong watermark detects nearly always") {
    const auto corpus = harness::generate_corpus(victim, kWindowed, 200, 200, 8, 9);
    int detected = 0;
    for (const auto& r : corpus) detected += r.z > 4.0 ? 1 : 0;
    REQUIRE(static_cast<double>(detected) / 200.0 >= 0.99);
  }

  SECTION("mixed keys cycle round robin and stay self-consistent") {
    const std::vector<std::uint64_t> keys{11, 22, 33, 44};
    const auto corpus = harness::generate_corpus(victim, kWindowed, 9, 64, 8, 5, keys);
    for (const auto& r : corpus) {
      REQUIRE(r.key_id == static_cast<std::int32_t>(r.id % 4));
      REQUIRE(r.scheme.key == keys[static_cast<std::size_t>(r.key_id)]);
      const auto d = wm::detect(r.response, r.scheme, 4.0, &victim, &r.prompt);
      REQUIRE(std::abs(d.z_score - r.z) <= 1e-9);
    }
  }

  SECTION("length must clear the prefix window") {
    REQUIRE_THROWS_AS(harness::generate_corpus(victim, kWindowed, 1, 4, 8, 1),
                      std::invalid_argument);
  }
}

TEST_CASE("evaluate_attack metrics") {
  const auto victim = lm::build_lm(64, 1, 0.0, 42);
  // Strong corpus for removal checks; short corpus for the semantic floor,
  // where the count-cosine baseline of unrelated text (about n/(n+V)) sits
  // well below 0.7.
  const auto corpus = harness::generate_corpus(victim, kWindowed, 60, 200, 8, 13);
  const auto short_corpus = harness::generate_corpus(victim, kWindowed, 60, 64, 8, 14);
  const auto attacker_lm = lm::build_lm(64, 1, 1.0, 77);

  SECTION("identity attacker cannot remove a strong watermark") {
    const auto m = harness::evaluate_attack(harness::identity_attacker(), corpus, victim, 4.0, 0.7, 1);
    REQUIRE(m.removal_rate <= 0.01);
    REQUIRE(m.esr <= m.removal_rate);
    REQUIRE(m.mean_semantic == 1.0);
  }

  SECTION("unrelated text removes the watermark but fails the semantic floor") {
    const auto m = harness::evaluate_attack(harness::unrelated_attacker(attacker_lm), short_corpus,
                                            victim, 4.0, 0.7, 2);
    REQUIRE(m.removal_rate >= 0.9);
    REQUIRE(m.esr <= 0.05);
  }

  SECTION("a vacuous semantic floor makes ESR equal removal") {
    const auto m = harness::evaluate_attack(harness::resample_attacker(attacker_lm), short_corpus,
                                            victim, 4.0, 0.0, 3);
    REQUIRE(m.esr == m.removal_rate);
  }

  SECTION("histogram bins conserve the population counts") {
    const auto m = harness::evaluate_attack(harness::resample_attacker(attacker_lm), corpus,
                                            victim, 4.0, 0.7, 4);
    REQUIRE(m.unwatermarked.total() == m.n);
    REQUIRE(m.watermarked.total() == m.n);
    REQUIRE(m.attacked.total() == m.n);
    REQUIRE(m.watermarked.bin_width == 0.25);
  }

  SECTION("watermarked and unwatermarked populations separate") {
    const auto m = harness::evaluate_attack(harness::identity_attacker(), corpus, victim, 4.0, 0.7, 5);
    REQUIRE(m.watermarked.mean() - m.unwatermarked.mean() > 4.0);
  }

  SECTION("empty corpus is an error") {
    REQUIRE_THROWS_AS(harness::evaluate_attack(harness::identity_attacker(),
                                               std::vector<harness::CorpusRecord>{}, victim, 4.0,
                                               0.7, 1),
                      std::invalid_argument);
  }
}

TEST_CASE("export_report round trip") {
  const auto victim = lm::build_lm(32, 1, 0.0, 4);
  const wm::WatermarkScheme scheme{wm::Variant::unigram, 15485863, 0.5, 2.0, 0, {}};
  const auto corpus = harness::generate_corpus(victim, scheme, 25, 48, 4, 21);
  const auto metrics =
      harness::evaluate_attack(harness::identity_attacker(), corpus, victim, 4.0, 0.7, 9);

  const fs::path out = temp_dir() / "report.json";
  const nlohmann::json config{{"note", "round-trip"}};
  harness::export_report(metrics, config, out);

  const auto parsed = nlohmann::json::parse(slurp(out));
  REQUIRE(parsed.at("version").get<int>() == harness::kReportFormatVersion);
  REQUIRE(parsed.at("config") == config);
  REQUIRE(parsed.at("metrics").at("esr").get<double>() == metrics.esr);
  REQUIRE(parsed.at("metrics").at("removal").get<double>() == metrics.removal_rate);
  REQUIRE(parsed.at("metrics").at("mean_semantic").get<double>() == metrics.mean_semantic);
  REQUIRE(parsed.at("metrics").at("n").get<std::int64_t>() == metrics.n);

  for (const char* name : {"unwatermarked", "watermarked", "attacked"}) {
    const auto h = harness::histogram_from_json(parsed.at("histograms").at(name));
    std::int64_t total = 0;
    for (auto c : h.counts) total += c;
    REQUIRE(total == metrics.n);

    fs::path csv = out;
    csv.replace_filename(std::string("report_hist_") + name + ".csv");
    REQUIRE(fs::exists(csv));
    const std::string body = slurp(csv);
    REQUIRE(body.rfind("z_lo,z_hi,count\n", 0) == 0);
  }

  SECTION("empty metrics are rejected") {
    harness::AttackMetrics empty;
    REQUIRE_THROWS_AS(harness::export_report(empty, config, out), std::invalid_argument);
  }
}

TEST_CASE("cli subcommands") {
  const fs::path dir = temp_dir();

  SECTION("gen happy path") {
    const fs::path out = dir / "cli_corpus.jsonl";
    const int rc = cli::run_cli({"gen", "--scheme", "windowed", "--q", "0.5", "--bias", "2.0",
                                 "--key", "15485863", "--prefix", "4", "--n", "12", "--len", "64",
                                 "--seed", "1", "--out", out.string()});
    REQUIRE(rc == 0);
    REQUIRE(harness::load_corpus(out).size() == 12);
  }

  SECTION("missing --seed exits 2") {
    const int rc = cli::run_cli({"gen", "--n", "5", "--out", (dir / "x.jsonl").string()});
    REQUIRE(rc == 2);
  }

  SECTION("unknown subcommand exits 2") { REQUIRE(cli::run_cli({"frobnicate"}) == 2); }

  SECTION("unknown flag exits 2") {
    REQUIRE(cli::run_cli({"gen", "--does-not-exist", "1", "--seed", "1", "--out", "x"}) == 2);
  }

  SECTION("detect re-derives stored scores") {
    const fs::path out = dir / "cli_detect.jsonl";
    REQUIRE(cli::run_cli({"gen", "--n", "8", "--len", "64", "--seed", "3", "--out",
                          out.string()}) == 0);
    REQUIRE(cli::run_cli({"detect", "--in", out.string(), "--threshold", "4.0"}) == 0);
  }

  SECTION("gen is byte-deterministic at the CLI level") {
    const fs::path a = dir / "cli_a.jsonl";
    const fs::path b = dir / "cli_b.jsonl";
    REQUIRE(cli::run_cli({"gen", "--n", "6", "--len", "48", "--seed", "11", "--out", a.string()}) == 0);
    REQUIRE(cli::run_cli({"gen", "--n", "6", "--len", "48", "--seed", "11", "--out", b.string()}) == 0);
    REQUIRE(slurp(a) == slurp(b));
  }

  SECTION("passk bound-only mode") {
    REQUIRE(cli::run_cli({"passk", "--bound-only", "--rho-star", "5", "--k", "20", "--eta",
                          "0.1"}) == 0);
  }

  SECTION("passk attack mode requires a corpus and a seed") {
    const fs::path corpus = dir / "cli_passk.jsonl";
    const fs::path report = dir / "cli_passk_report.json";
    REQUIRE(cli::run_cli({"gen", "--scheme", "unigram", "--n", "6", "--len", "48", "--seed", "21",
                          "--out", corpus.string()}) == 0);
    REQUIRE(cli::run_cli({"passk", "--in", corpus.string(), "--k", "4"}) == 2);
    REQUIRE(cli::run_cli({"passk", "--in", corpus.string(), "--k", "4", "--seed", "22", "--out",
                          report.string()}) == 0);
    const auto parsed = nlohmann::json::parse(slurp(report));
    REQUIRE(parsed.at("records").size() == 6);
    for (const auto& rec : parsed.at("records")) {
      REQUIRE(rec.at("best_z").get<double>() <= rec.at("first_z").get<double>());
    }
  }

  SECTION("gen cycles mixed keys round robin") {
    const fs::path corpus = dir / "cli_mixed.jsonl";
    const std::vector<std::uint64_t> keys{11, 22, 33};
    REQUIRE(cli::run_cli({"gen", "--n", "6", "--len", "48", "--seed", "23", "--keys",
                          "11,22,33", "--out", corpus.string()}) == 0);
    const auto records = harness::load_corpus(corpus);
    REQUIRE(records.size() == 6);
    for (const auto& r : records) {
      REQUIRE(r.scheme.key == keys[static_cast<std::size_t>(r.key_id)]);
    }
    REQUIRE(cli::run_cli({"detect", "--in", corpus.string()}) == 0);
  }

  SECTION("certify emits a per-strategy report with a grid minimum") {
    const fs::path report = dir / "cli_certify.json";
    REQUIRE(cli::run_cli({"certify", "--n-samples", "32", "--len", "64", "--contexts", "2",
                          "--scales", "1.0,0.8", "--bag", "off", "--seed", "24", "--out",
                          report.string()}) == 0);
    const auto parsed = nlohmann::json::parse(slurp(report));
    REQUIRE(parsed.at("strategies").size() == 4);
    double min_rho = 1e300;
    for (const auto& s : parsed.at("strategies")) {
      REQUIRE(s.contains("mu"));
      REQUIRE(s.contains("sigma2"));
      REQUIRE(s.contains("stderr"));
      REQUIRE(s.contains("rho_star"));
      REQUIRE(s.contains("proxy_mode"));
      min_rho = std::min(min_rho, s.at("rho_star").get<double>());
    }
    REQUIRE(parsed.at("min_rho_star").get<double>() == min_rho);
  }

  SECTION("eval identity attacker end to end") {
    const fs::path corpus = dir / "cli_eval.jsonl";
    const fs::path report = dir / "cli_eval_report.json";
    REQUIRE(cli::run_cli({"gen", "--n", "10", "--len", "64", "--seed", "5", "--out",
                          corpus.string()}) == 0);
    REQUIRE(cli::run_cli({"eval", "--in", corpus.string(), "--attacker", "identity", "--seed",
                          "6", "--out", report.string()}) == 0);
    const auto parsed = nlohmann::json::parse(slurp(report));
    REQUIRE(parsed.at("metrics").at("n").get<int>() == 10);
  }
}
