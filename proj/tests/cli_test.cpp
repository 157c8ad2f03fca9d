#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "support.hpp"
#include "weatkit/weatkit.hpp"

using namespace weatkit;

namespace {

const std::string kCli = WEATKIT_CLI_PATH;
const std::string kData = WEATKIT_DATA_DIR;

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::vector<std::string>& args,
                  const std::string& stderr_path = "/dev/null") {
  std::string cmd = "'" + kCli + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " 2>" + stderr_path;
  CliResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, n);
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

nlohmann::json load_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  return j;
}

std::string sample_embedding() { return kData + "/sample_embedding.txt"; }
std::string sample_lexicon() { return kData + "/sample_lexicon.json"; }

}  // namespace

TEST_CASE("audit reports planted bias and exits zero") {
  testsupport::TempDir tmp;
  auto json_path = tmp.file("report.json");
  auto manifest_path = tmp.file("manifest.json");
  CliResult r = run_cli({"--manifest", manifest_path.string(), "audit",
                         "--embedding", sample_embedding(), "--lexicon",
                         sample_lexicon(), "--n-permutations", "500",
                         "--json", json_path.string()});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("bias levels:") != std::string::npos);
  CHECK(r.out.find("gender") != std::string::npos);
  CHECK(r.out.find("race") != std::string::npos);

  nlohmann::json j = load_json(json_path);
  REQUIRE(j["per_test"].size() == 2);
  CHECK(j["bias_levels"]["gender"].get<double>() > 1.5);
  CHECK(j["bias_levels"]["race"].get<double>() > 1.5);

  SECTION("the JSON report recomputes exactly through the library") {
    Embedding e = load_embedding(sample_embedding());
    auto cfg = LexiconConfig::from_json_file(sample_lexicon());
    auto lex = resolve_lexicon(cfg, e);
    ReportOptions ro;
    ro.n_samples = 500;
    ro.seed = derive_seed(42, "audit");
    BiasReport rep = make_report(e, lex.tests, ro);
    REQUIRE(rep.runs.size() == 2);
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
      const auto& row = j["per_test"][i];
      CHECK(row["s"].get<double>() == rep.runs[i].result.s);
      CHECK(row["d"].get<double>() == *rep.runs[i].result.d);
      CHECK(row["p"].get<double>() == rep.runs[i].result.p);
    }
    for (const auto& [cls, v] : rep.bias)
      CHECK(j["bias_levels"][cls].get<double>() == v);
  }
  SECTION("the manifest records the run") {
    nlohmann::json m = load_json(manifest_path);
    CHECK(m["tool"] == "weatkit");
    CHECK(m["subcommand"] == "audit");
    CHECK(m["seed"] == 42);
    CHECK(m["inputs"]["lexicon"] == sample_lexicon());
    CHECK(m["started_at"].get<std::string>().size() > 0);
    CHECK(m["finished_at"].get<std::string>().size() > 0);
  }
}

TEST_CASE("debias hard writes a loadable embedding deterministically") {
  testsupport::TempDir tmp;
  auto out1 = tmp.file("hard1.txt");
  auto out2 = tmp.file("hard2.txt");
  auto json_path = tmp.file("hard.json");
  std::vector<std::string> base = {
      "--manifest", tmp.file("m.json").string(), "debias", "hard",
      "--embedding", sample_embedding(), "--lexicon", sample_lexicon(),
      "--n-permutations", "200"};
  std::vector<std::string> a1 = base;
  a1.insert(a1.end(), {"--output", out1.string(), "--json", json_path.string()});
  CliResult r1 = run_cli(a1);
  CHECK(r1.exit_code == 0);
  CHECK(r1.out.find("before:") != std::string::npos);
  CHECK(r1.out.find("after:") != std::string::npos);
  CHECK(r1.out.find("equidistancing attempts:") != std::string::npos);

  Embedding debiased = load_embedding(out1.string());
  CHECK(debiased.size() == 64);
  CHECK(debiased.dim() == 8);

  nlohmann::json j = load_json(json_path);
  double before_g = j["before"]["bias_levels"]["gender"].get<double>();
  double after_g = j["after"]["bias_levels"]["gender"].get<double>();
  CHECK(before_g > 1.5);
  CHECK(after_g < 0.5);
  CHECK(j["guard_satisfied"].is_boolean());

  SECTION("the same seed gives byte-identical output") {
    std::vector<std::string> a2 = base;
    a2.insert(a2.end(), {"--output", out2.string()});
    CliResult r2 = run_cli(a2);
    CHECK(r2.exit_code == 0);
    CHECK(testsupport::read_file(out1) == testsupport::read_file(out2));
  }
  SECTION("a different seed changes the output") {
    std::vector<std::string> a3 = {
        "--seed", "7", "--manifest", tmp.file("m3.json").string(), "debias",
        "hard", "--embedding", sample_embedding(), "--lexicon",
        sample_lexicon(), "--n-permutations", "200", "--output",
        out2.string()};
    CliResult r3 = run_cli(a3);
    CHECK(r3.exit_code == 0);
    CHECK(testsupport::read_file(out1) != testsupport::read_file(out2));
  }
}

TEST_CASE("debias soft honours lambda and the normalization switch") {
  testsupport::TempDir tmp;
  auto out = tmp.file("soft0.txt");
  CliResult r = run_cli({"--manifest", tmp.file("m.json").string(), "debias",
                         "soft", "--embedding", sample_embedding(),
                         "--lexicon", sample_lexicon(), "--output",
                         out.string(), "--lambda", "0", "--no-normalize",
                         "--n-permutations", "200"});
  CHECK(r.exit_code == 0);

  SECTION("lambda 0 without normalization reproduces the input exactly") {
    Embedding orig = load_embedding(sample_embedding());
    Embedding back = load_embedding(out.string());
    REQUIRE(back.size() == orig.size());
    CHECK(back.words() == orig.words());
    CHECK((back.vectors() - orig.vectors()).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("lambda 0.5 reduces bias and is deterministic") {
    auto o1 = tmp.file("soft_a.txt");
    auto o2 = tmp.file("soft_b.txt");
    auto jp = tmp.file("soft.json");
    std::vector<std::string> base = {
        "debias", "soft", "--embedding", sample_embedding(), "--lexicon",
        sample_lexicon(), "--lambda", "0.5", "--n-permutations", "200"};
    std::vector<std::string> a1 = base;
    a1.insert(a1.end(), {"--output", o1.string(), "--json", jp.string()});
    CliResult r1 = run_cli(a1);
    CHECK(r1.exit_code == 0);
    std::vector<std::string> a2 = base;
    a2.insert(a2.end(), {"--output", o2.string()});
    CliResult r2 = run_cli(a2);
    CHECK(r2.exit_code == 0);
    CHECK(testsupport::read_file(o1) == testsupport::read_file(o2));

    nlohmann::json j = load_json(jp);
    REQUIRE(j["plans"].size() == 4);  // both subclasses of both classes
    double before = j["before"]["bias_levels"]["gender"].get<double>();
    double after = j["after"]["bias_levels"]["gender"].get<double>();
    CHECK(after < before);

    // the default manifest lands next to the output
    CHECK(std::filesystem::exists(o1.string() + ".manifest.json"));
  }
}

TEST_CASE("eval reports quality scores with the documented exit codes") {
  testsupport::TempDir tmp;

  // fan embedding: ten distinct cosines against the hub
  {
    std::vector<std::string> words = {"hub"};
    oracle::Mat rows = {{1.0, 0.0}};
    for (int k = 0; k < 10; ++k) {
      double a = (k + 1) * 8.0 * 0.017453292519943295;
      words.push_back("w" + std::to_string(k));
      rows.push_back({std::cos(a), std::sin(a)});
    }
    save_embedding(testsupport::make_embedding(words, rows),
                   tmp.file("fan.txt"));
  }
  {
    std::string sim = "# perfect agreement\n";
    for (int k = 0; k < 10; ++k)
      sim += "hub\tw" + std::to_string(k) + "\t" + std::to_string(10 - k) +
             "\n";
    testsupport::write_file(tmp.file("sim.tsv"), sim);
  }
  {
    // exact parallelograms (see qualeval tests)
    std::vector<std::string> words;
    oracle::Mat rows;
    double s = 1.0 / std::sqrt(3.0);
    for (int k = 0; k < 3; ++k) {
      int base = 3 * k;
      std::string n = "q" + std::to_string(k + 1);
      for (int p = 0; p < 3; ++p) {
        oracle::Vec v(9, 0.0);
        v[base + p] = 1.0;
        words.push_back(n + std::string(1, static_cast<char>('a' + p)));
        rows.push_back(v);
      }
      oracle::Vec t(9, 0.0);
      t[base] = -s;
      t[base + 1] = s;
      t[base + 2] = s;
      words.push_back(n + "t");
      rows.push_back(t);
    }
    save_embedding(testsupport::make_embedding(words, rows),
                   tmp.file("blocks.txt"));
    testsupport::write_file(tmp.file("an.txt"),
                            ": blocks\n"
                            "q1a q1b q1c q1t\n"
                            "q2a q2b q2c q2t\n"
                            "q3a q3b q3c q3t\n");
  }

  SECTION("perfect datasets print 100.0 and exit zero") {
    auto jp = tmp.file("eval.json");
    CliResult r = run_cli({"--manifest", tmp.file("m.json").string(), "eval",
                           "--embedding", tmp.file("fan.txt").string(),
                           "--similarity", tmp.file("sim.tsv").string(),
                           "--json", jp.string()});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("100.0") != std::string::npos);
    nlohmann::json j = load_json(jp);
    REQUIRE(j["results"].size() == 1);
    CHECK(j["results"][0]["kind"] == "similarity");
    CHECK(j["results"][0]["score"].get<double>() == 100.0);
    CHECK(j["results"][0]["used"] == 10);
  }
  SECTION("analogy sections appear in the JSON report") {
    auto jp = tmp.file("eval2.json");
    CliResult r = run_cli({"--manifest", tmp.file("m2.json").string(), "eval",
                           "--embedding", tmp.file("blocks.txt").string(),
                           "--analogy", tmp.file("an.txt").string(), "--json",
                           jp.string()});
    CHECK(r.exit_code == 0);
    nlohmann::json j = load_json(jp);
    REQUIRE(j["results"].size() == 1);
    CHECK(j["results"][0]["score"].get<double>() == 100.0);
    REQUIRE(j["results"][0]["sections"].size() == 1);
    CHECK(j["results"][0]["sections"][0]["accuracy"].get<double>() == 100.0);
  }
  SECTION("one failing dataset among several keeps exit zero") {
    CliResult r = run_cli({"--manifest", tmp.file("m3.json").string(), "eval",
                           "--embedding", tmp.file("fan.txt").string(),
                           "--similarity", tmp.file("sim.tsv").string(),
                           "--similarity", tmp.file("missing.tsv").string()});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("error:") != std::string::npos);
  }
  SECTION("every dataset failing exits two") {
    CliResult r = run_cli({"--manifest", tmp.file("m4.json").string(), "eval",
                           "--embedding", tmp.file("fan.txt").string(),
                           "--similarity", tmp.file("missing.tsv").string()});
    CHECK(r.exit_code == 2);
  }
  SECTION("no datasets at all is a usage error") {
    auto ep = tmp.file("err.txt");
    CliResult r = run_cli({"eval", "--embedding",
                           tmp.file("fan.txt").string()},
                          ep.string());
    CHECK(r.exit_code == 1);
    CHECK(testsupport::read_file(ep).find("error:") != std::string::npos);
  }
}

TEST_CASE("neighbors passes the library results through") {
  testsupport::TempDir tmp;
  CliResult r = run_cli({"--manifest", tmp.file("m.json").string(),
                         "neighbors", "--embedding", sample_embedding(),
                         "--word", "he", "-k", "5"});
  CHECK(r.exit_code == 0);

  Embedding e = load_embedding(sample_embedding());
  auto expected = nearest_neighbors(e, "he", 5);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < r.out.size()) {
    std::size_t nl = r.out.find('\n', pos);
    if (nl == std::string::npos) break;
    lines.push_back(r.out.substr(pos, nl - pos));
    pos = nl + 1;
  }
  REQUIRE(lines.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s  %.6f", expected[i].word.c_str(),
                  expected[i].cosine);
    CHECK(lines[i] == buf);
  }

  SECTION("k larger than the vocabulary is clamped") {
    CliResult r2 = run_cli({"--manifest", tmp.file("m2.json").string(),
                            "neighbors", "--embedding", sample_embedding(),
                            "--word", "he", "-k", "100"});
    CHECK(r2.exit_code == 0);
    std::size_t count = 0;
    for (char c : r2.out)
      if (c == '\n') ++count;
    CHECK(count == 63);
  }
  SECTION("a missing query word is a data error") {
    auto ep = tmp.file("err.txt");
    CliResult r3 = run_cli({"--manifest", tmp.file("m3.json").string(),
                            "neighbors", "--embedding", sample_embedding(),
                            "--word", "zzz"},
                           ep.string());
    CHECK(r3.exit_code == 2);
    CHECK(testsupport::read_file(ep).find("error:") != std::string::npos);
  }
  SECTION("the JSON mirror matches the table") {
    auto jp = tmp.file("n.json");
    CliResult r4 = run_cli({"--manifest", tmp.file("m4.json").string(),
                            "--json", jp.string(), "neighbors", "--embedding",
                            sample_embedding(), "--word", "he", "-k", "3"});
    CHECK(r4.exit_code == 0);
    nlohmann::json j = load_json(jp);
    REQUIRE(j.size() == 3);
    CHECK(j[0]["word"] == expected[0].word);
    CHECK(j[0]["cosine"].get<double>() == expected[0].cosine);
  }
}

TEST_CASE("usage problems exit one, data problems exit two") {
  testsupport::TempDir tmp;
  CHECK(run_cli({}).exit_code == 1);                      // no subcommand
  CHECK(run_cli({"audit"}).exit_code == 1);               // missing required
  CHECK(run_cli({"--bogus", "audit"}).exit_code == 1);    // unknown flag
  CHECK(run_cli({"--help"}).exit_code == 0);
  CHECK(run_cli({"debias", "soft", "--embedding", sample_embedding(),
                 "--lexicon", sample_lexicon(), "--output",
                 tmp.file("x.txt").string(), "--lambda", "1.5"})
            .exit_code == 1);
  CHECK(run_cli({"--format", "nope", "--manifest",
                 tmp.file("m.json").string(), "audit", "--embedding",
                 sample_embedding(), "--lexicon", sample_lexicon()})
            .exit_code == 1);
  CHECK(run_cli({"--manifest", tmp.file("m2.json").string(), "audit",
                 "--embedding", tmp.file("missing.txt").string(), "--lexicon",
                 sample_lexicon()})
            .exit_code == 2);

  SECTION("strict mode passes when the lexicon fully resolves") {
    CliResult r = run_cli({"--strict", "--manifest",
                           tmp.file("m3.json").string(), "audit",
                           "--embedding", sample_embedding(), "--lexicon",
                           sample_lexicon(), "--n-permutations", "100",
                           "--signed"});
    CHECK(r.exit_code == 0);
  }
  SECTION("the header format roundtrips through the tool") {
    Embedding e = load_embedding(sample_embedding());
    save_embedding(e, tmp.file("header.txt"), EmbeddingFormat::header);
    CliResult r = run_cli({"--format", "header", "--manifest",
                           tmp.file("m4.json").string(), "neighbors",
                           "--embedding", tmp.file("header.txt").string(),
                           "--word", "she", "-k", "2"});
    CHECK(r.exit_code == 0);
  }
}
