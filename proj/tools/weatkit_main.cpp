// weatkit command-line tool: audit, debias, eval, neighbors
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "weatkit/weatkit.hpp"

namespace {

using namespace weatkit;

std::string now_iso8601() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct GlobalOpts {
  std::uint64_t seed = 42;
  std::string format = "plain";
  std::string json_path;
  std::string manifest_path;
  std::string frequency_file;
  bool strict = false;
  bool lowercase_fallback = false;
};

EmbeddingFormat parse_format(const std::string& f) {
  if (f == "plain") return EmbeddingFormat::plain;
  if (f == "header") return EmbeddingFormat::header;
  throw ValidationError({"unknown embedding format '" + f +
                         "' (plain | header)"});
}

Embedding load_with_opts(const std::string& path, const GlobalOpts& g,
                         Warnings* warnings) {
  LoadStats stats;
  Embedding e = load_embedding(path, parse_format(g.format), &stats);
  for (auto& m : stats.messages) warn(warnings, m);
  if (!g.frequency_file.empty())
    e.set_frequency_ranks(load_frequency_file(g.frequency_file));
  e.set_lowercase_fallback(g.lowercase_fallback);
  return e;
}

WordSet load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list: " + path);
  WordSet s;
  s.name = std::filesystem::path(path).stem().string();
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    s.words.push_back(line);
  }
  return s;
}

void print_warnings(const Warnings& ws) {
  for (const auto& w : ws) std::cerr << "warning: " << w << "\n";
}

void finish_manifest(RunManifest& m, const GlobalOpts& g,
                     const std::string& default_path) {
  m.finished_at = now_iso8601();
  std::string path = g.manifest_path.empty() ? default_path : g.manifest_path;
  write_json_file(to_json(m), path);
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

int run(int argc, char** argv) {
  CLI::App app{"bias measurement and joint multiclass debiasing for word "
               "embeddings"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "master seed for all randomized steps")
      ->capture_default_str();
  app.add_option("--format", g.format,
                 "embedding file format: plain | header")
      ->capture_default_str();
  app.add_option("--json", g.json_path, "write the JSON report here");
  app.add_option("--manifest", g.manifest_path,
                 "write the run manifest here (default: weatkit-manifest.json"
                 " or <output>.manifest.json)");
  app.add_option("--frequency-file", g.frequency_file,
                 "token<TAB>count file overriding frequency ranks");
  app.add_flag("--strict", g.strict,
               "treat droppable issues (missing words, unequal targets) as "
               "errors");
  app.add_flag("--lowercase-fallback", g.lowercase_fallback,
               "retry failed lookups with the lowercased token");
  // global options may follow the subcommand name
  app.fallthrough();

  // audit
  auto* audit = app.add_subcommand("audit", "run all configured tests");
  std::string a_embedding, a_lexicon;
  std::uint64_t a_nperm = 10000;
  bool a_signed = false;
  audit->add_option("--embedding", a_embedding, "embedding file")->required();
  audit->add_option("--lexicon", a_lexicon, "lexicon JSON file")->required();
  audit->add_option("--n-permutations", a_nperm,
                    "permutation samples per test")
      ->capture_default_str();
  audit->add_flag("--signed", a_signed,
                  "aggregate signed d into bias levels instead of |d|");

  // debias hard | soft
  auto* debias = app.add_subcommand("debias", "remove measured bias");
  debias->require_subcommand(1);
  std::string d_embedding, d_lexicon, d_output;
  std::uint64_t d_nperm = 10000;
  bool d_signed = false;

  auto* hard = debias->add_subcommand(
      "hard", "complete removal: neutralize and re-embed definitional words");
  HardWeatParams hp;
  std::string h_plane = "center-and-attributes";
  std::string h_neutral_list;
  hard->add_option("--embedding", d_embedding, "embedding file")->required();
  hard->add_option("--lexicon", d_lexicon, "lexicon JSON file")->required();
  hard->add_option("--output", d_output, "debiased embedding path")
      ->required();
  hard->add_option("--angle-threshold", hp.angle_threshold_deg,
                   "guard angle in degrees, 0 < a < 90")
      ->capture_default_str();
  hard->add_option("--max-iterations", hp.max_iterations,
                   "radius redraw attempts")
      ->capture_default_str();
  hard->add_option("--radius-ratio", hp.radius_ratio_min,
                   "minimum ratio of word-circle to center-circle radius")
      ->capture_default_str();
  hard->add_option("--plane", h_plane,
                   "circle plane selection: center-only | "
                   "center-and-attributes")
      ->capture_default_str();
  hard->add_option("--neutral-list", h_neutral_list,
                   "file listing the words to neutralize (default: all "
                   "non-definitional words)");
  hard->add_option("--n-permutations", d_nperm,
                   "permutation samples per test")
      ->capture_default_str();
  hard->add_flag("--signed", d_signed,
                 "aggregate signed d into bias levels instead of |d|");

  auto* soft = debias->add_subcommand(
      "soft", "gradual removal: translate subclasses toward a nullspace "
              "vector");
  SoftWeatParams sp;
  bool s_no_normalize = false;
  std::string s_manual_pairs;
  soft->add_option("--embedding", d_embedding, "embedding file")->required();
  soft->add_option("--lexicon", d_lexicon, "lexicon JSON file")->required();
  soft->add_option("--output", d_output, "debiased embedding path")
      ->required();
  soft->add_option("--lambda", sp.lambda, "level of removal in [0, 1]")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  soft->add_option("--neighbors-k", sp.neighbors_k,
                   "neighbors added per target word")
      ->capture_default_str();
  soft->add_option("--max-rank", sp.max_rank,
                   "only words of rank below this join an expansion "
                   "(0 = no limit)")
      ->capture_default_str();
  soft->add_option("--selection-threshold", sp.selection_threshold,
                   "mean |d| above which a test selects attribute sets")
      ->capture_default_str();
  soft->add_flag("--no-normalize", s_no_normalize,
                 "skip the final normalization step");
  soft->add_flag("--sequential", sp.sequential,
                 "re-plan after each subclass instead of planning jointly");
  soft->add_flag("--extended-mean", sp.extended_mean,
                 "take the translation mean over the extended set");
  soft->add_option("--manual-pairs", s_manual_pairs,
                   "JSON file {\"class/subclass\": [\"attribute set\", ...]} "
                   "overriding automatic selection");
  soft->add_option("--n-permutations", d_nperm,
                   "permutation samples per test")
      ->capture_default_str();
  soft->add_flag("--signed", d_signed,
                 "aggregate signed d into bias levels instead of |d|");

  // eval
  auto* eval = app.add_subcommand("eval", "embedding quality evaluation");
  std::string e_embedding, e_analogy;
  std::vector<std::string> e_similarity;
  std::size_t e_analogy_max_rank = 0;
  eval->add_option("--embedding", e_embedding, "embedding file")->required();
  eval->add_option("--similarity", e_similarity,
                   "word-pair similarity dataset (repeatable)");
  eval->add_option("--analogy", e_analogy, "analogy dataset");
  eval->add_option("--analogy-max-rank", e_analogy_max_rank,
                   "restrict analogy predictions to words below this rank "
                   "(0 = no limit)");

  // neighbors
  auto* neigh = app.add_subcommand("neighbors", "nearest neighbors of a word");
  std::string n_embedding, n_word;
  std::size_t n_k = 10, n_max_rank = 0;
  neigh->add_option("--embedding", n_embedding, "embedding file")->required();
  neigh->add_option("--word", n_word, "query token")->required();
  neigh->add_option("-k,--k", n_k, "neighbor count")->capture_default_str();
  neigh->add_option("--max-rank", n_max_rank,
                    "only consider words below this rank (0 = no limit)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // collapse CLI11's exit-code zoo onto the documented contract:
    // 0 for --help/--version, 1 for every usage problem
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  RunManifest manifest;
  manifest.command_line = join_args(argc, argv);
  manifest.seed = g.seed;
  manifest.started_at = now_iso8601();
  Warnings warnings;

  if (*audit) {
    manifest.subcommand = "audit";
    manifest.inputs = {{"embedding", a_embedding}, {"lexicon", a_lexicon}};
    manifest.params = {{"n_permutations", a_nperm},
                       {"signed", a_signed},
                       {"strict", g.strict}};
    Embedding e = load_with_opts(a_embedding, g, &warnings);
    auto cfg = LexiconConfig::from_json_file(a_lexicon);
    auto lex = resolve_lexicon(cfg, e, g.strict);
    if (lex.tests.empty()) throw Error("no runnable tests in the lexicon");
    ReportOptions ro;
    ro.n_samples = a_nperm;
    ro.seed = derive_seed(g.seed, "audit");
    ro.strict = g.strict;
    ro.absolute = !a_signed;
    BiasReport rep = make_report(e, lex.tests, ro);
    for (const auto& w : lex.warnings) warnings.push_back(w);
    for (const auto& w : rep.warnings) warnings.push_back(w);
    print_warnings(warnings);
    std::cout << report_table(rep);
    if (!g.json_path.empty()) {
      write_json_file(to_json(rep), g.json_path);
      manifest.outputs["json"] = g.json_path;
    }
    manifest.warnings = warnings;
    finish_manifest(manifest, g, "weatkit-manifest.json");
    return 0;
  }

  if (*hard || *soft) {
    manifest.inputs = {{"embedding", d_embedding}, {"lexicon", d_lexicon}};
    manifest.outputs = {{"embedding", d_output}};
    Embedding e = load_with_opts(d_embedding, g, &warnings);
    auto cfg = LexiconConfig::from_json_file(d_lexicon);
    auto lex = resolve_lexicon(cfg, e, g.strict);
    ReportOptions ro;
    ro.n_samples = d_nperm;
    ro.strict = g.strict;
    ro.absolute = !d_signed;
    nlohmann::json out_json;

    if (*hard) {
      manifest.subcommand = "debias hard";
      hp.seed = g.seed;
      if (h_plane == "center-only")
        hp.plane = PlaneSelection::center_only;
      else if (h_plane == "center-and-attributes")
        hp.plane = PlaneSelection::center_and_attributes;
      else
        throw ValidationError({"unknown --plane value '" + h_plane + "'"});
      if (!h_neutral_list.empty())
        hp.neutral_words = load_word_list(h_neutral_list);
      manifest.params = {{"angle_threshold", hp.angle_threshold_deg},
                         {"max_iterations", hp.max_iterations},
                         {"radius_ratio_min", hp.radius_ratio_min},
                         {"plane", h_plane},
                         {"n_permutations", d_nperm},
                         {"signed", d_signed},
                         {"strict", g.strict}};
      HardWeatOutcome out = hardweat(e, lex, hp, ro);
      for (const auto& w : out.warnings) warnings.push_back(w);
      save_embedding(out.embedding, d_output, parse_format(g.format));
      out_json["before"] = to_json(out.before);
      out_json["after"] = to_json(out.after);
      out_json["iterations"] = out.iterations;
      out_json["guard_satisfied"] = out.guard_satisfied;
      manifest.params["iterations_used"] = out.iterations;
      std::cout << "before:\n" << report_table(out.before) << "\nafter:\n"
                << report_table(out.after);
      std::cout << "\nequidistancing attempts: " << out.iterations
                << (out.guard_satisfied ? " (guard satisfied)"
                                        : " (guard NOT satisfied)")
                << "\n";
    } else {
      manifest.subcommand = "debias soft";
      sp.seed = g.seed;
      sp.normalize_output = !s_no_normalize;
      if (!s_manual_pairs.empty()) {
        std::ifstream in(s_manual_pairs);
        if (!in) throw IoError("cannot open manual pairs: " + s_manual_pairs);
        nlohmann::json j;
        try {
          in >> j;
        } catch (const nlohmann::json::exception& ex) {
          throw ParseError(std::string("manual pairs: ") + ex.what());
        }
        std::map<std::string, std::vector<std::string>> mp;
        for (auto it = j.begin(); it != j.end(); ++it)
          mp[it.key()] = it.value().get<std::vector<std::string>>();
        sp.manual_pairs = std::move(mp);
      }
      manifest.params = {{"lambda", sp.lambda},
                         {"neighbors_k", sp.neighbors_k},
                         {"max_rank", sp.max_rank},
                         {"selection_threshold", sp.selection_threshold},
                         {"normalize_output", sp.normalize_output},
                         {"sequential", sp.sequential},
                         {"extended_mean", sp.extended_mean},
                         {"n_permutations", d_nperm},
                         {"signed", d_signed},
                         {"strict", g.strict}};
      SoftWeatOutcome out = softweat(e, lex, sp, ro);
      for (const auto& w : out.warnings) warnings.push_back(w);
      save_embedding(out.embedding, d_output, parse_format(g.format));
      out_json["before"] = to_json(out.before);
      out_json["after"] = to_json(out.after);
      out_json["plans"] = nlohmann::json::array();
      for (const auto& p : out.plans) out_json["plans"].push_back(to_json(p));
      std::cout << "before:\n" << report_table(out.before) << "\nafter:\n"
                << report_table(out.after);
    }
    print_warnings(warnings);
    if (!g.json_path.empty()) {
      write_json_file(out_json, g.json_path);
      manifest.outputs["json"] = g.json_path;
    }
    manifest.warnings = warnings;
    finish_manifest(manifest, g, d_output + ".manifest.json");
    return 0;
  }

  if (*eval) {
    manifest.subcommand = "eval";
    if (e_similarity.empty() && e_analogy.empty())
      throw ValidationError(
          {"eval: supply at least one dataset (--similarity or --analogy)"});
    manifest.inputs = {{"embedding", e_embedding},
                       {"similarity", e_similarity},
                       {"analogy", e_analogy}};
    manifest.params = {{"analogy_max_rank", e_analogy_max_rank}};
    Embedding e = load_with_opts(e_embedding, g, &warnings);
    std::vector<EvalRow> rows;
    std::size_t failures = 0;
    for (const auto& path : e_similarity) {
      EvalRow row;
      row.kind = "similarity";
      row.name = std::filesystem::path(path).stem().string();
      try {
        auto ds = SimilarityDataset::load(path);
        auto res = spearman_similarity(e, ds);
        row.score = res.rho * 100.0;
        row.used = res.used;
        row.skipped = res.skipped;
      } catch (const std::exception& ex) {
        row.error = ex.what();
        ++failures;
      }
      rows.push_back(std::move(row));
    }
    if (!e_analogy.empty()) {
      EvalRow row;
      row.kind = "analogy";
      row.name = std::filesystem::path(e_analogy).stem().string();
      try {
        auto ds = AnalogyDataset::load(e_analogy);
        std::optional<std::size_t> mr;
        if (e_analogy_max_rank > 0) mr = e_analogy_max_rank;
        auto res = analogy_accuracy(e, ds, mr);
        row.score = res.accuracy * 100.0;
        row.used = res.used;
        row.skipped = res.skipped;
        row.sections = res.sections;
      } catch (const std::exception& ex) {
        row.error = ex.what();
        ++failures;
      }
      rows.push_back(std::move(row));
    }
    print_warnings(warnings);
    std::cout << eval_table(rows);
    if (!g.json_path.empty()) {
      write_json_file(to_json(rows), g.json_path);
      manifest.outputs["json"] = g.json_path;
    }
    manifest.warnings = warnings;
    finish_manifest(manifest, g, "weatkit-manifest.json");
    return failures == rows.size() && !rows.empty() ? 2 : 0;
  }

  if (*neigh) {
    manifest.subcommand = "neighbors";
    manifest.inputs = {{"embedding", n_embedding}};
    manifest.params = {{"word", n_word}, {"k", n_k}, {"max_rank", n_max_rank}};
    Embedding e = load_with_opts(n_embedding, g, &warnings);
    std::optional<std::size_t> mr;
    if (n_max_rank > 0) mr = n_max_rank;
    auto ns = nearest_neighbors(e, n_word, n_k, mr);
    print_warnings(warnings);
    nlohmann::json jn = nlohmann::json::array();
    for (const auto& nb : ns) {
      std::printf("%s  %.6f\n", nb.word.c_str(), nb.cosine);
      jn.push_back({{"word", nb.word}, {"cosine", nb.cosine}});
    }
    if (!g.json_path.empty()) {
      write_json_file(jn, g.json_path);
      manifest.outputs["json"] = g.json_path;
    }
    manifest.warnings = warnings;
    finish_manifest(manifest, g, "weatkit-manifest.json");
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const weatkit::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CLI::Error&) {
    return 1;  // CLI11 already printed the message via CLI11_PARSE
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
