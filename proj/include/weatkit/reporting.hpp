// reporting.hpp : tables, JSON documents and run manifests
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qualeval.hpp"
#include "softweat.hpp"
#include "weat.hpp"

namespace weatkit {

inline constexpr const char* kToolName = "weatkit";
inline constexpr const char* kToolVersion = "0.1.0";

namespace detail {

inline std::string fixed(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

inline void pad(std::string& s, std::size_t width) {
  while (s.size() < width) s.push_back(' ');
}

}  // namespace detail

inline nlohmann::json to_json(const WeatResult& r) {
  nlohmann::json j;
  j["s"] = r.s;
  if (r.d)
    j["d"] = *r.d;
  else
    j["d"] = nullptr;
  j["p"] = r.p;
  j["exact"] = r.exact;
  j["n_permutations"] = r.n_permutations;
  return j;
}

inline nlohmann::json to_json(const BiasReport& rep) {
  nlohmann::json j;
  j["per_test"] = nlohmann::json::array();
  for (const auto& run : rep.runs) {
    nlohmann::json row = to_json(run.result);
    row["class"] = run.test.class_name;
    row["x"] = run.test.x.name;
    row["y"] = run.test.y.name;
    row["a"] = run.test.a.name;
    row["b"] = run.test.b.name;
    j["per_test"].push_back(std::move(row));
  }
  j["bias_levels"] = nlohmann::json::object();
  for (const auto& [cls, v] : rep.bias) j["bias_levels"][cls] = v;
  j["warnings"] = rep.warnings;
  return j;
}

inline std::string report_table(const BiasReport& rep) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"class", "x", "y", "a", "b", "s", "d", "p", "exact"});
  for (const auto& run : rep.runs) {
    rows.push_back({run.test.class_name, run.test.x.name, run.test.y.name,
                    run.test.a.name, run.test.b.name,
                    detail::fixed(run.result.s),
                    run.result.d ? detail::fixed(*run.result.d) : "n/a",
                    detail::fixed(run.result.p),
                    run.result.exact ? "yes" : "no"});
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c)
      width[c] = std::max(width[c], r[c].size());
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      std::string cell = r[c];
      if (c + 1 < r.size()) detail::pad(cell, width[c] + 2);
      line += cell;
    }
    out += line;
    out += '\n';
  }
  out += "\nbias levels:\n";
  for (const auto& [cls, v] : rep.bias)
    out += "  " + cls + "  " + detail::fixed(v) + "\n";
  return out;
}

inline nlohmann::json to_json(const TranslationPlan& p) {
  nlohmann::json j;
  j["class"] = p.class_name;
  j["subclass"] = p.subclass;
  j["lambda"] = p.lambda;
  j["extended_words"] = p.extended;
  j["attribute_sets"] = p.attribute_names;
  j["null_vector"] = std::vector<double>(
      p.null_vector.data(), p.null_vector.data() + p.null_vector.size());
  j["mean"] =
      std::vector<double>(p.mean.data(), p.mean.data() + p.mean.size());
  j["psi"] = std::vector<double>(p.psi.data(), p.psi.data() + p.psi.size());
  return j;
}

struct EvalRow {
  std::string name;
  std::string kind;  // "similarity" | "analogy"
  double score = 0.0;  // displayed x100
  std::size_t used = 0;
  std::size_t skipped = 0;
  std::vector<SectionAccuracy> sections;
  std::string error;  // non-empty when the dataset failed
};

inline nlohmann::json to_json(const std::vector<EvalRow>& rows) {
  nlohmann::json j;
  j["results"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    row["name"] = r.name;
    row["kind"] = r.kind;
    if (r.error.empty()) {
      row["score"] = r.score;
      row["used"] = r.used;
      row["skipped"] = r.skipped;
      if (!r.sections.empty()) {
        row["sections"] = nlohmann::json::array();
        for (const auto& s : r.sections) {
          nlohmann::json sj;
          sj["name"] = s.name;
          sj["accuracy"] = s.accuracy * 100.0;
          sj["used"] = s.used;
          sj["skipped"] = s.skipped;
          row["sections"].push_back(std::move(sj));
        }
      }
    } else {
      row["error"] = r.error;
    }
    j["results"].push_back(std::move(row));
  }
  return j;
}

inline std::string eval_table(const std::vector<EvalRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"dataset", "kind", "score", "used", "skipped"});
  for (const auto& r : rows) {
    if (r.error.empty())
      cells.push_back({r.name, r.kind, detail::fixed(r.score, 1),
                       std::to_string(r.used), std::to_string(r.skipped)});
    else
      cells.push_back({r.name, r.kind, "error: " + r.error, "-", "-"});
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& r : cells)
    for (std::size_t c = 0; c < r.size(); ++c)
      width[c] = std::max(width[c], r[c].size());
  std::string out;
  for (const auto& r : cells) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      std::string cell = r[c];
      if (c + 1 < r.size()) detail::pad(cell, width[c] + 2);
      line += cell;
    }
    out += line;
    out += '\n';
  }
  return out;
}

struct RunManifest {
  std::string command_line;
  std::string subcommand;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string started_at, finished_at;
  Warnings warnings;
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command_line"] = m.command_line;
  j["subcommand"] = m.subcommand;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["params"] = m.params;
  j["seed"] = m.seed;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["warnings"] = m.warnings;
  return j;
}

inline void write_json_file(const nlohmann::json& j,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace weatkit
