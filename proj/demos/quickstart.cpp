// Minimal end-to-end tour: load the bundled sample data, audit it, remove
// the bias both ways and print the before/after numbers.
#include <cstdio>
#include <string>

#include "weatkit/weatkit.hpp"

using namespace weatkit;

int main() {
  const std::string data = WEATKIT_DATA_DIR;
  Embedding e = load_embedding(data + "/sample_embedding.txt");
  LexiconConfig cfg =
      LexiconConfig::from_json_file(data + "/sample_lexicon.json");
  ResolvedLexicon lex = resolve_lexicon(cfg, e);

  ReportOptions ro;
  ro.seed = 1;
  BiasReport before = make_report(e, lex.tests, ro);
  std::printf("audit of the sample embedding\n\n%s\n",
              report_table(before).c_str());

  HardWeatParams hp;
  hp.seed = 1;
  HardWeatOutcome hard = hardweat(e, lex, hp, ro);
  std::printf("complete removal: ");
  for (const auto& [cls, v] : hard.after.bias)
    std::printf("%s %.3f -> %.3f  ", cls.c_str(), hard.before.bias.at(cls), v);
  std::printf("\n");

  SoftWeatParams sp;
  sp.lambda = 1.0;
  // the sample vocabulary is tiny, so keep neighborhoods tight and re-plan
  // after each subclass
  sp.neighbors_k = 4;
  sp.sequential = true;
  SoftWeatOutcome soft = softweat(e, lex, sp, ro);
  std::printf("gradual removal (lambda 1, %zu translation plans): ",
              soft.plans.size());
  for (const auto& [cls, v] : soft.after.bias)
    std::printf("%s %.3f -> %.3f  ", cls.c_str(), soft.before.bias.at(cls), v);
  std::printf("\n\nnearest neighbors of \"he\" after gradual removal:\n");
  for (const auto& [word, cos] : nearest_neighbors(soft.embedding, "he", 5))
    std::printf("  %s  %.6f\n", word.c_str(), cos);
  return 0;
}
