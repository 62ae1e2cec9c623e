// Embeds two trees and compares the distributed tree kernel with the exact
// tree kernel.

#include <cstdio>

#include "dtk/dtk.hpp"

int main() {
  const double lambda = 0.4;
  const auto spec = dtk::CompositionSpec::make(dtk::CompositionKind::shuffled_convolution, dtk::kDefaultDim,
                                               dtk::kDefaultSeed);
  const dtk::NodeLexicon lexicon(dtk::kDefaultSeed, dtk::kDefaultDim);

  const auto a = dtk::parse_tree("(S (NP (DT the) (NN dog)) (VP (VBZ barks)))");
  const auto b = dtk::parse_tree("(S (NP (DT the) (NN cat)) (VP (VBZ barks)))");

  // Done once per tree; afterwards every kernel evaluation is a dot product.
  const auto dt_a = dtk::distributed_tree(spec, lexicon, a, lambda);
  const auto dt_b = dtk::distributed_tree(spec, lexicon, b, lambda);

  std::printf("lambda * DTK = %.6f\n", lambda * dtk::dtk(dt_a, dt_b));
  std::printf("exact TK     = %.6f\n", dtk::tk_exact(a, b, lambda));
  std::printf("normalized   = %.6f vs %.6f\n", dtk::dtk_normalized(dt_a, dt_b), dtk::tk_normalized(a, b, lambda));
}
