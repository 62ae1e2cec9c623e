#pragma once

// Seeded random trees for desk-scale experiments.
//
// Trees have exactly the requested node count (≥ 2). Internal nodes take
// labels N0..N{k−1}, leaves w0..w{m−1}; every leaf sits under a preterminal.
// Branching is at most `max_branching`. Labels are uniform, or Zipfian
// (P(rank r) ∝ r^−s) when `zipf_exponent` s > 0, which makes frequent
// productions recur across trees the way they do in treebanks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtk/random.hpp"
#include "dtk/tree.hpp"

namespace dtk {

struct SyntheticTreeConfig {
  std::size_t min_nodes = 5;
  std::size_t max_nodes = 15;
  std::size_t max_branching = 3;
  std::size_t nonterminal_labels = 50;
  std::size_t terminal_labels = 200;
  double zipf_exponent = 0.0;
  std::uint64_t seed = 42;
};

class SyntheticTreeGenerator {
 public:
  explicit SyntheticTreeGenerator(SyntheticTreeConfig config)
      : config_(config), rng_(derive_key(config.seed, 0x73796e7468ULL)) {
    if (config_.min_nodes < 2 || config_.max_nodes < config_.min_nodes)
      throw std::invalid_argument("synthetic trees need 2 <= min_nodes <= max_nodes");
    if (config_.max_branching == 0 || config_.nonterminal_labels == 0 || config_.terminal_labels == 0)
      throw std::invalid_argument("synthetic tree vocabulary and branching must be positive");
    if (config_.zipf_exponent < 0.0) throw std::invalid_argument("zipf exponent must be >= 0");
    nonterminal_cdf_ = zipf_cdf(config_.nonterminal_labels);
    terminal_cdf_ = zipf_cdf(config_.terminal_labels);
  }

  const SyntheticTreeConfig& config() const noexcept { return config_; }

  Tree next() {
    const std::size_t span = config_.max_nodes - config_.min_nodes + 1;
    return next_with_size(config_.min_nodes + static_cast<std::size_t>(rng_.bounded(span)));
  }

  // A tree of exactly `nodes` nodes.
  Tree next_with_size(std::size_t nodes) {
    if (nodes < 2) throw std::invalid_argument("synthetic trees need at least 2 nodes");
    return build(nodes);
  }

  std::vector<Tree> corpus(std::size_t count) {
    std::vector<Tree> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(next());
    return out;
  }

 private:
  std::vector<double> zipf_cdf(std::size_t n) const {
    std::vector<double> cdf(n);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      total += std::pow(static_cast<double>(r + 1), -config_.zipf_exponent);
      cdf[r] = total;
    }
    for (double& c : cdf) c /= total;
    return cdf;
  }

  std::size_t draw(const std::vector<double>& cdf) {
    if (config_.zipf_exponent == 0.0) return static_cast<std::size_t>(rng_.bounded(cdf.size()));
    const double u = rng_.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
  }

  Label nonterminal() { return Label("N" + std::to_string(draw(nonterminal_cdf_))); }
  Label terminal() { return Label("w" + std::to_string(draw(terminal_cdf_))); }

  // Subtree with `budget` nodes. A budget of 2 is a preterminal; larger
  // budgets split budget − 1 among k children of at least 2 nodes each.
  Tree build(std::size_t budget) {
    if (budget == 2) return Tree::node(nonterminal(), {Tree::leaf(terminal())});
    const std::size_t rest = budget - 1;
    const std::size_t max_k = std::min(config_.max_branching, rest / 2);
    const std::size_t k = 1 + static_cast<std::size_t>(rng_.bounded(max_k));
    // Random composition of `rest` into k parts, each ≥ 2.
    std::vector<std::size_t> parts(k, 2);
    for (std::size_t extra = rest - 2 * k; extra > 0; --extra) ++parts[rng_.bounded(k)];
    const Label label = nonterminal();
    std::vector<Tree> children;
    children.reserve(k);
    for (std::size_t p : parts) children.push_back(build(p));
    return Tree::node(label, children);
  }

  SyntheticTreeConfig config_;
  SplitMix64 rng_;
  std::vector<double> nonterminal_cdf_;
  std::vector<double> terminal_cdf_;
};

}  // namespace dtk
