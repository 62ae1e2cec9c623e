#pragma once

// Distributed tree fragments, distributed trees and the DTK dot product.
//
// A fragment τ is embedded recursively:
//   f(n)          = ñ                          for a terminal n
//   f(τ)          = ñ ∘ f(τ_c1 … τ_ck)         for root n with child subtrees
//   f(τ1 … τk)    = f(τ1) ∘ f(τ2 … τk)         for a sequence (right-nested)
//
// A whole tree is embedded as T̃ = Σ_n s(n) with
//   s(n) = 0                                                  n terminal
//   s(n) = ñ ∘ ((c̃1 + √λ s(c1)) ∘ (… ∘ (c̃m + √λ s(cm))))      otherwise
// using the same right-nested grouping as f, so that T̃ equals the weighted
// sum of f(τ) over all fragments exactly (up to rounding), with weight
// λ^((P−1)/2) for a fragment with P production nodes.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtk/embedding.hpp"
#include "dtk/tree.hpp"
#include "dtk/vector.hpp"

namespace dtk {

inline constexpr double kDefaultLambda = 0.4;
inline constexpr std::size_t kDefaultEnumerationCap = 1000000;

class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProvenanceMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_valid_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("lambda must lie in (0, 1], got " + std::to_string(lambda));
}

enum class WeightConvention {
  recursion,   // ω(τ) = λ^((P−1)/2), P = production nodes; what s(n) computes
  node_count,  // ω(τ) = λ^((|τ|−1)/2), |τ| = all nodes
};

inline std::string_view to_string(WeightConvention w) {
  return w == WeightConvention::recursion ? "recursion" : "node_count";
}

inline WeightConvention parse_weight_convention(std::string_view s) {
  if (s == "recursion") return WeightConvention::recursion;
  if (s == "node_count") return WeightConvention::node_count;
  throw std::invalid_argument("unknown weight convention '" + std::string(s) + "'");
}

struct FragmentWeights {
  WeightConvention convention = WeightConvention::recursion;
  double lambda = kDefaultLambda;

  double weight(const Tree& fragment) const {
    std::size_t exponent_base = fragment.node_count();
    if (convention == WeightConvention::recursion) {
      exponent_base = 0;
      for (NodeId id = 0; id < fragment.node_count(); ++id)
        if (!fragment.is_terminal(id)) ++exponent_base;
    }
    return std::pow(lambda, (static_cast<double>(exponent_base) - 1.0) / 2.0);
  }
};

// Number of production (non-terminal) nodes.
inline std::size_t production_count(const Tree& t) {
  std::size_t p = 0;
  for (NodeId id = 0; id < t.node_count(); ++id)
    if (!t.is_terminal(id)) ++p;
  return p;
}

inline DenseVector dtf(const CompositionSpec& spec, const NodeLexicon& lex, const Tree& fragment) {
  if (lex.dim() != spec.dim()) throw DimensionMismatch(lex.dim(), spec.dim());
  // Reverse preorder visits children before parents.
  std::vector<DenseVector> f(fragment.node_count());
  for (std::size_t i = fragment.node_count(); i-- > 0;) {
    const auto id = static_cast<NodeId>(i);
    const auto& node_vec = lex.vector(fragment.label(id));
    const auto& ch = fragment.children(id);
    if (ch.empty()) {
      f[i] = node_vec;
      continue;
    }
    DenseVector seq = std::move(f[ch.back()]);
    for (std::size_t k = ch.size() - 1; k-- > 0;) seq = compose(spec, f[ch[k]], seq);
    f[i] = compose(spec, node_vec, seq);
    for (NodeId c : ch) DenseVector().swap(f[c]);
  }
  return std::move(f[0]);
}

struct DistributedTree {
  DenseVector vector;
  double lambda = kDefaultLambda;
  std::size_t dim = 0;
  CompositionKind composition_kind = CompositionKind::shuffled_convolution;
  std::uint64_t master_seed = 0;

  bool comparable_with(const DistributedTree& o) const noexcept {
    return lambda == o.lambda && dim == o.dim && composition_kind == o.composition_kind &&
           master_seed == o.master_seed;
  }
};

// Work counters for one distributed_tree call.
struct OperationCounts {
  std::size_t compositions = 0;   // calls to compose
  std::size_t accumulations = 0;  // child terms c̃ + √λ s(c)
};

inline DistributedTree distributed_tree(const CompositionSpec& spec, const NodeLexicon& lex,
                                        const Tree& t, double lambda,
                                        OperationCounts* counts = nullptr) {
  require_valid_lambda(lambda);
  if (lex.dim() != spec.dim()) throw DimensionMismatch(lex.dim(), spec.dim());
  const std::size_t d = spec.dim();
  const double root_lambda = std::sqrt(lambda);
  OperationCounts local;

  DenseVector total(d, 0.0);
  // s[i] is engaged only for non-terminal nodes; released once the parent is done.
  std::vector<std::optional<DenseVector>> s(t.node_count());
  for (std::size_t i = t.node_count(); i-- > 0;) {
    const auto id = static_cast<NodeId>(i);
    const auto& ch = t.children(id);
    if (ch.empty()) continue;

    std::vector<DenseVector> terms;
    terms.reserve(ch.size());
    for (NodeId c : ch) {
      DenseVector term = lex.vector(t.label(c));
      if (s[c]) axpy(root_lambda, *s[c], term);
      ++local.accumulations;
      terms.push_back(std::move(term));
      s[c].reset();
    }
    DenseVector acc = std::move(terms.back());
    for (std::size_t k = terms.size() - 1; k-- > 0;) {
      acc = compose(spec, terms[k], acc);
      ++local.compositions;
    }
    acc = compose(spec, lex.vector(t.label(id)), acc);
    ++local.compositions;
    axpy(1.0, acc, total);
    s[i] = std::move(acc);
  }

  if (counts) *counts = local;
  return DistributedTree{std::move(total), lambda, d, spec.kind(), spec.master_seed()};
}

// R(n): all fragments rooted at n, built as the cross product over children of
// {bare child} ∪ R(child). Terminal nodes have none.
inline std::vector<Tree> enumerate_rooted_fragments(const Tree& t, NodeId n,
                                                    std::size_t cap = kDefaultEnumerationCap) {
  if (n >= t.node_count()) throw std::out_of_range("node id out of range");
  // The subtree rooted at n is the contiguous preorder range [n, end).
  const std::size_t end = t.subtree_end(n);

  std::vector<std::vector<Tree>> rooted(end - n);
  for (std::size_t i = end; i-- > n;) {
    const auto id = static_cast<NodeId>(i);
    const auto& ch = t.children(id);
    if (ch.empty()) continue;

    std::size_t total = 1;
    for (NodeId c : ch) {
      const std::size_t options = rooted[c - n].size() + 1;
      if (total > cap / options) throw EnumerationCapExceeded("fragment enumeration exceeds cap of " +
                                                              std::to_string(cap));
      total *= options;
    }

    const Label root_label(t.label(id));
    std::vector<std::size_t> choice(ch.size(), 0);  // 0 = bare child, k = rooted[c][k−1]
    std::vector<Tree> out;
    out.reserve(total);
    std::vector<Tree> kids(ch.size());
    for (std::size_t combo = 0; combo < total; ++combo) {
      for (std::size_t k = 0; k < ch.size(); ++k) {
        const std::size_t opt = choice[k];
        kids[k] = opt == 0 ? Tree::leaf(Label(t.label(ch[k]))) : rooted[ch[k] - n][opt - 1];
      }
      out.push_back(Tree::node(root_label, kids));
      // Odometer increment, last child fastest.
      for (std::size_t k = ch.size(); k-- > 0;) {
        if (++choice[k] <= rooted[ch[k] - n].size()) break;
        choice[k] = 0;
      }
    }
    rooted[i - n] = std::move(out);
  }
  return std::move(rooted[0]);
}

// All fragments of t, grouped per node in preorder.
inline std::vector<Tree> enumerate_fragments(const Tree& t, std::size_t cap = kDefaultEnumerationCap) {
  std::vector<Tree> all;
  for (NodeId id = 0; id < t.node_count(); ++id) {
    auto r = enumerate_rooted_fragments(t, id, cap);
    if (all.size() + r.size() > cap)
      throw EnumerationCapExceeded("fragment enumeration exceeds cap of " + std::to_string(cap));
    for (auto& f : r) all.push_back(std::move(f));
  }
  return all;
}

// Brute-force Σ_τ ω(τ) f(τ) over every fragment of t.
inline DenseVector distributed_tree_by_enumeration(const CompositionSpec& spec, const NodeLexicon& lex,
                                                   const Tree& t, double lambda,
                                                   WeightConvention convention = WeightConvention::recursion,
                                                   std::size_t cap = kDefaultEnumerationCap) {
  require_valid_lambda(lambda);
  const FragmentWeights weights{convention, lambda};
  DenseVector total(spec.dim(), 0.0);
  for (const Tree& fragment : enumerate_fragments(t, cap))
    axpy(weights.weight(fragment), dtf(spec, lex, fragment), total);
  return total;
}

inline double dtk(const DistributedTree& a, const DistributedTree& b) {
  if (!a.comparable_with(b))
    throw ProvenanceMismatch("distributed trees built with different (lambda, dim, composition, seed)");
  return dot(a.vector, b.vector);
}

inline double dtk_normalized(const DistributedTree& a, const DistributedTree& b) {
  const double aa = dtk(a, a);
  const double bb = dtk(b, b);
  if (aa == 0.0 || bb == 0.0)
    throw std::domain_error("normalized DTK undefined for a zero self-kernel (single-node tree)");
  return dtk(a, b) / std::sqrt(aa * bb);
}

}  // namespace dtk
