#pragma once

// Exact tree kernels over the fragment space of whole-production subtrees.
//
//   Δ(n1, n2) = 0                              productions differ (or a leaf)
//   Δ(n1, n2) = λ                              equal productions, preterminals
//   Δ(n1, n2) = λ · Π_j (1 + Δ(ch_j(n1), ch_j(n2)))   otherwise
//   TK(T1, T2) = Σ_{n1, n2} Δ(n1, n2)
//
// Each common fragment with P production nodes contributes λ^P.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dtk/distributed_tree.hpp"
#include "dtk/tree.hpp"

namespace dtk {

namespace detail {

// Assigns each non-terminal node a production id shared across both trees;
// terminals get -1.
class ProductionIds {
 public:
  std::vector<int> assign(const Tree& t) {
    std::vector<int> ids(t.node_count(), -1);
    std::string key;
    for (NodeId id = 0; id < t.node_count(); ++id) {
      if (t.is_terminal(id)) continue;
      key = t.label(id);
      for (NodeId c : t.children(id)) {
        key += '\x1f';
        key += t.label(c);
      }
      auto [it, inserted] = table_.try_emplace(key, static_cast<int>(table_.size()));
      ids[id] = it->second;
    }
    return ids;
  }

 private:
  std::unordered_map<std::string, int> table_;
};

}  // namespace detail

inline double tk_exact(const Tree& t1, const Tree& t2, double lambda) {
  require_valid_lambda(lambda);
  detail::ProductionIds interner;
  const auto p1 = interner.assign(t1);
  const auto p2 = interner.assign(t2);
  const std::size_t n1 = t1.node_count();
  const std::size_t n2 = t2.node_count();

  // Dense Δ table; children have larger preorder indices than parents, so a
  // reverse sweep sees every child pair before its parent pair.
  std::vector<double> delta(n1 * n2, 0.0);
  double sum = 0.0;
  for (std::size_t i = n1; i-- > 0;) {
    if (p1[i] < 0) continue;
    const auto& c1 = t1.children(static_cast<NodeId>(i));
    for (std::size_t j = n2; j-- > 0;) {
      if (p1[i] != p2[j]) continue;
      const auto& c2 = t2.children(static_cast<NodeId>(j));
      double prod = lambda;
      for (std::size_t k = 0; k < c1.size(); ++k) prod *= 1.0 + delta[c1[k] * n2 + c2[k]];
      delta[i * n2 + j] = prod;
      sum += prod;
    }
  }
  return sum;
}

// Matching-pair variant: Δ is evaluated only on node pairs with equal
// productions, found by sorting both node lists by production id.
struct FastKernelStats {
  std::size_t delta_evaluations = 0;
};

inline double tk_fast(const Tree& t1, const Tree& t2, double lambda, FastKernelStats* stats = nullptr) {
  require_valid_lambda(lambda);
  detail::ProductionIds interner;
  const auto p1 = interner.assign(t1);
  const auto p2 = interner.assign(t2);

  auto sorted_nodes = [](const std::vector<int>& ids) {
    std::vector<std::pair<int, NodeId>> v;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] >= 0) v.emplace_back(ids[i], static_cast<NodeId>(i));
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto a = sorted_nodes(p1);
  const auto b = sorted_nodes(p2);

  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (a[i].first > b[j].first) {
      ++j;
    } else {
      const int prod = a[i].first;
      std::size_t j_end = j;
      while (j_end < b.size() && b[j_end].first == prod) ++j_end;
      for (; i < a.size() && a[i].first == prod; ++i)
        for (std::size_t k = j; k < j_end; ++k) pairs.emplace_back(a[i].second, b[k].second);
      j = j_end;
    }
  }
  // Children before parents.
  std::sort(pairs.begin(), pairs.end(), std::greater<>());

  std::unordered_map<std::uint64_t, double> delta;
  delta.reserve(pairs.size() * 2);
  auto key = [](NodeId x, NodeId y) { return (static_cast<std::uint64_t>(x) << 32) | y; };
  double sum = 0.0;
  for (const auto& [x, y] : pairs) {
    const auto& c1 = t1.children(x);
    const auto& c2 = t2.children(y);
    double prod = lambda;
    for (std::size_t k = 0; k < c1.size(); ++k) {
      auto it = delta.find(key(c1[k], c2[k]));
      if (it != delta.end()) prod *= 1.0 + it->second;
    }
    delta.emplace(key(x, y), prod);
    sum += prod;
  }
  if (stats) stats->delta_evaluations = pairs.size();
  return sum;
}

inline double tk_normalized(const Tree& t1, const Tree& t2, double lambda) {
  const double aa = tk_exact(t1, t1, lambda);
  const double bb = tk_exact(t2, t2, lambda);
  if (aa == 0.0 || bb == 0.0)
    throw std::domain_error("normalized TK undefined for a zero self-kernel (single-node tree)");
  return tk_exact(t1, t2, lambda) / std::sqrt(aa * bb);
}

// Explicit feature map: canonical fragment string → ω(τ), summed over repeats.
using FeatureMap = std::map<std::string, double>;

inline FeatureMap feature_map(const Tree& t, const FragmentWeights& weights,
                              std::size_t cap = kDefaultEnumerationCap) {
  FeatureMap fm;
  for (const Tree& fragment : enumerate_fragments(t, cap))
    fm[serialize_tree(fragment)] += weights.weight(fragment);
  return fm;
}

inline double sparse_dot(const FeatureMap& a, const FeatureMap& b) {
  double s = 0.0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      s += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return s;
}

// Dot product in the explicit fragment space. Under the recursion convention a
// matched fragment contributes λ^(P−1), so λ times this value is tk_exact.
inline double tk_by_feature_map(const Tree& t1, const Tree& t2, double lambda,
                                WeightConvention convention = WeightConvention::recursion,
                                std::size_t cap = kDefaultEnumerationCap) {
  require_valid_lambda(lambda);
  const FragmentWeights w{convention, lambda};
  return sparse_dot(feature_map(t1, w, cap), feature_map(t2, w, cap));
}

}  // namespace dtk
