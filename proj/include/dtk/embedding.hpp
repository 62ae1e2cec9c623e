#pragma once

// Node-vector lexicon and the two concrete composition functions:
//   shuffled γ-product      a ⊠ b = γ · p1(a) ⊗ p2(b)
//   shuffled convolution    a ⊡ b = p1(a) ⊛ p2(b)
// with p(a)_i = a[p.mapping[i]].

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dtk/convolution.hpp"
#include "dtk/random.hpp"
#include "dtk/vector.hpp"

namespace dtk {

inline constexpr std::size_t kDefaultDim = 8192;
inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr std::size_t kDefaultGammaSamples = 1000;

// Stream tags mixed into the master seed so the independent uses of
// randomness never share a SplitMix64 stream.
namespace stream_tag {
inline constexpr std::uint64_t label = 0x6c6162656cULL;        // "label"
inline constexpr std::uint64_t permutation = 0x7065726dULL;    // "perm"
inline constexpr std::uint64_t gamma = 0x67616d6d61ULL;        // "gamma"
inline constexpr std::uint64_t experiment = 0x6578707472ULL;   // "exptr"
}  // namespace stream_tag

// Unit vector with N(0,1)-drawn direction from the stream `key`.
inline DenseVector random_unit_vector(std::uint64_t key, std::size_t dim) {
  GaussianStream g(key);
  DenseVector v(dim);
  for (double& x : v) x = g.next();
  const double n = norm(v);
  for (double& x : v) x /= n;
  return v;
}

// Label → unit vector, a pure function of (master_seed, dim, label bytes).
// Safe for concurrent queries; the cache only memoizes.
class NodeLexicon {
 public:
  NodeLexicon(std::uint64_t master_seed, std::size_t dim) : seed_(master_seed), dim_(dim) {
    if (dim == 0) throw std::invalid_argument("lexicon dimension must be >= 1");
  }

  NodeLexicon(const NodeLexicon&) = delete;
  NodeLexicon& operator=(const NodeLexicon&) = delete;

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::size_t dim() const noexcept { return dim_; }

  static std::uint64_t label_key(std::uint64_t master_seed, std::string_view label) {
    return derive_key(derive_key(master_seed, stream_tag::label), fnv1a64(label));
  }

  // The returned reference stays valid for the lexicon's lifetime.
  const DenseVector& vector(std::string_view label) const {
    {
      std::shared_lock lock(mutex_);
      if (auto it = cache_.find(std::string(label)); it != cache_.end()) return *it->second;
    }
    auto v = std::make_unique<const DenseVector>(random_unit_vector(label_key(seed_, label), dim_));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = cache_.try_emplace(std::string(label), std::move(v));
    return *it->second;
  }

  std::size_t cached_count() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::string, std::unique_ptr<const DenseVector>> cache_;
};

inline const DenseVector& node_vector(const NodeLexicon& lex, std::string_view label) {
  return lex.vector(label);
}

class Permutation {
 public:
  explicit Permutation(std::vector<std::uint32_t> mapping) : mapping_(std::move(mapping)) {
    std::vector<bool> seen(mapping_.size(), false);
    for (auto m : mapping_) {
      if (m >= mapping_.size() || seen[m]) throw std::invalid_argument("mapping is not a bijection");
      seen[m] = true;
    }
  }

  static Permutation identity(std::size_t dim) {
    std::vector<std::uint32_t> m(dim);
    for (std::size_t i = 0; i < dim; ++i) m[i] = static_cast<std::uint32_t>(i);
    return Permutation(std::move(m));
  }

  std::size_t size() const noexcept { return mapping_.size(); }
  const std::vector<std::uint32_t>& mapping() const noexcept { return mapping_; }

  void apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t i = 0; i < mapping_.size(); ++i) out[i] = in[mapping_[i]];
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::uint32_t> mapping_;
};

// Seeded Fisher–Yates shuffle.
inline Permutation random_permutation(std::uint64_t master_seed, std::uint64_t stream_id,
                                      std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("permutation dimension must be >= 1");
  SplitMix64 rng(derive_key(derive_key(master_seed, stream_tag::permutation), stream_id));
  std::vector<std::uint32_t> m(dim);
  for (std::size_t i = 0; i < dim; ++i) m[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = dim - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.bounded(i + 1));
    std::swap(m[i], m[j]);
  }
  return Permutation(std::move(m));
}

// The two distinct permutations of a composition spec. Streams start at 1 and
// 2; the second stream is advanced until it differs (only relevant for tiny d).
inline std::pair<Permutation, Permutation> composition_permutations(std::uint64_t master_seed,
                                                                    std::size_t dim) {
  Permutation p1 = random_permutation(master_seed, 1, dim);
  std::uint64_t stream = 2;
  Permutation p2 = random_permutation(master_seed, stream, dim);
  while (dim > 1 && p2 == p1) p2 = random_permutation(master_seed, ++stream, dim);
  return {std::move(p1), std::move(p2)};
}

enum class CompositionKind { shuffled_product, shuffled_convolution };

inline std::string_view to_string(CompositionKind k) {
  return k == CompositionKind::shuffled_product ? "prod" : "conv";
}

inline CompositionKind parse_composition_kind(std::string_view s) {
  if (s == "prod" || s == "shuffled_product") return CompositionKind::shuffled_product;
  if (s == "conv" || s == "shuffled_convolution") return CompositionKind::shuffled_convolution;
  throw std::invalid_argument("unknown composition kind '" + std::string(s) + "'");
}

// Returns 1/μ with μ the sample mean of ‖p1(a) ⊗ p2(b)‖ over `samples`
// independent pairs of random unit vectors.
inline double estimate_gamma(std::size_t dim, std::uint64_t master_seed, std::size_t samples) {
  if (samples == 0) throw std::invalid_argument("estimate_gamma needs at least one sample");
  if (dim == 0) throw std::invalid_argument("dimension must be >= 1");
  const auto [p1, p2] = composition_permutations(master_seed, dim);
  const std::uint64_t base = derive_key(master_seed, stream_tag::gamma);
  DenseVector pa(dim), pb(dim);
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const DenseVector a = random_unit_vector(derive_key(base, 2 * s), dim);
    const DenseVector b = random_unit_vector(derive_key(base, 2 * s + 1), dim);
    p1.apply(a, pa);
    p2.apply(b, pb);
    double sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) sq += (pa[i] * pb[i]) * (pa[i] * pb[i]);
    total += std::sqrt(sq);
  }
  return static_cast<double>(samples) / total;
}

// Immutable after construction.
class CompositionSpec {
 public:
  CompositionSpec(CompositionKind kind, std::size_t dim, Permutation p1, Permutation p2,
                  double gamma, std::uint64_t master_seed)
      : kind_(kind), dim_(dim), p1_(std::move(p1)), p2_(std::move(p2)), gamma_(gamma), seed_(master_seed) {
    if (dim_ == 0) throw std::invalid_argument("dimension must be >= 1");
    if (p1_.size() != dim_ || p2_.size() != dim_)
      throw std::invalid_argument("permutation size does not match dimension");
    if (dim_ > 1 && p1_ == p2_) throw std::invalid_argument("p1 and p2 must differ");
    if (!(gamma_ > 0.0)) throw std::invalid_argument("gamma must be positive");
    method_ = is_power_of_two(dim_) ? ConvolutionMethod::fast : ConvolutionMethod::direct;
  }

  // Seeded spec: permutations from streams 1/2, γ estimated once for ⊠
  // (⊡ ignores γ and keeps 1).
  static CompositionSpec make(CompositionKind kind, std::size_t dim, std::uint64_t master_seed,
                              std::size_t gamma_samples = kDefaultGammaSamples) {
    auto [p1, p2] = composition_permutations(master_seed, dim);
    const double gamma = kind == CompositionKind::shuffled_product
                             ? estimate_gamma(dim, master_seed, gamma_samples)
                             : 1.0;
    return CompositionSpec(kind, dim, std::move(p1), std::move(p2), gamma, master_seed);
  }

  CompositionKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  const Permutation& p1() const noexcept { return p1_; }
  const Permutation& p2() const noexcept { return p2_; }
  double gamma() const noexcept { return gamma_; }
  std::uint64_t master_seed() const noexcept { return seed_; }
  ConvolutionMethod convolution_method() const noexcept { return method_; }
  // True when ⊡ has to use the O(d²) sum because d is not a power of two.
  bool uses_direct_fallback() const noexcept {
    return kind_ == CompositionKind::shuffled_convolution && method_ == ConvolutionMethod::direct &&
           dim_ > 1;
  }

 private:
  CompositionKind kind_;
  std::size_t dim_;
  Permutation p1_;
  Permutation p2_;
  double gamma_;
  std::uint64_t seed_;
  ConvolutionMethod method_;
};

inline DenseVector compose(const CompositionSpec& spec, std::span<const double> a,
                           std::span<const double> b) {
  if (a.size() != spec.dim()) throw DimensionMismatch(a.size(), spec.dim());
  if (b.size() != spec.dim()) throw DimensionMismatch(b.size(), spec.dim());
  const std::size_t d = spec.dim();
  const auto& m1 = spec.p1().mapping();
  const auto& m2 = spec.p2().mapping();
  if (spec.kind() == CompositionKind::shuffled_product) {
    DenseVector out(d);
    const double g = spec.gamma();
    for (std::size_t i = 0; i < d; ++i) out[i] = g * a[m1[i]] * b[m2[i]];
    return out;
  }
  DenseVector pa(d), pb(d);
  spec.p1().apply(a, pa);
  spec.p2().apply(b, pb);
  return circular_convolution(pa, pb, spec.convolution_method());
}

}  // namespace dtk
