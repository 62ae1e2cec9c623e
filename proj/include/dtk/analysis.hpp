#pragma once

// Experiment harness: composition statistics, DTK-vs-TK rank correlation,
// timing curves and gram matrices.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtk/distributed_tree.hpp"
#include "dtk/embedding.hpp"
#include "dtk/random.hpp"
#include "dtk/synthetic.hpp"
#include "dtk/tree.hpp"
#include "dtk/tree_kernel.hpp"
#include "dtk/vector.hpp"

namespace dtk {

using Json = nlohmann::ordered_json;

// Rounds to 10 significant digits, the precision of every reported number.
inline double round_sig10(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return std::strtod(buf, nullptr);
}

inline std::string format_sig10(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Reports

struct SeriesPoint {
  double x = 0.0;
  double value = 0.0;
  std::size_t samples = 0;
};

struct Series {
  std::string name;
  std::vector<SeriesPoint> points;
  bool timing = false;  // wall-clock data, excluded from reproducibility checks
};

struct ExperimentReport {
  std::string id;
  Json config = Json::object();
  std::deque<Series> series;  // deque: add_series references stay valid
  std::map<std::string, double> summary;

  const Series& find(const std::string& name) const {
    for (const auto& s : series)
      if (s.name == name) return s;
    throw std::out_of_range("no series '" + name + "' in report " + id);
  }

  Series& add_series(std::string name, bool timing = false) {
    series.push_back(Series{std::move(name), {}, timing});
    return series.back();
  }

  Json to_json(bool include_timing = true) const {
    Json j;
    j["experiment"] = id;
    j["config"] = config;
    Json arr = Json::array();
    for (const auto& s : series) {
      if (s.timing && !include_timing) continue;
      Json pts = Json::array();
      for (const auto& p : s.points)
        pts.push_back({{"x", round_sig10(p.x)}, {"value", round_sig10(p.value)}, {"samples", p.samples}});
      arr.push_back({{"name", s.name}, {"timing", s.timing}, {"points", std::move(pts)}});
    }
    j["series"] = std::move(arr);
    Json sum = Json::object();
    for (const auto& [k, v] : summary) sum[k] = round_sig10(v);
    j["summary"] = std::move(sum);
    return j;
  }

  // One row per data point.
  std::string to_csv() const {
    std::ostringstream out;
    out << "experiment,series,x,value,samples\n";
    for (const auto& s : series)
      for (const auto& p : s.points)
        out << id << ',' << s.name << ',' << format_sig10(p.x) << ',' << format_sig10(p.value) << ','
            << p.samples << '\n';
    return out.str();
  }
};

// ---------------------------------------------------------------------------
// Statistics

namespace detail {
// 1-based ranks, ties get the average of the ranks they span.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}
}  // namespace detail

class DegenerateRanks : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Spearman's ρ: Pearson correlation of average ranks.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("spearman: need at least 2 observations");
  const auto rx = detail::average_ranks(xs);
  const auto ry = detail::average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double a = rx[i] - mean;
    const double b = ry[i] - mean;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateRanks("spearman: constant sequence has undefined ranks");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population variance.
inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

// Linear interpolation between closest ranks, q in [0, 1].
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

// ---------------------------------------------------------------------------
// Composition statistics

inline Json composition_config(const CompositionSpec& spec) {
  return Json{{"dim", spec.dim()},
              {"composition", std::string(to_string(spec.kind()))},
              {"gamma", round_sig10(spec.gamma())},
              {"seed", spec.master_seed()}};
}

namespace detail {
// Unit vector i of sample s; depends only on (seed, s, i), so both
// composition kinds see the same vectors.
inline DenseVector experiment_vector(std::uint64_t seed, std::size_t sample, std::size_t index,
                                     std::size_t dim) {
  const std::uint64_t base = derive_key(seed, stream_tag::experiment);
  return random_unit_vector(derive_key(derive_key(base, sample), index), dim);
}
}  // namespace detail

// Mean and variance of ‖v1 ∘ v2 ∘ … ∘ vk‖ (left fold) for k = 2..max_k.
inline ExperimentReport norm_drift_experiment(std::size_t max_k, std::size_t samples,
                                              const CompositionSpec& spec) {
  if (max_k < 2) throw std::invalid_argument("norm drift needs max_k >= 2");
  if (samples == 0) throw std::invalid_argument("norm drift needs samples >= 1");
  const std::size_t d = spec.dim();
  std::vector<std::vector<double>> norms(max_k + 1);
  for (std::size_t s = 0; s < samples; ++s) {
    DenseVector acc = detail::experiment_vector(spec.master_seed(), s, 0, d);
    for (std::size_t k = 2; k <= max_k; ++k) {
      acc = compose(spec, acc, detail::experiment_vector(spec.master_seed(), s, k - 1, d));
      norms[k].push_back(norm(acc));
    }
  }
  ExperimentReport r;
  r.id = "norm_drift";
  r.config = composition_config(spec);
  r.config["max_k"] = max_k;
  r.config["samples"] = samples;
  auto& m = r.add_series("mean_norm");
  auto& v = r.add_series("norm_variance");
  double worst = 0.0;
  for (std::size_t k = 2; k <= max_k; ++k) {
    const double mk = mean(norms[k]);
    m.points.push_back({static_cast<double>(k), mk, samples});
    v.points.push_back({static_cast<double>(k), variance(norms[k]), samples});
    worst = std::max(worst, std::abs(mk - 1.0));
  }
  r.summary["max_abs_mean_deviation"] = worst;
  return r;
}

// (i) a vs a composition t of k other vectors: mean |a·t|, k = 1..max_k.
// (ii) a∘t vs b∘t with a shared t of k vectors: mean, variance and mean
//      absolute value of the dot, k = 0..max_k (k = 0 compares a and b).
inline ExperimentReport orthogonality_experiment(std::size_t max_k, std::size_t samples,
                                                 const CompositionSpec& spec) {
  if (max_k < 1) throw std::invalid_argument("orthogonality needs max_k >= 1");
  if (samples == 0) throw std::invalid_argument("orthogonality needs samples >= 1");
  const std::size_t d = spec.dim();
  const std::uint64_t seed = spec.master_seed();
  std::vector<std::vector<double>> single(max_k + 1), shared(max_k + 1);
  for (std::size_t s = 0; s < samples; ++s) {
    const DenseVector a = detail::experiment_vector(seed, s, 0, d);
    const DenseVector b = detail::experiment_vector(seed, s, 1, d);
    shared[0].push_back(dot(a, b));
    DenseVector t = detail::experiment_vector(seed, s, 2, d);
    for (std::size_t k = 1; k <= max_k; ++k) {
      if (k > 1) t = compose(spec, t, detail::experiment_vector(seed, s, k + 1, d));
      single[k].push_back(std::abs(dot(a, t)));
      shared[k].push_back(dot(compose(spec, a, t), compose(spec, b, t)));
    }
  }
  ExperimentReport r;
  r.id = "orthogonality";
  r.config = composition_config(spec);
  r.config["max_k"] = max_k;
  r.config["samples"] = samples;
  auto& si = r.add_series("single_vs_composition_mean_abs_dot");
  auto& sm = r.add_series("shared_mean_dot");
  auto& sv = r.add_series("shared_dot_variance");
  auto& sa = r.add_series("shared_mean_abs_dot");
  double worst_single = 0.0;
  for (std::size_t k = 0; k <= max_k; ++k) {
    if (k >= 1) {
      const double m = mean(single[k]);
      si.points.push_back({static_cast<double>(k), m, samples});
      worst_single = std::max(worst_single, m);
    }
    std::vector<double> abs_dots(shared[k].size());
    std::transform(shared[k].begin(), shared[k].end(), abs_dots.begin(), [](double x) { return std::abs(x); });
    sm.points.push_back({static_cast<double>(k), mean(shared[k]), samples});
    sv.points.push_back({static_cast<double>(k), variance(shared[k]), samples});
    sa.points.push_back({static_cast<double>(k), mean(abs_dots), samples});
  }
  r.summary["max_single_mean_abs_dot"] = worst_single;
  return r;
}

// ---------------------------------------------------------------------------
// DTK vs TK correlation

using TreePair = std::pair<Tree, Tree>;

inline constexpr std::size_t kMaxCorrelationPairs = 500;

// All pairs i < j when there are at most `max_pairs`, otherwise a seeded
// uniform sample of `max_pairs` distinct pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> corpus_pairs(std::size_t n, std::uint64_t seed,
                                                                     std::size_t max_pairs = kMaxCorrelationPairs) {
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(i, j);
  if (all.size() <= max_pairs) return all;
  SplitMix64 rng(derive_key(seed, 0x7061697273ULL));
  // Partial Fisher–Yates, then restore a stable order.
  for (std::size_t i = 0; i < max_pairs; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.bounded(all.size() - i));
    std::swap(all[i], all[j]);
  }
  all.resize(max_pairs);
  std::sort(all.begin(), all.end());
  return all;
}

struct CorrelationConfig {
  std::vector<double> lambdas{0.2, 0.4, 0.6, 0.8, 1.0};
  CompositionKind kind = CompositionKind::shuffled_convolution;
  std::size_t dim = kDefaultDim;
  std::uint64_t seed = kDefaultSeed;
  std::size_t gamma_samples = kDefaultGammaSamples;
};

// Spearman ρ between DTK and exact TK over the given tree pairs, per λ. A λ
// whose TK or DTK values are all equal has undefined ranks and is omitted.
inline ExperimentReport correlation_experiment(const std::vector<TreePair>& pairs, const CorrelationConfig& cfg) {
  if (pairs.size() < 2) throw std::invalid_argument("correlation experiment needs at least 2 tree pairs");
  const CompositionSpec spec = CompositionSpec::make(cfg.kind, cfg.dim, cfg.seed, cfg.gamma_samples);
  const NodeLexicon lex(cfg.seed, cfg.dim);

  ExperimentReport r;
  r.id = "correlation";
  r.config = composition_config(spec);
  r.config["pairs"] = pairs.size();
  r.config["lambdas"] = cfg.lambdas;
  auto& rho = r.add_series("spearman");
  double omitted = 0.0;
  for (double lambda : cfg.lambdas) {
    std::vector<double> tk, dk;
    tk.reserve(pairs.size());
    dk.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
      tk.push_back(tk_exact(a, b, lambda));
      dk.push_back(dtk(distributed_tree(spec, lex, a, lambda), distributed_tree(spec, lex, b, lambda)));
    }
    try {
      rho.points.push_back({lambda, spearman(dk, tk), pairs.size()});
    } catch (const DegenerateRanks&) {
      omitted += 1.0;
    }
  }
  r.summary["omitted_lambdas"] = omitted;
  return r;
}

inline ExperimentReport correlation_experiment(const std::vector<Tree>& corpus, const CorrelationConfig& cfg) {
  if (corpus.size() < 2) throw std::invalid_argument("correlation experiment needs a corpus of at least 2 trees");
  std::vector<TreePair> pairs;
  for (auto [i, j] : corpus_pairs(corpus.size(), cfg.seed)) pairs.emplace_back(corpus[i], corpus[j]);
  return correlation_experiment(pairs, cfg);
}

// ---------------------------------------------------------------------------
// Timing

struct TimingBin {
  std::size_t total_nodes = 0;  // node count of both trees together
  std::vector<TreePair> pairs;
};

struct TimingOptions {
  std::size_t warmup = 5;
  std::size_t repetitions = 30;
  std::size_t dot_batch = 200;  // dtk evaluations per timed repetition and pair
};

// Synthetic bins: each pair is two trees of total_nodes / 2 nodes.
inline std::vector<TimingBin> synthetic_timing_bins(const std::vector<std::size_t>& totals, std::size_t pairs_per_bin,
                                                    SyntheticTreeConfig cfg) {
  SyntheticTreeGenerator gen(cfg);
  std::vector<TimingBin> bins;
  for (std::size_t total : totals) {
    TimingBin bin{total, {}};
    const std::size_t half = std::max<std::size_t>(2, total / 2);
    for (std::size_t p = 0; p < pairs_per_bin; ++p)
      bin.pairs.emplace_back(gen.next_with_size(half), gen.next_with_size(total - half < 2 ? 2 : total - half));
    bins.push_back(std::move(bin));
  }
  return bins;
}

// Median seconds per evaluation of (a) dtk on precomputed DTs, (b) building
// the DTs of a pair, (c) tk_fast and (d) tk_exact, per bin. Single-threaded.
inline ExperimentReport timing_benchmark(const std::vector<TimingBin>& bins, const CompositionSpec& spec,
                                         const NodeLexicon& lex, double lambda, const TimingOptions& opt = {}) {
  if (bins.empty()) throw std::invalid_argument("timing benchmark needs a non-empty corpus");
  for (const auto& b : bins)
    if (b.pairs.empty()) throw std::invalid_argument("timing benchmark bin without pairs");
  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;

  auto measure = [&](auto&& body, std::size_t evaluations) {
    for (std::size_t w = 0; w < opt.warmup; ++w) body();
    std::vector<double> per_eval;
    per_eval.reserve(opt.repetitions);
    for (std::size_t rep = 0; rep < opt.repetitions; ++rep) {
      const auto t0 = clock::now();
      body();
      const std::chrono::duration<double> dt = clock::now() - t0;
      per_eval.push_back(dt.count() / static_cast<double>(evaluations));
    }
    return median(per_eval);
  };

  ExperimentReport r;
  r.id = "timing";
  r.config = composition_config(spec);
  r.config["lambda"] = lambda;
  r.config["warmup"] = opt.warmup;
  r.config["repetitions"] = opt.repetitions;
  r.config["dot_batch"] = opt.dot_batch;
  auto& s_dtk = r.add_series("dtk_seconds", true);
  auto& s_build = r.add_series("dt_construction_seconds", true);
  auto& s_fast = r.add_series("tk_fast_seconds", true);
  auto& s_exact = r.add_series("tk_exact_seconds", true);
  auto& s_count = r.add_series("pairs_per_bin");

  for (const auto& bin : bins) {
    const double x = static_cast<double>(bin.total_nodes);
    const std::size_t n = bin.pairs.size();
    std::vector<std::pair<DistributedTree, DistributedTree>> dts;
    for (const auto& [a, b] : bin.pairs)
      dts.emplace_back(distributed_tree(spec, lex, a, lambda), distributed_tree(spec, lex, b, lambda));

    s_dtk.points.push_back({x, measure([&] {
                              double acc = 0.0;
                              for (std::size_t k = 0; k < opt.dot_batch; ++k)
                                for (const auto& [a, b] : dts) acc += dtk(a, b);
                              sink = sink + acc;
                            }, n * opt.dot_batch), n});
    s_build.points.push_back({x, measure([&] {
                                double acc = 0.0;
                                for (const auto& [a, b] : bin.pairs) {
                                  acc += distributed_tree(spec, lex, a, lambda).vector[0];
                                  acc += distributed_tree(spec, lex, b, lambda).vector[0];
                                }
                                sink = sink + acc;
                              }, n), n});
    s_fast.points.push_back({x, measure([&] {
                               double acc = 0.0;
                               for (const auto& [a, b] : bin.pairs) acc += tk_fast(a, b, lambda);
                               sink = sink + acc;
                             }, n), n});
    s_exact.points.push_back({x, measure([&] {
                                double acc = 0.0;
                                for (const auto& [a, b] : bin.pairs) acc += tk_exact(a, b, lambda);
                                sink = sink + acc;
                              }, n), n});
    s_count.points.push_back({x, static_cast<double>(n), n});
  }
  (void)sink;
  return r;
}

// ---------------------------------------------------------------------------
// Gram matrices

enum class GramKernel { dtk, tk, dtk_normalized, tk_normalized };

inline std::string_view to_string(GramKernel k) {
  switch (k) {
    case GramKernel::dtk: return "dtk";
    case GramKernel::tk: return "tk";
    case GramKernel::dtk_normalized: return "dtk_normalized";
    case GramKernel::tk_normalized: return "tk_normalized";
  }
  return "";
}

inline GramKernel parse_gram_kernel(std::string_view s) {
  if (s == "dtk") return GramKernel::dtk;
  if (s == "tk") return GramKernel::tk;
  if (s == "dtk_normalized") return GramKernel::dtk_normalized;
  if (s == "tk_normalized") return GramKernel::tk_normalized;
  throw std::invalid_argument("unknown gram kernel '" + std::string(s) + "'");
}

struct GramMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // row-major n × n
  std::vector<std::string> ids;
  Json config = Json::object();

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) t += at(i, i);
    return t;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "id";
    for (const auto& id : ids) out << ',' << id;
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      out << ids[i];
      for (std::size_t j = 0; j < n; ++j) out << ',' << format_sig10(at(i, j));
      out << '\n';
    }
    return out.str();
  }
};

// `ids` defaults to the 0-based corpus index. With cd_compatible the DTK
// kernels are multiplied by λ to sit on the exact kernel's scale.
inline GramMatrix gram_matrix(const std::vector<Tree>& corpus, GramKernel kernel, const CompositionSpec& spec,
                              const NodeLexicon& lex, double lambda, bool cd_compatible = false,
                              std::vector<std::string> ids = {}) {
  if (corpus.empty()) throw std::invalid_argument("gram matrix needs a non-empty corpus");
  require_valid_lambda(lambda);
  const std::size_t n = corpus.size();
  GramMatrix g;
  g.n = n;
  g.values.assign(n * n, 0.0);
  if (ids.empty())
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  if (ids.size() != n) throw std::invalid_argument("gram matrix ids do not match corpus size");
  g.ids = std::move(ids);
  g.config = composition_config(spec);
  g.config["kernel"] = std::string(to_string(kernel));
  g.config["lambda"] = lambda;
  g.config["cd_compatible"] = cd_compatible;

  if (kernel == GramKernel::dtk || kernel == GramKernel::dtk_normalized) {
    std::vector<DistributedTree> dts;
    dts.reserve(n);
    for (const auto& t : corpus) dts.push_back(distributed_tree(spec, lex, t, lambda));
    const double scale = cd_compatible && kernel == GramKernel::dtk ? lambda : 1.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double v = kernel == GramKernel::dtk ? scale * dtk(dts[i], dts[j]) : dtk_normalized(dts[i], dts[j]);
        g.values[i * n + j] = g.values[j * n + i] = v;
      }
  } else {
    std::vector<double> self(n);
    for (std::size_t i = 0; i < n; ++i) self[i] = tk_exact(corpus[i], corpus[i], lambda);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double v = i == j ? self[i] : tk_exact(corpus[i], corpus[j], lambda);
        if (kernel == GramKernel::tk_normalized) {
          if (self[i] == 0.0 || self[j] == 0.0)
            throw std::domain_error("normalized TK undefined for a zero self-kernel (single-node tree)");
          v /= std::sqrt(self[i] * self[j]);
        }
        g.values[i * n + j] = g.values[j * n + i] = v;
      }
  }
  return g;
}

inline double min_eigenvalue(const GramMatrix& g) {
  Eigen::MatrixXd m(g.n, g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) m(i, j) = g.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
  return solver.eigenvalues().minCoeff();
}

}  // namespace dtk
