#pragma once

// Command-line front end. `run` is the whole program minus process setup so
// tests can drive it in-process.
//
// Exit codes: 0 success, 1 input error, 2 configuration error,
// 3 internal guard (fragment enumeration cap).

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dtk/dtk.hpp"

namespace dtk::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kConfigError = 2, kGuardError = 3 };

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  RunConfig config;
  std::string composition = "conv";
  std::string weights = "recursion";
  std::string output;
  std::string format = "csv";

  // Subcommand arguments.
  std::string input;
  std::string tree1, tree2;
  std::string method = "dtk";
  std::string kernel = "dtk";
  std::string lambdas = "0.2,0.4,0.6,0.8,1.0";
  std::size_t pairs = 200;
  std::size_t max_nodes = 15;
  double zipf = 2.0;
  std::size_t max_k = 20;
  std::size_t samples = 1000;
  std::string bins = "20,40,100,200,400";
  std::size_t pairs_per_bin = 3;
  std::size_t repetitions = 30;
  std::vector<std::string> labels;
  std::string verify;
};

namespace detail {

inline void add_config_flags(CLI::App* app, Options& o) {
  app->add_option("--dim", o.config.dim, "Vector dimension d (power of two enables FFT convolution)")
      ->capture_default_str();
  app->add_option("--lambda", o.config.lambda, "Decay factor lambda in (0, 1]")->capture_default_str();
  app->add_option("--composition", o.composition, "Composition function: conv (shuffled circular convolution) or prod (shuffled gamma-product)")
      ->capture_default_str();
  app->add_option("--seed", o.config.seed, "Master seed for node vectors, permutations and gamma")
      ->capture_default_str();
  app->add_option("--weights", o.weights, "Fragment weight convention for the oracle: recursion or node_count")
      ->capture_default_str();
  app->add_flag("--cd-compatible", o.config.cd_compatible, "Multiply DTK by lambda to match the exact tree kernel's scale");
}

inline void add_output_flags(CLI::App* app, Options& o, bool required = true) {
  auto* opt = app->add_option("-o,--output", o.output, "Output file");
  if (required) opt->required();
  app->add_option("--format", o.format, "Output format: csv or json")->capture_default_str();
}

inline void resolve(Options& o) {
  try {
    o.config.composition = parse_composition_kind(o.composition);
    o.config.weights = parse_weight_convention(o.weights);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  o.config.validate();
  if (o.format != "csv" && o.format != "json") throw ConfigError("--format must be csv or json");
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number in list: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  return read_corpus(in);
}

inline Corpus load_valid_corpus(const std::string& path) {
  Corpus c = load_corpus(path);
  if (!c.errors.empty())
    throw InputError(path + ":" + std::to_string(c.errors.front().line_number) + ": " + c.errors.front().message);
  return c;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
}

inline void write_sidecar(const Options& o, const std::string& command, Json extra = Json::object()) {
  Json j;
  j["command"] = command;
  j["config"] = o.config.to_json();
  for (auto& [k, v] : extra.items()) j[k] = v;
  write_file(o.output + ".config.json", j.dump(2) + "\n");
}

inline CompositionSpec make_spec(const Options& o, std::ostream& err) {
  CompositionSpec spec = o.config.composition_spec();
  if (spec.uses_direct_fallback())
    err << "warning: direct convolution fallback (dim " << o.config.dim
        << " is not a power of two; O(d^2) per composition)\n";
  return spec;
}

}  // namespace detail

inline int cmd_parse(const Options& o, std::ostream& out, std::ostream& err) {
  const Corpus c = detail::load_corpus(o.input);
  for (const auto& e : c.errors) err << o.input << ":" << e.line_number << ": " << e.message << "\n";
  out << c.trees.size() << " trees, " << c.errors.size() << " errors\n";
  return c.errors.empty() ? kOk : kInputError;
}

inline int cmd_dt(const Options& o, std::ostream& out, std::ostream& err) {
  const Corpus c = detail::load_valid_corpus(o.input);
  const CompositionSpec spec = detail::make_spec(o, err);
  const NodeLexicon lex(o.config.seed, o.config.dim);
  std::vector<DistributedTree> dts;
  dts.reserve(c.trees.size());
  for (const auto& t : c.trees) dts.push_back(distributed_tree(spec, lex, t, o.config.lambda));
  std::ostringstream buf;
  write_dt_file(buf, o.config, dts);
  detail::write_file(o.output, buf.str());
  detail::write_sidecar(o, "dt", {{"input", o.input}, {"trees", dts.size()}});
  out << dts.size() << " distributed trees written to " << o.output << "\n";
  return kOk;
}

inline int cmd_kernel(const Options& o, std::ostream& out, std::ostream& err) {
  Tree a, b;
  try {
    a = parse_tree(o.tree1);
    b = parse_tree(o.tree2);
  } catch (const ParseError& e) {
    throw InputError(std::string("tree: ") + e.what());
  }
  const double lambda = o.config.lambda;
  double value = 0.0;
  if (o.method == "dtk") {
    const CompositionSpec spec = detail::make_spec(o, err);
    const NodeLexicon lex(o.config.seed, o.config.dim);
    value = dtk(distributed_tree(spec, lex, a, lambda), distributed_tree(spec, lex, b, lambda));
    if (o.config.cd_compatible) value *= lambda;
  } else if (o.method == "tk") {
    value = tk_exact(a, b, lambda);
  } else if (o.method == "tk-fast") {
    value = tk_fast(a, b, lambda);
  } else if (o.method == "oracle") {
    value = tk_by_feature_map(a, b, lambda, o.config.weights);
    if (o.config.cd_compatible) value *= lambda;
  } else {
    throw ConfigError("--method must be dtk, tk, tk-fast or oracle");
  }
  out << format_sig10(value) << "\n";
  return kOk;
}

inline int cmd_gram(const Options& o, std::ostream& out, std::ostream& err) {
  const Corpus c = detail::load_valid_corpus(o.input);
  GramKernel kernel;
  try {
    kernel = parse_gram_kernel(o.kernel);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const CompositionSpec spec = detail::make_spec(o, err);
  const NodeLexicon lex(o.config.seed, o.config.dim);
  std::vector<std::string> ids;
  for (auto n : c.line_numbers) ids.push_back("line" + std::to_string(n));
  const GramMatrix g = gram_matrix(c.trees, kernel, spec, lex, o.config.lambda, o.config.cd_compatible, ids);
  if (o.format == "csv") {
    detail::write_file(o.output, g.to_csv());
  } else {
    Json j;
    j["config"] = g.config;
    j["ids"] = g.ids;
    Json rows = Json::array();
    for (std::size_t i = 0; i < g.n; ++i) {
      Json row = Json::array();
      for (std::size_t k = 0; k < g.n; ++k) row.push_back(round_sig10(g.at(i, k)));
      rows.push_back(std::move(row));
    }
    j["matrix"] = std::move(rows);
    detail::write_file(o.output, j.dump(2) + "\n");
  }
  detail::write_sidecar(o, "gram", {{"input", o.input}, {"kernel", o.kernel}});
  out << g.n << "x" << g.n << " gram matrix written to " << o.output << "\n";
  return kOk;
}

inline void write_reports(const Options& o, const std::vector<const ExperimentReport*>& reports) {
  if (o.format == "csv") {
    std::string csv;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      std::string part = reports[i]->to_csv();
      if (i > 0) part.erase(0, part.find('\n') + 1);  // single header row
      csv += part;
    }
    detail::write_file(o.output, csv);
  } else {
    Json arr = Json::array();
    for (const auto* r : reports) arr.push_back(r->to_json());
    detail::write_file(o.output, Json{{"reports", arr}}.dump(2) + "\n");
  }
}

inline int cmd_correlate(const Options& o, std::ostream& out, std::ostream& err) {
  CorrelationConfig cfg;
  cfg.lambdas = detail::parse_list(o.lambdas);
  for (double l : cfg.lambdas)
    if (!(l > 0.0 && l <= 1.0)) throw ConfigError("every lambda must lie in (0, 1]");
  cfg.kind = o.config.composition;
  cfg.dim = o.config.dim;
  cfg.seed = o.config.seed;
  cfg.gamma_samples = o.config.gamma_samples;
  (void)detail::make_spec(o, err);

  ExperimentReport r;
  Json extra;
  if (!o.input.empty()) {
    const Corpus c = detail::load_valid_corpus(o.input);
    r = correlation_experiment(c.trees, cfg);
    extra["input"] = o.input;
  } else {
    SyntheticTreeConfig sc;
    sc.min_nodes = 3;
    sc.max_nodes = o.max_nodes;
    sc.zipf_exponent = o.zipf;
    sc.seed = o.config.seed;
    if (sc.max_nodes < sc.min_nodes) throw ConfigError("--max-nodes must be >= 3");
    SyntheticTreeGenerator gen(sc);
    std::vector<TreePair> pairs;
    for (std::size_t i = 0; i < o.pairs; ++i) {
      Tree a = gen.next();
      pairs.emplace_back(std::move(a), gen.next());
    }
    r = correlation_experiment(pairs, cfg);
    r.config["generator"] = {{"min_nodes", sc.min_nodes}, {"max_nodes", sc.max_nodes},
                             {"nonterminal_labels", sc.nonterminal_labels},
                             {"terminal_labels", sc.terminal_labels}, {"zipf_exponent", sc.zipf_exponent}};
    extra["generator"] = r.config["generator"];
  }
  write_reports(o, {&r});
  detail::write_sidecar(o, "correlate", extra);
  out << "lambda,spearman\n";
  for (const auto& p : r.find("spearman").points) out << format_sig10(p.x) << "," << format_sig10(p.value) << "\n";
  return kOk;
}

inline int cmd_props(const Options& o, std::ostream& out, std::ostream& err) {
  const CompositionSpec spec = detail::make_spec(o, err);
  const ExperimentReport drift = norm_drift_experiment(o.max_k, o.samples, spec);
  const ExperimentReport orth = orthogonality_experiment(o.max_k, o.samples, spec);
  write_reports(o, {&drift, &orth});
  detail::write_sidecar(o, "props", {{"max_k", o.max_k}, {"samples", o.samples}});
  out << "max |mean norm - 1|: " << format_sig10(drift.summary.at("max_abs_mean_deviation")) << "\n"
      << "max mean |a.t|: " << format_sig10(orth.summary.at("max_single_mean_abs_dot")) << "\n";
  return kOk;
}

inline int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
  const CompositionSpec spec = detail::make_spec(o, err);
  const NodeLexicon lex(o.config.seed, o.config.dim);
  std::vector<std::size_t> totals;
  for (double b : detail::parse_list(o.bins)) {
    if (b < 4) throw ConfigError("bin sizes must be >= 4 total nodes");
    totals.push_back(static_cast<std::size_t>(b));
  }
  std::vector<TimingBin> bins;
  if (!o.input.empty()) {
    // Consecutive trees form pairs; each pair joins the bin nearest its size.
    const Corpus c = detail::load_valid_corpus(o.input);
    for (auto t : totals) bins.push_back({t, {}});
    for (std::size_t i = 0; i + 1 < c.trees.size(); i += 2) {
      const std::size_t size = c.trees[i].node_count() + c.trees[i + 1].node_count();
      std::size_t best = 0;
      for (std::size_t k = 1; k < totals.size(); ++k) {
        auto dist = [&](std::size_t t) { return t > size ? t - size : size - t; };
        if (dist(totals[k]) < dist(totals[best])) best = k;
      }
      bins[best].pairs.emplace_back(c.trees[i], c.trees[i + 1]);
    }
    std::erase_if(bins, [](const TimingBin& b) { return b.pairs.empty(); });
  } else {
    SyntheticTreeConfig sc;
    sc.seed = o.config.seed;
    bins = synthetic_timing_bins(totals, o.pairs_per_bin, sc);
  }
  TimingOptions topt;
  topt.repetitions = o.repetitions;
  if (topt.repetitions < 1) throw ConfigError("--repetitions must be >= 1");
  const ExperimentReport r = timing_benchmark(bins, spec, lex, o.config.lambda, topt);
  write_reports(o, {&r});
  detail::write_sidecar(o, "bench", {{"bins", o.bins}});
  out << "total_nodes,dtk_s,dt_build_s,tk_fast_s,tk_exact_s\n";
  const auto& a = r.find("dtk_seconds").points;
  const auto& b = r.find("dt_construction_seconds").points;
  const auto& f = r.find("tk_fast_seconds").points;
  const auto& e = r.find("tk_exact_seconds").points;
  for (std::size_t i = 0; i < a.size(); ++i)
    out << format_sig10(a[i].x) << "," << format_sig10(a[i].value) << "," << format_sig10(b[i].value) << ","
        << format_sig10(f[i].value) << "," << format_sig10(e[i].value) << "\n";
  return kOk;
}

inline int cmd_lexicon(const Options& o, std::ostream& out, std::ostream&) {
  if (!o.verify.empty()) {
    std::ifstream in(o.verify);
    if (!in) throw InputError("cannot read '" + o.verify + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed lexicon file: ") + e.what());
    }
    const LexiconSnapshot snap = import_lexicon(j);
    const double dev = lexicon_max_deviation(snap);
    out << snap.vectors.size() << " vectors, max deviation " << format_sig10(dev) << "\n";
    return dev <= 1e-12 ? kOk : kInputError;
  }
  if (o.output.empty()) throw ConfigError("lexicon export needs --output");
  const NodeLexicon lex(o.config.seed, o.config.dim);
  detail::write_file(o.output, export_lexicon(lex, o.labels).dump() + "\n");
  out << o.labels.size() << " vectors written to " << o.output << "\n";
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Distributed tree kernels: embed trees into R^d so tree-kernel similarity becomes a dot product"};
  app.require_subcommand(1);
  Options o;

  auto* parse = app.add_subcommand("parse", "Validate a corpus file (one parenthetical tree per line)");
  parse->add_option("input", o.input, "Corpus file")->required();

  auto* dt = app.add_subcommand("dt", "Compute distributed trees for every tree of a corpus");
  dt->add_option("input", o.input, "Corpus file")->required();
  detail::add_config_flags(dt, o);
  detail::add_output_flags(dt, o);

  auto* kernel = app.add_subcommand("kernel", "Evaluate a kernel between two trees");
  kernel->add_option("tree1", o.tree1, "First tree, parenthetical notation")->required();
  kernel->add_option("tree2", o.tree2, "Second tree, parenthetical notation")->required();
  kernel->add_option("--method", o.method, "dtk, tk (exact), tk-fast (matching pairs) or oracle (explicit fragments)")
      ->capture_default_str();
  detail::add_config_flags(kernel, o);

  auto* gram = app.add_subcommand("gram", "Gram matrix of a corpus");
  gram->add_option("input", o.input, "Corpus file")->required();
  gram->add_option("--kernel", o.kernel, "dtk, tk, dtk_normalized or tk_normalized")->capture_default_str();
  detail::add_config_flags(gram, o);
  detail::add_output_flags(gram, o);

  auto* correlate = app.add_subcommand("correlate", "Spearman correlation between DTK and exact TK per lambda");
  correlate->add_option("--corpus", o.input, "Corpus file (default: generated synthetic pairs)");
  correlate->add_option("--lambdas", o.lambdas, "Comma-separated lambda values")->capture_default_str();
  correlate->add_option("--pairs", o.pairs, "Synthetic pairs to generate")->capture_default_str();
  correlate->add_option("--max-nodes", o.max_nodes, "Largest synthetic tree")->capture_default_str();
  correlate->add_option("--zipf", o.zipf, "Zipf exponent of synthetic label frequencies")->capture_default_str();
  detail::add_config_flags(correlate, o);
  detail::add_output_flags(correlate, o);

  auto* props = app.add_subcommand("props", "Norm and orthogonality statistics of the composition function");
  props->add_option("--max-k", o.max_k, "Longest composition chain")->capture_default_str();
  props->add_option("--samples", o.samples, "Samples per chain length")->capture_default_str();
  detail::add_config_flags(props, o);
  detail::add_output_flags(props, o);

  auto* bench = app.add_subcommand("bench", "Median evaluation time of DTK and exact kernels per pair-size bin");
  bench->add_option("--corpus", o.input, "Corpus file; consecutive trees form pairs (default: synthetic)");
  bench->add_option("--bins", o.bins, "Total node counts per pair")->capture_default_str();
  bench->add_option("--pairs-per-bin", o.pairs_per_bin, "Synthetic pairs per bin")->capture_default_str();
  bench->add_option("--repetitions", o.repetitions, "Timed repetitions after 5 warmup runs")->capture_default_str();
  detail::add_config_flags(bench, o);
  detail::add_output_flags(bench, o);

  auto* lexicon = app.add_subcommand("lexicon", "Export node vectors to JSON, or verify an exported file");
  lexicon->add_option("labels", o.labels, "Labels to export");
  lexicon->add_option("--verify", o.verify, "Lexicon JSON file to check against this implementation");
  lexicon->add_option("--dim", o.config.dim, "Vector dimension d")->capture_default_str();
  lexicon->add_option("--seed", o.config.seed, "Master seed")->capture_default_str();
  lexicon->add_option("-o,--output", o.output, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    detail::resolve(o);
    if (parse->parsed()) return cmd_parse(o, out, err);
    if (dt->parsed()) return cmd_dt(o, out, err);
    if (kernel->parsed()) return cmd_kernel(o, out, err);
    if (gram->parsed()) return cmd_gram(o, out, err);
    if (correlate->parsed()) return cmd_correlate(o, out, err);
    if (props->parsed()) return cmd_props(o, out, err);
    if (bench->parsed()) return cmd_bench(o, out, err);
    if (lexicon->parsed()) return cmd_lexicon(o, out, err);
  } catch (const EnumerationCapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kGuardError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kConfigError;
}

}  // namespace dtk::cli
