#pragma once

// Run configuration and on-disk formats: distributed-tree corpus files and
// lexicon snapshots. Vectors are written with round-trip precision so that a
// reloaded file reproduces kernel values bit-exactly.

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtk/distributed_tree.hpp"
#include "dtk/embedding.hpp"
#include "dtk/random.hpp"

namespace dtk {

inline constexpr int kDtFormatVersion = 1;
inline constexpr const char* kHashAlgo = "fnv1a64";

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::size_t dim = kDefaultDim;
  double lambda = kDefaultLambda;
  CompositionKind composition = CompositionKind::shuffled_convolution;
  std::uint64_t seed = kDefaultSeed;
  WeightConvention weights = WeightConvention::recursion;
  bool cd_compatible = false;  // scale DTK by λ to match the exact kernel
  std::size_t gamma_samples = kDefaultGammaSamples;

  void validate() const {
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in (0, 1]");
    if (gamma_samples < 1) throw ConfigError("gamma samples must be >= 1");
  }

  // Canonical text of everything that determines a DT vector.
  std::string canonical() const {
    char lam[40];
    std::snprintf(lam, sizeof lam, "%.17g", lambda);
    return "format_version=" + std::to_string(kDtFormatVersion) + ";dim=" + std::to_string(dim) +
           ";lambda=" + lam + ";composition=" + std::string(to_string(composition)) +
           ";seed=" + std::to_string(seed) + ";gamma_samples=" + std::to_string(gamma_samples);
  }

  std::string config_hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
    return buf;
  }

  CompositionSpec composition_spec() const {
    validate();
    return CompositionSpec::make(composition, dim, seed, gamma_samples);
  }

  nlohmann::ordered_json to_json() const {
    return {{"dim", dim},
            {"lambda", lambda},
            {"composition", std::string(to_string(composition))},
            {"seed", seed},
            {"weights", std::string(to_string(weights))},
            {"cd_compatible", cd_compatible},
            {"gamma_samples", gamma_samples},
            {"config_hash", config_hash()}};
  }
};

// ---------------------------------------------------------------------------
// Distributed-tree corpus files
//
// {"header": {format_version, dim, lambda, composition, seed,
//             weight_convention, gamma_samples, config_hash},
//  "records": [{"index": i, "vector": [...]}, ...]}

struct DtFile {
  RunConfig config;
  std::vector<DistributedTree> trees;
};

inline void write_dt_file(std::ostream& out, const RunConfig& cfg, const std::vector<DistributedTree>& trees) {
  nlohmann::ordered_json j;
  j["header"] = {{"format_version", kDtFormatVersion},
                 {"dim", cfg.dim},
                 {"lambda", cfg.lambda},
                 {"composition", std::string(to_string(cfg.composition))},
                 {"seed", cfg.seed},
                 {"weight_convention", std::string(to_string(cfg.weights))},
                 {"gamma_samples", cfg.gamma_samples},
                 {"config_hash", cfg.config_hash()}};
  auto records = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const auto& t = trees[i];
    if (t.dim != cfg.dim || t.lambda != cfg.lambda || t.composition_kind != cfg.composition ||
        t.master_seed != cfg.seed)
      throw ProvenanceMismatch("distributed tree " + std::to_string(i) + " does not match the file header");
    records.push_back({{"index", i}, {"vector", t.vector}});
  }
  j["records"] = std::move(records);
  out << j.dump() << '\n';
}

inline DtFile read_dt_file(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed DT file: ") + e.what());
  }
  try {
    const auto& h = j.at("header");
    if (h.at("format_version").get<int>() != kDtFormatVersion) throw FormatError("unsupported DT format version");
    DtFile f;
    f.config.dim = h.at("dim").get<std::size_t>();
    f.config.lambda = h.at("lambda").get<double>();
    f.config.composition = parse_composition_kind(h.at("composition").get<std::string>());
    f.config.seed = h.at("seed").get<std::uint64_t>();
    f.config.weights = parse_weight_convention(h.at("weight_convention").get<std::string>());
    f.config.gamma_samples = h.at("gamma_samples").get<std::size_t>();
    if (h.at("config_hash").get<std::string>() != f.config.config_hash())
      throw FormatError("DT file config hash does not match its header fields");
    for (const auto& rec : j.at("records")) {
      DistributedTree t;
      t.vector = rec.at("vector").get<DenseVector>();
      if (t.vector.size() != f.config.dim) throw FormatError("DT record dimension differs from header");
      t.lambda = f.config.lambda;
      t.dim = f.config.dim;
      t.composition_kind = f.config.composition;
      t.master_seed = f.config.seed;
      f.trees.push_back(std::move(t));
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed DT file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Lexicon snapshots for cross-implementation conformance checks.

struct LexiconSnapshot {
  std::size_t dim = 0;
  std::uint64_t master_seed = 0;
  std::string hash_algo = kHashAlgo;
  std::map<std::string, DenseVector> vectors;
};

inline nlohmann::ordered_json export_lexicon(const NodeLexicon& lex, const std::vector<std::string>& labels) {
  nlohmann::ordered_json j;
  j["header"] = {{"dim", lex.dim()}, {"master_seed", lex.master_seed()}, {"hash_algo", kHashAlgo}};
  nlohmann::ordered_json vectors = nlohmann::ordered_json::object();
  for (const auto& l : labels) vectors[l] = lex.vector(l);
  j["vectors"] = std::move(vectors);
  return j;
}

inline LexiconSnapshot import_lexicon(const nlohmann::json& j) {
  try {
    LexiconSnapshot s;
    const auto& h = j.at("header");
    s.dim = h.at("dim").get<std::size_t>();
    s.master_seed = h.at("master_seed").get<std::uint64_t>();
    s.hash_algo = h.at("hash_algo").get<std::string>();
    for (const auto& [label, vec] : j.at("vectors").items()) {
      auto v = vec.get<DenseVector>();
      if (v.size() != s.dim) throw FormatError("lexicon vector for '" + label + "' has wrong dimension");
      s.vectors.emplace(label, std::move(v));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed lexicon file: ") + e.what());
  }
}

// Largest absolute component difference between a snapshot and the lexicon
// this library would produce for the same (seed, dim).
inline double lexicon_max_deviation(const LexiconSnapshot& snapshot) {
  if (snapshot.hash_algo != kHashAlgo) throw FormatError("unsupported lexicon hash algorithm " + snapshot.hash_algo);
  const NodeLexicon lex(snapshot.master_seed, snapshot.dim);
  double worst = 0.0;
  for (const auto& [label, v] : snapshot.vectors) {
    const auto& mine = lex.vector(label);
    for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(v[i] - mine[i]));
  }
  return worst;
}

}  // namespace dtk
