#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "trunclab/errors.hpp"
#include "trunclab/harness.hpp"

namespace trunclab {
namespace {

namespace pt = boost::property_tree;

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  // the defaulted ptree::get swallows conversion errors, so convert explicitly
  if (!tree.get_optional<std::string>(key)) return fallback;
  try {
    return tree.get<T>(key);
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("bad value for '" + key + "'");
  }
}

template <class T>
T require(const pt::ptree& tree, const std::string& key) {
  auto v = tree.get_optional<std::string>(key);
  if (!v) throw ConfigError("missing required key '" + key + "'");
  return get<T>(tree, key, T{});
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& key) {
  std::string s = text;
  for (char& c : s) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream is(s);
  std::vector<T> out;
  T v{};
  while (is >> v) out.push_back(v);
  if (!is.eof()) throw ConfigError("bad list for '" + key + "': " + text);
  return out;
}

std::vector<std::int64_t> increasing_list(const pt::ptree& tree, const std::string& key,
                                          std::vector<std::int64_t> fallback) {
  auto raw = tree.get_optional<std::string>(key);
  if (!raw) return fallback;
  auto list = parse_list<std::int64_t>(*raw, key);
  if (list.empty()) throw ConfigError("'" + key + "' must not be empty");
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i] < 1 || (i > 0 && list[i] <= list[i - 1])) {
      throw ConfigError("'" + key + "' must be positive and strictly increasing");
    }
  }
  return list;
}

ProbabilitySequence parse_sequence(const pt::ptree& tree, const std::filesystem::path& base_dir) {
  const auto kind = require<std::string>(tree, "sequence.kind");
  ProbabilitySequence seq = ProbabilitySequence::constant(0.0);
  try {
    if (kind == "constant") {
      seq = ProbabilitySequence::constant(require<double>(tree, "sequence.value"));
    } else if (kind == "power-law") {
      seq = ProbabilitySequence::power_law(require<double>(tree, "sequence.amplitude"),
                                           require<double>(tree, "sequence.exponent"));
    } else if (kind == "lacunary") {
      const auto support = get<std::string>(tree, "sequence.support", "powers");
      const double value = require<double>(tree, "sequence.value");
      const double background = get<double>(tree, "sequence.background", 0.0);
      if (support == "powers") {
        seq = ProbabilitySequence::lacunary_powers(require<Length>(tree, "sequence.base"), value,
                                                   background);
      } else if (support == "explicit") {
        seq = ProbabilitySequence::lacunary_explicit(
            parse_list<Length>(require<std::string>(tree, "sequence.members"), "sequence.members"),
            value, background);
      } else {
        throw ConfigError("unknown lacunary support '" + support + "'");
      }
    } else if (kind == "table") {
      const double tail = get<double>(tree, "sequence.tail", 0.0);
      if (auto file = tree.get_optional<std::string>("sequence.file")) {
        std::filesystem::path p(*file);
        if (p.is_relative()) p = base_dir / p;
        seq = ProbabilitySequence::table_from_file(p, tail);
      } else {
        seq = ProbabilitySequence::table(
            parse_list<double>(require<std::string>(tree, "sequence.values"), "sequence.values"), tail);
      }
    } else {
      throw ConfigError("unknown sequence kind '" + kind + "'");
    }
  } catch (const InvariantViolation& e) {
    throw ConfigError(std::string("invalid sequence: ") + e.what());
  }
  if (auto n = tree.get_optional<Length>("sequence.truncation")) {
    seq = truncate(seq, TruncationLevel(*n));
  }
  return seq;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  PipelineConfig cfg;
  cfg.source_text = text;
  cfg.sequence = parse_sequence(tree, base_dir);
  // EpsilonCertificate enforces 0 < eps <= 1/2; its InvariantViolation propagates.
  cfg.certificate = EpsilonCertificate(require<double>(tree, "certificate.epsilon"),
                                       get<std::string>(tree, "certificate.evidence", "declared"));

  cfg.margin = get(tree, "search.margin", cfg.margin);
  cfg.scale_search_limit = get(tree, "search.scale_limit", cfg.scale_search_limit);
  cfg.budget.d_min = get(tree, "search.d_min", cfg.budget.d_min);
  cfg.budget.d_max = get(tree, "search.d_max", cfg.budget.d_max);
  cfg.budget.K_max = get(tree, "search.K_max", cfg.budget.K_max);
  if (cfg.scale_search_limit < 1) throw ConfigError("search.scale_limit must be >= 1");

  cfg.pc_L_schedule = increasing_list(tree, "thresholds.L_schedule", cfg.pc_L_schedule);
  cfg.pc_trials = get(tree, "thresholds.trials_per_probe", cfg.pc_trials);
  cfg.pc_bracket_tol = get(tree, "thresholds.bracket_tol", cfg.pc_bracket_tol);
  cfg.zd_L_schedule = increasing_list(tree, "thresholds.zd_L_schedule", {});
  if (auto cal = tree.get_optional<std::string>("thresholds.calibration")) {
    std::filesystem::path p(*cal);
    cfg.calibration_path = p.is_relative() ? base_dir / p : p;
  }

  cfg.verify_radius = get(tree, "verification.radius", cfg.verify_radius);
  cfg.L_list = increasing_list(tree, "verification.L_list", cfg.L_list);
  cfg.trials = get(tree, "verification.trials", cfg.trials);
  cfg.positivity_floor = get(tree, "verification.positivity_floor", cfg.positivity_floor);

  if (tree.get_optional<std::string>("embedding.d") || tree.get_optional<std::string>("embedding.K")) {
    try {
      cfg.embedding = SlabParameters(require<int>(tree, "embedding.d"), require<int>(tree, "embedding.K"));
    } catch (const InvariantViolation& e) {
      throw ConfigError(std::string("invalid [embedding]: ") + e.what());
    }
  }

  cfg.master_seed = get(tree, "run.master_seed", cfg.master_seed);
  cfg.threads = get(tree, "run.threads", cfg.threads);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace trunclab
