#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trunclab/embedding.hpp"
#include "trunclab/percolation.hpp"
#include "trunclab/sequence.hpp"
#include "trunclab/thresholds.hpp"

namespace trunclab {

inline constexpr const char* kVersion = "0.1.0";

/// Everything a pipeline run needs. Parsed from an INI-style file:
///
///   [sequence]      kind = constant|power-law|lacunary|table, plus its parameters
///   [certificate]   epsilon, evidence
///   [search]        scale_limit, margin, d_min, d_max, K_max
///   [thresholds]    L_schedule, trials_per_probe, bracket_tol, calibration, zd_L_schedule
///   [verification]  radius, L_list, trials, positivity_floor
///   [embedding]     d, K (used by verify-embedding / scales only)
///   [run]           master_seed, threads
struct PipelineConfig {
  ProbabilitySequence sequence = ProbabilitySequence::constant(0.0);
  EpsilonCertificate certificate{0.5, "unset"};
  double margin = 0.02;
  Length scale_search_limit = 1'000'000;
  SlabBudget budget;
  std::vector<std::int64_t> pc_L_schedule{16, 32};
  std::uint64_t pc_trials = 1000;
  double pc_bracket_tol = 0.005;
  std::optional<std::filesystem::path> calibration_path;
  /// Z^d logging schedule; empty picks L from a vertex budget.
  std::vector<std::int64_t> zd_L_schedule;
  std::int64_t verify_radius = 4;
  std::vector<std::int64_t> L_list{32, 64};
  std::uint64_t trials = 1000;
  double positivity_floor = 0.05;
  std::optional<SlabParameters> embedding;  // [embedding] d, K
  std::uint64_t master_seed = 1;
  unsigned threads = 0;
  std::string source_text;  // verbatim config, copied into the manifest
};

/// Throws ConfigError with the offending key on malformed input.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Stage seeds derived from the master seed.
struct StageSeeds {
  std::uint64_t thresholds = 0;
  std::uint64_t zd = 0;
  std::uint64_t theta = 0;
};
StageSeeds derive_seeds(std::uint64_t master_seed);

struct ContainmentOptions {
  /// Test hook: compare this embedded edge against the wrong lattice edge.
  std::optional<std::size_t> mismap_edge;
};

struct ContainmentViolation {
  std::uint64_t trial = 0;
  std::string kind;  // "edge", "cluster" or "theta"
  std::string detail;
};

struct ContainmentReport {
  std::int64_t L = 0;
  std::uint64_t trials = 0;
  std::uint64_t trials_passed = 0;
  bool no_trials = false;
  bool passed = false;
  std::optional<ContainmentViolation> violation;
};

/// Samples the embedded window and the full Z^2 window truncated at N from the
/// same per-lattice-edge uniforms and checks, trial by trial, that open embedded
/// edges are open in the full configuration, that the origin's embedded
/// cluster lies inside its full cluster, and that theta dominance holds.
ContainmentReport containment_check(const EmbeddedGraph& g, const ProbabilitySequence& seq,
                                    Length truncation, std::int64_t L, std::uint64_t master_seed,
                                    std::uint64_t trials, const ContainmentOptions& options = {});

struct ThetaRow {
  std::int64_t L = 0;
  Estimate embedded;
  Estimate full;
  bool dominance_ok = false;  // full >= embedded - 3 * combined standard error
};

struct PipelineFailure {
  std::string stage;
  std::string kind;  // "hypothesis-not-witnessed", "parameters-not-found", "estimation-error"
  std::string message;
  std::optional<int> step;
  std::optional<double> shortfall;
};

struct PipelineReport {
  bool passed = false;
  std::optional<PipelineFailure> failure;
  double eps = 0.0;
  std::string evidence;
  std::string sequence;
  std::optional<SlabChoice> slab;
  std::optional<ThresholdEstimate> zd_threshold;
  std::vector<Length> scales;
  Length N = 0;
  std::optional<double> min_scale_probability;  // min_j p_{n_j}
  std::optional<IsomorphismReport> isomorphism;
  std::vector<ThetaRow> theta;
  bool theta_trend_nonincreasing = true;
  std::vector<ContainmentReport> containment;
  double positivity_floor = 0.0;
  std::uint64_t master_seed = 0;
  StageSeeds seeds;
  std::vector<std::string> failed_checks;

  /// 0 pass, 2 verification failure, 3 hypothesis/budget failure.
  int exit_code() const;
};

/// Runs every stage in order; failures of the hypothesis or the budget produce
/// a FAILED report instead of an exception. `table` is consulted and updated.
PipelineReport run_pipeline(const PipelineConfig& cfg, CalibrationTable& table);

nlohmann::ordered_json to_json(const PipelineReport& r);
nlohmann::ordered_json to_json(const IsomorphismReport& r);
nlohmann::ordered_json to_json(const ThresholdEstimate& t);
nlohmann::ordered_json to_json(const Estimate& e);

/// Writes report.json, estimates.csv and manifest.json into `out_dir`.
void write_outputs(const PipelineConfig& cfg, const PipelineReport& report,
                   const std::filesystem::path& out_dir, double elapsed_seconds);

}  // namespace trunclab
