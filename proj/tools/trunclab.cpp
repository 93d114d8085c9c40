#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "trunclab/errors.hpp"
#include "trunclab/harness.hpp"

using namespace trunclab;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerification = 2;
constexpr int kExitHypothesis = 3;

struct EstimateArgs {
  std::string family = "z2";
  int d = 2;
  int K = 1;
  double p = 0.5;
  std::int64_t L = 16;
  std::optional<Length> N;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  std::string event = "crossing";
  std::string config;
  unsigned threads = 0;
};

struct PcArgs {
  std::string family = "zd";
  int d = 2;
  int K = 1;
  std::vector<std::int64_t> L{16, 32};
  std::uint64_t trials = 1000;
  double tol = 0.005;
  std::uint64_t seed = 1;
  std::string table;
  unsigned threads = 0;
};

struct EmbeddingArgs {
  std::string config;
  std::optional<int> d;
  std::optional<int> K;
  std::optional<std::int64_t> radius;
};

SlabParameters embedding_params(const PipelineConfig& cfg, const EmbeddingArgs& a) {
  const int d = a.d.value_or(cfg.embedding ? cfg.embedding->d() : 0);
  const int K = a.K.value_or(cfg.embedding ? cfg.embedding->K() : 0);
  if (d == 0 || K == 0) throw ConfigError("slab parameters needed: set [embedding] d, K or pass --d/--K");
  try {
    return SlabParameters(d, K);
  } catch (const InvariantViolation& e) {
    throw ConfigError(e.what());
  }
}

int run_pipeline_cmd(const std::string& config_path, const std::string& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const PipelineConfig cfg = load_config(config_path);
  CalibrationTable table;
  if (cfg.calibration_path) table = CalibrationTable::load(*cfg.calibration_path);
  const PipelineReport report = run_pipeline(cfg, table);
  if (cfg.calibration_path) table.save(*cfg.calibration_path);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_outputs(cfg, report, out_dir, elapsed);

  if (report.failure) {
    std::cerr << "FAILED [" << report.failure->kind << "] at " << report.failure->stage << ": "
              << report.failure->message << '\n';
  } else if (!report.passed) {
    std::cerr << "FAILED checks:";
    for (const auto& c : report.failed_checks) std::cerr << ' ' << c;
    std::cerr << '\n';
  } else {
    std::cout << "PASS (d=" << report.slab->params.d() << ", K=" << report.slab->params.K()
              << ", N=" << report.N << ")\n";
  }
  std::cout << "outputs written to " << out_dir << '\n';
  return report.exit_code();
}

int run_estimate(const EstimateArgs& a) {
  Family family = LatticeFamily{2};
  if (a.family == "z2") {
    family = LatticeFamily{2};
  } else if (a.family == "zd") {
    family = LatticeFamily{a.d};
  } else if (a.family == "slab") {
    family = SlabFamily{a.d, a.K};
  } else {
    if (a.config.empty()) throw ConfigError("--family longrange needs --config for the sequence");
    const PipelineConfig cfg = load_config(a.config);
    std::optional<Length> N = a.N;
    if (N && *N < 1) throw ConfigError("--N must be >= 1");
    family = LongRangeFamily{cfg.sequence, N};
  }
  const WindowSpec spec =
      a.event == "crossing" ? crossing_window_spec(family, a.p, a.L) : theta_window_spec(family, a.p, a.L);
  const GraphWindow w = build_window(spec);
  const Estimate e = a.event == "crossing" ? estimate_event(w, Event::crossing(), a.trials, a.seed, a.threads)
                                           : origin_boundary_estimate(w, a.trials, a.seed, a.threads);
  std::cout << "family,p,L,event,value,half_width,successes,trials,seed\n"
            << describe(family) << ',' << a.p << ',' << a.L << ',' << a.event << ',' << e.value << ','
            << e.half_width << ',' << e.successes << ',' << e.trials << ',' << e.master_seed << '\n';
  return kExitPass;
}

int run_pc(const PcArgs& a) {
  Family family = a.family == "slab" ? Family{SlabFamily{a.d, a.K}} : Family{LatticeFamily{a.d}};
  PcSettings s;
  s.L_schedule = a.L;
  s.trials_per_probe = a.trials;
  s.bracket_tol = a.tol;
  s.master_seed = a.seed;
  s.threads = a.threads;
  ThresholdEstimate est;
  try {
    est = estimate_pc(family, s);
  } catch (const EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << '\n';
    return kExitHypothesis;
  }
  if (!a.table.empty()) {
    CalibrationTable table = CalibrationTable::load(a.table);
    table.upsert(to_row(est));
    table.save(a.table);
  }
  std::cout << to_json(est).dump(2) << '\n';
  return kExitPass;
}

int run_verify(const EmbeddingArgs& a) {
  const PipelineConfig cfg = load_config(a.config);
  const SlabParameters params = embedding_params(cfg, a);
  const double eps = cfg.certificate.epsilon();
  ScaleVector scales = select_scales(cfg.sequence, eps, params, cfg.scale_search_limit);
  const EmbeddedGraph g(params, scales);
  const auto report = verify_isomorphism(g, a.radius.value_or(cfg.verify_radius),
                                         EdgeProbabilityBound{&cfg.sequence, eps});
  nlohmann::ordered_json j{{"d", params.d()}, {"K", params.K()}, {"scales", scales.values()}, {"N", scales.last()}};
  j["isomorphism"] = to_json(report);
  std::cout << j.dump(2) << '\n';
  return report.passed ? kExitPass : kExitVerification;
}

int run_scales(const EmbeddingArgs& a) {
  const PipelineConfig cfg = load_config(a.config);
  const SlabParameters params = embedding_params(cfg, a);
  const ScaleVector scales = select_scales(cfg.sequence, cfg.certificate.epsilon(), params, cfg.scale_search_limit);
  nlohmann::ordered_json j{{"scales", scales.values()}, {"N", scales.last()}};
  std::cout << j.dump(2) << '\n';
  return kExitPass;
}

void add_embedding_options(CLI::App* cmd, EmbeddingArgs& a) {
  cmd->add_option("--config", a.config, "INI config with [sequence] and [certificate]")->required();
  cmd->add_option("--d", a.d, "slab dimension (overrides [embedding] d)");
  cmd->add_option("--K", a.K, "slab thickness (overrides [embedding] K)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated long-range percolation: slab embedding and Monte Carlo verification"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto* pipeline = app.add_subcommand("pipeline", "run every stage and write report.json, estimates.csv, manifest.json");
  pipeline->add_option("--config", config_path, "INI config")->required()->check(CLI::ExistingFile);
  pipeline->add_option("--out", out_dir, "output directory")->required();

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Monte Carlo estimate of one event at one p");
  estimate->add_option("--family", est.family)->check(CLI::IsMember({"z2", "zd", "slab", "longrange"}));
  estimate->add_option("--d", est.d);
  estimate->add_option("--K", est.K);
  estimate->add_option("--p", est.p, "bond probability (lattice families)");
  estimate->add_option("--L", est.L, "window size");
  estimate->add_option("--N", est.N, "truncation level (longrange)");
  estimate->add_option("--trials", est.trials);
  estimate->add_option("--seed", est.seed);
  estimate->add_option("--event", est.event)->check(CLI::IsMember({"crossing", "theta"}));
  estimate->add_option("--config", est.config, "config supplying the sequence (longrange)");
  estimate->add_option("--threads", est.threads, "0 = hardware concurrency");

  PcArgs pc;
  auto* pc_cmd = app.add_subcommand("pc", "estimate a critical threshold and record it in a calibration table");
  pc_cmd->add_option("--family", pc.family)->check(CLI::IsMember({"zd", "slab"}));
  pc_cmd->add_option("--d", pc.d);
  pc_cmd->add_option("--K", pc.K);
  pc_cmd->add_option("--L", pc.L, "window schedule, strictly increasing")->delimiter(',');
  pc_cmd->add_option("--trials", pc.trials, "trials per probe");
  pc_cmd->add_option("--tol", pc.tol, "bracket width at which bisection stops");
  pc_cmd->add_option("--seed", pc.seed);
  pc_cmd->add_option("--table", pc.table, "calibration CSV to update");
  pc_cmd->add_option("--threads", pc.threads);

  EmbeddingArgs verify;
  auto* verify_cmd = app.add_subcommand("verify-embedding", "check the embedded graph against the slab");
  add_embedding_options(verify_cmd, verify);
  verify_cmd->add_option("--radius", verify.radius, "window half-width in slab coordinates");

  EmbeddingArgs sc;
  auto* scales_cmd = app.add_subcommand("scales", "print the scale vector n_1..n_{d-1}");
  add_embedding_options(scales_cmd, sc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*pipeline) return run_pipeline_cmd(config_path, out_dir);
    if (*estimate) return run_estimate(est);
    if (*pc_cmd) return run_pc(pc);
    if (*verify_cmd) return run_verify(verify);
    if (*scales_cmd) return run_scales(sc);
  } catch (const HypothesisNotWitnessed& e) {
    std::cerr << "hypothesis not witnessed: " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const ParametersNotFound& e) {
    std::cerr << "parameters not found: " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
