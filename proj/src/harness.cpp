#include "trunclab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_map>

#include "trunclab/errors.hpp"
#include "trunclab/philox.hpp"

namespace trunclab {
namespace {

using json = nlohmann::ordered_json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::vector<std::int64_t> default_zd_schedule(int d) {
  // keep the (L+2)(L+1)^(d-1) box near 5000 vertices
  auto L = static_cast<std::int64_t>(std::floor(std::pow(5000.0, 1.0 / d))) - 1;
  return {std::max<std::int64_t>(L, 2)};
}

double combined_se(const Estimate& a, const Estimate& b) {
  return std::sqrt(a.standard_error() * a.standard_error() + b.standard_error() * b.standard_error());
}

std::string point_str(std::span<const std::int64_t> c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
  return s + ")";
}

json coord_json(const SlabCoord& c) {
  return json{{"m_vec", c.digits}, {"k", c.k}, {"m", c.m}};
}

}  // namespace

StageSeeds derive_seeds(std::uint64_t master_seed) {
  return {splitmix64(master_seed ^ 0x7468726573686f6cull), splitmix64(master_seed ^ 0x7a64ull),
          splitmix64(master_seed ^ 0x7468657461ull)};
}

ContainmentReport containment_check(const EmbeddedGraph& g, const ProbabilitySequence& seq,
                                    Length truncation, std::int64_t L, std::uint64_t master_seed,
                                    std::uint64_t trials, const ContainmentOptions& options) {
  ContainmentReport report;
  report.L = L;
  report.trials = trials;
  if (trials == 0) {
    report.no_trials = true;
    report.passed = true;
    return report;
  }
  const GraphWindow emb = build_window(EmbeddedSpec{g, seq, truncation, L});
  const GraphWindow full = build_window(covering_long_range_spec(g, seq, truncation, L));

  std::unordered_map<std::uint64_t, std::size_t> full_edge;
  full_edge.reserve(full.edges.size());
  for (std::size_t i = 0; i < full.edges.size(); ++i) full_edge.emplace(full.edges[i].key, i);

  std::vector<std::size_t> edge_map(emb.edges.size());
  for (std::size_t i = 0; i < emb.edges.size(); ++i) {
    const auto& e = emb.edges[i];
    std::uint64_t key = e.key;
    if (options.mismap_edge && *options.mismap_edge == i) {
      const auto lower = emb.vertex(e.u);
      const bool vertical = (e.key & 1u) != 0;
      key = lattice_edge_key({lower[0], lower[1]}, e.length + 1, vertical);
      if (!full_edge.count(key)) key = lattice_edge_key({lower[0], lower[1]}, e.length - 1, vertical);
    }
    auto it = full_edge.find(key);
    if (it == full_edge.end()) {
      throw DomainError("embedded edge " + std::to_string(i) + " has no lattice edge in the full window");
    }
    edge_map[i] = it->second;
  }
  std::vector<VertexId> vertex_map(emb.vertex_count());
  for (VertexId v = 0; v < emb.vertex_count(); ++v) {
    auto f = full.find_vertex(emb.vertex(v));
    if (!f) throw DomainError("embedded window does not fit inside the full window");
    vertex_map[v] = *f;
  }
  const VertexId emb_origin = *emb.origin;
  const VertexId full_origin = *full.origin;

  for (std::uint64_t t = 0; t < trials; ++t) {
    ClusterState es = sample_and_cluster(emb, master_seed, t);
    ClusterState fs = sample_and_cluster(full, master_seed, t);
    for (std::size_t i = 0; i < emb.edges.size(); ++i) {
      if (es.open[i] && !fs.open[edge_map[i]]) {
        const auto& e = emb.edges[i];
        report.violation = ContainmentViolation{
            t, "edge",
            "embedded edge " + point_str(emb.vertex(e.u)) + "-" + point_str(emb.vertex(e.v)) +
                " open but closed in the truncated configuration"};
        return report;
      }
    }
    const VertexId root = es.forest.find(emb_origin);
    for (VertexId v = 0; v < emb.vertex_count(); ++v) {
      if (es.forest.find(v) == root && !fs.forest.connected(full_origin, vertex_map[v])) {
        report.violation = ContainmentViolation{
            t, "cluster", "vertex " + point_str(emb.vertex(v)) + " of the embedded origin cluster "
                          "is outside the full origin cluster"};
        return report;
      }
    }
    if (event_holds(emb, es.forest, Event::origin_boundary()) &&
        !event_holds(full, fs.forest, Event::origin_boundary())) {
      report.violation = ContainmentViolation{t, "theta", "embedded origin reaches the boundary, full does not"};
      return report;
    }
    ++report.trials_passed;
  }
  report.passed = true;
  return report;
}

int PipelineReport::exit_code() const {
  if (failure) return 3;
  return passed ? 0 : 2;
}

PipelineReport run_pipeline(const PipelineConfig& cfg, CalibrationTable& table) {
  PipelineReport r;
  r.eps = cfg.certificate.epsilon();
  r.evidence = cfg.certificate.evidence();
  r.sequence = cfg.sequence.describe();
  r.positivity_floor = cfg.positivity_floor;
  r.master_seed = cfg.master_seed;
  r.seeds = derive_seeds(cfg.master_seed);

  PcSettings pc;
  pc.L_schedule = cfg.pc_L_schedule;
  pc.trials_per_probe = cfg.pc_trials;
  pc.bracket_tol = cfg.pc_bracket_tol;
  pc.master_seed = r.seeds.thresholds;
  pc.threads = cfg.threads;

  std::string stage;
  try {
    stage = "choose_slab_parameters";
    r.slab = choose_slab_parameters(cfg.certificate, cfg.margin, cfg.budget, table, pc);
    const SlabParameters params = r.slab->params;

    stage = "zd_threshold";
    PcSettings zd = pc;
    zd.master_seed = r.seeds.zd;
    zd.L_schedule = cfg.zd_L_schedule.empty() ? default_zd_schedule(params.d()) : cfg.zd_L_schedule;
    r.zd_threshold = estimate_pc(LatticeFamily{params.d()}, zd);

    stage = "select_scales";
    const ScaleVector scales = select_scales(cfg.sequence, r.eps, params, cfg.scale_search_limit);
    r.scales = scales.values();
    r.N = scales.last();
    double min_p = 1.0;
    for (Length n : r.scales) min_p = std::min(min_p, cfg.sequence.eval(n));
    r.min_scale_probability = min_p;

    stage = "verify_isomorphism";
    const EmbeddedGraph g(params, scales);
    r.isomorphism = verify_isomorphism(g, cfg.verify_radius, EdgeProbabilityBound{&cfg.sequence, r.eps});

    stage = "theta";
    for (std::int64_t L : cfg.L_list) {
      ThetaRow row;
      row.L = L;
      const GraphWindow emb = build_window(EmbeddedSpec{g, cfg.sequence, r.N, L});
      const GraphWindow full = build_window(covering_long_range_spec(g, cfg.sequence, r.N, L));
      row.embedded = origin_boundary_estimate(emb, cfg.trials, r.seeds.theta, cfg.threads);
      row.full = origin_boundary_estimate(full, cfg.trials, r.seeds.theta, cfg.threads);
      row.dominance_ok = row.full.value >= row.embedded.value - 3.0 * combined_se(row.full, row.embedded);
      r.theta.push_back(row);
    }
    for (std::size_t i = 1; i < r.theta.size(); ++i) {
      const auto& a = r.theta[i - 1];
      const auto& b = r.theta[i];
      if (b.embedded.value > a.embedded.value + 3.0 * combined_se(a.embedded, b.embedded) ||
          b.full.value > a.full.value + 3.0 * combined_se(a.full, b.full)) {
        r.theta_trend_nonincreasing = false;
      }
    }

    stage = "containment";
    for (std::int64_t L : cfg.L_list) {
      r.containment.push_back(containment_check(g, cfg.sequence, r.N, L, r.seeds.theta, cfg.trials));
    }
  } catch (const HypothesisNotWitnessed& e) {
    r.failure = PipelineFailure{stage, "hypothesis-not-witnessed", e.what(), e.step(), std::nullopt};
  } catch (const ParametersNotFound& e) {
    r.failure = PipelineFailure{stage, "parameters-not-found", e.what(), std::nullopt, e.best_shortfall()};
  } catch (const EstimationError& e) {
    r.failure = PipelineFailure{stage, "estimation-error", e.what(), std::nullopt, std::nullopt};
  }
  if (r.failure) return r;

  if (!r.isomorphism->passed) r.failed_checks.push_back("isomorphism");
  if (*r.min_scale_probability < r.eps) r.failed_checks.push_back("edge-probability");
  for (const auto& row : r.theta) {
    if (row.embedded.value < cfg.positivity_floor) {
      r.failed_checks.push_back("positivity L=" + std::to_string(row.L));
    }
    if (!row.dominance_ok) r.failed_checks.push_back("theta-dominance L=" + std::to_string(row.L));
  }
  for (const auto& c : r.containment) {
    if (!c.passed) r.failed_checks.push_back("containment L=" + std::to_string(c.L));
  }
  r.passed = r.failed_checks.empty();
  return r;
}

json to_json(const Estimate& e) {
  return json{{"value", e.value},         {"successes", e.successes},
              {"trials", e.trials},       {"half_width", e.half_width},
              {"master_seed", e.master_seed}, {"seed_rule", e.seed_rule}};
}

json to_json(const IsomorphismReport& r) {
  json j{{"passed", r.passed},
         {"radius", r.radius},
         {"vertices", r.vertices},
         {"edges", r.edges},
         {"max_edge_length", r.max_edge_length}};
  if (r.min_edge_probability) j["min_edge_probability"] = *r.min_edge_probability;
  if (r.min_edge_probability_truncated) {
    j["min_edge_probability_truncated"] = *r.min_edge_probability_truncated;
  }
  if (r.counterexample) {
    const auto& c = *r.counterexample;
    j["counterexample"] = json{{"check", c.check},
                               {"u", coord_json(c.u)},
                               {"v", coord_json(c.v)},
                               {"pu", {c.pu.x, c.pu.y}},
                               {"pv", {c.pv.x, c.pv.y}},
                               {"detail", c.detail}};
  }
  return j;
}

json to_json(const ThresholdEstimate& t) {
  json per_L = json::array();
  for (const auto& b : t.per_L) {
    per_L.push_back(json{{"L", b.L}, {"lo", b.lo}, {"hi", b.hi}, {"p_hat", b.p_hat()}, {"slope", b.slope}});
  }
  json j{{"family", t.family},
         {"d", t.d},
         {"K", t.K},
         {"method", "bisection-on-crossing"},
         {"p_hat", t.p_hat},
         {"uncertainty", t.uncertainty},
         {"bracket_half_width", t.bracket_half_width},
         {"statistical_term", t.statistical_term},
         {"L_schedule", t.L_schedule},
         {"per_L", per_L},
         {"trials_per_probe", t.trials_per_probe},
         {"bracket_tol", t.bracket_tol},
         {"master_seed", t.master_seed},
         {"attempts", t.attempts},
         {"from_table", t.from_table}};
  std::optional<double> ref = t.family == "Z^d" ? reference_pc(LatticeFamily{t.d})
                                                 : reference_pc(SlabFamily{t.d, t.K});
  if (ref) j["reference_pc"] = *ref;
  return j;
}

json to_json(const PipelineReport& r) {
  json j;
  j["status"] = r.failure ? "FAILED" : (r.passed ? "PASS" : "FAILED");
  j["proxy_note"] =
      "percolation is certified only through a finite-volume proxy: embedded theta_L >= floor "
      "for every L listed; this is not a proof that P_N(0 <-> infinity) > 0";
  if (r.failure) {
    json f{{"stage", r.failure->stage}, {"kind", r.failure->kind}, {"message", r.failure->message}};
    if (r.failure->step) f["step"] = *r.failure->step;
    if (r.failure->shortfall) f["shortfall"] = *r.failure->shortfall;
    j["failure"] = f;
  }
  j["failed_checks"] = r.failed_checks;
  j["eps"] = r.eps;
  j["evidence"] = r.evidence;
  j["sequence"] = r.sequence;
  if (r.slab) {
    json cands = json::array();
    for (const auto& c : r.slab->candidates) {
      cands.push_back(json{{"d", c.d},
                           {"K", c.K},
                           {"p_hat", c.p_hat},
                           {"uncertainty", c.uncertainty},
                           {"p_hat_plus_uncertainty_plus_margin", c.lhs},
                           {"qualifies", c.qualifies},
                           {"from_table", c.from_table}});
    }
    j["chosen"] = json{{"d", r.slab->params.d()}, {"K", r.slab->params.K()}};
    j["slab_candidates"] = cands;
    j["slab_threshold"] = to_json(r.slab->threshold);
  }
  if (r.zd_threshold) j["zd_threshold"] = to_json(*r.zd_threshold);
  if (!r.scales.empty()) {
    j["scales"] = r.scales;
    j["N"] = r.N;
  }
  if (r.min_scale_probability) j["min_scale_probability"] = *r.min_scale_probability;
  if (r.isomorphism) j["isomorphism"] = to_json(*r.isomorphism);
  if (!r.theta.empty()) {
    json rows = json::array();
    for (const auto& t : r.theta) {
      rows.push_back(json{{"L", t.L},
                          {"embedded", to_json(t.embedded)},
                          {"full_truncated", to_json(t.full)},
                          {"dominance_ok", t.dominance_ok}});
    }
    j["theta"] = rows;
    j["theta_trend_nonincreasing"] = r.theta_trend_nonincreasing;
    j["positivity_floor"] = r.positivity_floor;
  }
  if (!r.containment.empty()) {
    json rows = json::array();
    for (const auto& c : r.containment) {
      json row{{"L", c.L},
               {"trials", c.trials},
               {"trials_passed", c.trials_passed},
               {"passed", c.passed},
               {"no_trials", c.no_trials}};
      if (c.violation) {
        row["violation"] = json{{"trial", c.violation->trial},
                                {"kind", c.violation->kind},
                                {"detail", c.violation->detail}};
      }
      rows.push_back(row);
    }
    j["containment"] = rows;
  }
  j["seeds"] = json{{"master_seed", r.master_seed},
                    {"thresholds", r.seeds.thresholds},
                    {"zd", r.seeds.zd},
                    {"theta", r.seeds.theta},
                    {"rule", kSeedRule}};
  return j;
}

void write_outputs(const PipelineConfig& cfg, const PipelineReport& report,
                   const std::filesystem::path& out_dir, double elapsed_seconds) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "report.json");
    out << to_json(report).dump(2) << '\n';
  }
  {
    std::ofstream out(out_dir / "estimates.csv");
    out << "stage,family,L,event,value,half_width,trials,seed\n";
    auto row = [&](const char* family, std::int64_t L, const Estimate& e) {
      out << "theta," << family << ',' << L << ",theta," << json(e.value).dump() << ','
          << json(e.half_width).dump() << ',' << e.trials << ',' << e.master_seed << '\n';
    };
    for (const auto& t : report.theta) {
      row("embedded", t.L, t.embedded);
      row("long-range-truncated", t.L, t.full);
    }
  }
  {
    json manifest{{"tool", "trunclab"},
                  {"version", kVersion},
                  {"compiler", __VERSION__},
                  {"master_seed", cfg.master_seed},
                  {"stage_seeds", {{"thresholds", report.seeds.thresholds},
                                   {"zd", report.seeds.zd},
                                   {"theta", report.seeds.theta}}},
                  {"seed_rule", kSeedRule},
                  {"threads_requested", cfg.threads},
                  {"hardware_threads", std::thread::hardware_concurrency()},
                  {"elapsed_seconds", elapsed_seconds},
                  {"calibration", cfg.calibration_path ? cfg.calibration_path->string() : ""},
                  {"outputs", {"report.json", "estimates.csv", "manifest.json"}},
                  {"config", cfg.source_text}};
    std::ofstream out(out_dir / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
}

}  // namespace trunclab
