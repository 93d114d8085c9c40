#include "trunclab/thresholds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "trunclab/errors.hpp"
#include "trunclab/philox.hpp"

namespace trunclab {
namespace {

constexpr double kTarget = 0.5;
constexpr double kScanStep = 0.1;
constexpr double kMinSlope = 1.0;

struct FamilyId {
  std::string name;
  int d;
  int K;
};

FamilyId identify(const Family& f) {
  if (auto* l = std::get_if<LatticeFamily>(&f)) return {"Z^d", l->d, 0};
  if (auto* s = std::get_if<SlabFamily>(&f)) return {"slab", s->d, s->K};
  throw ConfigError("threshold estimation supports Z^d and slab families only");
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("bad number in calibration table: '" + s + "'");
  }
  return v;
}

std::string join_schedule(const std::vector<std::int64_t>& L) {
  std::string s;
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (i) s += ";";
    s += std::to_string(L[i]);
  }
  return s;
}

std::vector<std::int64_t> split_schedule(const std::string& s) {
  std::vector<std::int64_t> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ';')) out.push_back(std::stoll(item));
  return out;
}

struct BracketFailure {
  std::string diagnostics;
};

/// Returns the bracket, or the diagnostics of a non-monotone response.
std::variant<BracketAtL, BracketFailure> bisect_at(const Family& f, std::int64_t L,
                                                   std::uint64_t trials, const PcSettings& s) {
  auto probe = [&](double p) {
    return crossing_estimate(f, p, L, trials, s.master_seed, s.threads).value;
  };

  std::vector<std::pair<double, double>> scan{{0.0, 0.0}};
  for (int i = 1; i <= 9; ++i) {
    const double p = kScanStep * i;
    scan.emplace_back(p, probe(p));
  }
  scan.emplace_back(1.0, 1.0);
  for (std::size_t i = 1; i < scan.size(); ++i) {
    if (scan[i].second < scan[i - 1].second) {
      return BracketFailure{"coarse scan not monotone at L=" + std::to_string(L) + ": f(" +
                            format_double(scan[i - 1].first) + ")=" +
                            format_double(scan[i - 1].second) + " > f(" +
                            format_double(scan[i].first) + ")=" + format_double(scan[i].second)};
    }
  }
  std::size_t hi_idx = 1;
  while (scan[hi_idx].second < kTarget) ++hi_idx;

  BracketAtL b;
  b.L = L;
  double f_lo = scan[hi_idx - 1].second;
  double f_hi = scan[hi_idx].second;
  b.lo = scan[hi_idx - 1].first;
  b.hi = scan[hi_idx].first;
  b.slope = (f_hi - f_lo) / (b.hi - b.lo);

  while (b.hi - b.lo > s.bracket_tol) {
    const double mid = 0.5 * (b.lo + b.hi);
    const double f_mid = probe(mid);
    if (f_mid < f_lo || f_mid > f_hi) {
      return BracketFailure{"bisection response outside its bracket at L=" + std::to_string(L) +
                            ", p=" + format_double(mid)};
    }
    if (f_mid >= kTarget) {
      b.hi = mid;
      f_hi = f_mid;
    } else {
      b.lo = mid;
      f_lo = f_mid;
    }
  }
  return b;
}

}  // namespace

ThresholdEstimate estimate_pc(const Family& family, const PcSettings& settings) {
  const FamilyId id = identify(family);
  if (settings.L_schedule.empty()) throw DomainError("L schedule must be nonempty");
  for (std::size_t i = 0; i < settings.L_schedule.size(); ++i) {
    if (settings.L_schedule[i] < 1 || (i > 0 && settings.L_schedule[i] <= settings.L_schedule[i - 1])) {
      throw DomainError("L schedule must be positive and strictly increasing");
    }
  }
  if (!(settings.bracket_tol > 0.0)) throw DomainError("bracket tolerance must be > 0");
  if (settings.trials_per_probe == 0) throw DomainError("trials per probe must be >= 1");

  ThresholdEstimate est;
  est.family = id.name;
  est.d = id.d;
  est.K = id.K;
  est.L_schedule = settings.L_schedule;
  est.bracket_tol = settings.bracket_tol;
  est.master_seed = settings.master_seed;

  std::uint64_t trials = settings.trials_per_probe;
  std::string diagnostics;
  for (int attempt = 1; attempt <= 2; ++attempt, trials *= 2) {
    est.per_L.clear();
    bool ok = true;
    for (std::int64_t L : settings.L_schedule) {
      auto result = bisect_at(family, L, trials, settings);
      if (auto* failure = std::get_if<BracketFailure>(&result)) {
        diagnostics += (diagnostics.empty() ? "" : "; ") + failure->diagnostics;
        ok = false;
        break;
      }
      est.per_L.push_back(std::get<BracketAtL>(result));
    }
    if (ok) {
      const BracketAtL& last = est.per_L.back();
      est.attempts = attempt;
      est.trials_per_probe = trials;
      est.p_hat = last.p_hat();
      est.bracket_half_width = 0.5 * (last.hi - last.lo);
      est.statistical_term = 1.96 * std::sqrt(0.25 / static_cast<double>(trials)) /
                             std::max(last.slope, kMinSlope);
      est.uncertainty = est.bracket_half_width + est.statistical_term;
      return est;
    }
  }
  throw EstimationError("threshold bracket broken for " + describe(family) + " after retry: " +
                        diagnostics);
}

std::optional<double> reference_pc(const Family& family) {
  auto* l = std::get_if<LatticeFamily>(&family);
  if (!l) {
    auto* s = std::get_if<SlabFamily>(&family);
    if (s && (s->K == 1 || s->d == 2)) return 0.5;
    return std::nullopt;
  }
  switch (l->d) {
    case 2: return 0.5;
    case 3: return 0.2488126;
    case 4: return 0.1601312;
    case 5: return 0.1181718;
    case 6: return 0.0942019;
    default: return std::nullopt;
  }
}

CalibrationRow to_row(const ThresholdEstimate& est) {
  CalibrationRow row;
  row.family = est.family;
  row.d = est.d;
  row.K = est.K;
  row.L_schedule = est.L_schedule;
  row.trials_per_probe = est.trials_per_probe;
  row.bracket_tol = est.bracket_tol;
  row.master_seed = est.master_seed;
  row.p_hat = est.p_hat;
  row.uncertainty = est.uncertainty;
  if (est.family == "Z^d") {
    row.reference = reference_pc(LatticeFamily{est.d});
  } else {
    row.reference = reference_pc(SlabFamily{est.d, est.K});
  }
  return row;
}

ThresholdEstimate from_row(const CalibrationRow& row) {
  ThresholdEstimate est;
  est.family = row.family;
  est.d = row.d;
  est.K = row.K;
  est.p_hat = row.p_hat;
  est.uncertainty = row.uncertainty;
  est.L_schedule = row.L_schedule;
  est.trials_per_probe = row.trials_per_probe;
  est.bracket_tol = row.bracket_tol;
  est.master_seed = row.master_seed;
  est.from_table = true;
  return est;
}

CalibrationTable CalibrationTable::load(const std::filesystem::path& path) {
  CalibrationTable table;
  std::ifstream in(path);
  if (!in) return table;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() == 9) cells.emplace_back();
    if (cells.size() != 10) throw ConfigError("malformed calibration row: " + line);
    CalibrationRow row;
    row.family = cells[0];
    row.d = std::stoi(cells[1]);
    row.K = std::stoi(cells[2]);
    row.L_schedule = split_schedule(cells[3]);
    row.trials_per_probe = std::stoull(cells[4]);
    row.bracket_tol = parse_double(cells[5]);
    row.master_seed = std::stoull(cells[6]);
    row.p_hat = parse_double(cells[7]);
    row.uncertainty = parse_double(cells[8]);
    if (!cells[9].empty()) row.reference = parse_double(cells[9]);
    table.rows_.push_back(row);
  }
  return table;
}

void CalibrationTable::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write calibration table " + path.string());
  out << "# trunclab calibration table\n"
      << "# method: coarse scan p=0.1..0.9 then bisection on P(crossing of (L+1)xL rectangle)=1/2,"
         " reported at the largest L of the schedule\n"
      << "# randomness: " << kSeedRule << ", one master seed shared by every probe\n"
      << "# uncertainty: final bracket half-width + 1.96*0.5/sqrt(trials)/slope\n"
      << "# reference: literature p_c, informational only\n"
      << "family,d,K,L_schedule,trials_per_probe,bracket_tol,master_seed,p_hat,uncertainty,reference\n";
  for (const auto& r : rows_) {
    out << r.family << ',' << r.d << ',' << r.K << ',' << join_schedule(r.L_schedule) << ','
        << r.trials_per_probe << ',' << format_double(r.bracket_tol) << ',' << r.master_seed << ','
        << format_double(r.p_hat) << ',' << format_double(r.uncertainty) << ','
        << (r.reference ? format_double(*r.reference) : std::string()) << '\n';
  }
}

std::optional<CalibrationRow> CalibrationTable::find(const std::string& family, int d, int K,
                                                     const PcSettings& settings) const {
  for (const auto& r : rows_) {
    // trials_per_probe may have doubled on retry; match the requested value or its double
    const bool trials_match = r.trials_per_probe == settings.trials_per_probe ||
                              r.trials_per_probe == 2 * settings.trials_per_probe;
    if (r.family == family && r.d == d && r.K == K && r.L_schedule == settings.L_schedule &&
        r.bracket_tol == settings.bracket_tol && r.master_seed == settings.master_seed && trials_match) {
      return r;
    }
  }
  return std::nullopt;
}

void CalibrationTable::upsert(const CalibrationRow& row) {
  for (auto& r : rows_) {
    if (r.family == row.family && r.d == row.d && r.K == row.K && r.L_schedule == row.L_schedule &&
        r.bracket_tol == row.bracket_tol && r.master_seed == row.master_seed) {
      r = row;
      return;
    }
  }
  rows_.push_back(row);
}

SlabChoice choose_slab_parameters(const EpsilonCertificate& eps, double margin,
                                  const SlabBudget& budget, CalibrationTable& table,
                                  const PcSettings& settings) {
  const double e = eps.epsilon();
  if (!(margin > 0.0 && margin < e)) throw DomainError("margin must satisfy 0 < margin < eps");
  if (budget.d_min < 2 || budget.d_max < budget.d_min || budget.K_max < 1) {
    throw DomainError("invalid (d, K) budget");
  }

  SlabChoice choice;
  double best_shortfall = std::numeric_limits<double>::infinity();
  int best_d = 0;
  int best_K = 0;
  for (int d = budget.d_min; d <= budget.d_max; ++d) {
    for (int K = 1; K <= budget.K_max; ++K) {
      ThresholdEstimate est;
      if (auto row = table.find("slab", d, K, settings)) {
        est = from_row(*row);
      } else {
        est = estimate_pc(SlabFamily{d, K}, settings);
        table.upsert(to_row(est));
      }
      SlabCandidate c{d, K, est.p_hat, est.uncertainty, est.p_hat + est.uncertainty + margin,
                      false, est.from_table};
      c.qualifies = c.lhs < e;
      choice.candidates.push_back(c);
      if (c.qualifies) {
        choice.params = SlabParameters(d, K);
        choice.threshold = est;
        return choice;
      }
      if (c.lhs - e < best_shortfall) {
        best_shortfall = c.lhs - e;
        best_d = d;
        best_K = K;
      }
    }
  }
  throw ParametersNotFound("no slab within d<=" + std::to_string(budget.d_max) + ", K<=" +
                               std::to_string(budget.K_max) + " has p_hat + uncertainty + margin < eps=" +
                               format_double(e) + "; best shortfall " + format_double(best_shortfall) +
                               " at (d=" + std::to_string(best_d) + ", K=" + std::to_string(best_K) + ")",
                           best_shortfall, best_d, best_K);
}

}  // namespace trunclab
