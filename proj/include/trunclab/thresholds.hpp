#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trunclab/embedding.hpp"
#include "trunclab/percolation.hpp"
#include "trunclab/sequence.hpp"

namespace trunclab {

struct PcSettings {
  std::vector<std::int64_t> L_schedule{16, 32};
  double bracket_tol = 0.005;
  std::uint64_t trials_per_probe = 1000;
  std::uint64_t master_seed = 1;
  unsigned threads = 0;
};

/// Bisection result at a single window size.
struct BracketAtL {
  std::int64_t L = 0;
  double lo = 0.0;
  double hi = 1.0;
  double slope = 0.0;  // crossing probability per unit p across the coarse-scan cell
  double p_hat() const { return 0.5 * (lo + hi); }
};

/// p where the crossing probability of the (L+1) x L rectangle equals 1/2,
/// at the largest L of the schedule.
struct ThresholdEstimate {
  std::string family;  // "Z^d" or "slab"
  int d = 2;
  int K = 0;  // 0 for Z^d
  double p_hat = 0.0;
  double bracket_half_width = 0.0;
  double statistical_term = 0.0;
  double uncertainty = 0.0;  // bracket_half_width + statistical_term
  std::vector<std::int64_t> L_schedule;
  std::vector<BracketAtL> per_L;  // empty when read back from a calibration table
  std::uint64_t trials_per_probe = 0;
  double bracket_tol = 0.0;
  std::uint64_t master_seed = 0;
  int attempts = 1;
  bool from_table = false;
};

/// Coarse scan p = 0.1..0.9, then bisection on crossing probability = 1/2 at
/// every L of the schedule. All probes share `master_seed`, so the response is
/// monotone in p trial by trial. A broken bracket triggers one retry with twice
/// the trials, then EstimationError.
ThresholdEstimate estimate_pc(const Family& family, const PcSettings& settings);

/// Literature value of p_c(Z^d) bond percolation, for reference columns only.
std::optional<double> reference_pc(const Family& family);

struct CalibrationRow {
  std::string family;
  int d = 2;
  int K = 0;
  std::vector<std::int64_t> L_schedule;
  std::uint64_t trials_per_probe = 0;
  double bracket_tol = 0.0;
  std::uint64_t master_seed = 0;
  double p_hat = 0.0;
  double uncertainty = 0.0;
  std::optional<double> reference;
};

/// Persisted threshold estimates, CSV with '#' header comments.
class CalibrationTable {
 public:
  static CalibrationTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Row with the same family and the same method settings, if any.
  std::optional<CalibrationRow> find(const std::string& family, int d, int K,
                                     const PcSettings& settings) const;
  void upsert(const CalibrationRow& row);

  const std::vector<CalibrationRow>& rows() const noexcept { return rows_; }

 private:
  std::vector<CalibrationRow> rows_;
};

CalibrationRow to_row(const ThresholdEstimate& est);
ThresholdEstimate from_row(const CalibrationRow& row);

struct SlabBudget {
  int d_min = 3;
  int d_max = 6;
  int K_max = 4;
};

struct SlabCandidate {
  int d = 0;
  int K = 0;
  double p_hat = 0.0;
  double uncertainty = 0.0;
  double lhs = 0.0;  // p_hat + uncertainty + margin, compared against eps
  bool qualifies = false;
  bool from_table = false;
};

struct SlabChoice {
  SlabParameters params{3, 1};
  ThresholdEstimate threshold;
  std::vector<SlabCandidate> candidates;  // every pair examined, in search order
};

/// First (d, K) in order of increasing d then K with p_hat + uncertainty + margin < eps.
/// Reuses matching rows of `table` and inserts freshly computed ones.
/// Throws DomainError unless 0 < margin < eps, ParametersNotFound when the budget is exhausted.
SlabChoice choose_slab_parameters(const EpsilonCertificate& eps, double margin,
                                  const SlabBudget& budget, CalibrationTable& table,
                                  const PcSettings& settings);

}  // namespace trunclab
