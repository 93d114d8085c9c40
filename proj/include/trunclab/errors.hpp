#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace trunclab {

/// Argument outside the mathematical domain of an operation (n = 0, j out of range, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A domain type was constructed with values violating its invariants.
class InvariantViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent configuration / window description.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The scale recursion could not find a length l with p_l >= eps below the
/// search limit. `step()` is the 1-based recursion index that failed.
class HypothesisNotWitnessed : public std::runtime_error {
 public:
  HypothesisNotWitnessed(int step, std::int64_t lower_exclusive, std::int64_t search_limit)
      : std::runtime_error("hypothesis not witnessed at scale step j=" + std::to_string(step) +
                           ": no l in (" + std::to_string(lower_exclusive) + ", " +
                           std::to_string(search_limit) + "] with p_l >= eps"),
        step_(step),
        lower_(lower_exclusive),
        limit_(search_limit) {}

  int step() const noexcept { return step_; }
  std::int64_t lower_exclusive() const noexcept { return lower_; }
  std::int64_t search_limit() const noexcept { return limit_; }

 private:
  int step_;
  std::int64_t lower_;
  std::int64_t limit_;
};

/// No (d, K) within budget satisfied the slab threshold inequality.
class ParametersNotFound : public std::runtime_error {
 public:
  ParametersNotFound(const std::string& what, double best_shortfall, int best_d, int best_K)
      : std::runtime_error(what), shortfall_(best_shortfall), best_d_(best_d), best_K_(best_K) {}

  /// min over candidates of (p_hat + uncertainty + margin - eps); positive by construction.
  double best_shortfall() const noexcept { return shortfall_; }
  int best_d() const noexcept { return best_d_; }
  int best_K() const noexcept { return best_K_; }

 private:
  double shortfall_;
  int best_d_;
  int best_K_;
};

/// Threshold bisection could not maintain a bracket even after the retry.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trunclab
