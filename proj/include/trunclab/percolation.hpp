#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trunclab/union_find.hpp"
#include "trunclab/window.hpp"

namespace trunclab {

/// Union-find over the window's vertices after one Bernoulli sample.
struct ClusterState {
  UnionFind forest;
  std::vector<std::uint8_t> open;  // per window edge
};

/// Edge states of trial `trial` under `master_seed`: edge e is open iff
/// uniform(master_seed, trial, e.key) < e.p.
std::vector<std::uint8_t> sample_open_edges(const GraphWindow& w, std::uint64_t master_seed,
                                            std::uint64_t trial);

ClusterState sample_and_cluster(const GraphWindow& w, std::uint64_t master_seed, std::uint64_t trial);

struct Event {
  enum class Kind { Crossing, OriginBoundary, Connects };
  Kind kind = Kind::Crossing;
  VertexId u = 0;
  VertexId v = 0;

  static Event crossing() { return {Kind::Crossing, 0, 0}; }
  static Event origin_boundary() { return {Kind::OriginBoundary, 0, 0}; }
  static Event connects(VertexId a, VertexId b) { return {Kind::Connects, a, b}; }
};

std::string to_string(Event::Kind k);

/// Whether the event holds in the clustered configuration. Throws DomainError
/// if the window lacks the terminals the event needs.
bool event_holds(const GraphWindow& w, UnionFind& forest, const Event& e);

struct Estimate {
  double value = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double half_width = 0.0;  // 1.96 * sqrt(value (1 - value) / trials)
  std::uint64_t master_seed = 0;
  std::string seed_rule;

  /// Binomial standard error sqrt(value (1 - value) / trials).
  double standard_error() const;
};

Estimate make_estimate(std::uint64_t successes, std::uint64_t trials, std::uint64_t master_seed);

/// Monte Carlo probability of `e` over trials 0..trials-1. Trials are split
/// into contiguous blocks across `threads` workers (0 = hardware concurrency);
/// the result does not depend on the thread count.
Estimate estimate_event(const GraphWindow& w, const Event& e, std::uint64_t trials,
                        std::uint64_t master_seed, unsigned threads = 0);

/// Fraction of trials where the origin's cluster touches the window boundary.
Estimate origin_boundary_estimate(const GraphWindow& w, std::uint64_t trials,
                                  std::uint64_t master_seed, unsigned threads = 0);

/// Nearest-neighbour Z^d.
struct LatticeFamily {
  int d = 2;
};
/// Slab {0..K-1}^(d-2) x Z^2.
struct SlabFamily {
  int d = 3;
  int K = 1;
};
/// Long-range Z^2 with the given law; crossing probabilities ignore `p`.
struct LongRangeFamily {
  ProbabilitySequence seq;
  std::optional<Length> truncation;
};

using Family = std::variant<LatticeFamily, SlabFamily, LongRangeFamily>;

std::string describe(const Family& f);

/// Rectangle {0..L+1} x {0..L} in the two infinite coordinates (remaining
/// infinite axes of Z^d span {0..L}, confined axes take full thickness),
/// crossing along the first infinite axis.
WindowSpec crossing_window_spec(const Family& f, double p, std::int64_t L);

/// Box [-L, L] in every infinite coordinate with the origin at its centre.
WindowSpec theta_window_spec(const Family& f, double p, std::int64_t L);

/// Probability of an open crossing of the (L+1) x L rectangle.
Estimate crossing_estimate(const Family& f, double p, std::int64_t L, std::uint64_t trials,
                           std::uint64_t master_seed, unsigned threads = 0);

inline constexpr std::size_t kMaxExactEdges = 22;

/// Sum of product-Bernoulli weights over all 2^|E| configurations where the
/// event holds, connectivity decided by breadth-first search. Throws
/// DomainError above kMaxExactEdges edges.
double exact_event_probability(const GraphWindow& w, const Event& e);

}  // namespace trunclab
