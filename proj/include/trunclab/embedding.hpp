#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trunclab/sequence.hpp"

namespace trunclab {

/// A point of Z^2.
struct Point {
  std::int64_t x = 0;
  std::int64_t y = 0;
  auto operator<=>(const Point&) const = default;
};

/// Translation T_x B = { z + x : z in B }.
std::vector<Point> translate(const std::vector<Point>& block, Point by);

/// Slab {0..K-1}^(d-2) x Z^2 and the ambient dimension d it approximates.
/// d = 2 gives Z^2 itself; K = 1 collapses the slab to Z^2 as well.
class SlabParameters {
 public:
  SlabParameters(int d, int K);

  int d() const noexcept { return d_; }
  int K() const noexcept { return K_; }
  /// Number of confined coordinates, d - 2.
  int confined() const noexcept { return d_ - 2; }

  bool operator==(const SlabParameters&) const = default;

 private:
  int d_;
  int K_;
};

/// Scales n_1 < ... < n_{d-1} with n_j > (K+1) n_{j-1}, n_0 = 0.
class ScaleVector {
 public:
  /// Throws InvariantViolation unless there are exactly d-1 scales obeying the spacing rule.
  ScaleVector(std::vector<Length> scales, const SlabParameters& params);

  /// n_j for 1 <= j <= d-1.
  Length at(int j) const;
  int size() const noexcept { return static_cast<int>(scales_.size()); }
  const std::vector<Length>& values() const noexcept { return scales_; }
  Length last() const noexcept { return scales_.back(); }

 private:
  std::vector<Length> scales_;
};

/// n_j = min { l > (K+1) n_{j-1} : p_l >= eps }, j = 1..d-1, searching l <= search_limit.
/// Throws HypothesisNotWitnessed naming the failing step.
ScaleVector select_scales(const ProbabilitySequence& seq, double eps, const SlabParameters& params,
                          Length search_limit);

/// B_0 = {(0,0)}, B_j = union_{m<K} T_{m(n_j,0)} B_{j-1}. Sorted. Requires 0 <= j <= d-2.
std::vector<Point> build_block_set(const ScaleVector& scales, const SlabParameters& params, int j);

/// Coordinates of a slab vertex. digits[i-1] multiplies n_i (i = 1..d-2); each digit
/// is in {0..K-1} (the slab's {1..K} shifted by one). k indexes copies along x
/// in steps of n_{d-1}, m indexes rows in steps of n_1.
struct SlabCoord {
  std::vector<int> digits;
  std::int64_t k = 0;
  std::int64_t m = 0;
  auto operator<=>(const SlabCoord&) const = default;
};

std::string to_string(const SlabCoord& c);

struct EdgeClass {
  enum class Orientation { Horizontal, Vertical };
  Orientation orientation = Orientation::Horizontal;
  int j = 1;  // horizontal edges have length n_j; vertical ones always have j = 1
  Length length = 0;
  bool operator==(const EdgeClass&) const = default;
};

/// The embedded graph (V_{d-1}, E_{d-1}) inside Z^2.
class EmbeddedGraph {
 public:
  EmbeddedGraph(SlabParameters params, ScaleVector scales);

  const SlabParameters& params() const noexcept { return params_; }
  const ScaleVector& scales() const noexcept { return scales_; }

  /// (k n_{d-1} + sum_i digits_i n_i, m n_1). Throws DomainError on a bad digit.
  Point encode(const SlabCoord& c) const;
  /// Unique preimage under encode, or nullopt if p is not in V_{d-1}.
  std::optional<SlabCoord> decode(Point p) const;
  /// Edge class if {u, v} is in E_{d-1}.
  std::optional<EdgeClass> edge_class(Point u, Point v) const;

 private:
  SlabParameters params_;
  ScaleVector scales_;
};

/// Unit step in exactly one slab coordinate.
bool slab_adjacent(const SlabCoord& a, const SlabCoord& b);

/// All slab coordinates with |k| <= radius, |m| <= radius, in lexicographic order.
std::vector<SlabCoord> slab_window(const SlabParameters& params, std::int64_t radius);

struct IsomorphismCounterexample {
  std::string check;
  SlabCoord u;
  SlabCoord v;
  Point pu;
  Point pv;
  std::string detail;
};

struct IsomorphismReport {
  bool passed = false;
  std::int64_t radius = 0;
  std::size_t vertices = 0;
  std::size_t edges = 0;
  Length max_edge_length = 0;
  /// min over image edges of p_len, untruncated and truncated at N = n_{d-1};
  /// only filled when a sequence is supplied.
  std::optional<double> min_edge_probability;
  std::optional<double> min_edge_probability_truncated;
  std::optional<IsomorphismCounterexample> counterexample;
};

/// Sequence and eps against which the image-edge probabilities are checked.
struct EdgeProbabilityBound {
  const ProbabilitySequence* seq = nullptr;
  double eps = 0.0;
};

/// Exhaustive check over the slab window |k|, |m| <= radius (radius >= 1):
/// encode is injective and inverted by decode, slab adjacency coincides with
/// membership in E_{d-1}, image edges are distinct lattice edges with lengths in
/// {n_j}, vertical ones have length n_1, the longest has length n_{d-1}, and
/// (when `bound` is given) every image edge has p >= eps with and without
/// truncation at n_{d-1}.
IsomorphismReport verify_isomorphism(const EmbeddedGraph& g, std::int64_t radius,
                                     std::optional<EdgeProbabilityBound> bound = std::nullopt);

}  // namespace trunclab
