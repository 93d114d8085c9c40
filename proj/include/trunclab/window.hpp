#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "trunclab/embedding.hpp"
#include "trunclab/sequence.hpp"

namespace trunclab {

using VertexId = std::uint32_t;

struct WindowEdge {
  VertexId u = 0;
  VertexId v = 0;
  double p = 0.0;
  /// Identity of the edge for the random stream. Z^2-embedded families use the
  /// lattice edge itself, so windows sharing a lattice edge share its uniform.
  std::uint64_t key = 0;
  /// Lattice length for Z^2 families, 1 for nearest-neighbour boxes.
  Length length = 1;
};

enum class WindowFamily { Custom, LongRange, Lattice, Embedded };

std::string to_string(WindowFamily f);

/// Finite graph with per-edge open probabilities and the terminal sets used by
/// crossing / origin-to-boundary events. Immutable once built.
struct GraphWindow {
  WindowFamily family = WindowFamily::Custom;
  int dim = 0;
  std::vector<std::int64_t> coords;  // vertex i occupies coords[i*dim, (i+1)*dim)
  std::vector<WindowEdge> edges;
  std::optional<VertexId> origin;
  std::vector<std::uint8_t> boundary;  // 1 if vertex lies on the window boundary
  std::vector<VertexId> left;          // crossing sources
  std::vector<VertexId> right;         // crossing targets
  std::string description;

  std::uint32_t vertex_count() const { return static_cast<std::uint32_t>(boundary.size()); }
  std::span<const std::int64_t> vertex(VertexId v) const {
    return {coords.data() + static_cast<std::size_t>(v) * dim, static_cast<std::size_t>(dim)};
  }
  /// Vertex with the given coordinates, if present (binary search; coords are sorted).
  std::optional<VertexId> find_vertex(std::span<const std::int64_t> c) const;
};

struct Interval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// Z^2 with every axis-parallel edge of length <= N (or <= the box span when
/// untruncated) inside the box, open with p_len.
struct LongRangeSpec {
  ProbabilitySequence seq;
  std::optional<Length> truncation;
  Interval x;
  Interval y;
};

/// Nearest-neighbour box in Z^dim with uniform p. The first `confined_axes` axes
/// are slab thickness directions: never boundary, never the crossing axis.
struct LatticeSpec {
  std::vector<Interval> extents;
  double p = 0.0;
  int confined_axes = 0;
  int crossing_axis = 0;
};

/// V_{d-1} inside the box [-L n_{d-1}, L n_{d-1}] x [-L n_1, L n_1], edges of
/// E_{d-1} between them, open with p_{n_j} of the (optionally truncated) sequence.
struct EmbeddedSpec {
  EmbeddedGraph graph;
  ProbabilitySequence seq;
  std::optional<Length> truncation;
  std::int64_t radius = 1;
};

struct CustomSpec {
  std::uint32_t vertices = 0;
  struct Edge {
    VertexId u;
    VertexId v;
    double p;
  };
  std::vector<Edge> edges;
  std::optional<VertexId> origin;
  std::vector<VertexId> boundary;
  std::vector<VertexId> left;
  std::vector<VertexId> right;
};

using WindowSpec = std::variant<LongRangeSpec, LatticeSpec, EmbeddedSpec, CustomSpec>;

/// Deterministic: identical specs give identical vertex and edge orderings.
/// Throws ConfigError on inconsistent specs.
GraphWindow build_window(const WindowSpec& spec);

/// Slab {0..K-1}^(d-2) x [x] x [y] as a lattice spec crossing along x.
LatticeSpec slab_spec(int d, int K, Interval x, Interval y, double p);

/// Z^2 box [x] x [y] with every edge length of the embedded graph's box,
/// i.e. the full truncated process covering an embedded window of the same radius.
LongRangeSpec covering_long_range_spec(const EmbeddedGraph& g, const ProbabilitySequence& seq,
                                       Length truncation, std::int64_t radius);

/// Canonical 64-bit key of the Z^2 lattice edge from `lower` of the given length.
std::uint64_t lattice_edge_key(Point lower, Length length, bool vertical);

}  // namespace trunclab
