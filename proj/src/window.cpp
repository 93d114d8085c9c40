#include "trunclab/window.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "trunclab/errors.hpp"

namespace trunclab {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::int64_t kCoordOffset = std::int64_t{1} << 20;
constexpr std::uint64_t kMaxVertices = 50'000'000;

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("edge probability outside [0, 1]");
}

std::uint64_t checked_box_size(const std::vector<Interval>& extents) {
  std::uint64_t count = 1;
  for (const auto& e : extents) {
    if (e.hi < e.lo) throw ConfigError("empty window extent");
    count *= static_cast<std::uint64_t>(e.hi - e.lo + 1);
    if (count > kMaxVertices) throw ConfigError("window exceeds the vertex limit");
  }
  return count;
}

GraphWindow build_long_range(const LongRangeSpec& s) {
  checked_box_size({s.x, s.y});
  GraphWindow w;
  w.family = WindowFamily::LongRange;
  w.dim = 2;
  const std::int64_t nx = s.x.hi - s.x.lo + 1;
  const std::int64_t ny = s.y.hi - s.y.lo + 1;
  const Length span = std::max(nx, ny) - 1;
  const Length max_len = s.truncation ? std::min(*s.truncation, span) : span;
  const ProbabilitySequence law =
      s.truncation ? truncate(s.seq, TruncationLevel(*s.truncation)) : s.seq;

  std::vector<double> p_by_len(static_cast<std::size_t>(max_len) + 1, 0.0);
  for (Length l = 1; l <= max_len; ++l) p_by_len[static_cast<std::size_t>(l)] = law.eval(l);

  auto index = [&](std::int64_t x, std::int64_t y) {
    return static_cast<VertexId>((x - s.x.lo) * ny + (y - s.y.lo));
  };
  w.coords.reserve(static_cast<std::size_t>(2 * nx * ny));
  w.boundary.reserve(static_cast<std::size_t>(nx * ny));
  for (std::int64_t x = s.x.lo; x <= s.x.hi; ++x) {
    for (std::int64_t y = s.y.lo; y <= s.y.hi; ++y) {
      const VertexId id = index(x, y);
      w.coords.push_back(x);
      w.coords.push_back(y);
      w.boundary.push_back(x == s.x.lo || x == s.x.hi || y == s.y.lo || y == s.y.hi);
      if (x == s.x.lo) w.left.push_back(id);
      if (x == s.x.hi) w.right.push_back(id);
      if (x == 0 && y == 0) w.origin = id;
      for (Length l = 1; l <= max_len && x + l <= s.x.hi; ++l) {
        w.edges.push_back({id, index(x + l, y), p_by_len[static_cast<std::size_t>(l)],
                           lattice_edge_key({x, y}, l, false), l});
      }
      for (Length l = 1; l <= max_len && y + l <= s.y.hi; ++l) {
        w.edges.push_back({id, index(x, y + l), p_by_len[static_cast<std::size_t>(l)],
                           lattice_edge_key({x, y}, l, true), l});
      }
    }
  }
  w.description = "long-range Z^2 [" + std::to_string(s.x.lo) + "," + std::to_string(s.x.hi) +
                  "]x[" + std::to_string(s.y.lo) + "," + std::to_string(s.y.hi) + "], " +
                  law.describe();
  return w;
}

GraphWindow build_lattice(const LatticeSpec& s) {
  const int dim = static_cast<int>(s.extents.size());
  if (dim < 1) throw ConfigError("lattice window needs at least one axis");
  if (s.confined_axes < 0 || s.confined_axes >= dim) {
    throw ConfigError("confined axes must leave at least one infinite axis");
  }
  if (s.crossing_axis < s.confined_axes || s.crossing_axis >= dim) {
    throw ConfigError("crossing axis must be one of the infinite axes");
  }
  check_probability(s.p);
  const auto total = checked_box_size(s.extents);

  GraphWindow w;
  w.family = WindowFamily::Lattice;
  w.dim = dim;
  std::vector<std::int64_t> stride(static_cast<std::size_t>(dim), 1);
  for (int a = dim - 2; a >= 0; --a) {
    const auto& e = s.extents[static_cast<std::size_t>(a + 1)];
    stride[static_cast<std::size_t>(a)] = stride[static_cast<std::size_t>(a + 1)] * (e.hi - e.lo + 1);
  }
  w.coords.reserve(total * static_cast<std::size_t>(dim));
  w.boundary.reserve(total);
  std::vector<std::int64_t> c(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a) c[static_cast<std::size_t>(a)] = s.extents[static_cast<std::size_t>(a)].lo;

  for (std::uint64_t id = 0; id < total; ++id) {
    bool on_boundary = false;
    bool at_origin = true;
    for (int a = 0; a < dim; ++a) {
      const auto& e = s.extents[static_cast<std::size_t>(a)];
      const auto x = c[static_cast<std::size_t>(a)];
      w.coords.push_back(x);
      if (a >= s.confined_axes && (x == e.lo || x == e.hi)) on_boundary = true;
      at_origin = at_origin && x == 0;
    }
    const auto vid = static_cast<VertexId>(id);
    w.boundary.push_back(on_boundary);
    if (at_origin) w.origin = vid;
    const auto& cross = s.extents[static_cast<std::size_t>(s.crossing_axis)];
    if (c[static_cast<std::size_t>(s.crossing_axis)] == cross.lo) w.left.push_back(vid);
    if (c[static_cast<std::size_t>(s.crossing_axis)] == cross.hi) w.right.push_back(vid);
    for (int a = 0; a < dim; ++a) {
      if (c[static_cast<std::size_t>(a)] < s.extents[static_cast<std::size_t>(a)].hi) {
        const auto nb = static_cast<VertexId>(id + static_cast<std::uint64_t>(stride[static_cast<std::size_t>(a)]));
        w.edges.push_back({vid, nb, s.p, static_cast<std::uint64_t>(w.edges.size()), 1});
      }
    }
    for (int a = dim - 1; a >= 0; --a) {
      auto& x = c[static_cast<std::size_t>(a)];
      if (x < s.extents[static_cast<std::size_t>(a)].hi) {
        ++x;
        break;
      }
      x = s.extents[static_cast<std::size_t>(a)].lo;
    }
  }
  w.description = "lattice Z^" + std::to_string(dim) + " box";
  if (s.confined_axes > 0) w.description += " (" + std::to_string(s.confined_axes) + " confined axes)";
  w.description += ", p=" + std::to_string(s.p);
  return w;
}

GraphWindow build_embedded(const EmbeddedSpec& s) {
  if (s.radius < 1) throw ConfigError("embedded window radius must be >= 1");
  const auto& g = s.graph;
  const Length top = g.scales().last();
  const Length n1 = g.scales().at(1);
  const std::int64_t rx = s.radius * top;
  const std::int64_t ry = s.radius * n1;
  const ProbabilitySequence law =
      s.truncation ? truncate(s.seq, TruncationLevel(*s.truncation)) : s.seq;

  // Digits only move x forward, so copies k in [-L-1, L] cover [-rx, rx].
  std::vector<Point> pts;
  for (const auto& c : slab_window(g.params(), s.radius + 1)) {
    if (c.k > s.radius || std::abs(c.m) > s.radius) continue;
    const Point p = g.encode(c);
    if (p.x >= -rx && p.x <= rx) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  if (pts.size() > kMaxVertices) throw ConfigError("window exceeds the vertex limit");

  GraphWindow w;
  w.family = WindowFamily::Embedded;
  w.dim = 2;
  w.coords.reserve(pts.size() * 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    w.coords.push_back(pts[i].x);
    w.coords.push_back(pts[i].y);
    w.boundary.push_back(std::abs(pts[i].x) == rx || std::abs(pts[i].y) == ry);
    if (pts[i] == Point{0, 0}) w.origin = static_cast<VertexId>(i);
  }
  auto lookup = [&](Point q) -> std::optional<VertexId> {
    auto it = std::lower_bound(pts.begin(), pts.end(), q);
    if (it == pts.end() || *it != q) return std::nullopt;
    return static_cast<VertexId>(it - pts.begin());
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point u = pts[i];
    for (int j = 1; j <= g.scales().size(); ++j) {
      const Length len = g.scales().at(j);
      if (auto v = lookup({u.x + len, u.y})) {
        w.edges.push_back({static_cast<VertexId>(i), *v, law.eval(len), lattice_edge_key(u, len, false), len});
      }
    }
    if (auto v = lookup({u.x, u.y + n1})) {
      w.edges.push_back({static_cast<VertexId>(i), *v, law.eval(n1), lattice_edge_key(u, n1, true), n1});
    }
  }
  w.description = "embedded slab d=" + std::to_string(g.params().d()) +
                  " K=" + std::to_string(g.params().K()) + " radius " + std::to_string(s.radius) +
                  ", " + law.describe();
  return w;
}

GraphWindow build_custom(const CustomSpec& s) {
  GraphWindow w;
  w.family = WindowFamily::Custom;
  w.dim = 1;
  for (VertexId v = 0; v < s.vertices; ++v) w.coords.push_back(v);
  w.boundary.assign(s.vertices, 0);
  auto check = [&](VertexId v) {
    if (v >= s.vertices) throw ConfigError("custom window vertex out of range");
    return v;
  };
  for (VertexId b : s.boundary) w.boundary[check(b)] = 1;
  for (const auto& e : s.edges) {
    check_probability(e.p);
    w.edges.push_back({check(e.u), check(e.v), e.p, static_cast<std::uint64_t>(w.edges.size()), 1});
  }
  if (s.origin) w.origin = check(*s.origin);
  for (VertexId v : s.left) w.left.push_back(check(v));
  for (VertexId v : s.right) w.right.push_back(check(v));
  w.description = "custom graph with " + std::to_string(s.vertices) + " vertices";
  return w;
}

}  // namespace

std::string to_string(WindowFamily f) {
  switch (f) {
    case WindowFamily::Custom: return "custom";
    case WindowFamily::LongRange: return "long-range";
    case WindowFamily::Lattice: return "lattice";
    case WindowFamily::Embedded: return "embedded";
  }
  return "unknown";
}

std::optional<VertexId> GraphWindow::find_vertex(std::span<const std::int64_t> c) const {
  if (static_cast<int>(c.size()) != dim) return std::nullopt;
  std::uint32_t lo = 0;
  std::uint32_t hi = vertex_count();
  while (lo < hi) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    const auto v = vertex(mid);
    if (std::lexicographical_compare(v.begin(), v.end(), c.begin(), c.end())) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < vertex_count() && std::equal(c.begin(), c.end(), vertex(lo).begin())) return lo;
  return std::nullopt;
}

GraphWindow build_window(const WindowSpec& spec) {
  return std::visit(overloaded{
                        [](const LongRangeSpec& s) { return build_long_range(s); },
                        [](const LatticeSpec& s) { return build_lattice(s); },
                        [](const EmbeddedSpec& s) { return build_embedded(s); },
                        [](const CustomSpec& s) { return build_custom(s); },
                    },
                    spec);
}

LatticeSpec slab_spec(int d, int K, Interval x, Interval y, double p) {
  if (d < 2) throw ConfigError("slab needs d >= 2");
  if (K < 1) throw ConfigError("slab needs K >= 1");
  LatticeSpec s;
  s.extents.assign(static_cast<std::size_t>(d - 2), Interval{0, K - 1});
  s.extents.push_back(x);
  s.extents.push_back(y);
  s.p = p;
  s.confined_axes = d - 2;
  s.crossing_axis = d - 2;
  return s;
}

LongRangeSpec covering_long_range_spec(const EmbeddedGraph& g, const ProbabilitySequence& seq,
                                       Length truncation, std::int64_t radius) {
  const std::int64_t rx = radius * g.scales().last();
  const std::int64_t ry = radius * g.scales().at(1);
  return LongRangeSpec{seq, truncation, {-rx, rx}, {-ry, ry}};
}

std::uint64_t lattice_edge_key(Point lower, Length length, bool vertical) {
  const std::int64_t x = lower.x + kCoordOffset;
  const std::int64_t y = lower.y + kCoordOffset;
  const std::int64_t len = length - 1;
  constexpr std::int64_t limit = std::int64_t{1} << 21;
  if (x < 0 || x >= limit || y < 0 || y >= limit || len < 0 || len >= limit) {
    throw ConfigError("lattice edge outside the keyable range |coord| < 2^20, length <= 2^21");
  }
  return (static_cast<std::uint64_t>(x) << 43) | (static_cast<std::uint64_t>(y) << 22) |
         (static_cast<std::uint64_t>(len) << 1) | (vertical ? 1u : 0u);
}

}  // namespace trunclab
