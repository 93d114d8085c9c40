#include "trunclab/embedding.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <utility>

#include "trunclab/errors.hpp"

namespace trunclab {
namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw DomainError("coordinate overflow");
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw DomainError("coordinate overflow");
  return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::string point_str(Point p) {
  return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

}  // namespace

std::vector<Point> translate(const std::vector<Point>& block, Point by) {
  std::vector<Point> out;
  out.reserve(block.size());
  for (Point z : block) out.push_back({checked_add(z.x, by.x), checked_add(z.y, by.y)});
  return out;
}

SlabParameters::SlabParameters(int d, int K) : d_(d), K_(K) {
  if (d < 2) throw InvariantViolation("slab dimension d must be >= 2");
  if (K < 1) throw InvariantViolation("slab thickness K must be >= 1");
}

ScaleVector::ScaleVector(std::vector<Length> scales, const SlabParameters& params)
    : scales_(std::move(scales)) {
  if (static_cast<int>(scales_.size()) != params.d() - 1) {
    throw InvariantViolation("expected d-1 = " + std::to_string(params.d() - 1) + " scales, got " +
                             std::to_string(scales_.size()));
  }
  const Length spread = params.K() + 1;
  Length previous = 0;
  Length digit_sum = 0;  // (K-1) * (n_1 + ... + n_{j-1})
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    const Length n = scales_[i];
    if (n <= checked_mul(spread, previous) || n < 1) {
      throw InvariantViolation("spacing violated: n_" + std::to_string(i + 1) + " = " +
                               std::to_string(n) + " must exceed (K+1) n_" + std::to_string(i) +
                               " = " + std::to_string(spread * previous));
    }
    // Consequence of the spacing rule; the decoder relies on it.
    if (digit_sum >= n) {
      throw InvariantViolation("unique decomposition bound violated at j=" + std::to_string(i + 1));
    }
    digit_sum = checked_add(digit_sum, checked_mul(params.K() - 1, n));
    previous = n;
  }
}

Length ScaleVector::at(int j) const {
  if (j < 1 || j > size()) throw DomainError("scale index j=" + std::to_string(j) + " out of range");
  return scales_[static_cast<std::size_t>(j - 1)];
}

ScaleVector select_scales(const ProbabilitySequence& seq, double eps, const SlabParameters& params,
                          Length search_limit) {
  if (!(eps > 0.0)) throw DomainError("eps must be > 0");
  if (search_limit < 1) throw DomainError("search_limit must be >= 1");
  std::vector<Length> scales;
  Length previous = 0;
  for (int j = 1; j <= params.d() - 1; ++j) {
    Length lower = 0;
    if (__builtin_mul_overflow(static_cast<Length>(params.K() + 1), previous, &lower) ||
        lower >= search_limit) {
      throw HypothesisNotWitnessed(j, lower, search_limit);
    }
    auto found = scan_support(seq, eps, lower, search_limit);
    if (!found) throw HypothesisNotWitnessed(j, lower, search_limit);
    scales.push_back(*found);
    previous = *found;
  }
  return ScaleVector(std::move(scales), params);
}

std::vector<Point> build_block_set(const ScaleVector& scales, const SlabParameters& params, int j) {
  if (j < 0 || j > params.d() - 2) {
    throw DomainError("block index j=" + std::to_string(j) + " outside [0, d-2]");
  }
  std::vector<Point> block{{0, 0}};
  for (int i = 1; i <= j; ++i) {
    std::vector<Point> next;
    next.reserve(block.size() * static_cast<std::size_t>(params.K()));
    for (int m = 0; m < params.K(); ++m) {
      auto shifted = translate(block, {checked_mul(m, scales.at(i)), 0});
      next.insert(next.end(), shifted.begin(), shifted.end());
    }
    block = std::move(next);
  }
  std::sort(block.begin(), block.end());
  return block;
}

std::string to_string(const SlabCoord& c) {
  std::string s = "(m_vec=(";
  for (std::size_t i = 0; i < c.digits.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(c.digits[i]);
  }
  return s + "), k=" + std::to_string(c.k) + ", m=" + std::to_string(c.m) + ")";
}

EmbeddedGraph::EmbeddedGraph(SlabParameters params, ScaleVector scales)
    : params_(params), scales_(std::move(scales)) {
  if (scales_.size() != params_.d() - 1) {
    throw InvariantViolation("scale vector length does not match d-1");
  }
}

Point EmbeddedGraph::encode(const SlabCoord& c) const {
  if (static_cast<int>(c.digits.size()) != params_.confined()) {
    throw DomainError("slab coordinate needs d-2 = " + std::to_string(params_.confined()) +
                      " digits");
  }
  std::int64_t x = checked_mul(c.k, scales_.last());
  for (int i = 1; i <= params_.confined(); ++i) {
    int digit = c.digits[static_cast<std::size_t>(i - 1)];
    if (digit < 0 || digit >= params_.K()) {
      throw DomainError("digit " + std::to_string(digit) + " outside [0, K-1]");
    }
    x = checked_add(x, checked_mul(digit, scales_.at(i)));
  }
  return {x, checked_mul(c.m, scales_.at(1))};
}

std::optional<SlabCoord> EmbeddedGraph::decode(Point p) const {
  const Length n1 = scales_.at(1);
  if (p.y % n1 != 0) return std::nullopt;
  SlabCoord c;
  c.m = p.y / n1;
  c.k = floor_div(p.x, scales_.last());
  std::int64_t rest = p.x - c.k * scales_.last();
  c.digits.assign(static_cast<std::size_t>(params_.confined()), 0);
  for (int i = params_.confined(); i >= 1; --i) {
    std::int64_t digit = rest / scales_.at(i);
    if (digit >= params_.K()) return std::nullopt;
    c.digits[static_cast<std::size_t>(i - 1)] = static_cast<int>(digit);
    rest -= digit * scales_.at(i);
  }
  if (rest != 0) return std::nullopt;
  return c;
}

std::optional<EdgeClass> EmbeddedGraph::edge_class(Point u, Point v) const {
  std::optional<EdgeClass> cls;
  if (u.y == v.y && u.x != v.x) {
    const Length len = std::abs(u.x - v.x);
    for (int j = 1; j <= scales_.size(); ++j) {
      if (scales_.at(j) == len) cls = EdgeClass{EdgeClass::Orientation::Horizontal, j, len};
    }
  } else if (u.x == v.x && std::abs(u.y - v.y) == scales_.at(1)) {
    cls = EdgeClass{EdgeClass::Orientation::Vertical, 1, scales_.at(1)};
  }
  if (!cls || !decode(u) || !decode(v)) return std::nullopt;
  return cls;
}

bool slab_adjacent(const SlabCoord& a, const SlabCoord& b) {
  if (a.digits.size() != b.digits.size()) return false;
  std::int64_t total = std::abs(a.k - b.k) + std::abs(a.m - b.m);
  for (std::size_t i = 0; i < a.digits.size(); ++i) {
    total += std::abs(a.digits[i] - b.digits[i]);
  }
  return total == 1;
}

std::vector<SlabCoord> slab_window(const SlabParameters& params, std::int64_t radius) {
  if (radius < 0) throw DomainError("window radius must be >= 0");
  std::vector<std::vector<int>> digit_sets{{}};
  for (int i = 0; i < params.confined(); ++i) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : digit_sets) {
      for (int digit = 0; digit < params.K(); ++digit) {
        auto d = prefix;
        d.push_back(digit);
        next.push_back(std::move(d));
      }
    }
    digit_sets = std::move(next);
  }
  std::vector<SlabCoord> out;
  out.reserve(digit_sets.size() * static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
  for (const auto& digits : digit_sets) {
    for (std::int64_t k = -radius; k <= radius; ++k) {
      for (std::int64_t m = -radius; m <= radius; ++m) out.push_back({digits, k, m});
    }
  }
  return out;
}

IsomorphismReport verify_isomorphism(const EmbeddedGraph& g, std::int64_t radius,
                                     std::optional<EdgeProbabilityBound> bound) {
  if (radius < 1) throw DomainError("verification window radius must be >= 1");
  IsomorphismReport report;
  report.radius = radius;

  const auto coords = slab_window(g.params(), radius);
  std::vector<Point> points;
  points.reserve(coords.size());
  for (const auto& c : coords) points.push_back(g.encode(c));
  report.vertices = coords.size();

  auto fail = [&](std::string check, std::size_t a, std::size_t b, std::string detail) {
    report.counterexample =
        IsomorphismCounterexample{std::move(check), coords[a], coords[b], points[a], points[b],
                                  std::move(detail)};
    report.passed = false;
    return report;
  };

  // (a) injectivity and round trip
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (points[order[i - 1]] == points[order[i]]) {
      return fail("injectivity", order[i - 1], order[i], "both encode to " + point_str(points[order[i]]));
    }
  }
  for (std::size_t i = 0; i < coords.size(); ++i) {
    auto back = g.decode(points[i]);
    if (!back || *back != coords[i]) {
      return fail("round-trip", i, i, "decode(encode(u)) != u");
    }
  }

  const Length n1 = g.scales().at(1);
  const Length top = g.scales().last();
  std::optional<ProbabilitySequence> truncated;
  if (bound) {
    if (bound->seq == nullptr) throw DomainError("edge probability bound needs a sequence");
    truncated = truncate(*bound->seq, TruncationLevel(top));
  }

  // (b)-(d) every pair in the window
  std::set<std::pair<Point, Point>> image_edges;
  for (std::size_t a = 0; a < coords.size(); ++a) {
    for (std::size_t b = a + 1; b < coords.size(); ++b) {
      const bool adjacent = slab_adjacent(coords[a], coords[b]);
      const auto cls = g.edge_class(points[a], points[b]);
      if (adjacent != cls.has_value()) {
        return fail("adjacency", a, b,
                    adjacent ? "slab neighbours whose images are not an embedded edge"
                             : "embedded edge between non-neighbouring slab vertices");
      }
      if (!adjacent) continue;

      auto key = std::minmax(points[a], points[b]);
      if (!image_edges.insert({key.first, key.second}).second) {
        return fail("distinct-edges", a, b, "two slab edges share one lattice edge");
      }
      const Length len = cls->length;
      if (cls->orientation == EdgeClass::Orientation::Vertical && len != n1) {
        return fail("vertical-length", a, b, "vertical edge of length " + std::to_string(len));
      }
      bool is_scale = false;
      for (Length n : g.scales().values()) is_scale = is_scale || (n == len);
      if (!is_scale) {
        return fail("edge-length", a, b, "length " + std::to_string(len) + " is not a scale");
      }
      report.max_edge_length = std::max(report.max_edge_length, len);
      if (bound) {
        const double p = bound->seq->eval(len);
        const double pt = truncated->eval(len);
        report.min_edge_probability = std::min(report.min_edge_probability.value_or(1.0), p);
        report.min_edge_probability_truncated =
            std::min(report.min_edge_probability_truncated.value_or(1.0), pt);
        if (!(p >= bound->eps) || !(pt >= bound->eps)) {
          return fail("edge-probability", a, b,
                      "p_" + std::to_string(len) + " below eps under the " +
                          (p >= bound->eps ? "truncated" : "untruncated") + " measure");
        }
      }
    }
  }
  report.edges = image_edges.size();

  if (report.max_edge_length != top) {
    return fail("max-length", 0, 0,
                "longest image edge " + std::to_string(report.max_edge_length) +
                    " differs from n_{d-1} = " + std::to_string(top));
  }
  report.passed = true;
  return report;
}

}  // namespace trunclab
