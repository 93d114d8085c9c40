#include <doctest.h>

#include <cmath>
#include <set>
#include <random>

#include "support/oracles.hpp"
#include "trunclab/errors.hpp"
#include "trunclab/percolation.hpp"
#include "trunclab/philox.hpp"

using namespace trunclab;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using philox::block;
  CHECK(block({0, 0, 0, 0}, {0, 0}) == philox::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        philox::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        philox::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniforms lie in [0,1) and depend on every argument") {
  double u = uniform(1, 2, 3);
  CHECK(u >= 0.0);
  CHECK(u < 1.0);
  CHECK(uniform(1, 2, 3) == u);
  CHECK(uniform(2, 2, 3) != u);
  CHECK(uniform(1, 3, 3) != u);
  CHECK(uniform(1, 2, 4) != u);
}

TEST_CASE("build_window edge counts") {
  auto nn = build_window(LongRangeSpec{ProbabilitySequence::constant(0.5), 1, {0, 1}, {0, 1}});
  CHECK(nn.vertex_count() == 4u);
  CHECK(nn.edges.size() == 4u);

  auto lr = build_window(LongRangeSpec{ProbabilitySequence::constant(0.5), 2, {0, 2}, {0, 0}});
  REQUIRE(lr.edges.size() == 3u);
  std::multiset<Length> lengths;
  for (const auto& e : lr.edges) lengths.insert(e.length);
  CHECK(lengths == std::multiset<Length>{1, 1, 2});

  // {0,1} x {0,1} x {0,1}: 4 edges along each of the three axes
  auto slab = build_window(slab_spec(3, 2, {0, 1}, {0, 1}, 0.5));
  CHECK(slab.vertex_count() == 8u);
  CHECK(slab.edges.size() == 12u);

  CHECK_THROWS_AS(build_window(slab_spec(1, 2, {0, 1}, {0, 1}, 0.5)), ConfigError);
  CHECK_THROWS_AS(build_window(LatticeSpec{{{0, 1}}, 1.5}), ConfigError);
  CHECK_THROWS_AS(build_window(LatticeSpec{{{2, 1}}, 0.5}), ConfigError);
}

TEST_CASE("long-range windows carry every edge up to the truncation and none beyond") {
  auto seq = ProbabilitySequence::lacunary_powers(2, 0.9, 0.1);
  for (Length N : {1, 3, 4, 9}) {
    auto w = build_window(LongRangeSpec{seq, N, {-4, 4}, {-2, 3}});
    std::size_t expected = 0;
    for (Length l = 1; l <= N; ++l) {
      expected += static_cast<std::size_t>(std::max<Length>(0, 9 - l) * 6);  // horizontal
      expected += static_cast<std::size_t>(std::max<Length>(0, 6 - l) * 9);  // vertical
    }
    CHECK(w.edges.size() == expected);
    for (const auto& e : w.edges) {
      CHECK(e.length <= N);
      CHECK(e.p == seq.eval(e.length));
    }
  }
  auto untruncated = build_window(LongRangeSpec{seq, std::nullopt, {0, 5}, {0, 0}});
  CHECK(untruncated.edges.size() == 15u);
}

TEST_CASE("windows are deterministic") {
  auto spec = LongRangeSpec{ProbabilitySequence::power_law(1.0, 1.5), 5, {-3, 3}, {-3, 3}};
  auto a = build_window(spec);
  auto b = build_window(spec);
  REQUIRE(a.edges.size() == b.edges.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].u == b.edges[i].u);
    CHECK(a.edges[i].v == b.edges[i].v);
    CHECK(a.edges[i].key == b.edges[i].key);
  }
  CHECK(a.coords == b.coords);
}

TEST_CASE("find_vertex locates coordinates") {
  auto w = build_window(slab_spec(4, 3, {-2, 2}, {-1, 1}, 0.5));
  std::vector<std::int64_t> c{2, 1, -2, 0};
  auto v = w.find_vertex(c);
  REQUIRE(v);
  CHECK(std::vector<std::int64_t>(w.vertex(*v).begin(), w.vertex(*v).end()) == c);
  std::vector<std::int64_t> outside{3, 0, 0, 0};
  CHECK_FALSE(w.find_vertex(outside));
}

TEST_CASE("sample_and_cluster extremes") {
  auto all = build_window(LatticeSpec{{{0, 5}, {0, 4}}, 1.0});
  auto s = sample_and_cluster(all, 1, 0);
  CHECK(s.forest.components() == 1u);

  auto none = build_window(LatticeSpec{{{0, 5}, {0, 4}}, 0.0});
  auto z = sample_and_cluster(none, 1, 0);
  CHECK(z.forest.components() == none.vertex_count());
}

TEST_CASE("single edge opens with its probability") {
  auto w = build_window(CustomSpec{2, {{0, 1, 0.3}}});
  auto est = estimate_event(w, Event::connects(0, 1), 100'000, 77);
  const double sigma = std::sqrt(0.3 * 0.7 / 1e5);
  CHECK(std::abs(est.value - 0.3) <= 3 * sigma);
  CHECK(est.value == static_cast<double>(est.successes) / 1e5);
  CHECK(est.half_width == doctest::Approx(1.96 * std::sqrt(est.value * (1 - est.value) / 1e5)));
}

TEST_CASE("exact enumeration on small graphs") {
  auto single = build_window(CustomSpec{2, {{0, 1, 0.37}}});
  CHECK(exact_event_probability(single, Event::connects(0, 1)) == doctest::Approx(0.37).epsilon(1e-15));

  auto series = build_window(CustomSpec{3, {{0, 2, 0.6}, {2, 1, 0.6}}});
  CHECK(exact_event_probability(series, Event::connects(0, 1)) == doctest::Approx(0.36).epsilon(1e-15));

  auto rect = build_window(crossing_window_spec(LatticeFamily{2}, 0.5, 1));
  CHECK(rect.edges.size() == 7u);
  CHECK(exact_event_probability(rect, Event::crossing()) == 0.5);

  auto big = build_window(LatticeSpec{{{0, 4}, {0, 4}}, 0.5});
  CHECK_THROWS_AS(exact_event_probability(big, Event::crossing()), DomainError);
}

TEST_CASE("Z^2 crossing at p = 1/2 is exactly 1/2 for several rectangle sizes") {
  // self-duality of the (L+1) x L rectangle; L = 2 has 17 edges
  auto rect2 = build_window(crossing_window_spec(LatticeFamily{2}, 0.5, 2));
  REQUIRE(rect2.edges.size() <= kMaxExactEdges);
  CHECK(exact_event_probability(rect2, Event::crossing()) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("crossing and theta extremes") {
  CHECK(crossing_estimate(LatticeFamily{2}, 1.0, 7, 50, 3).value == 1.0);
  CHECK(crossing_estimate(LatticeFamily{2}, 0.0, 7, 50, 3).value == 0.0);
  auto full = build_window(theta_window_spec(LatticeFamily{2}, 1.0, 4));
  CHECK(origin_boundary_estimate(full, 20, 1).value == 1.0);
  auto empty = build_window(theta_window_spec(LatticeFamily{2}, 0.0, 4));
  CHECK(origin_boundary_estimate(empty, 20, 1).value == 0.0);
}

TEST_CASE("origin outside the window is a domain error") {
  auto w = build_window(LatticeSpec{{{1, 3}, {1, 3}}, 0.5});
  CHECK_FALSE(w.origin);
  CHECK_THROWS_AS(origin_boundary_estimate(w, 10, 1), DomainError);
  CHECK_THROWS_AS(estimate_event(w, Event::crossing(), 0, 1), DomainError);
}

TEST_CASE("union-find agrees with breadth-first search on every configuration") {
  auto w = build_window(LongRangeSpec{ProbabilitySequence::constant(0.5), 2, {0, 2}, {0, 1}});
  REQUIRE(w.edges.size() <= 12u);
  const std::uint32_t m = static_cast<std::uint32_t>(w.edges.size());
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<std::uint8_t> open(m);
    UnionFind uf(w.vertex_count());
    for (std::uint32_t i = 0; i < m; ++i) {
      open[i] = (mask >> i) & 1u;
      if (open[i]) uf.unite(w.edges[i].u, w.edges[i].v);
    }
    auto label = testing::bfs_components(w, open);
    for (VertexId a = 0; a < w.vertex_count(); ++a) {
      for (VertexId b = 0; b < w.vertex_count(); ++b) {
        REQUIRE(uf.connected(a, b) == (label[a] == label[b]));
      }
    }
  }
}

TEST_CASE("open edge sets are nested in p under shared uniforms") {
  const auto lo = build_window(LatticeSpec{{{0, 9}, {0, 9}}, 0.3});
  const auto hi = build_window(LatticeSpec{{{0, 9}, {0, 9}}, 0.6});
  for (std::uint64_t t = 0; t < 50; ++t) {
    auto a = sample_open_edges(lo, 5, t);
    auto b = sample_open_edges(hi, 5, t);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE((!a[i] || b[i]));
  }
}

TEST_CASE("estimates do not depend on the thread count") {
  auto w = build_window(crossing_window_spec(SlabFamily{3, 2}, 0.4, 6));
  auto one = estimate_event(w, Event::crossing(), 2000, 42, 1);
  auto three = estimate_event(w, Event::crossing(), 2000, 42, 3);
  auto seven = estimate_event(w, Event::crossing(), 2000, 42, 7);
  CHECK(one.successes == three.successes);
  CHECK(one.successes == seven.successes);
}

TEST_CASE("Monte Carlo agrees with exact enumeration on a long-range window") {
  auto seq = ProbabilitySequence::table({0.6, 0.3, 0.8});
  auto w = build_window(LongRangeSpec{seq, 3, {-1, 2}, {0, 1}});
  REQUIRE(w.edges.size() <= kMaxExactEdges);
  for (Event e : {Event::crossing(), Event::origin_boundary(), Event::connects(0, 7)}) {
    const double exact = exact_event_probability(w, e);
    auto est = estimate_event(w, e, 100'000, 9);
    const double sigma = std::sqrt(exact * (1 - exact) / 1e5);
    CHECK(std::abs(est.value - exact) <= 4 * sigma + 1e-12);
  }
}
