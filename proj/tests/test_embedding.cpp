#include <doctest.h>

#include <random>

#include "support/oracles.hpp"
#include "trunclab/embedding.hpp"
#include "trunclab/errors.hpp"

using namespace trunclab;

namespace {

EmbeddedGraph graph(std::vector<Length> scales, int d, int K) {
  SlabParameters params(d, K);
  return EmbeddedGraph(params, ScaleVector(std::move(scales), params));
}

}  // namespace

TEST_CASE("select_scales follows the recursion") {
  SlabParameters p(4, 2);
  auto lac = ProbabilitySequence::lacunary_powers(10, 0.4);
  CHECK(select_scales(lac, 0.2, p, 1'000'000).values() == std::vector<Length>{1, 10, 100});
  CHECK(select_scales(ProbabilitySequence::constant(0.5), 0.2, p, 1'000'000).values() ==
        std::vector<Length>{1, 4, 13});
  // every returned scale carries p >= eps
  const auto scales = select_scales(lac, 0.2, p, 1'000'000);
  for (Length n : scales.values()) CHECK(lac.eval(n) >= 0.2);
}

TEST_CASE("select_scales names the failing step") {
  SlabParameters p(4, 2);
  // support {1, 2, 3}: n_1 = 1, then nothing above 3
  auto finite = ProbabilitySequence::table({0.9, 0.9, 0.9});
  try {
    select_scales(finite, 0.45, p, 1'000'000);
    FAIL("expected HypothesisNotWitnessed");
  } catch (const HypothesisNotWitnessed& e) {
    CHECK(e.step() == 2);
    CHECK(e.lower_exclusive() == 3);
  }
  // a search limit too small for step 3
  try {
    select_scales(ProbabilitySequence::lacunary_powers(10, 0.4), 0.2, p, 50);
    FAIL("expected HypothesisNotWitnessed");
  } catch (const HypothesisNotWitnessed& e) {
    CHECK(e.step() == 3);
  }
}

TEST_CASE("select_scales matches the brute-force recursion") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    auto seq = testing::random_lacunary(rng);
    const int d = std::uniform_int_distribution<int>(2, 5)(rng);
    const int K = std::uniform_int_distribution<int>(1, 3)(rng);
    const double eps = 0.2;
    auto expected = testing::brute_force_scales(seq, eps, d, K, 200'000);
    REQUIRE(expected.has_value());
    CHECK(select_scales(seq, eps, SlabParameters(d, K), 200'000).values() == *expected);
  }
}

TEST_CASE("scale vector spacing is enforced at construction") {
  SlabParameters p(4, 2);
  CHECK_THROWS_AS(ScaleVector({1, 2, 13}, p), InvariantViolation);
  CHECK_THROWS_AS(ScaleVector({1, 4}, p), InvariantViolation);
  CHECK_THROWS_AS(ScaleVector({0, 4, 13}, p), InvariantViolation);
  CHECK_NOTHROW(ScaleVector({1, 4, 13}, p));
  CHECK_THROWS_AS(SlabParameters(1, 2), InvariantViolation);
  CHECK_THROWS_AS(SlabParameters(3, 0), InvariantViolation);
}

TEST_CASE("block sets") {
  SlabParameters p(4, 2);
  ScaleVector s({1, 4, 13}, p);
  CHECK(build_block_set(s, p, 0) == std::vector<Point>{{0, 0}});
  CHECK(build_block_set(s, p, 1) == std::vector<Point>{{0, 0}, {1, 0}});
  CHECK(build_block_set(s, p, 2) == std::vector<Point>{{0, 0}, {1, 0}, {4, 0}, {5, 0}});
  CHECK_THROWS_AS(build_block_set(s, p, 3), DomainError);
  CHECK_THROWS_AS(build_block_set(s, p, -1), DomainError);

  SlabParameters p3(5, 3);
  ScaleVector s3({1, 5, 21, 100}, p3);
  CHECK(build_block_set(s3, p3, 3).size() == 27u);
}

TEST_CASE("translation shifts every point") {
  CHECK(translate({{0, 0}, {1, 2}}, {3, -1}) == std::vector<Point>{{3, -1}, {4, 1}});
}

TEST_CASE("encode and decode") {
  auto g = graph({1, 4, 13}, 4, 2);
  CHECK(g.encode({{0, 0}, 0, 0}) == Point{0, 0});
  CHECK(g.encode({{1, 0}, 2, -1}) == Point{27, -1});
  CHECK_THROWS_AS(g.encode({{2, 0}, 0, 0}), DomainError);

  auto back = g.decode({27, -1});
  REQUIRE(back);
  CHECK(*back == SlabCoord{{1, 0}, 2, -1});
  CHECK_FALSE(g.decode({2, 0}));

  auto g10 = graph({1, 10, 100}, 4, 2);
  CHECK(g10.encode({{1, 1}, 1, 3}) == Point{111, 3});
  CHECK(g10.decode({111, 3}) == SlabCoord{{1, 1}, 1, 3});

  auto g2 = graph({2, 10, 50}, 4, 2);
  CHECK_FALSE(g2.decode({0, 5}));
  CHECK(g2.decode({-50, -4}) == SlabCoord{{0, 0}, -1, -2});
}

TEST_CASE("decode inverts encode on random coordinates") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = std::uniform_int_distribution<int>(2, 6)(rng);
    const int K = std::uniform_int_distribution<int>(1, 4)(rng);
    SlabParameters p(d, K);
    auto g = EmbeddedGraph(p, select_scales(testing::random_lacunary(rng), 0.2, p, 10'000'000));
    for (int i = 0; i < 200; ++i) {
      SlabCoord c;
      for (int j = 0; j < d - 2; ++j) c.digits.push_back(std::uniform_int_distribution<int>(0, K - 1)(rng));
      c.k = std::uniform_int_distribution<std::int64_t>(-50, 50)(rng);
      c.m = std::uniform_int_distribution<std::int64_t>(-50, 50)(rng);
      REQUIRE(g.decode(g.encode(c)) == c);
    }
  }
}

TEST_CASE("embedded edge classification") {
  auto g = graph({1, 4, 13}, 4, 2);
  auto e = g.edge_class({0, 0}, {4, 0});
  REQUIRE(e);
  CHECK(e->orientation == EdgeClass::Orientation::Horizontal);
  CHECK(e->j == 2);
  CHECK_FALSE(g.edge_class({0, 0}, {5, 0}));
  auto v = g.edge_class({0, 0}, {0, 1});
  REQUIRE(v);
  CHECK(v->orientation == EdgeClass::Orientation::Vertical);
  CHECK(v->length == 1);
  // right length, but (2,0) is not a vertex
  CHECK_FALSE(g.edge_class({1, 0}, {2, 0}));
  CHECK_FALSE(g.edge_class({0, 0}, {0, 0}));
}

TEST_CASE("verify_isomorphism on the worked examples") {
  auto g = graph({1, 4, 13}, 4, 2);
  auto r = verify_isomorphism(g, 3);
  CHECK(r.passed);
  CHECK_FALSE(r.counterexample);
  CHECK(r.vertices == 4u * 49u);
  CHECK(r.max_edge_length == 13);
  // slab {0,1}^2 x [-3,3]^2: 2 digit axes * 2 * 49 edges... count per axis
  // digits: 2 axes * (1 * 2 * 49); k: 4 * 6 * 7; m: 4 * 7 * 6
  CHECK(r.edges == 2u * 2u * 49u + 4u * 42u + 4u * 42u);

  auto g2 = graph({7}, 2, 3);
  auto r2 = verify_isomorphism(g2, 3);
  CHECK(r2.passed);
  CHECK(r2.max_edge_length == 7);
  CHECK(r2.edges == 2u * 42u);
  CHECK(g2.encode({{}, 2, -1}) == Point{14, -7});

  CHECK_THROWS_AS(verify_isomorphism(g, 0), DomainError);
}

TEST_CASE("verify_isomorphism checks edge probabilities against eps") {
  auto lac = ProbabilitySequence::lacunary_powers(2, 0.9);
  SlabParameters p(3, 2);
  auto g = EmbeddedGraph(p, select_scales(lac, 0.45, p, 1000));
  auto ok = verify_isomorphism(g, 2, EdgeProbabilityBound{&lac, 0.45});
  CHECK(ok.passed);
  REQUIRE(ok.min_edge_probability);
  CHECK(*ok.min_edge_probability == 0.9);
  CHECK(*ok.min_edge_probability_truncated == 0.9);

  auto bad = verify_isomorphism(g, 2, EdgeProbabilityBound{&lac, 0.95});
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.counterexample);
  CHECK(bad.counterexample->check == "edge-probability");
}

TEST_CASE("verify_isomorphism over small (d, K)") {
  std::mt19937_64 rng(5);
  for (int d = 2; d <= 4; ++d) {
    for (int K = 1; K <= 3; ++K) {
      SlabParameters p(d, K);
      auto g = EmbeddedGraph(p, select_scales(testing::random_lacunary(rng), 0.2, p, 10'000'000));
      auto r = verify_isomorphism(g, 2);
      INFO("d=", d, " K=", K);
      CHECK(r.passed);
      CHECK(r.max_edge_length == g.scales().last());
    }
  }
}
