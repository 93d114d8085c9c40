#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "trunclab/errors.hpp"
#include "trunclab/thresholds.hpp"

using namespace trunclab;

namespace {

PcSettings quick(std::uint64_t seed = 3) {
  PcSettings s;
  s.L_schedule = {6, 12};
  s.trials_per_probe = 400;
  s.bracket_tol = 0.01;
  s.master_seed = seed;
  s.threads = 1;
  return s;
}

CalibrationRow slab_row(int d, int K, double p_hat, double unc, const PcSettings& s) {
  CalibrationRow r;
  r.family = "slab";
  r.d = d;
  r.K = K;
  r.L_schedule = s.L_schedule;
  r.trials_per_probe = s.trials_per_probe;
  r.bracket_tol = s.bracket_tol;
  r.master_seed = s.master_seed;
  r.p_hat = p_hat;
  r.uncertainty = unc;
  return r;
}

}  // namespace

TEST_CASE("estimate_pc on Z^2 lands near 1/2") {
  // crossing of the (L+1) x L rectangle is exactly 1/2 at p = 1/2 for every L
  auto est = estimate_pc(LatticeFamily{2}, quick());
  CHECK(est.family == "Z^d");
  CHECK(est.per_L.size() == 2u);
  CHECK(est.bracket_half_width <= 0.005 + 1e-12);
  CHECK(est.uncertainty == doctest::Approx(est.bracket_half_width + est.statistical_term));
  CHECK(std::abs(est.p_hat - 0.5) <= 3 * est.uncertainty + 0.02);
  for (const auto& b : est.per_L) {
    CHECK(b.lo < b.hi);
    CHECK(b.slope > 0.0);
  }
}

TEST_CASE("estimate_pc is deterministic given the seed") {
  auto a = estimate_pc(SlabFamily{3, 2}, quick(9));
  auto b = estimate_pc(SlabFamily{3, 2}, quick(9));
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.uncertainty == b.uncertainty);
}

TEST_CASE("thresholds order by dimension and thickness") {
  auto z2 = estimate_pc(LatticeFamily{2}, quick());
  auto z3 = estimate_pc(LatticeFamily{3}, quick());
  auto slab2 = estimate_pc(SlabFamily{3, 2}, quick());
  CHECK(z3.p_hat < z2.p_hat);
  CHECK(slab2.p_hat < z2.p_hat);
  CHECK(slab2.p_hat > z3.p_hat);
}

TEST_CASE("a slab of thickness one is Z^2") {
  auto z2 = estimate_pc(LatticeFamily{2}, quick());
  auto thin = estimate_pc(SlabFamily{3, 1}, quick());
  CHECK(std::abs(z2.p_hat - thin.p_hat) <= z2.uncertainty + thin.uncertainty + 0.02);
}

TEST_CASE("estimate_pc rejects bad settings") {
  auto s = quick();
  s.L_schedule = {};
  CHECK_THROWS_AS(estimate_pc(LatticeFamily{2}, s), DomainError);
  s.L_schedule = {8, 8};
  CHECK_THROWS_AS(estimate_pc(LatticeFamily{2}, s), DomainError);
  s = quick();
  s.bracket_tol = 0.0;
  CHECK_THROWS_AS(estimate_pc(LatticeFamily{2}, s), DomainError);
  s = quick();
  s.trials_per_probe = 0;
  CHECK_THROWS_AS(estimate_pc(LatticeFamily{2}, s), DomainError);
  CHECK_THROWS_AS(estimate_pc(LongRangeFamily{ProbabilitySequence::constant(0.5), 3}, quick()), ConfigError);
}

TEST_CASE("reference thresholds") {
  CHECK(reference_pc(LatticeFamily{2}) == 0.5);
  CHECK(reference_pc(LatticeFamily{3}) == 0.2488126);
  CHECK(reference_pc(SlabFamily{4, 1}) == 0.5);
  CHECK_FALSE(reference_pc(SlabFamily{3, 2}));
  CHECK_FALSE(reference_pc(LatticeFamily{9}));
}

TEST_CASE("calibration table round-trips exactly") {
  auto path = std::filesystem::temp_directory_path() / "trunclab_calibration_test.csv";
  CalibrationTable t;
  auto s = quick();
  auto a = slab_row(3, 2, 0.1 + 0.2, 1.0 / 3.0, s);
  auto b = to_row(ThresholdEstimate{.family = "Z^d", .d = 3, .p_hat = 0.25, .uncertainty = 0.004,
                                    .L_schedule = {16, 32}, .trials_per_probe = 1000,
                                    .bracket_tol = 0.005, .master_seed = 77});
  t.upsert(a);
  t.upsert(b);
  t.save(path);
  auto back = CalibrationTable::load(path);
  REQUIRE(back.rows().size() == 2u);
  CHECK(back.rows()[0].p_hat == a.p_hat);
  CHECK(back.rows()[0].uncertainty == a.uncertainty);
  CHECK_FALSE(back.rows()[0].reference);
  CHECK(back.rows()[1].reference == 0.2488126);
  CHECK(back.rows()[1].L_schedule == std::vector<std::int64_t>{16, 32});
  CHECK(back.rows()[1].master_seed == 77u);
  std::filesystem::remove(path);

  CHECK(CalibrationTable::load(path).rows().empty());
}

TEST_CASE("calibration lookup matches method settings") {
  CalibrationTable t;
  auto s = quick();
  t.upsert(slab_row(3, 2, 0.38, 0.01, s));
  CHECK(t.find("slab", 3, 2, s));
  CHECK_FALSE(t.find("slab", 3, 3, s));
  auto other = s;
  other.master_seed = s.master_seed + 1;
  CHECK_FALSE(t.find("slab", 3, 2, other));
  // a row produced by the retry carries twice the requested trials
  t.upsert(slab_row(4, 1, 0.5, 0.01, s));
  auto doubled = slab_row(4, 2, 0.3, 0.01, s);
  doubled.trials_per_probe *= 2;
  t.upsert(doubled);
  CHECK(t.find("slab", 4, 2, s));
  // upsert replaces a row with the same key
  t.upsert(slab_row(3, 2, 0.37, 0.01, s));
  CHECK(t.find("slab", 3, 2, s)->p_hat == 0.37);
  CHECK(t.rows().size() == 3u);
}

TEST_CASE("choose_slab_parameters takes the first qualifying pair") {
  auto s = quick();
  CalibrationTable t;
  t.upsert(slab_row(3, 1, 0.5, 0.01, s));
  t.upsert(slab_row(3, 2, 0.38, 0.01, s));
  auto choice = choose_slab_parameters(EpsilonCertificate(0.45, "test"), 0.02, SlabBudget{3, 3, 2}, t, s);
  CHECK(choice.params.d() == 3);
  CHECK(choice.params.K() == 2);
  REQUIRE(choice.candidates.size() == 2u);
  CHECK_FALSE(choice.candidates[0].qualifies);
  CHECK(choice.candidates[1].qualifies);
  CHECK(choice.candidates[1].lhs == doctest::Approx(0.41));
  CHECK(choice.candidates[1].from_table);
  CHECK(choice.threshold.from_table);
}

TEST_CASE("choose_slab_parameters reports the best shortfall") {
  auto s = quick();
  CalibrationTable t;
  t.upsert(slab_row(3, 1, 0.5, 0.01, s));
  t.upsert(slab_row(3, 2, 0.38, 0.01, s));
  try {
    choose_slab_parameters(EpsilonCertificate(0.3, "test"), 0.02, SlabBudget{3, 3, 2}, t, s);
    FAIL("expected ParametersNotFound");
  } catch (const ParametersNotFound& e) {
    CHECK(e.best_shortfall() == doctest::Approx(0.11));
    CHECK(e.best_d() == 3);
    CHECK(e.best_K() == 2);
  }
  CHECK_THROWS_AS(choose_slab_parameters(EpsilonCertificate(0.3, "x"), 0.3, SlabBudget{}, t, s), DomainError);
  CHECK_THROWS_AS(choose_slab_parameters(EpsilonCertificate(0.3, "x"), 0.0, SlabBudget{}, t, s), DomainError);
  CHECK_THROWS_AS(choose_slab_parameters(EpsilonCertificate(0.3, "x"), 0.02, SlabBudget{4, 3, 2}, t, s),
                  DomainError);
}

TEST_CASE("choose_slab_parameters computes and records missing rows") {
  auto s = quick();
  CalibrationTable t;
  auto choice = choose_slab_parameters(EpsilonCertificate(0.5, "test"), 0.02, SlabBudget{3, 3, 2}, t, s);
  CHECK(choice.params.K() == 2);
  CHECK(t.rows().size() == 2u);
  CHECK_FALSE(choice.candidates[0].from_table);
}
