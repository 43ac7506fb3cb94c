#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "dkg/equilibria.hpp"
#include "dkg/errors.hpp"
#include "dkg/spectral.hpp"
#include "oracles.hpp"

using namespace dkg;
using oracle::pi;

namespace {

Model sg(double d, Grid g) { return Model(d, Nonlinearity::sine_gordon(), g); }
Model sg(double d, int n) { return sg(d, Grid::centered(n)); }

double oracle_residual(const LatticeField& u, double d) {
  const auto r = oracle::sg_residual(u.values, d);
  double m = 0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("seed descriptions") {
  CHECK(SeedSpec::multikink({8}).components() == 2);
  CHECK(SeedSpec::multikink({8, 6}).component_center(2) == 14);
  CHECK(SeedSpec::multikink({8, 6}).sign(1) == -1);
  CHECK(SeedSpec::kink_kink({8}).sign(1) == 1);
  CHECK(crossing_position(SeedSpec::multikink({8}), 1) == 7.5);
  CHECK(crossing_position(SeedSpec::multikink({8}, {KinkSite::onsite, KinkSite::onsite}), 1) == 8.0);
  CHECK_THROWS_AS(SeedSpec::multikink({1}).validate(), InvalidArgumentError);
  CHECK_THROWS_AS(SeedSpec::multikink({}).validate(), InvalidArgumentError);
  CHECK_THROWS_AS(SeedSpec::multikink({8}, {KinkSite::onsite}).validate(), InvalidArgumentError);
  CHECK_THROWS_AS(seed_kind_from_string("breather"), InvalidArgumentError);
  CHECK(seed_kind_from_string("kink_kink") == SeedKind::kink_kink);

  const Grid g = grid_for(SeedSpec::multikink({8}), 60);
  CHECK(g.size() == 60);
  CHECK(g.lo + g.hi == 7);  // symmetric about the midpoint 3.5 of the crossings
}

TEST_CASE("anti-continuum seeds") {
  const Model m = sg(0.0, 12);
  const auto k = ac_seed(SeedSpec::kink(), m);
  CHECK(k.at(-1) == doctest::Approx(-pi));
  CHECK(k.at(0) == doctest::Approx(pi));
  const auto ko = ac_seed(SeedSpec::kink(KinkSite::onsite), m);
  CHECK(ko.at(0) == 0.0);
  CHECK(ko.at(1) == doctest::Approx(pi));
  const auto ak = ac_seed(SeedSpec::antikink(), m);
  CHECK(ak.at(-1) == doctest::Approx(pi));

  const SeedSpec kak = SeedSpec::multikink({8});
  const Model mk = sg(0.0, grid_for(kak, 30));
  const auto u = ac_seed(kak, mk);
  int high = 0;
  for (double x : u.values) high += x > 0;
  CHECK(high == 8);
  for (int n = 0; n < 8; ++n) CHECK(u.at(n) == doctest::Approx(pi));
  CHECK(u.at(-1) == doctest::Approx(-pi));
  CHECK(u.at(8) == doctest::Approx(-pi));
  CHECK(max_abs(residual(u, mk)) < 1e-15);

  const auto kk = ac_seed(SeedSpec::kink_kink({8}), mk);
  CHECK(kk.at(-1) == doctest::Approx(-pi));
  CHECK(kk.at(3) == doctest::Approx(pi));
  CHECK(kk.at(8) == doctest::Approx(3 * pi));
  CHECK(max_abs(residual(kk, mk)) < 1e-14);

  const Model p4(0.0, Nonlinearity::phi4(), Grid::centered(12));
  CHECK_THROWS_AS(ac_seed(SeedSpec::kink_kink({8}), p4), InvalidArgumentError);
}

TEST_CASE("newton on exact equilibria") {
  const Model m0 = sg(0.0, 12);
  const auto sol = newton_solve(ac_seed(SeedSpec::kink(), m0), m0);
  CHECK(sol.iterations <= 1);
  const Model m = sg(0.5, 12);
  const auto flat = LatticeField::constant(m.grid().lo, m.grid().size(), pi);
  const auto s2 = newton_solve(flat, m);
  CHECK(s2.iterations == 0);
  CHECK(max_abs(difference(s2.field, flat)) == 0.0);
}

TEST_CASE("newton failure modes") {
  const Model m = sg(0.5, 12);
  NewtonOptions o;
  o.max_iter = 1;
  o.tol = 1e-30;
  try {
    newton_solve(ac_seed(SeedSpec::kink(), m), m, o);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.iterations() == 1);
    CHECK(e.last_iterate().size() == 12);
    CHECK(e.residual_norm() > 0.0);
  }
}

TEST_CASE("kink at d = 0.5") {
  const Model m = sg(0.5, 60);
  const auto k = solve_kink(m, KinkSite::intersite);
  CHECK(oracle_residual(k, 0.5) < 1e-12);
  for (std::size_t i = 1; i < k.size(); ++i) CHECK(k.values[i] >= k.values[i - 1]);
  for (int n = -5; n < 5; ++n) CHECK(k.at(n + 1) > k.at(n));
  // odd about the crossing: k(-n) = -k(n-1)
  for (int n = 1; n <= 30; ++n) CHECK(std::abs(k.at(-n) + k.at(n - 1)) < 1e-10);

  const auto ak = solve_kink(m, KinkSite::intersite, -1);
  for (std::size_t i = 0; i < k.size(); ++i) CHECK(ak.values[i] == doctest::Approx(-k.values[i]));

  const auto on = solve_kink(m, KinkSite::onsite);
  CHECK(oracle_residual(on, 0.5) < 1e-12);
  CHECK(std::abs(on.at(0)) < 1e-12);
  // discrete kinks: intersite is the energy minimum
  CHECK(static_energy(k, m) < static_energy(on, m));

  const auto cr = zero_crossings(k);
  REQUIRE(cr.size() == 1);
  CHECK(cr[0].position == doctest::Approx(-0.5));
  CHECK(cr[0].site == KinkSite::intersite);
  CHECK(cr[0].direction == 1);
  const auto cro = zero_crossings(on);
  REQUIRE(cro.size() == 1);
  CHECK(cro[0].site == KinkSite::onsite);
}

TEST_CASE("phi4 kink") {
  const Model m(0.5, Nonlinearity::phi4(), Grid::centered(40));
  const auto k = solve_kink(m, KinkSite::intersite);
  CHECK(max_abs(residual(k, m)) < 1e-12);
  CHECK(k.values.back() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("natural continuation") {
  const Model m = sg(0.0, 40);
  std::vector<double> ds;
  for (int i = 0; i <= 50; ++i) ds.push_back(0.01 * i);
  const auto br = continue_natural(ac_seed(SeedSpec::kink(), m), m, ds);
  REQUIRE(br.points.size() == 51);
  for (const auto& p : br.points) CHECK(oracle_residual(p.field, p.d) < 1e-12);
  CHECK(br.points.back().stability_index == 0);
  CHECK(br.events_of(EventKind::divergence).empty());

  const auto bo = continue_natural(ac_seed(SeedSpec::kink(KinkSite::onsite), m), m, ds);
  REQUIRE(bo.points.size() == 51);
  CHECK(bo.points.back().stability_index == 1);
}

TEST_CASE("multi-kinks") {
  const SeedSpec kak = SeedSpec::multikink({8});
  const Model m = sg(0.25, grid_for(kak, 60));
  const auto sol = build_equilibrium(kak, m);
  CHECK(oracle_residual(sol.field, 0.25) < 1e-12);
  const auto cr = zero_crossings(sol.field);
  REQUIRE(cr.size() == 2);
  CHECK(cr[0].position == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(cr[1].position == doctest::Approx(7.5).epsilon(1e-6));
  CHECK(cr[1].direction == -1);

  MultikinkOptions o;
  o.from_ac = true;
  const auto via_ac = build_multikink(kak, m, o);
  CHECK(max_abs(difference(via_ac.field, sol.field)) < 1e-9);

  const SeedSpec three = SeedSpec::multikink({8, 8});
  const Model m3 = sg(0.25, grid_for(three, 60));
  CHECK(zero_crossings(build_equilibrium(three, m3).field).size() == 3);

  const SeedSpec kk = SeedSpec::kink_kink({8});
  const auto skk = build_equilibrium(kk, m);
  CHECK(oracle_residual(skk.field, 0.25) < 1e-12);
  CHECK(skk.field.values.back() == doctest::Approx(3 * pi).epsilon(1e-6));
}

TEST_CASE("splice tail closeness improves with separation") {
  const Model single = sg(0.25, 60);
  PrimaryKinks kinks;
  kinks.intersite = solve_kink(single, KinkSite::intersite);
  double prev = 1.0;
  for (int n1 : {4, 6, 8, 10}) {
    const SeedSpec s = SeedSpec::multikink({n1});
    const Model m = sg(0.25, grid_for(s, 60));
    const auto u = build_equilibrium(s, m).field;
    double dev = max_abs(difference(u, splice_multikink(s, m, kinks)));
    CAPTURE(n1);
    CHECK(dev < prev);
    prev = dev;
  }
}

TEST_CASE("arclength continuation of the kink-antikink") {
  const SeedSpec kak = SeedSpec::multikink({8});
  const Model base = sg(0.05, grid_for(kak, 60));
  Branch br;
  const double d0 = kink_antikink_fold(8, base, &br);
  REQUIRE(!br.events_of(EventKind::fold).empty());
  const auto fold = br.events_of(EventKind::fold).front();
  CHECK(fold.d == doctest::Approx(d0));
  CHECK(d0 > 0.5);
  CHECK(d0 < 2.0);

  // independent check of the turning point: solutions exist just below d0
  // but Newton from the fold field finds none just above it
  const Model below = base.with_coupling(d0 - 2e-3);
  CHECK_NOTHROW(newton_solve(fold.field, below));
  NewtonOptions strict;
  strict.max_iter = 30;
  const Model above = base.with_coupling(d0 + 2e-3);
  bool converged_above = true;
  try {
    newton_solve(fold.field, above, strict);
  } catch (const ConvergenceError&) {
    converged_above = false;
  }
  CHECK_FALSE(converged_above);

  for (const auto& p : br.points) CHECK(max_abs(residual(p.field, base.with_coupling(p.d))) < 1e-10);
}

TEST_CASE("arclength edge cases") {
  const Model m = sg(0.1, 40);
  const auto k = solve_kink(m, KinkSite::intersite);
  ArclengthOptions o;
  o.step = 0.0;
  CHECK_THROWS_AS(continue_arclength(make_branch_point(k, m), m, o), InvalidArgumentError);

  ArclengthOptions ok;
  CHECK_THROWS_AS(continue_arclength(make_branch_point(ac_seed(SeedSpec::kink(), m), m), m, ok), SeedError);

  // a corrector that cannot iterate stalls immediately
  ArclengthOptions stall;
  stall.step = stall.max_step = 0.5;
  stall.min_step = 0.4;
  stall.corrector.max_iter = 0;
  const auto br = continue_arclength(make_branch_point(k, m), m, stall);
  CHECK(br.events_of(EventKind::stall).size() == 1);

  ArclengthOptions range;
  range.d_max = 0.2;
  const auto br2 = continue_arclength(make_branch_point(k, m), m, range);
  CHECK(br2.events_of(EventKind::range_end).size() == 1);
  for (const auto& p : br2.points) CHECK(p.d <= 0.2 + 1e-12);
}

TEST_CASE("fold location is linear in separation") {
  const Model base = sg(0.05, 60);
  const std::vector<int> seps{4, 6, 8};
  const auto sw = fold_vs_distance(seps, base, 3);
  REQUIRE(sw.samples.size() == 3);
  for (const auto& s : sw.samples) CHECK(s.ok);
  CHECK(sw.samples[0].d0 < sw.samples[1].d0);
  CHECK(sw.samples[1].d0 < sw.samples[2].d0);
  CHECK(sw.fit.slope > 0.0);
  const std::vector<int> one{8};
  CHECK_THROWS_AS(fold_vs_distance(one, base), FitError);
  CHECK_THROWS_AS(kink_antikink_fold(1, base), InvalidArgumentError);
}
