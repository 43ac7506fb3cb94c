#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "dkg/equilibria.hpp"
#include "dkg/errors.hpp"
#include "dkg/multikink.hpp"
#include "dkg/spectral.hpp"
#include "oracles.hpp"

using namespace dkg;

namespace {

Model sg(double d, Grid g) { return Model(d, Nonlinearity::sine_gordon(), g); }

// v(n) = rho^-n on n >= 0 and rho^(n+1) below: an even profile about the
// crossing between -1 and 0.
LatticeField geometric(double rho, int half) {
  LatticeField v = LatticeField::constant(-half, 2 * half, 0.0);
  for (int n = -half; n < half; ++n) v.at(n) = n >= 0 ? std::pow(rho, -n) : std::pow(rho, n + 1);
  return v;
}

std::vector<double> dense_mu(const std::vector<double>& a) {
  const int m = static_cast<int>(a.size()) + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i + 1 < m; ++i) A(i, i + 1) = A(i + 1, i) = a[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  return std::vector<double>(es.eigenvalues().data(), es.eigenvalues().data() + m);
}

struct Base {
  Model single = sg(0.25, Grid::centered(60));
  BaseMode g = base_mode(solve_kink(single, KinkSite::intersite), single, ModeLabel::goldstone);
};

const Base& base() {
  static const Base b;
  return b;
}

}  // namespace

TEST_CASE("split distance") {
  CHECK(split_distance(8).plus == 4);
  CHECK(split_distance(8).minus == 4);
  CHECK(split_distance(7).plus == 3);
  CHECK(split_distance(7).minus == 4);
}

TEST_CASE("interaction coefficient on a geometric profile") {
  const double rho = 1.8;
  const auto v = geometric(rho, 20);
  for (int N = 2; N <= 12; ++N) {
    CAPTURE(N);
    const auto s = split_distance(N);
    // hand evaluation: rho^-N - rho^(2-N)
    const double expect = std::pow(rho, -N) * (1.0 - rho * rho);
    CHECK(coupling_a(v, s.plus, s.minus) == doctest::Approx(expect).epsilon(1e-13));
  }
  CHECK_THROWS_AS(coupling_a(v, 20, 4), InvalidArgumentError);
  CHECK_THROWS_AS(coupling_a(v, 4, 20), InvalidArgumentError);
}

TEST_CASE("interaction coefficient reduces for even and odd profiles") {
  const auto& v = base().g.v0;
  for (int q = 2; q <= 6; ++q) {
    // Goldstone mode is even: v(-n) = v(n-1)
    const double even = v.at(q) * v.at(q) - v.at(q - 1) * v.at(q - 1);
    CHECK(coupling_a(v, q, q) == doctest::Approx(even).epsilon(1e-8));
  }
  LatticeField odd = LatticeField::constant(-10, 20, 0.0);
  for (int n = 0; n < 10; ++n) {
    odd.at(n) = std::exp(-0.7 * n);
    odd.at(-n - 1) = -std::exp(-0.7 * n);
  }
  for (int q = 2; q <= 5; ++q) {
    const double expect = odd.at(q - 1) * odd.at(q - 1) - odd.at(q) * odd.at(q);
    CHECK(coupling_a(odd, q, q) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("Melnikov sum") {
  CHECK(melnikov_M(LatticeField(0, {0.6, 0.8})) == doctest::Approx(1.0));
  CHECK(melnikov_M(base().g.v0) == doctest::Approx(1.0).epsilon(1e-12));
  const LatticeField v(0, {1.0, -2.0, 0.5});
  LatticeField w = v;
  for (auto& x : w.values) x *= -3.0;
  CHECK(melnikov_M(w) == doctest::Approx(9.0 * melnikov_M(v)));
  CHECK_THROWS_AS(melnikov_M(LatticeField()), InvalidArgumentError);
}

TEST_CASE("prediction structure") {
  const auto& b = base();
  const SeedSpec s = SeedSpec::multikink({8});
  const Model m = sg(0.25, grid_for(s, 60));
  const auto p = predict(b.g.omega0, b.g.v0, {8}, m);
  REQUIRE(p.mu.size() == 2);
  CHECK(p.mu[0] == doctest::Approx(-std::abs(p.a[0])).epsilon(1e-12));
  CHECK(p.mu[1] == doctest::Approx(std::abs(p.a[0])).epsilon(1e-12));
  CHECK(p.omega_pred[0] + p.omega_pred[1] == doctest::Approx(2 * b.g.omega0).epsilon(1e-14));
  CHECK(p.all_imaginary);
  CHECK(p.distinct);
  CHECK_FALSE(p.regime_warning);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(p.lambda_pred[j].real() == 0.0);
    CHECK(p.lambda_pred[j].imag() == doctest::Approx(std::sqrt(-p.omega_pred[j])));
  }

  const auto p2 = predict(b.g.omega0, b.g.v0, {2}, m);
  CHECK(p2.regime_warning);

  CHECK_THROWS_AS(predict(-1.0, b.g.v0, {8}, m), HypothesisViolation);
  CHECK_THROWS_AS(predict(-1.3, b.g.v0, {8}, m), HypothesisViolation);
  CHECK_THROWS_AS(predict(b.g.omega0, b.g.v0, {1}, m), HypothesisViolation);
  CHECK_THROWS_AS(predict(b.g.omega0, b.g.v0, {8}, m.with_coupling(0.0)), InvalidArgumentError);
}

TEST_CASE("closed forms against the tridiagonal eigensolver") {
  const auto& b = base();
  const Model m = sg(0.25, Grid::centered(80));
  for (std::vector<int> dist : {std::vector<int>{6}, std::vector<int>{8}, std::vector<int>{6, 8},
                                 std::vector<int>{8, 8}, std::vector<int>{4, 10}}) {
    const auto p = predict(b.g.omega0, b.g.v0, dist, m);
    const auto cf = closed_form_mu(p.a);
    const auto de = dense_mu(p.a);
    double scale = 0;
    for (double a : p.a) scale = std::max(scale, std::abs(a));
    for (std::size_t j = 0; j < cf.size(); ++j) {
      CHECK(std::abs(cf[j] - p.mu[j]) <= 1e-12 * scale);
      CHECK(std::abs(de[j] - p.mu[j]) <= 1e-12 * scale);
    }
  }
  const auto p = predict(b.g.omega0, b.g.v0, {8, 8}, m);
  CHECK(std::abs(p.omega_pred[1] - b.g.omega0) <= 4e-16 * std::abs(b.g.omega0));
  CHECK_THROWS_AS(closed_form_mu({1, 2, 3}), InvalidArgumentError);
}

TEST_CASE("four components against a dense eigensolver") {
  const auto& b = base();
  const Model m = sg(0.25, Grid::centered(80));
  const auto p = predict(b.g.omega0, b.g.v0, {6, 8, 10}, m);
  const auto de = dense_mu(p.a);
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(de[j] - p.mu[j]) < 1e-14);
}

TEST_CASE("scaling invariance of predictions") {
  const auto& b = base();
  const Model m = sg(0.25, Grid::centered(80));
  for (std::vector<int> dist : {std::vector<int>{8}, std::vector<int>{8, 6}, std::vector<int>{6, 8, 10}}) {
    const auto p = predict(b.g.omega0, b.g.v0, dist, m);
    for (double c : {-3.0, 0.01, 7.0, 1e3}) {
      LatticeField w = b.g.v0;
      for (auto& x : w.values) x *= c;
      const auto q = predict(b.g.omega0, w, dist, m);
      for (std::size_t j = 0; j < p.omega_pred.size(); ++j) {
        CHECK(std::abs(q.omega_pred[j] - p.omega_pred[j]) <= 1e-12 * std::abs(p.omega_pred[j]));
      }
    }
  }
}

TEST_CASE("predictions against computed multi-kink spectra") {
  const auto& b = base();
  for (std::vector<int> dist : {std::vector<int>{8}, std::vector<int>{8, 8}, std::vector<int>{8, 8, 8}}) {
    CAPTURE(dist.size());
    const SeedSpec s = SeedSpec::multikink(dist);
    const Model m = sg(0.25, grid_for(s, 60));
    const auto u = build_equilibrium(s, m).field;
    const auto p = predict(b.g.omega0, b.g.v0, dist, m);
    const auto spec = compute_spectrum(u, m, false);
    CHECK(splitting_count(spec, b.g.omega0, default_window(p, m)) == static_cast<int>(dist.size() + 1));
    const auto rows = error_table(spec, p, m, dist, "goldstone");
    REQUIRE(rows.size() == dist.size() + 1);
    for (const auto& r : rows) CHECK(r.relative_error < 1e-4);
    // stability transfers: all split modes stay on the imaginary axis
    CHECK(spec.omegas.back() < 0.0);
  }
}

TEST_CASE("matching failure is reported") {
  const auto& b = base();
  const Model single = b.single;
  const auto spec = compute_spectrum(solve_kink(single, KinkSite::intersite), single, false);
  const auto p = predict(b.g.omega0, b.g.v0, {8}, single);
  CHECK_THROWS_AS(error_table(spec, p, single, {8}, "goldstone"), MatchingError);
}

TEST_CASE("onsite components carry the unstable mode") {
  const Model single = sg(0.5, Grid::centered(60));
  const auto bm = base_mode(solve_kink(single, KinkSite::onsite), single, ModeLabel::unstable);
  CHECK(bm.omega0 > 0.0);
  const SeedSpec s = SeedSpec::multikink({8}, {KinkSite::onsite, KinkSite::onsite});
  const Model m = sg(0.5, grid_for(s, 60));
  const auto u = build_equilibrium(s, m).field;
  const auto spec = compute_spectrum(u, m, false);
  CHECK(spec.unstable_count() == 2);
  const auto p = predict(bm.omega0, bm.v0, {8}, m);
  CHECK_FALSE(p.all_imaginary);
  const auto rows = error_table(spec, p, m, {8}, "unstable");
  for (const auto& r : rows) CHECK(r.relative_error < 1e-2);

  CHECK_THROWS_AS(base_mode(solve_kink(sg(0.1, Grid::centered(60)), KinkSite::intersite),
                            sg(0.1, Grid::centered(60)), ModeLabel::edge),
                  HypothesisViolation);
}

TEST_CASE("splice deviation shrinks with distance") {
  const Model single = sg(0.25, Grid::centered(60));
  PrimaryKinks k;
  k.intersite = solve_kink(single, KinkSite::intersite);
  double prev = 1.0;
  for (int n1 : {4, 8, 12}) {
    const SeedSpec s = SeedSpec::multikink({n1});
    const Model m = sg(0.25, grid_for(s, 60));
    const double dev = splice_deviation(build_equilibrium(s, m).field, s, m, k);
    CHECK(dev < prev);
    prev = dev;
  }
}
