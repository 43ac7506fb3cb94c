#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dkg/equilibria.hpp"
#include "dkg/errors.hpp"
#include "dkg/spectral.hpp"
#include "dkg/tridiagonal.hpp"
#include "oracles.hpp"

using namespace dkg;
using oracle::pi;

namespace {

Model sg(double d, int n) { return Model(d, Nonlinearity::sine_gordon(), Grid::centered(n)); }

TridiagonalOperator random_tridiagonal(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-2, 2);
  std::vector<double> a(n), b(n - 1);
  for (auto& x : a) x = U(rng);
  for (auto& x : b) x = U(rng);
  return TridiagonalOperator(a, b);
}

Eigen::MatrixXd dense(const TridiagonalOperator& t) {
  const int n = static_cast<int>(t.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = t.diagonal[i];
  for (int i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = t.off_diagonal[i];
  return m;
}

void check_pairs(const TridiagonalOperator& t, const SpectrumResult& s) {
  const double nt = t.norm_inf();
  REQUIRE(s.vectors.size() == t.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto tv = t.apply(s.vectors[i].span());
    double res = 0;
    for (std::size_t k = 0; k < t.size(); ++k) res = std::max(res, std::abs(tv[k] - s.omegas[i] * s.vectors[i].values[k]));
    CHECK(res < 1e-10 * nt);
    for (std::size_t j = i; j < s.size(); ++j) {
      double dot = 0;
      for (std::size_t k = 0; k < t.size(); ++k) dot += s.vectors[i].values[k] * s.vectors[j].values[k];
      CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
  }
}

}  // namespace

TEST_CASE("eigensolver: trivial matrices") {
  const TridiagonalOperator diag({3.0, -1.0, 2.0}, {0.0, 0.0});
  const auto s = eigen_symmetric_tridiagonal(diag, true);
  CHECK(s.omegas == std::vector<double>{-1.0, 2.0, 3.0});
  CHECK(std::abs(s.vectors[0].values[1]) == doctest::Approx(1.0));
  const TridiagonalOperator two({0.0, 0.0}, {1.0});
  const auto s2 = eigen_symmetric_tridiagonal(two, true);
  CHECK(s2.omegas[0] == doctest::Approx(-1.0));
  CHECK(s2.omegas[1] == doctest::Approx(1.0));
  const auto one = eigen_symmetric_tridiagonal(TridiagonalOperator({5.0}, {}), true);
  CHECK(one.omegas == std::vector<double>{5.0});
  CHECK_THROWS_AS(TridiagonalOperator({1.0, 2.0}, {1.0, 1.0}), InvalidArgumentError);
}

TEST_CASE("eigensolver: Neumann Laplacian closed form") {
  for (int n : {8, 33, 100}) {
    for (double d : {0.25, 1.0}) {
      std::vector<double> a(n, -2 * d), b(n - 1, d);
      a.front() = a.back() = -d;
      const TridiagonalOperator t(a, b);
      std::vector<double> exact(n);
      for (int k = 0; k < n; ++k) {
        const double s = std::sin(k * pi / (2.0 * n));
        exact[k] = -4 * d * s * s;
      }
      std::sort(exact.begin(), exact.end());
      for (auto solver : {&eigen_symmetric_tridiagonal, &eigen_bisection}) {
        const auto s = solver(t, true);
        for (int k = 0; k < n; ++k) CHECK(std::abs(s.omegas[k] - exact[k]) < 1e-10);
        check_pairs(t, s);
      }
    }
  }
}

TEST_CASE("eigensolver: random matrices against Eigen and bisection") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto t = random_tridiagonal(60, seed);
    const auto ql = eigen_symmetric_tridiagonal(t, true);
    const auto bi = eigen_bisection(t, true);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(t));
    const double nt = t.norm_inf();
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(std::abs(ql.omegas[i] - es.eigenvalues()(i)) < 1e-12 * nt);
      CHECK(std::abs(bi.omegas[i] - ql.omegas[i]) < 1e-12 * nt);
    }
    check_pairs(t, ql);
    check_pairs(t, bi);
  }
}

TEST_CASE("eigensolver: clustered spectrum") {
  // Wilkinson W21+: pairs of nearly equal eigenvalues.
  const int n = 21;
  std::vector<double> a(n), b(n - 1, 1.0);
  for (int i = 0; i < n; ++i) a[i] = std::abs(10 - i);
  const TridiagonalOperator t(a, b);
  check_pairs(t, eigen_symmetric_tridiagonal(t, true));
  check_pairs(t, eigen_bisection(t, true));
}

TEST_CASE("Sturm count and tridiagonal solve") {
  const auto t = random_tridiagonal(40, 11);
  const auto s = eigen_symmetric_tridiagonal(t, false);
  CHECK(t.count_below(s.omegas[10] + 1e-9) == 11);
  CHECK(t.count_below(s.omegas[0] - 1e-9) == 0);

  std::vector<double> rhs(40);
  for (int i = 0; i < 40; ++i) rhs[i] = std::cos(i);
  const auto x = solve_tridiagonal(t, rhs);
  const Eigen::VectorXd ref = dense(t).partialPivLu().solve(Eigen::Map<Eigen::VectorXd>(rhs.data(), 40));
  for (int i = 0; i < 40; ++i) CHECK(x[i] == doctest::Approx(ref(i)).epsilon(1e-10));

  const TridiagonalOperator sing({1.0, 1.0}, {1.0});
  CHECK_THROWS_AS(solve_tridiagonal(sing, std::vector<double>{1.0, 1.0}), SingularJacobianError);
}

TEST_CASE("linearization") {
  const Model m = sg(0.5, 10);
  const Grid g = m.grid();
  const auto flat = LatticeField::constant(g.lo, g.size(), pi);
  const auto op = linearize(flat, m);
  CHECK(op.diagonal[0] == doctest::Approx(-0.5 - 1.0));
  CHECK(op.diagonal[4] == doctest::Approx(-1.0 - 1.0));
  for (double b : op.off_diagonal) CHECK(b == 0.5);
  const auto op0 = linearize(flat, m.with_coupling(0.0));
  for (double b : op0.off_diagonal) CHECK(b == 0.0);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-3, 3);
  std::vector<double> u(10), v(10);
  for (auto& x : u) x = U(rng);
  for (auto& x : v) x = U(rng);
  const auto lu = linearize(LatticeField(g.lo, u), m).apply(v);
  const auto ref = oracle::sg_jacobian_apply(u, v, 0.5);
  for (int i = 0; i < 10; ++i) CHECK(lu[i] == doctest::Approx(ref[i]).epsilon(1e-13));
}

TEST_CASE("Jacobian against finite differences") {
  for (auto nl : {Nonlinearity::sine_gordon(), Nonlinearity::phi4()}) {
    const Model m(0.37, nl, Grid::centered(16));
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> U(-2, 2);
    std::vector<double> u(16), v(16);
    for (auto& x : u) x = U(rng);
    for (auto& x : v) x = U(rng);
    const LatticeField uf(m.grid().lo, u);
    const auto jv = linearize(uf, m).apply(v);
    const double eps = 1e-6;
    LatticeField up = uf, dn = uf;
    for (int i = 0; i < 16; ++i) {
      up.values[i] += eps * v[i];
      dn.values[i] -= eps * v[i];
    }
    const auto rp = residual(up, m), rd = residual(dn, m);
    double num = 0, den = 0;
    for (int i = 0; i < 16; ++i) {
      const double fd = (rp.values[i] - rd.values[i]) / (2 * eps);
      num = std::max(num, std::abs(fd - jv[i]));
      den = std::max(den, std::abs(jv[i]));
    }
    CHECK(num / den < 1e-6);
  }
}

TEST_CASE("kink spectra at d = 0.5") {
  const Model m = sg(0.5, 60);
  const auto inter = solve_kink(m, KinkSite::intersite);
  const auto s = classify(compute_spectrum(inter, m), m);
  CHECK(s.classified);
  CHECK(s.unstable_count() == 0);
  CHECK(s.hypothesis_gap_holds);
  const auto g = s.find(ModeLabel::goldstone);
  const auto e = s.find(ModeLabel::edge);
  REQUIRE(g);
  REQUIRE(e);
  CHECK(std::abs(s.lambda(*g).imag()) == doctest::Approx(0.5718).epsilon(0.01));
  CHECK(s.lambda(*g).real() == 0.0);
  CHECK(std::abs(s.lambda(*e)) == doctest::Approx(0.9941).epsilon(0.005));

  // Goldstone eigenvector is even about the crossing: v(-n) = v(n-1)
  const auto& v = s.vectors[*g];
  for (int n = 1; n <= 20; ++n) CHECK(std::abs(v.at(-n) - v.at(n - 1)) < 1e-8);

  const auto on = solve_kink(m, KinkSite::onsite);
  const auto so = classify(compute_spectrum(on, m), m);
  CHECK(so.unstable_count() == 1);
  REQUIRE(so.find(ModeLabel::unstable));

  CHECK_THROWS_AS(classify(compute_spectrum(inter, m, false), m), InvalidArgumentError);
}

TEST_CASE("intersite kink is spectrally stable across d") {
  for (double d : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    CAPTURE(d);
    const Model m = sg(d, 60);
    const auto s = compute_spectrum(solve_kink(m, KinkSite::intersite), m, false);
    CHECK(s.omegas.back() < 0.0);
  }
}

TEST_CASE("band edges converge") {
  const Model m = sg(0.5, 200);
  const auto s = classify(compute_spectrum(solve_kink(m, KinkSite::intersite), m), m);
  const double lo = std::sqrt(-s.band_upper), hi = std::sqrt(-s.band_lower);
  CHECK(std::abs(lo - 1.0) < 1e-2);
  CHECK(std::abs(hi - std::sqrt(3.0)) < 1e-2);
}

TEST_CASE("decay fits") {
  std::vector<double> vals;
  for (int n = 0; n < 12; ++n) vals.push_back(2.0 + 3.0 * std::pow(1.7, -n));
  const auto f = decay_fit(LatticeField(0, vals), 2.0);
  CHECK(f.rate == doctest::Approx(std::log(1.7)).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(decay_fit(LatticeField(0, {2.0, 2.0, 2.0, 2.0, 2.0, 2.0}), 2.0), FitError);

  const Model m = sg(0.5, 60);
  const auto k = solve_kink(m, KinkSite::intersite);
  const auto kf = decay_fit(window(k, 2, 12), pi);
  CHECK(kf.rate == doctest::Approx(std::log(2 + std::sqrt(3.0))).epsilon(5e-4));
  const auto w = window(k, 3, 5);
  CHECK(w.first() == 3);
  CHECK(w.size() == 3);
}

TEST_CASE("edge mode onset") {
  std::vector<double> grid;
  for (double d = 0.20; d <= 0.3501; d += 0.01) grid.push_back(d);
  const auto on = edge_mode_onset(sg(0.2, 60), grid);
  REQUIRE(on.found);
  CHECK(on.bracketed);
  CHECK(on.d == doctest::Approx(0.265).epsilon(0.015 / 0.265));
  const std::vector<double> low{0.05, 0.1, 0.15};
  CHECK_FALSE(edge_mode_onset(sg(0.05, 60), low).found);
  const std::vector<double> bad{0.3, 0.2};
  CHECK_THROWS_AS(edge_mode_onset(sg(0.2, 60), bad), InvalidArgumentError);
}
