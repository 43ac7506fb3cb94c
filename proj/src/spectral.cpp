#include "dkg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "dkg/equilibria.hpp"
#include "dkg/errors.hpp"
#include "dkg/stats.hpp"

namespace dkg {

std::string_view to_string(ModeLabel label) {
  switch (label) {
    case ModeLabel::goldstone: return "goldstone";
    case ModeLabel::edge: return "edge";
    case ModeLabel::unstable: return "unstable";
    case ModeLabel::other: return "other";
  }
  return "other";
}

std::complex<double> SpectrumResult::lambda(std::size_t i) const {
  return std::sqrt(std::complex<double>(omegas.at(i), 0.0));
}

int SpectrumResult::unstable_count() const {
  return static_cast<int>(std::count_if(omegas.begin(), omegas.end(), [](double w) { return w > 0.0; }));
}

std::optional<std::size_t> SpectrumResult::find(ModeLabel label) const {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == label) return point_modes[k];
  }
  return std::nullopt;
}

TridiagonalOperator linearize(const LatticeField& u, const Model& model) {
  model.require_conforming(u, "linearize");
  const std::size_t n = u.size();
  const double d = model.d();
  const auto& nl = model.nonlinearity();
  std::vector<double> diag(n), off(n - 1, d);
  for (std::size_t i = 0; i < n; ++i) diag[i] = -2.0 * d - nl.f_prime(u.values[i]);
  diag.front() += d;
  diag.back() += d;
  return TridiagonalOperator(std::move(diag), std::move(off));
}

namespace {

void normalize_sign(std::vector<double>& v) {
  for (double x : v) {
    if (std::abs(x) > 1e-6) {
      if (x < 0.0) {
        for (double& y : v) y = -y;
      }
      return;
    }
  }
}

SpectrumResult sorted_result(std::vector<double> w, std::vector<std::vector<double>> vecs) {
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });
  SpectrumResult out;
  out.omegas.reserve(w.size());
  for (std::size_t k : order) out.omegas.push_back(w[k]);
  if (!vecs.empty()) {
    out.vectors.reserve(w.size());
    for (std::size_t k : order) {
      normalize_sign(vecs[k]);
      out.vectors.emplace_back(0, std::move(vecs[k]));
    }
  }
  return out;
}

}  // namespace

SpectrumResult eigen_symmetric_tridiagonal(const TridiagonalOperator& t, bool want_vectors) {
  const std::size_t n = t.size();
  std::vector<double> d = t.diagonal;
  std::vector<double> e(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = t.off_diagonal[i];

  // z is column-major: column j is the j-th eigenvector.
  std::vector<double> z;
  if (want_vectors) {
    z.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;
  }

  const double eps = std::numeric_limits<double>::epsilon();
  const std::size_t max_sweeps = 50 * std::max<std::size_t>(n, 1);
  std::size_t sweeps = 0;

  for (std::size_t l = 0; l < n; ++l) {
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++sweeps > max_sweeps) {
        throw EigenConvergenceError("tridiagonal QL: no convergence after " + std::to_string(max_sweeps) +
                                    " implicit steps");
      }
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      std::size_t i = m;
      while (i-- > l) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        if (want_vectors) {
          double* zi = &z[i * n];
          double* zi1 = &z[(i + 1) * n];
          for (std::size_t k = 0; k < n; ++k) {
            f = zi1[k];
            zi1[k] = s * zi[k] + c * f;
            zi[k] = c * zi[k] - s * f;
          }
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }

  std::vector<std::vector<double>> vecs;
  if (want_vectors) {
    vecs.resize(n);
    for (std::size_t j = 0; j < n; ++j) vecs[j].assign(z.begin() + j * n, z.begin() + (j + 1) * n);
  }
  return sorted_result(std::move(d), std::move(vecs));
}

SpectrumResult eigen_bisection(const TridiagonalOperator& t, bool want_vectors) {
  const std::size_t n = t.size();
  double lo = std::numeric_limits<double>::max(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double rad = 0.0;
    if (i > 0) rad += std::abs(t.off_diagonal[i - 1]);
    if (i + 1 < n) rad += std::abs(t.off_diagonal[i]);
    lo = std::min(lo, t.diagonal[i] - rad);
    hi = std::max(hi, t.diagonal[i] + rad);
  }
  const double norm = std::max(t.norm_inf(), std::numeric_limits<double>::min());
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * norm;

  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k-th smallest: largest x with count_below(x) <= k.
    double a = lo - tol, b = hi + tol;
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      if (t.count_below(mid) <= k) {
        a = mid;
      } else {
        b = mid;
      }
    }
    w[k] = 0.5 * (a + b);
  }

  std::vector<std::vector<double>> vecs;
  if (want_vectors) {
    vecs.resize(n);
    const double cluster = 1e-3 * norm;
    TridiagonalSolveOptions opts;
    opts.perturb_tiny_pivots = true;
    opts.singular_threshold = std::numeric_limits<double>::epsilon();
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(1.7 * static_cast<double>(i + k) + 0.3);
      opts.shift = w[k];
      for (int it = 0; it < 4; ++it) {
        v = solve_tridiagonal(t, v, opts);
        for (std::size_t j = k; j-- > 0;) {
          if (std::abs(w[k] - w[j]) > cluster) break;
          const double proj = std::inner_product(v.begin(), v.end(), vecs[j].begin(), 0.0);
          for (std::size_t i = 0; i < n; ++i) v[i] -= proj * vecs[j][i];
        }
        const double nv = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        for (double& x : v) x /= nv;
      }
      vecs[k] = std::move(v);
    }
  }
  return sorted_result(std::move(w), std::move(vecs));
}

SpectrumResult compute_spectrum(const LatticeField& u, const Model& model, bool want_vectors) {
  SpectrumResult s = eigen_symmetric_tridiagonal(linearize(u, model), want_vectors);
  for (auto& v : s.vectors) v.offset = u.offset;
  return s;
}

LatticeField window(const LatticeField& u, int first, int last) {
  first = std::max(first, u.first());
  last = std::min(last, u.last());
  if (last < first) return LatticeField(first, {});
  return LatticeField(first, std::vector<double>(u.values.begin() + (first - u.offset),
                                                 u.values.begin() + (last - u.offset) + 1));
}

DecayFit decay_fit(const LatticeField& tail, double asymptote) {
  const double floor = 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(asymptote));
  std::vector<double> x, y;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const double dev = std::abs(tail.values[i] - asymptote);
    if (dev > floor) {
      x.push_back(static_cast<double>(tail.offset + static_cast<int>(i)));
      y.push_back(std::log(dev));
    }
  }
  if (x.size() < 5) {
    throw FitError("decay_fit: only " + std::to_string(x.size()) + " usable samples (need 5)");
  }
  const LinearFit fit = fit_line(x, y);
  return DecayFit{-fit.slope, fit.intercept, fit.r_squared, fit.samples};
}

namespace {

// R^2 of the exponential fit to the weaker of the two outer tails of v.
double tail_r_squared(const LatticeField& v) {
  const double peak = max_abs(v);
  int first_big = v.last(), last_big = v.first();
  for (int n = v.first(); n <= v.last(); ++n) {
    if (std::abs(v.at(n)) >= 0.5 * peak) {
      first_big = std::min(first_big, n);
      last_big = std::max(last_big, n);
    }
  }
  double worst = 1.0;
  try {
    worst = std::min(worst, decay_fit(window(v, last_big + 2, last_big + 12), 0.0).r_squared);
    LatticeField left = reflect(window(v, first_big - 12, first_big - 2));
    worst = std::min(worst, decay_fit(left, 0.0).r_squared);
  } catch (const FitError&) {
    return 0.0;
  }
  return worst;
}

}  // namespace

SpectrumResult classify(SpectrumResult s, const Model& model) {
  if (s.vectors.size() != s.omegas.size()) {
    throw InvalidArgumentError("classify: eigenvectors are required");
  }
  const double fp = model.nonlinearity().well_curvature();
  const double n = static_cast<double>(s.size());
  const double edge_error = 4.0 * model.d() * std::pow(std::sin(std::numbers::pi / (2.0 * n)), 2);

  s.point_modes.clear();
  s.labels.clear();
  std::vector<std::size_t> gap;
  for (std::size_t i = s.size(); i-- > 0;) {
    const double w = s.omegas[i];
    if (w > 0.0) {
      s.point_modes.push_back(i);
      s.labels.push_back(ModeLabel::unstable);
    } else if (w > -fp + 3.0 * edge_error && tail_r_squared(s.vectors[i]) > 0.99) {
      s.point_modes.push_back(i);
      s.labels.push_back(ModeLabel::other);
      gap.push_back(s.labels.size() - 1);
    }
  }
  // gap[] is ordered by descending omega: first is closest to zero.
  if (!gap.empty()) {
    s.labels[gap.front()] = ModeLabel::goldstone;
    if (gap.size() > 1) s.labels[gap.back()] = ModeLabel::edge;
  }

  s.hypothesis_gap_holds = true;
  for (std::size_t i : s.point_modes) {
    if (std::abs(s.omegas[i]) >= fp) s.hypothesis_gap_holds = false;
  }

  bool have_band = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::find(s.point_modes.begin(), s.point_modes.end(), i) != s.point_modes.end()) continue;
    if (!have_band) {
      s.band_lower = s.band_upper = s.omegas[i];
      have_band = true;
    }
    s.band_lower = std::min(s.band_lower, s.omegas[i]);
    s.band_upper = std::max(s.band_upper, s.omegas[i]);
  }
  s.classified = true;
  return s;
}

namespace {

int gap_modes_above(const LatticeField& u, const Model& model, double separation) {
  const double fp = model.nonlinearity().well_curvature();
  const SpectrumResult s = compute_spectrum(u, model, false);
  return static_cast<int>(std::count_if(s.omegas.begin(), s.omegas.end(),
                                        [&](double w) { return w > -fp + separation && w < 0.0; }));
}

}  // namespace

EdgeOnset edge_mode_onset(const Model& base, std::span<const double> d_grid, double separation,
                          double resolution) {
  EdgeOnset out;
  if (d_grid.empty()) return out;
  if (!std::is_sorted(d_grid.begin(), d_grid.end())) {
    throw InvalidArgumentError("edge_mode_onset: d grid must be ascending");
  }

  const Model start = base.with_coupling(d_grid.front());
  LatticeField u = solve_kink(start, KinkSite::intersite);
  if (gap_modes_above(u, start, separation) >= 2) {
    out.found = true;
    out.d = out.bracket_lo = out.bracket_hi = d_grid.front();
    return out;
  }

  NewtonOptions newton;
  double d_prev = d_grid.front();
  for (std::size_t k = 1; k < d_grid.size(); ++k) {
    const Model m = base.with_coupling(d_grid[k]);
    LatticeField next = newton_solve(u, m, newton).field;
    if (gap_modes_above(next, m, separation) < 2) {
      u = std::move(next);
      d_prev = d_grid[k];
      continue;
    }
    double lo = d_prev, hi = d_grid[k];
    LatticeField u_lo = u;
    while (hi - lo > resolution) {
      const double mid = 0.5 * (lo + hi);
      const Model mm = base.with_coupling(mid);
      LatticeField um = newton_solve(u_lo, mm, newton).field;
      if (gap_modes_above(um, mm, separation) >= 2) {
        hi = mid;
      } else {
        lo = mid;
        u_lo = std::move(um);
      }
    }
    out.found = out.bracketed = true;
    out.bracket_lo = lo;
    out.bracket_hi = hi;
    out.d = 0.5 * (lo + hi);
    return out;
  }
  return out;
}

}  // namespace dkg
