#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <sstream>
#include <thread>

#include "dkg/equilibria.hpp"
#include "dkg/errors.hpp"
#include "dkg/spectral.hpp"

namespace dkg {

namespace {

using Vec = Eigen::VectorXd;

// x = (u_lo .. u_hi, d)
struct Tracker {
  const Model& model;
  const ArclengthOptions& opts;
  int n;

  LatticeField field(const Vec& x) const {
    return LatticeField(model.grid().lo, std::vector<double>(x.data(), x.data() + n));
  }

  Vec pack(const LatticeField& u, double d) const {
    Vec x(n + 1);
    for (int i = 0; i < n; ++i) x[i] = u.values[static_cast<std::size_t>(i)];
    x[n] = d;
    return x;
  }

  // Residual and its d-derivative (Delta_2 u).
  void residual(const Vec& x, Vec& r, Vec& lap) const {
    const auto& nl = model.nonlinearity();
    const double d = x[n];
    r.resize(n);
    lap.resize(n);
    for (int i = 0; i < n; ++i) {
      const double left = x[i > 0 ? i - 1 : 0];
      const double right = x[i + 1 < n ? i + 1 : n - 1];
      lap[i] = left - 2.0 * x[i] + right;
      r[i] = d * lap[i] - nl.f(x[i]);
    }
  }

  Eigen::MatrixXd jacobian(const Vec& x, const Vec& lap) const {
    const auto& nl = model.nonlinearity();
    const double d = x[n];
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int i = 0; i < n; ++i) {
      const int nb = (i > 0 ? 1 : 0) + (i + 1 < n ? 1 : 0);
      j(i, i) = -nb * d - nl.f_prime(x[i]);
      if (i > 0) j(i, i - 1) = d;
      if (i + 1 < n) j(i, i + 1) = d;
      j(i, n) = lap[i];
    }
    return j;
  }

  struct Corrected {
    Vec x;
    int iterations;
  };

  // Newton on R(u,d) = 0 with t.(x - anchor) = offset.
  std::optional<Corrected> correct(Vec x, const Vec& t, const Vec& anchor, double offset) const {
    Vec r, lap;
    for (int it = 0; it <= opts.corrector.max_iter; ++it) {
      if (!x.allFinite()) return std::nullopt;
      residual(x, r, lap);
      const double c = t.dot(x - anchor) - offset;
      if (r.lpNorm<Eigen::Infinity>() < opts.corrector.tol && std::abs(c) < 1e-10) return Corrected{x, it};
      if (it == opts.corrector.max_iter) break;
      Eigen::MatrixXd j = jacobian(x, lap);
      j.row(n) = t.transpose();
      Vec rhs(n + 1);
      rhs.head(n) = -r;
      rhs[n] = -c;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(j);
      if (!(std::abs(lu.determinant()) > 0.0)) return std::nullopt;
      const Vec dx = lu.solve(rhs);
      if (!dx.allFinite()) return std::nullopt;
      x += dx;
    }
    return std::nullopt;
  }

  Vec initial_tangent(const Vec& x) const {
    Vec t(n + 1);
    if (opts.initial_tangent_u) {
      for (int i = 0; i < n; ++i) t[i] = opts.initial_tangent_u->values.at(static_cast<std::size_t>(i));
      t[n] = opts.initial_tangent_d;
      if (t.norm() == 0.0) throw InvalidArgumentError("continue_arclength: zero initial tangent");
      return t.normalized();
    }
    Vec r, lap;
    residual(x, r, lap);
    Eigen::MatrixXd j = jacobian(x, lap).topLeftCorner(n, n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(j);
    Vec tu = lu.solve(-lap);
    t.head(n) = tu;
    t[n] = 1.0;
    if (!t.allFinite()) {
      t.setZero();
      t[n] = 1.0;
    }
    return (opts.direction >= 0 ? 1.0 : -1.0) * t.normalized();
  }

  // Accepts a step only when it stays close to the predictor direction.
  bool plausible(const Vec& from, const Vec& to, const Vec& t, double h) const {
    const Vec dx = to - from;
    const double len = dx.norm();
    return len <= 1.5 * h && dx.dot(t) > 0.8 * len;
  }
};

double quadratic_vertex(double s0, double d0, double s1, double d1, double s2, double d2) {
  // Divided differences on (s, d).
  const double f01 = (d1 - d0) / (s1 - s0);
  const double f12 = (d2 - d1) / (s2 - s1);
  const double a = (f12 - f01) / (s2 - s0);
  if (a == 0.0) return d1;
  const double b = f01 - a * (s0 + s1);
  const double c = d0 - a * s0 * s0 - b * s0;
  return c - b * b / (4.0 * a);
}

struct Node {
  Vec x;
  double s;
};

std::size_t nearest_zero_mode(const SpectrumResult& spec) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < spec.omegas.size(); ++i) {
    if (std::abs(spec.omegas[i]) < std::abs(spec.omegas[best])) best = i;
  }
  return best;
}

// Re-walks the fold neighbourhood with finer steps until successive vertex
// estimates agree to the tolerance.
BranchEvent refine_fold(const Tracker& tr, Node a, Vec t, Node b, Node c) {
  double estimate = quadratic_vertex(a.s, a.x[tr.n], b.s, b.x[tr.n], c.s, c.x[tr.n]);
  Node best = std::abs(b.x[tr.n] - estimate) < std::abs(c.x[tr.n] - estimate) ? b : c;
  std::string note;
  bool converged = !tr.opts.refine_folds;
  for (int round = 0; round < 8 && !converged; ++round) {
    const double h = (c.s - a.s) / 8.0;
    std::vector<Node> local{a};
    Vec dir = t;
    bool found = false;
    for (int k = 0; k < 40 && !found; ++k) {
      const Node& last = local.back();
      auto res = tr.correct(last.x + h * dir, dir, last.x + h * dir, 0.0);
      if (!res || !tr.plausible(last.x, res->x, dir, h)) break;
      Node next{res->x, last.s + (res->x - last.x).norm()};
      dir = (next.x - last.x).normalized();
      local.push_back(next);
      const std::size_t m = local.size();
      if (m >= 3) {
        const double d1 = local[m - 2].x[tr.n] - local[m - 3].x[tr.n];
        const double d2 = local[m - 1].x[tr.n] - local[m - 2].x[tr.n];
        if (d1 * d2 < 0.0) {
          const double e = quadratic_vertex(local[m - 3].s, local[m - 3].x[tr.n], local[m - 2].s,
                                            local[m - 2].x[tr.n], local[m - 1].s, local[m - 1].x[tr.n]);
          converged = std::abs(e - estimate) < tr.opts.fold_tolerance;
          estimate = e;
          a = local[m - 3];
          b = local[m - 2];
          c = local[m - 1];
          t = (b.x - a.x).normalized();
          best = b;
          found = true;
        }
      }
    }
    if (!found) {
      note = "fold refinement lost the turning point; coarse estimate kept";
      break;
    }
  }
  if (!converged && note.empty()) note = "fold refinement did not reach tolerance";
  BranchEvent ev;
  ev.kind = EventKind::fold;
  ev.d = estimate;
  ev.field = tr.field(best.x);
  const SpectrumResult spec = compute_spectrum(ev.field, tr.model.with_coupling(best.x[tr.n]), true);
  ev.critical_vector = spec.vectors[nearest_zero_mode(spec)];
  ev.note = note;
  return ev;
}

// Bisects between two branch points whose stability index differs.
BranchEvent refine_pitchfork(const Model& model, const BranchPoint& p, const BranchPoint& q, std::size_t index) {
  double lo = 0.0, hi = 1.0;
  LatticeField u = p.field;
  auto at = [&](double t) {
    LatticeField guess = p.field;
    for (std::size_t i = 0; i < guess.values.size(); ++i) {
      guess.values[i] += t * (q.field.values[i] - p.field.values[i]);
    }
    const double d = p.d + t * (q.d - p.d);
    return std::make_pair(newton_solve(guess, model.with_coupling(d)).field, d);
  };
  double d = p.d;
  std::string note;
  try {
    for (int it = 0; it < 60 && std::abs(hi - lo) * std::abs(q.d - p.d) > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      auto [um, dm] = at(mid);
      const int idx = compute_spectrum(um, model.with_coupling(dm), false).unstable_count();
      if (idx == p.stability_index) {
        lo = mid;
        u = um;
        d = dm;
      } else {
        hi = mid;
      }
    }
  } catch (const ConvergenceError& e) {
    note = std::string("pitchfork bisection stopped: ") + e.what();
  }
  BranchEvent ev;
  ev.kind = EventKind::pitchfork;
  ev.d = d;
  ev.index = index;
  ev.field = u;
  const SpectrumResult spec = compute_spectrum(u, model.with_coupling(d), true);
  ev.critical_vector = spec.vectors[nearest_zero_mode(spec)];
  ev.note = note;
  return ev;
}

Branch trace(const Tracker& tr, Vec x, Vec t, double s0) {
  const ArclengthOptions& opts = tr.opts;
  Branch branch;
  std::vector<Node> nodes{{x, s0}};
  branch.points.push_back(make_branch_point(tr.field(x), tr.model.with_coupling(x[tr.n]), s0));
  double h = opts.step;
  while (static_cast<int>(branch.points.size()) < opts.max_points) {
    const Node& last = nodes.back();
    std::optional<Tracker::Corrected> res;
    while (true) {
      const Vec pred = last.x + h * t;
      res = tr.correct(pred, t, pred, 0.0);
      if (res && tr.plausible(last.x, res->x, t, h)) break;
      res.reset();
      h *= 0.5;
      if (h < opts.min_step) break;
    }
    if (!res) {
      BranchEvent ev;
      ev.kind = EventKind::stall;
      ev.d = last.x[tr.n];
      ev.index = branch.points.size() - 1;
      std::ostringstream os;
      os << "step collapsed below " << opts.min_step;
      ev.note = os.str();
      branch.events.push_back(std::move(ev));
      break;
    }
    const Vec xn = res->x;
    if (xn[tr.n] < opts.d_min || xn[tr.n] > opts.d_max) {
      BranchEvent ev;
      ev.kind = EventKind::range_end;
      ev.d = last.x[tr.n];
      ev.index = branch.points.size() - 1;
      branch.events.push_back(std::move(ev));
      break;
    }
    const Node next{xn, last.s + (xn - last.x).norm()};
    const Vec t_prev = t;
    t = (xn - last.x).normalized();
    nodes.push_back(next);
    branch.points.push_back(make_branch_point(tr.field(xn), tr.model.with_coupling(xn[tr.n]), next.s));
    if (res->iterations <= 3) h = std::min(1.5 * h, opts.max_step);

    const std::size_t m = nodes.size();
    if (m >= 3) {
      const double d1 = nodes[m - 2].x[tr.n] - nodes[m - 3].x[tr.n];
      const double d2 = nodes[m - 1].x[tr.n] - nodes[m - 2].x[tr.n];
      if (d1 * d2 < 0.0) {
        const Vec t0 = m >= 4 ? Vec((nodes[m - 3].x - nodes[m - 4].x).normalized()) : t_prev;
        BranchEvent ev = refine_fold(tr, nodes[m - 3], t0, nodes[m - 2], nodes[m - 1]);
        ev.index = m - 2;
        branch.events.push_back(std::move(ev));
        if (opts.stop_at_first_fold) break;
      }
    }
  }
  if (static_cast<int>(branch.points.size()) >= opts.max_points) {
    BranchEvent ev;
    ev.kind = EventKind::range_end;
    ev.d = branch.points.back().d;
    ev.index = branch.points.size() - 1;
    ev.note = "max_points reached";
    branch.events.push_back(std::move(ev));
  }

  // Index changes not explained by a nearby fold.
  const auto folds = branch.events_of(EventKind::fold);
  for (std::size_t i = 0; i + 1 < branch.points.size(); ++i) {
    if (branch.points[i].stability_index == branch.points[i + 1].stability_index) continue;
    const bool by_fold = std::any_of(folds.begin(), folds.end(), [&](const BranchEvent& f) {
      return f.index + 2 >= i && f.index <= i + 2;
    });
    if (by_fold) continue;
    branch.events.push_back(refine_pitchfork(tr.model, branch.points[i], branch.points[i + 1], i));
  }
  std::stable_sort(branch.events.begin(), branch.events.end(),
                   [](const BranchEvent& a, const BranchEvent& b) { return a.index < b.index; });
  return branch;
}

}  // namespace

Branch continue_arclength(const BranchPoint& start, const Model& model, const ArclengthOptions& opts) {
  if (!(opts.step > 0.0) || !(opts.min_step > 0.0) || opts.max_step < opts.step) {
    throw InvalidArgumentError("continue_arclength: need 0 < min_step, 0 < step <= max_step");
  }
  const Model m = model.with_coupling(start.d);
  m.require_conforming(start.field, "continue_arclength");
  const Tracker tr{m, opts, static_cast<int>(start.field.size())};
  const double r = max_abs(residual(start.field, m));
  if (!(r < std::max(opts.corrector.tol, 1e-10))) {
    throw SeedError("continue_arclength: start point is not converged (residual " + std::to_string(r) + ")");
  }
  const Vec x = tr.pack(start.field, start.d);
  return trace(tr, x, tr.initial_tangent(x), start.arclength);
}

Branch switch_branch(const Branch& parent, const BranchEvent& pitchfork, const Model& model, int sign,
                     ArclengthOptions opts, double epsilon) {
  if (pitchfork.kind != EventKind::pitchfork) throw InvalidArgumentError("switch_branch: event is not a pitchfork");
  if (parent.points.empty()) throw InvalidArgumentError("switch_branch: empty parent branch");
  LatticeField base = pitchfork.field;
  double d = pitchfork.d;
  if (base.empty()) {
    const auto& p = parent.points.at(std::min(pitchfork.index, parent.points.size() - 1));
    base = p.field;
    d = p.d;
  }
  const Model m = model.with_coupling(d);
  m.require_conforming(base, "switch_branch");
  const Tracker tr{m, opts, static_cast<int>(base.size())};
  Vec v = Vec::Zero(tr.n + 1);
  for (int i = 0; i < tr.n; ++i) v[i] = pitchfork.critical_vector.values.at(static_cast<std::size_t>(i));
  if (v.norm() == 0.0) throw InvalidArgumentError("switch_branch: pitchfork carries no critical vector");
  v = (sign >= 0 ? 1.0 : -1.0) * v.normalized();
  const Vec x0 = tr.pack(base, d);
  // Fix the projection on the critical direction at epsilon, let d float.
  auto res = tr.correct(x0 + epsilon * v, v, x0, epsilon);
  if (!res) throw SeedError("switch_branch: no bifurcating solution at amplitude " + std::to_string(epsilon));
  opts.initial_tangent_u.reset();
  Branch b = trace(tr, res->x, (res->x - x0).normalized(), 0.0);
  return b;
}

double kink_antikink_fold(int separation, const Model& base, Branch* branch_out) {
  if (separation < 2) throw InvalidArgumentError("kink_antikink_fold: separation must be >= 2");
  const int n = static_cast<int>(base.grid().size());
  const Model m0 = base.with_grid(Grid::symmetric_about((separation - 1) / 2.0, n)).with_coupling(0.0);
  const SeedSpec spec = SeedSpec::multikink({separation});
  LatticeField u = ac_seed(spec, m0);

  // Coarse natural continuation along the stable intersite pair.
  double d = 0.0;
  const double dd = 0.05;
  for (int k = 1; k < 400; ++k) {
    const double dn = k * dd;
    try {
      const Model mk = m0.with_coupling(dn);
      LatticeField next = newton_solve(u, mk).field;
      if (max_abs(difference(next, u)) > 0.3) break;
      if (compute_spectrum(next, mk, false).unstable_count() > 0) break;
      u = std::move(next);
      d = dn;
    } catch (const ConvergenceError&) {
      break;
    }
  }
  if (d == 0.0) throw SeedError("kink_antikink_fold: no solution beyond the anti-continuum limit");

  ArclengthOptions opts;
  opts.step = 0.01;
  opts.max_step = 0.05;
  opts.max_points = 2000;
  opts.stop_at_first_fold = true;
  Branch b = continue_arclength(make_branch_point(u, m0.with_coupling(d)), m0, opts);
  const auto folds = b.events_of(EventKind::fold);
  if (branch_out) *branch_out = b;
  if (folds.empty()) {
    throw ConvergenceError("kink_antikink_fold: no turning point found for separation " + std::to_string(separation));
  }
  return folds.front().d;
}

FoldSweep fold_vs_distance(std::span<const int> separations, const Model& base, int workers) {
  FoldSweep sweep;
  sweep.samples.resize(separations.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < separations.size(); i = next++) {
      FoldSample& s = sweep.samples[i];
      s.separation = separations[i];
      try {
        s.d0 = kink_antikink_fold(s.separation, base);
        s.ok = true;
      } catch (const Error& e) {
        s.error = e.what();
      }
    }
  };
  const int k = std::max(1, std::min<int>(workers, static_cast<int>(separations.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < k; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  std::vector<double> xs, ys;
  for (const auto& s : sweep.samples) {
    if (s.ok) {
      xs.push_back(s.separation);
      ys.push_back(s.d0);
    }
  }
  if (xs.size() < 2) throw FitError("fold_vs_distance: fewer than two successful separations");
  sweep.fit = fit_line(xs, ys);
  return sweep;
}

}  // namespace dkg
