#include "dkg/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dkg/errors.hpp"
#include "dkg/spectral.hpp"

namespace dkg {

std::string_view to_string(KinkSite site) {
  return site == KinkSite::intersite ? "intersite" : "onsite";
}

std::string_view to_string(SeedKind kind) {
  switch (kind) {
    case SeedKind::intersite_kink: return "intersite_kink";
    case SeedKind::onsite_kink: return "onsite_kink";
    case SeedKind::intersite_antikink: return "intersite_antikink";
    case SeedKind::onsite_antikink: return "onsite_antikink";
    case SeedKind::multikink: return "multikink";
    case SeedKind::kink_kink: return "kink_kink";
  }
  return "multikink";
}

SeedKind seed_kind_from_string(std::string_view name) {
  for (SeedKind k : {SeedKind::intersite_kink, SeedKind::onsite_kink, SeedKind::intersite_antikink,
                     SeedKind::onsite_antikink, SeedKind::multikink, SeedKind::kink_kink}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgumentError("unknown seed kind '" + std::string(name) + "'");
}

SeedSpec SeedSpec::kink(KinkSite site, int center) {
  SeedSpec s;
  s.kind = site == KinkSite::intersite ? SeedKind::intersite_kink : SeedKind::onsite_kink;
  s.sites = {site};
  s.center = center;
  return s;
}

SeedSpec SeedSpec::antikink(KinkSite site, int center) {
  SeedSpec s;
  s.kind = site == KinkSite::intersite ? SeedKind::intersite_antikink : SeedKind::onsite_antikink;
  s.sites = {site};
  s.center = center;
  return s;
}

SeedSpec SeedSpec::multikink(std::vector<int> distances, std::vector<KinkSite> sites, int center) {
  SeedSpec s;
  s.kind = SeedKind::multikink;
  s.distances = std::move(distances);
  s.sites = std::move(sites);
  s.center = center;
  return s;
}

SeedSpec SeedSpec::kink_kink(std::vector<int> distances, int center) {
  SeedSpec s = multikink(std::move(distances), {}, center);
  s.kind = SeedKind::kink_kink;
  return s;
}

int SeedSpec::components() const {
  switch (kind) {
    case SeedKind::multikink:
    case SeedKind::kink_kink: return static_cast<int>(distances.size()) + 1;
    default: return 1;
  }
}

KinkSite SeedSpec::site(int i) const {
  if (sites.empty()) return KinkSite::intersite;
  return sites.at(static_cast<std::size_t>(i));
}

int SeedSpec::component_center(int i) const {
  int c = center;
  for (int j = 0; j < i; ++j) c += distances.at(static_cast<std::size_t>(j));
  return c;
}

int SeedSpec::sign(int i) const {
  switch (kind) {
    case SeedKind::intersite_antikink:
    case SeedKind::onsite_antikink: return -1;
    case SeedKind::multikink: return i % 2 == 0 ? 1 : -1;
    default: return 1;
  }
}

void SeedSpec::validate() const {
  const int m = components();
  const bool multi = kind == SeedKind::multikink || kind == SeedKind::kink_kink;
  if (multi) {
    if (m < 2) throw InvalidArgumentError("multi-kink seed needs at least two components");
    for (int n : distances) {
      if (n < 2) throw InvalidArgumentError("multi-kink distances must be >= 2");
    }
  } else if (!distances.empty()) {
    throw InvalidArgumentError("single kink seed must not carry distances");
  }
  if (!sites.empty() && static_cast<int>(sites.size()) != m) {
    throw InvalidArgumentError("seed lists " + std::to_string(sites.size()) + " site types for " +
                               std::to_string(m) + " components");
  }
  if (kind == SeedKind::intersite_kink || kind == SeedKind::intersite_antikink) {
    if (site(0) != KinkSite::intersite) throw InvalidArgumentError("intersite seed with onsite component");
  }
  if (kind == SeedKind::onsite_kink || kind == SeedKind::onsite_antikink) {
    if (sites.empty() || site(0) != KinkSite::onsite) {
      throw InvalidArgumentError("onsite seed must list an onsite component");
    }
  }
}

namespace {

// Component index owning global site x: switch after N_i^+ sites past centre i.
int owning_component(const SeedSpec& spec, int x) {
  const int m = spec.components();
  int i = 0;
  while (i + 1 < m) {
    const int plus = spec.distances[static_cast<std::size_t>(i)] / 2;
    if (x - spec.component_center(i) <= plus) break;
    ++i;
  }
  return i;
}

double ladder_shift(const SeedSpec& spec, const Model& model, int i) {
  if (spec.kind != SeedKind::kink_kink) return 0.0;
  return 2.0 * model.nonlinearity().u_star() * i;
}

double ac_profile(KinkSite site, int local, double u_star) {
  if (local > 0) return u_star;
  if (local < 0) return -u_star;
  return site == KinkSite::onsite ? 0.0 : u_star;
}

}  // namespace

LatticeField ac_seed(const SeedSpec& spec, const Model& model) {
  spec.validate();
  if (spec.kind == SeedKind::kink_kink && model.nonlinearity().family() != Family::sine_gordon) {
    throw InvalidArgumentError("kink_kink ladders need the periodic sine-Gordon potential");
  }
  const double us = model.nonlinearity().u_star();
  const Grid g = model.grid();
  LatticeField u(g.lo, std::vector<double>(g.size()));
  for (int x = g.lo; x <= g.hi; ++x) {
    const int i = owning_component(spec, x);
    u.at(x) = spec.sign(i) * ac_profile(spec.site(i), x - spec.component_center(i), us) +
              ladder_shift(spec, model, i);
  }
  return u;
}

NewtonSolution newton_solve(const LatticeField& u0, const Model& model, const NewtonOptions& opts) {
  model.require_conforming(u0, "newton_solve");
  NewtonSolution sol{u0, 0, 0.0};
  for (int it = 0;; ++it) {
    const LatticeField r = residual(sol.field, model);
    sol.residual_norm = max_abs(r);
    sol.iterations = it;
    if (!std::isfinite(sol.residual_norm)) {
      throw DivergenceError("newton_solve: non-finite residual", sol.field, sol.residual_norm, it);
    }
    if (sol.residual_norm < opts.tol) return sol;
    if (it >= opts.max_iter) {
      throw DivergenceError("newton_solve: residual " + std::to_string(sol.residual_norm) + " after " +
                                std::to_string(it) + " iterations",
                            sol.field, sol.residual_norm, it);
    }
    std::vector<double> rhs(r.values);
    for (double& x : rhs) x = -x;
    const std::vector<double> step = solve_tridiagonal(linearize(sol.field, model), rhs);
    for (std::size_t i = 0; i < step.size(); ++i) sol.field.values[i] += step[i];
  }
}

LatticeField solve_kink(const Model& model, KinkSite site, int sign, double d_step) {
  if (!(d_step > 0.0)) throw InvalidArgumentError("solve_kink: d_step must be positive");
  const SeedSpec spec = SeedSpec::kink(site, 0);
  LatticeField u = ac_seed(spec, model);
  const double target = model.d();
  const int steps = static_cast<int>(std::ceil(target / d_step - 1e-9));
  for (int k = 1; k <= steps; ++k) {
    const double d = k == steps ? target : k * d_step;
    u = newton_solve(u, model.with_coupling(d)).field;
  }
  if (steps == 0) u = newton_solve(u, model).field;
  if (sign < 0) {
    for (double& x : u.values) x = -x;
  }
  return u;
}

LatticeField splice_multikink(const SeedSpec& spec, const Model& model, const PrimaryKinks& kinks) {
  spec.validate();
  if (spec.kind == SeedKind::kink_kink && model.nonlinearity().family() != Family::sine_gordon) {
    throw InvalidArgumentError("kink_kink ladders need the periodic sine-Gordon potential");
  }
  const double us = model.nonlinearity().u_star();
  const Grid g = model.grid();
  LatticeField u(g.lo, std::vector<double>(g.size()));
  for (int x = g.lo; x <= g.hi; ++x) {
    const int i = owning_component(spec, x);
    const KinkSite site = spec.site(i);
    const auto& profile = site == KinkSite::intersite ? kinks.intersite : kinks.onsite;
    if (!profile) {
      throw InvalidArgumentError("splice_multikink: missing " + std::string(to_string(site)) + " kink");
    }
    const int local = x - spec.component_center(i);
    const double k = profile->contains(local) ? profile->at(local) : ac_profile(site, local, us);
    u.at(x) = spec.sign(i) * k + ladder_shift(spec, model, i);
  }
  return u;
}

NewtonSolution build_multikink(const SeedSpec& spec, const Model& model, const MultikinkOptions& opts) {
  spec.validate();
  if (opts.from_ac) {
    LatticeField u = ac_seed(spec, model);
    const int steps = static_cast<int>(std::ceil(model.d() / opts.d_step - 1e-9));
    for (int k = 1; k < steps; ++k) u = newton_solve(u, model.with_coupling(k * opts.d_step), opts.newton).field;
    return newton_solve(u, model, opts.newton);
  }
  const Model single = model.with_grid(Grid::centered(static_cast<int>(model.grid().size())));
  PrimaryKinks kinks;
  for (int i = 0; i < spec.components(); ++i) {
    auto& slot = spec.site(i) == KinkSite::intersite ? kinks.intersite : kinks.onsite;
    if (!slot) slot = solve_kink(single, spec.site(i), 1, opts.d_step);
  }
  return newton_solve(splice_multikink(spec, model, kinks), model, opts.newton);
}

double crossing_position(const SeedSpec& spec, int i) {
  return spec.component_center(i) - (spec.site(i) == KinkSite::intersite ? 0.5 : 0.0);
}

Grid grid_for(const SeedSpec& spec, int n) {
  spec.validate();
  const double mid = 0.5 * (crossing_position(spec, 0) + crossing_position(spec, spec.components() - 1));
  return Grid::symmetric_about(mid, n);
}

NewtonSolution build_equilibrium(const SeedSpec& spec, const Model& model, const NewtonOptions& newton,
                                 double d_step) {
  spec.validate();
  if (model.d() == 0.0) return newton_solve(ac_seed(spec, model), model, newton);
  if (spec.components() == 1) {
    // Solve at the origin frame, then translate onto the requested centre.
    const Grid g = model.grid();
    const Model local = model.with_grid(Grid{g.lo - spec.center, g.hi - spec.center});
    LatticeField k = solve_kink(local, spec.site(0), spec.sign(0), d_step);
    k.offset += spec.center;
    return newton_solve(k, model, newton);
  }
  MultikinkOptions opts;
  opts.newton = newton;
  opts.d_step = d_step;
  return build_multikink(spec, model, opts);
}

std::vector<Crossing> zero_crossings(const LatticeField& u) {
  std::vector<Crossing> out;
  const auto& v = u.values;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double a = v[i], b = v[i + 1];
    if ((a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)) {
      // Skip the second half of an exact zero already reported.
      if (b == 0.0 && i + 2 < v.size() && ((a < 0.0) == (v[i + 2] < 0.0))) continue;
      const double t = a / (a - b);
      const double pos = u.offset + static_cast<double>(i) + t;
      const double frac = pos - std::floor(pos);
      const bool onsite = frac < 0.25 || frac > 0.75;
      out.push_back({pos, onsite ? KinkSite::onsite : KinkSite::intersite, b > a ? 1 : -1});
    }
  }
  return out;
}

std::vector<BranchEvent> Branch::events_of(EventKind kind) const {
  std::vector<BranchEvent> out;
  for (const auto& e : events) {
    if (e.kind == kind) out.push_back(e);
  }
  return out;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::fold: return "fold";
    case EventKind::pitchfork: return "pitchfork";
    case EventKind::divergence: return "divergence";
    case EventKind::stall: return "stall";
    case EventKind::range_end: return "range_end";
  }
  return "fold";
}

BranchPoint make_branch_point(const LatticeField& u, const Model& model, double arclength) {
  BranchPoint p;
  p.d = model.d();
  p.field = u;
  p.l2_norm = l2_norm(u);
  p.arclength = arclength;
  const SpectrumResult s = compute_spectrum(u, model, false);
  p.stability_index = s.unstable_count();
  double best = s.omegas.front();
  for (double w : s.omegas) {
    if (std::abs(w) < std::abs(best)) best = w;
  }
  p.critical_omega = best;
  return p;
}

Branch continue_natural(const LatticeField& seed, const Model& model, std::span<const double> d_targets,
                        const NewtonOptions& opts) {
  Branch b;
  LatticeField u = seed;
  for (std::size_t k = 0; k < d_targets.size(); ++k) {
    const Model m = model.with_coupling(d_targets[k]);
    try {
      u = newton_solve(u, m, opts).field;
    } catch (const ConvergenceError& e) {
      if (k == 0) throw SeedError(std::string("continue_natural: seed does not converge: ") + e.what());
      BranchEvent ev;
      // A critical eigenvalue shrinking towards zero before the failure points to a turning point.
      const auto& pts = b.points;
      const bool near_fold = pts.size() >= 2 &&
                             std::abs(pts.back().critical_omega) < std::abs(pts[pts.size() - 2].critical_omega) &&
                             std::abs(pts.back().critical_omega) < 0.5 * std::abs(pts.front().critical_omega);
      ev.kind = near_fold ? EventKind::fold : EventKind::divergence;
      ev.d = d_targets[k];
      ev.index = b.points.size() - 1;
      ev.note = e.what();
      b.events.push_back(std::move(ev));
      break;
    }
    b.points.push_back(make_branch_point(u, m));
  }
  return b;
}

}  // namespace dkg
