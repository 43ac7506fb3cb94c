#include "dkg/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dkg/errors.hpp"

namespace dkg {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::sine_gordon: return "sine_gordon";
    case Family::phi4: return "phi4";
    case Family::custom: return "custom";
  }
  return "custom";
}

Family family_from_string(std::string_view name) {
  if (name == "sine_gordon") return Family::sine_gordon;
  if (name == "phi4") return Family::phi4;
  throw InvalidArgumentError("unknown nonlinearity family '" + std::string(name) + "'");
}

Nonlinearity Nonlinearity::sine_gordon() {
  Nonlinearity nl;
  nl.family_ = Family::sine_gordon;
  nl.name_ = "sine_gordon";
  nl.u_star_ = std::numbers::pi;
  return nl;
}

Nonlinearity Nonlinearity::phi4() {
  Nonlinearity nl;
  nl.family_ = Family::phi4;
  nl.name_ = "phi4";
  nl.u_star_ = 1.0;
  return nl;
}

Nonlinearity Nonlinearity::custom(std::string name, Fn f, Fn f_prime, Fn potential, double u_star) {
  if (!f || !f_prime || !potential) {
    throw InvalidArgumentError("custom nonlinearity needs f, f' and P");
  }
  Nonlinearity nl;
  nl.family_ = Family::custom;
  nl.name_ = std::move(name);
  nl.u_star_ = u_star;
  nl.f_ = std::move(f);
  nl.f_prime_ = std::move(f_prime);
  nl.potential_ = std::move(potential);
  return nl;
}

Nonlinearity Nonlinearity::from_family(Family family) {
  switch (family) {
    case Family::sine_gordon: return sine_gordon();
    case Family::phi4: return phi4();
    case Family::custom: break;
  }
  throw InvalidArgumentError("custom family has no default definition");
}

double Nonlinearity::f(double u) const {
  switch (family_) {
    case Family::sine_gordon: return -std::sin(u);
    case Family::phi4: return -u * (1.0 - u * u);
    case Family::custom: return f_(u);
  }
  return 0.0;
}

double Nonlinearity::f_prime(double u) const {
  switch (family_) {
    case Family::sine_gordon: return -std::cos(u);
    case Family::phi4: return 3.0 * u * u - 1.0;
    case Family::custom: return f_prime_(u);
  }
  return 0.0;
}

double Nonlinearity::potential(double u) const {
  switch (family_) {
    case Family::sine_gordon: return 1.0 + std::cos(u);
    case Family::phi4: {
      const double w = 1.0 - u * u;
      return 0.25 * w * w;
    }
    case Family::custom: return potential_(u);
  }
  return 0.0;
}

Grid Grid::symmetric_about(double centre, int n) {
  const int lo = static_cast<int>(std::lround(centre - 0.5 * (n - 1)));
  return Grid{lo, lo + n - 1};
}

Model::Model(double d, Nonlinearity nonlinearity, Grid grid, Boundary boundary)
    : d_(d), nl_(std::move(nonlinearity)), grid_(grid), boundary_(boundary) {
  if (!(d >= 0.0) || !std::isfinite(d)) {
    throw InvalidArgumentError("coupling d must be finite and non-negative");
  }
  if (grid.hi - grid.lo + 1 < 4) {
    throw InvalidArgumentError("grid must contain at least 4 sites");
  }
}

void Model::require_conforming(const LatticeField& u, const char* where) const {
  if (!conforms(u)) {
    throw GridMismatchError(std::string(where) + ": field on [" + std::to_string(u.first()) + ", " +
                            std::to_string(u.last()) + "] does not match model grid [" +
                            std::to_string(grid_.lo) + ", " + std::to_string(grid_.hi) + "]");
  }
}

void Model::require_positive_coupling(const char* where) const {
  if (!(d_ > 0.0)) throw InvalidArgumentError(std::string(where) + ": requires d > 0");
}

LatticeField second_difference(const LatticeField& u, Boundary /*boundary*/) {
  const std::size_t n = u.size();
  if (n < 2) throw InvalidFieldError("second_difference: field needs at least 2 sites");
  LatticeField out(u.offset, std::vector<double>(n));
  const auto& v = u.values;
  out.values[0] = v[1] - v[0];
  for (std::size_t i = 1; i + 1 < n; ++i) out.values[i] = v[i + 1] - 2.0 * v[i] + v[i - 1];
  out.values[n - 1] = v[n - 2] - v[n - 1];
  return out;
}

LatticeField residual(const LatticeField& u, const Model& model) {
  model.require_conforming(u, "residual");
  LatticeField r = second_difference(u, model.boundary());
  const double d = model.d();
  const auto& nl = model.nonlinearity();
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] = d * r.values[i] - nl.f(u.values[i]);
  return r;
}

double hamiltonian(const LatticeField& u, const LatticeField& udot, const Model& model) {
  if (u.size() != udot.size()) throw GridMismatchError("hamiltonian: u and udot differ in length");
  model.require_conforming(u, "hamiltonian");
  const auto& nl = model.nonlinearity();
  const double d = model.d();
  double kinetic = 0.0, coupling = 0.0, onsite = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    kinetic += 0.5 * udot.values[i] * udot.values[i];
    onsite += nl.potential(u.values[i]);
    if (i + 1 < u.size()) {
      const double b = u.values[i + 1] - u.values[i];
      coupling += 0.5 * d * b * b;
    }
  }
  return kinetic + coupling + onsite;
}

double static_energy(const LatticeField& u, const Model& model) {
  return hamiltonian(u, LatticeField::constant(u.offset, u.size(), 0.0), model);
}

namespace {

double decay_root(double a, double d) {
  // Larger root of r^2 - (2 + a/d) r + 1 = 0, written to avoid cancellation.
  return (a + 2.0 * d + std::sqrt(a * (a + 4.0 * d))) / (2.0 * d);
}

}  // namespace

double saddle_rate_r(const Model& model) {
  model.require_positive_coupling("saddle_rate_r");
  return decay_root(model.nonlinearity().well_curvature(), model.d());
}

double linearized_rate_r0(double omega0, const Model& model) {
  model.require_positive_coupling("linearized_rate_r0");
  const double a = model.nonlinearity().well_curvature() + omega0;
  if (!(a > 0.0)) {
    throw HypothesisViolation("linearized_rate_r0: omega0 = " + std::to_string(omega0) +
                              " is not inside the spectral gap (needs f'(u*) + omega0 > 0)");
  }
  return decay_root(a, model.d());
}

ContinuousBand continuous_spectrum_bands(const Model& model) {
  const double fp = model.nonlinearity().well_curvature();
  return {std::sqrt(fp), std::sqrt(fp + 4.0 * model.d())};
}

}  // namespace dkg
