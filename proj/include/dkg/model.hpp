#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "dkg/lattice.hpp"

namespace dkg {

enum class Family { sine_gordon, phi4, custom };

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

/// Onsite force f = P' of the lattice model.
///
/// The two built-in families use the odd convention with stable equilibria
/// at +-u*:
///   sine_gordon: f(u) = -sin u,     P(u) = 1 + cos u,       u* = pi
///   phi4:        f(u) = -u (1-u^2), P(u) = (1-u^2)^2 / 4,   u* = 1
///
/// `custom` is the extension point for other onsite potentials; no
/// structural property is checked for it.
class Nonlinearity {
 public:
  using Fn = std::function<double(double)>;

  static Nonlinearity sine_gordon();
  static Nonlinearity phi4();
  static Nonlinearity custom(std::string name, Fn f, Fn f_prime, Fn potential, double u_star);
  static Nonlinearity from_family(Family family);

  double f(double u) const;
  double f_prime(double u) const;
  double potential(double u) const;

  double u_star() const { return u_star_; }
  /// f'(u*), the curvature of the potential well at the stable state.
  double well_curvature() const { return f_prime(u_star_); }
  Family family() const { return family_; }
  const std::string& name() const { return name_; }

 private:
  Nonlinearity() = default;

  Family family_ = Family::sine_gordon;
  std::string name_;
  double u_star_ = 0.0;
  Fn f_, f_prime_, potential_;
};

/// Inclusive index range [lo, hi] of the finite lattice.
struct Grid {
  int lo = 0;
  int hi = -1;

  std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }

  /// n sites centred so that sites -1 and 0 straddle the middle.
  static Grid centered(int n) { return Grid{-(n / 2), -(n / 2) + n - 1}; }
  /// n sites whose middle falls between `left_site` and `left_site + 1` when
  /// n is even (used for structures symmetric about a half-integer point).
  static Grid symmetric_about(double centre, int n);
};

enum class Boundary { neumann };

/// Discrete Klein-Gordon lattice: coupling d, onsite force and a finite grid
/// closed by Neumann ghost cells (u_{lo-1} = u_lo, u_{hi+1} = u_hi).
class Model {
 public:
  Model(double d, Nonlinearity nonlinearity, Grid grid, Boundary boundary = Boundary::neumann);

  double d() const { return d_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const Grid& grid() const { return grid_; }
  Boundary boundary() const { return boundary_; }

  Model with_coupling(double d) const { return Model(d, nl_, grid_, boundary_); }
  Model with_grid(Grid g) const { return Model(d_, nl_, g, boundary_); }

  bool conforms(const LatticeField& u) const {
    return u.offset == grid_.lo && u.size() == grid_.size();
  }
  /// Throws GridMismatchError unless `u` lives exactly on the model grid.
  void require_conforming(const LatticeField& u, const char* where) const;
  void require_positive_coupling(const char* where) const;

 private:
  double d_;
  Nonlinearity nl_;
  Grid grid_;
  Boundary boundary_;
};

/// (Delta_2 u)_n = u_{n+1} - 2u_n + u_{n-1} with Neumann ghost cells.
LatticeField second_difference(const LatticeField& u, Boundary boundary = Boundary::neumann);

/// Standing-wave residual R_n = d (Delta_2 u)_n - f(u_n).
LatticeField residual(const LatticeField& u, const Model& model);

/// Lattice Hamiltonian sum(1/2 udot^2 + d/2 (u_{n+1}-u_n)^2 + P(u_n)); the
/// coupling sum runs over the interior bonds of the finite grid.
double hamiltonian(const LatticeField& u, const LatticeField& udot, const Model& model);

/// Hamiltonian at zero velocity.
double static_energy(const LatticeField& u, const Model& model);

/// Spatial decay rate r > 1 of the kink tails towards +-u*.
double saddle_rate_r(const Model& model);

/// Decay rate r0 of an eigenfunction with eigenvalue omega0 = lambda0^2.
/// Requires f'(u*) + omega0 > 0; reduces to r at omega0 = 0.
double linearized_rate_r0(double omega0, const Model& model);

/// Continuous spectrum +-i[lower, upper] as magnitudes on the imaginary axis.
struct ContinuousBand {
  double lower;
  double upper;
};
ContinuousBand continuous_spectrum_bands(const Model& model);

}  // namespace dkg
