#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dkg/lattice.hpp"
#include "dkg/model.hpp"
#include "dkg/tridiagonal.hpp"

namespace dkg {

enum class ModeLabel { goldstone, edge, unstable, other };
std::string_view to_string(ModeLabel label);

/// Eigenpairs of the linearization d Delta_2 - diag f'(u), in omega = lambda^2.
struct SpectrumResult {
  std::vector<double> omegas;         // ascending
  std::vector<LatticeField> vectors;  // unit norm, parallel to omegas (may be empty)

  // Filled by classify().
  bool classified = false;
  std::vector<std::size_t> point_modes;  // indices into omegas, descending omega
  std::vector<ModeLabel> labels;         // parallel to point_modes
  double band_lower = 0.0;               // omega range of the non-point modes
  double band_upper = 0.0;
  bool hypothesis_gap_holds = true;      // every point |lambda| < sqrt(f'(u*))

  std::size_t size() const { return omegas.size(); }
  /// Principal lambda = sqrt(omega): imaginary iff omega < 0.
  std::complex<double> lambda(std::size_t i) const;
  /// Number of omega > 0, i.e. real (unstable) lambda pairs.
  int unstable_count() const;
  /// Index of the first point mode carrying `label`, if any.
  std::optional<std::size_t> find(ModeLabel label) const;
};

/// Linearization operator: diagonal -2d - f'(u_n) (-d - f'(u_n) on the two
/// Neumann boundary rows), off-diagonal d. Also the residual Jacobian.
TridiagonalOperator linearize(const LatticeField& u, const Model& model);

/// Implicit-shift QL with Wilkinson-type shifts. Eigenvalues ascending;
/// eigenvectors (when requested) are orthonormal with the first entry above
/// 1e-6 in magnitude made positive. Throws EigenConvergenceError after 50 n
/// sweeps without deflation.
SpectrumResult eigen_symmetric_tridiagonal(const TridiagonalOperator& t, bool want_vectors);

/// Cross-check backend: Sturm bisection for eigenvalues, inverse iteration
/// (with reorthogonalization inside clusters) for eigenvectors.
SpectrumResult eigen_bisection(const TridiagonalOperator& t, bool want_vectors);

/// linearize + eigen_symmetric_tridiagonal, with vectors placed on u's sites.
SpectrumResult compute_spectrum(const LatticeField& u, const Model& model, bool want_vectors = true);

/// Splits the spectrum into point modes and the discretized band and labels
/// the point modes. A gap mode counts as a point mode when it sits more than
/// three band-edge discretization errors above -f'(u*) and its eigenvector
/// tail is exponential (decay regression R^2 > 0.99). Requires eigenvectors.
SpectrumResult classify(SpectrumResult spectrum, const Model& model);

struct DecayFit {
  double rate = 0.0;  // -slope of log|field - asymptote| against the site index
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares fit of log|field(n) - asymptote| against n. Samples within
/// 10 eps of the asymptote are discarded; at least five must remain.
DecayFit decay_fit(const LatticeField& tail, double asymptote);

/// Window [first, last] of a field as its own LatticeField.
LatticeField window(const LatticeField& u, int first, int last);

struct EdgeOnset {
  bool found = false;
  bool bracketed = false;  // false when the mode is already present at d_grid.front()
  double d = 0.0;          // midpoint of the final bracket
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Smallest coupling at which the intersite kink carries a second gap mode
/// more than `separation` above the band edge -f'(u*). Scans `d_grid`
/// (ascending) along the intersite kink branch, then bisects to `resolution`.
EdgeOnset edge_mode_onset(const Model& base, std::span<const double> d_grid, double separation = 1e-4,
                          double resolution = 1e-3);

}  // namespace dkg
