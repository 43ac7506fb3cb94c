#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dkg/lattice.hpp"
#include "dkg/model.hpp"

namespace dkg {

struct State {
  LatticeField u;
  LatticeField udot;
  double t = 0.0;
};

struct IntegratorConfig {
  int stages = 3;  // Gauss-Legendre, order 2 * stages
  double h = 0.01;
  double stage_solver_tol = 1e-13;
  int max_stage_iter = 60;

  /// Throws InvalidArgumentError unless 1 <= stages <= 6 and h > 0.
  void validate() const;
};

/// Gauss-Legendre collocation coefficients (c, A, b) for s stages.
struct ButcherTableau {
  std::vector<double> c;
  std::vector<double> b;
  std::vector<std::vector<double>> A;
};
ButcherTableau gauss_legendre(int stages);

/// udd_n = d (Delta_2 u)_n - f(u_n) with Neumann ghosts.
LatticeField acceleration(const LatticeField& u, const Model& model);

/// One Gauss collocation step of size direction * h. Stages are solved by
/// fixed-point iteration with a simplified-Newton fallback; StepError when
/// neither reaches stage_solver_tol.
State gauss_step(const State& s, const Model& model, const IntegratorConfig& cfg, int direction = 1);

struct Trajectory {
  std::vector<double> times;
  std::vector<int> probe_sites;
  std::vector<std::vector<double>> probes;  // probes[k][sample]
  std::vector<double> boundary_left;        // u at the first grid site
  std::vector<double> boundary_right;       // u at the last grid site
  std::vector<double> energy;
  std::vector<std::pair<double, LatticeField>> snapshots;
  State final_state;
  std::optional<std::string> failure;  // set when a step failed; data up to that point kept
};

struct EvolveOptions {
  std::vector<int> probes;
  int sample_stride = 1;    // steps between samples
  int snapshot_stride = 0;  // steps between stored fields, 0 for none
};

/// Repeated gauss_step from s0 up to t_end. Position and velocity updates
/// use compensated summation. A step failure ends the run and is reported
/// in Trajectory::failure.
Trajectory evolve(const State& s0, const Model& model, const IntegratorConfig& cfg, double t_end,
                  const EvolveOptions& opts);

/// Equilibrium plus site kicks, zero velocity, t = 0.
State perturb(const LatticeField& equilibrium, std::span<const std::pair<int, double>> deltas);

struct EnergyDrift {
  double max_relative = 0.0;
  /// First sample time at which a boundary site moved more than the
  /// threshold from its initial value.
  std::optional<double> boundary_onset;
};
EnergyDrift energy_drift(const Trajectory& tr, double boundary_threshold = 1e-6);

struct SpectralPeak {
  double omega = 0.0;      // angular frequency of the largest bin
  double bin_width = 0.0;  // 2 pi / record length
  double amplitude = 0.0;
};

/// Hann-windowed periodogram of a uniformly sampled, mean-removed series,
/// evaluated on the bins k * 2 pi / T up to omega_max.
SpectralPeak periodogram_peak(std::span<const double> series, double dt, double omega_max);

}  // namespace dkg
