#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dkg/dynamics.hpp"
#include "dkg/equilibria.hpp"
#include "dkg/io.hpp"
#include "dkg/multikink.hpp"
#include "dkg/spectral.hpp"

namespace dkg {

// ---------------------------------------------------------------------------
// Configuration

struct ModelConfig {
  Family family = Family::sine_gordon;
  std::optional<double> d;
  std::vector<double> d_values;
  int grid = 60;
  Boundary boundary = Boundary::neumann;
};

struct ExperimentConfig {
  std::string task;
  ModelConfig model;
  std::optional<SeedSpec> seed;
  NewtonOptions newton;
  double d_step = 0.01;
  std::string output_dir;
  long long random_seed = 0;  // reserved
  Json params = Json::object();
  Json raw;
};

const std::vector<std::string>& task_names();

/// Validates everything a task needs before any computation; ConfigError
/// otherwise. `task` overrides (and must agree with) the file's "task".
ExperimentConfig parse_config(const Json& j, const std::string& task = "");

/// Runs the task pipeline. Nothing is written to disk here.
RunOutput run_task(const ExperimentConfig& cfg, int workers = 1);

const std::vector<std::string>& figure_ids();
/// Canned run for a figure id; InvalidArgumentError for unknown ids.
RunOutput reproduce_figure(const std::string& id, int workers = 1);

// ---------------------------------------------------------------------------
// Reusable experiment blocks

Model sine_gordon_model(double d, Grid grid);

/// Reflection parity sum_n v(n) v(mirror n) of a unit eigenvector (+-1 for
/// symmetric/antisymmetric modes on a symmetric grid).
double reflection_parity(const LatticeField& v);

struct DecayReport {
  struct Row {
    std::string series;  // kink, goldstone, edge
    DecayFit fit;
    double theory_rate = 0.0;
    double relative_error = 0.0;
  };
  std::vector<Row> rows;
  LatticeField kink;
  SpectrumResult spectrum;
  int first = 2, last = 12;  // window on the right tail, in sites
};
/// Tail decay rates of the intersite kink and its Goldstone/edge modes
/// against log r and log r0(omega).
DecayReport decay_report(double d, int n, int first = 2, int last = 12);

struct SweepRow {
  double d;
  int N;  // half the smallest distance
  std::vector<int> distances;
  ErrorRow row;
  bool regime_warning;
};
struct ErrorSweep {
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};
/// Prediction errors for multikinks of `sites` type (empty: intersite) with
/// the given distance lists, for each d; tasks run on `workers` threads and
/// are merged in (d, distances) order.
ErrorSweep error_sweep(const std::vector<double>& d_values, const std::vector<std::vector<int>>& distances,
                       ModeLabel mode, int n, int workers = 1, SeedKind kind = SeedKind::multikink);

struct SlopeFit {
  std::size_t component;
  LinearFit fit;  // log10(relative error) against N
};
std::vector<SlopeFit> error_slopes(const ErrorSweep& sweep);

struct BifurcationDiagram {
  int separation = 8;
  Branch main;        // intersite-intersite through the fold onto onsite-onsite
  Branch asym_plus;   // switched at the pitchfork, +epsilon
  Branch asym_minus;  // -epsilon
  std::optional<BranchEvent> fold;
  std::optional<BranchEvent> pitchfork;
  Model model;
};
/// Full diagram for the kink-antikink with `separation` on an n-site grid.
BifurcationDiagram bifurcation_diagram(int separation, int n, double d_start = 0.05);

/// "intersite-intersite", "onsite-onsite", "intersite-onsite", ... from the
/// zero-crossings of a two-component field.
std::string pair_type(const LatticeField& u);

struct PhaseRun {
  int sign = 1;  // +1 in-phase kick, -1 out-of-phase
  Model model;
  LatticeField equilibrium;
  Trajectory trajectory;
  EnergyDrift drift;
  EnergyDrift drift_100;  // restricted to t <= 100
  SpectralPeak peak;
  double lambda_symmetric = 0.0;
  double lambda_antisymmetric = 0.0;
  double lambda_expected = 0.0;  // the split Goldstone mode with the kick's parity
};
/// Kink-antikink (intersite, distance `separation`) at d on n sites kicked
/// by +0.1 at site 0 and sign * 0.1 at its mirror, evolved to t_end.
PhaseRun kak_phase_run(int sign, double d = 0.5, int n = 400, int separation = 8, double t_end = 600.0);

struct DestabRun {
  Model model;
  LatticeField onsite;
  LatticeField intersite;
  int onsite_unstable = 0;
  Trajectory trajectory;  // probe 0 is site 0
  double reference = 0.0;  // intersite value at site 0
  EnergyDrift drift;
};
DestabRun onsite_destab_run(double d = 0.5, int n = 400, int separation = 8, double t_end = 300.0);

}  // namespace dkg
