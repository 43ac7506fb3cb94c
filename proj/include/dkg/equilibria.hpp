#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dkg/lattice.hpp"
#include "dkg/model.hpp"
#include "dkg/stats.hpp"

namespace dkg {

enum class KinkSite { intersite, onsite };
std::string_view to_string(KinkSite site);

enum class SeedKind { intersite_kink, onsite_kink, intersite_antikink, onsite_antikink, multikink, kink_kink };
std::string_view to_string(SeedKind kind);
SeedKind seed_kind_from_string(std::string_view name);

/// Anti-continuum description of a (multi-)kink.
///
/// Component i has its centre at `center + N_1 + ... + N_{i-1}`. For an
/// intersite component the zero-crossing lies between centre-1 and centre;
/// an onsite component takes the value 0 at its centre. Standard multi-kinks
/// alternate sign c_i = (-1)^{i+1}; kink_kink components all rise and climb
/// the ladder -u*, u*, 3u*, ... (sine-Gordon only).
///
///      intersite kink, centre 0:   ... -u* -u* | u* u* ...     (sites -2 -1 | 0 1)
///      onsite kink, centre 0:      ... -u*  0  u* ...          (sites -1 0 1)
struct SeedSpec {
  SeedKind kind = SeedKind::intersite_kink;
  std::vector<KinkSite> sites;  // one per component; empty means all intersite
  std::vector<int> distances;   // N_i, one fewer than the component count
  int center = 0;

  static SeedSpec kink(KinkSite site = KinkSite::intersite, int center = 0);
  static SeedSpec antikink(KinkSite site = KinkSite::intersite, int center = 0);
  static SeedSpec multikink(std::vector<int> distances, std::vector<KinkSite> sites = {}, int center = 0);
  static SeedSpec kink_kink(std::vector<int> distances, int center = 0);

  int components() const;
  KinkSite site(int i) const;
  /// Centre site of component i (0-based).
  int component_center(int i) const;
  /// Sign c_i of component i (0-based).
  int sign(int i) const;
  /// Throws InvalidArgumentError when the description is inconsistent.
  void validate() const;
};

/// Position of component i's zero-crossing (centre - 1/2 when intersite).
double crossing_position(const SeedSpec& spec, int i);

/// n-site grid symmetric about the midpoint of the outermost crossings.
Grid grid_for(const SeedSpec& spec, int n);

/// Piecewise-constant anti-continuum field for `spec` on the model grid; an
/// exact equilibrium at d = 0.
LatticeField ac_seed(const SeedSpec& spec, const Model& model);

struct NewtonOptions {
  double tol = 1e-12;  // on the residual infinity norm
  int max_iter = 50;
};

struct NewtonSolution {
  LatticeField field;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Newton iteration on the standing-wave residual with the tridiagonal
/// Jacobian d Delta_2 - diag f'(u). Throws DivergenceError when max_iter is
/// exhausted and SingularJacobianError on a vanishing pivot.
NewtonSolution newton_solve(const LatticeField& u0, const Model& model, const NewtonOptions& opts = {});

/// Single kink (or antikink for sign -1) at model.d() on the model grid,
/// obtained by natural continuation from the anti-continuum limit.
LatticeField solve_kink(const Model& model, KinkSite site, int sign = 1, double d_step = 0.01);

/// Converged primary kinks used as splice templates; each is stored in its
/// own frame (crossing between -1 and 0, or the zero at site 0).
struct PrimaryKinks {
  std::optional<LatticeField> intersite;
  std::optional<LatticeField> onsite;
};

/// Hard-switch splice of translated primary kinks following `spec` (the
/// switch from component i to i+1 happens after N_i^+ = floor(N_i/2) sites).
LatticeField splice_multikink(const SeedSpec& spec, const Model& model, const PrimaryKinks& kinks);

/// Kink, antikink or multi-kink described by `spec` at model.d(), converged
/// by Newton (AC seed at d = 0, solve_kink for single kinks, build_multikink
/// otherwise).
NewtonSolution build_equilibrium(const SeedSpec& spec, const Model& model, const NewtonOptions& newton = {},
                                 double d_step = 0.01);

struct MultikinkOptions {
  NewtonOptions newton;
  bool from_ac = false;  // continue the AC seed in d instead of splicing
  double d_step = 0.01;
};

/// Multi-kink at model.d(): splices primary kinks and refines with Newton
/// (or, with from_ac, continues the anti-continuum seed).
NewtonSolution build_multikink(const SeedSpec& spec, const Model& model, const MultikinkOptions& opts = {});

/// Zero-crossing of a field, with position interpolated between sites.
struct Crossing {
  double position;
  KinkSite site;  // onsite when the crossing lies within 1/4 of a site
  int direction;  // +1 rising, -1 falling
};
std::vector<Crossing> zero_crossings(const LatticeField& u);

// ---------------------------------------------------------------------------
// Branches and continuation

struct BranchPoint {
  double d = 0.0;
  LatticeField field;
  double l2_norm = 0.0;
  int stability_index = 0;      // number of omega > 0
  double critical_omega = 0.0;  // Jacobian eigenvalue closest to zero
  double arclength = 0.0;
};

enum class EventKind { fold, pitchfork, divergence, stall, range_end };
std::string_view to_string(EventKind kind);

struct BranchEvent {
  EventKind kind = EventKind::fold;
  double d = 0.0;
  std::size_t index = 0;         // branch point nearest the event
  LatticeField critical_vector;  // null-vector estimate (folds, pitchforks)
  LatticeField field;            // equilibrium at the located event
  std::string note;
};

struct Branch {
  std::vector<BranchPoint> points;
  std::vector<BranchEvent> events;

  std::vector<BranchEvent> events_of(EventKind kind) const;
};

/// Point record at (u, model.d()): norm, stability index, critical omega.
BranchPoint make_branch_point(const LatticeField& u, const Model& model, double arclength = 0.0);

/// Natural continuation: one Newton solve per target coupling, warm-started
/// from the previous solution. Newton failure ends the branch with a
/// divergence event; failure at the first target throws SeedError.
Branch continue_natural(const LatticeField& seed, const Model& model, std::span<const double> d_targets,
                        const NewtonOptions& opts = {});

struct ArclengthOptions {
  double step = 0.02;
  double min_step = 1e-8;
  double max_step = 0.1;
  int max_points = 400;
  double d_min = 0.0;
  double d_max = std::numeric_limits<double>::infinity();
  int direction = +1;  // initial sense of travel in d
  NewtonOptions corrector{1e-12, 10};
  bool refine_folds = true;
  double fold_tolerance = 1e-4;
  bool stop_at_first_fold = false;
  /// Overrides the initial tangent (branch switching); d-component separate.
  std::optional<LatticeField> initial_tangent_u;
  double initial_tangent_d = 0.0;
};

/// Pseudo-arclength continuation in (u, d) with a secant predictor. Folds
/// are flagged where d along the branch turns back and located by a
/// three-point quadratic fit in (s, d), refined by local re-continuation
/// to `fold_tolerance`. A stability-index change away from a fold is
/// flagged as a pitchfork. Step collapse below min_step records a stall
/// event and ends the branch.
Branch continue_arclength(const BranchPoint& start, const Model& model, const ArclengthOptions& opts);

/// Follows the branch bifurcating at `pitchfork` (an event of `parent`):
/// starts from the nearest parent point displaced by sign * epsilon along
/// the critical eigenvector.
Branch switch_branch(const Branch& parent, const BranchEvent& pitchfork, const Model& model, int sign,
                     ArclengthOptions opts, double epsilon = 1e-3);

struct FoldSample {
  int separation = 0;
  bool ok = false;
  double d0 = 0.0;
  std::string error;
};

struct FoldSweep {
  std::vector<FoldSample> samples;
  LinearFit fit;  // d0 against separation, successful samples only
};

/// Turning point d0 of the intersite kink-antikink with `separation` sites
/// between its zero-crossings, on a grid of base.grid().size() sites
/// symmetric about the pair.
double kink_antikink_fold(int separation, const Model& base, Branch* branch_out = nullptr);

/// d0 for each separation (run on up to `workers` threads) plus the least
/// squares line. Fewer than two successful samples throws FitError.
FoldSweep fold_vs_distance(std::span<const int> separations, const Model& base, int workers = 1);

}  // namespace dkg
