#pragma once

#include <complex>
#include <string>
#include <vector>

#include "dkg/equilibria.hpp"
#include "dkg/lattice.hpp"
#include "dkg/model.hpp"
#include "dkg/spectral.hpp"

namespace dkg {

/// N+ = floor(N/2) and N- = N - N+.
struct SplitDistance {
  int plus;
  int minus;
};
SplitDistance split_distance(int n);

/// Interaction coefficient between neighbouring components whose centres are
/// N = N+ + N- apart, read from an eigenvector stored in the kink's own frame:
///
///        v0(-N- - 1)  v0(-N-)   ...   v0(-1) | v0(0)   ...   v0(N+ - 1)  v0(N+)
///                                     crossing
///
///   a = v0(N+) v0(-N- - 1) - v0(N+ - 1) v0(-N-)
///
/// Throws InvalidArgumentError when any of the four sites is off the field.
double coupling_a(const LatticeField& v0, int n_plus, int n_minus);

/// Sum of squares of v0. Throws InvalidArgumentError on an empty field.
double melnikov_M(const LatticeField& v0);

struct TheoryPrediction {
  double base_omega = 0.0;
  double base_lambda = 0.0;  // |lambda0|, lambda0 = i base_lambda for base_omega < 0
  std::vector<double> a;
  double M = 0.0;
  TridiagonalOperator A;
  std::vector<double> mu;  // ascending
  std::vector<double> omega_pred;
  std::vector<std::complex<double>> lambda_pred;  // principal square roots

  bool distinct = true;        // min gap of mu above 1e-14 max|mu|
  bool all_imaginary = true;   // every omega_pred < 0
  bool regime_warning = false; // r0^{-2N} > 1e-2
  std::vector<std::string> warnings;
};

/// Reduced eigenvalue problem for a multi-kink with the given distances,
/// built from the single-kink point mode (omega0, v0). Throws
/// HypothesisViolation unless -f'(u*) < omega0 and every distance is >= 2.
TheoryPrediction predict(double omega0, const LatticeField& v0, const std::vector<int>& distances,
                         const Model& model);

/// Closed forms of mu for two and three components (ascending).
std::vector<double> closed_form_mu(const std::vector<double>& a);

/// 10 d max|a_i| / M, the default half-width used to count split modes.
double default_window(const TheoryPrediction& p, const Model& model);

struct ErrorRow {
  double d = 0.0;
  std::vector<int> distances;
  std::string mode;
  std::size_t component = 0;  // j, ascending mu
  std::complex<double> lambda_predicted;
  std::complex<double> lambda_computed;
  double relative_error = 0.0;
};

/// Pairs each predicted omega with a distinct computed eigenvalue (greedy
/// by distance, within the default window around omega0 widened to the
/// prediction spread) and reports |lambda_true - lambda_pred| / |lambda_true|.
/// Throws MatchingError when fewer computed modes than predictions lie in
/// the window.
std::vector<ErrorRow> error_table(const SpectrumResult& spectrum, const TheoryPrediction& p, const Model& model,
                                  const std::vector<int>& distances, const std::string& mode);
std::vector<ErrorRow> error_table(const LatticeField& multikink, const TheoryPrediction& p, const Model& model,
                                  const std::vector<int>& distances, const std::string& mode);

/// Eigenvalues with |omega - omega0| < window.
int splitting_count(const SpectrumResult& spectrum, double omega0, double window);

/// Point mode of a single kink used as the base of a prediction.
struct BaseMode {
  double omega0 = 0.0;
  LatticeField v0;  // in the kink's frame, unit norm
};
/// Classifies the spectrum of `kink` and returns the mode carrying `label`;
/// HypothesisViolation when that mode is absent.
BaseMode base_mode(const LatticeField& kink, const Model& model, ModeLabel label);

/// max |U - splice| over the grid: distance of a converged multi-kink from
/// its spliced ansatz.
double splice_deviation(const LatticeField& u, const SeedSpec& spec, const Model& model, const PrimaryKinks& kinks);

}  // namespace dkg
