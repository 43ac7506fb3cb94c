#include "dkg/multikink.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "dkg/errors.hpp"

namespace dkg {

SplitDistance split_distance(int n) { return {n / 2, n - n / 2}; }

double coupling_a(const LatticeField& v0, int n_plus, int n_minus) {
  for (int site : {n_plus, n_plus - 1, -n_minus, -n_minus - 1}) {
    if (!v0.contains(site)) {
      throw InvalidArgumentError("coupling_a: site " + std::to_string(site) + " outside the eigenvector support [" +
                                 std::to_string(v0.first()) + ", " + std::to_string(v0.last()) + "]");
    }
  }
  return v0.at(n_plus) * v0.at(-n_minus - 1) - v0.at(n_plus - 1) * v0.at(-n_minus);
}

double melnikov_M(const LatticeField& v0) {
  if (v0.empty()) throw InvalidArgumentError("melnikov_M: empty field");
  double s = 0.0;
  for (double x : v0.values) s += x * x;
  return s;
}

std::vector<double> closed_form_mu(const std::vector<double>& a) {
  if (a.size() == 1) return {-std::abs(a[0]), std::abs(a[0])};
  if (a.size() == 2) {
    const double s = std::hypot(a[0], a[1]);
    return {-s, 0.0, s};
  }
  throw InvalidArgumentError("closed_form_mu: only two or three components");
}

TheoryPrediction predict(double omega0, const LatticeField& v0, const std::vector<int>& distances,
                         const Model& model) {
  model.require_positive_coupling("predict");
  if (distances.empty()) throw InvalidArgumentError("predict: need at least one distance");
  const double fp = model.nonlinearity().well_curvature();
  if (!(omega0 > -fp)) {
    throw HypothesisViolation("predict: omega0 = " + std::to_string(omega0) + " lies in the continuous spectrum");
  }
  TheoryPrediction p;
  p.base_omega = omega0;
  p.base_lambda = std::sqrt(std::abs(omega0));
  int n_min = std::numeric_limits<int>::max();
  for (int n : distances) {
    if (n < 2) throw HypothesisViolation("predict: distances must be >= 2");
    const SplitDistance s = split_distance(n);
    p.a.push_back(coupling_a(v0, s.plus, s.minus));
    n_min = std::min(n_min, n);
  }
  p.M = melnikov_M(v0);
  const std::size_t m = distances.size() + 1;
  p.A = TridiagonalOperator(std::vector<double>(m, 0.0), p.a);
  p.mu = eigen_symmetric_tridiagonal(p.A, false).omegas;

  double scale = 0.0;
  for (double x : p.mu) scale = std::max(scale, std::abs(x));
  for (std::size_t j = 0; j + 1 < m; ++j) {
    if (p.mu[j + 1] - p.mu[j] <= 1e-14 * scale) p.distinct = false;
  }
  if (!p.distinct) p.warnings.push_back("degenerate interaction eigenvalues");

  for (double mu : p.mu) {
    const double w = omega0 + model.d() * mu / p.M;
    p.omega_pred.push_back(w);
    p.lambda_pred.push_back(std::sqrt(std::complex<double>(w, 0.0)));
    if (!(w < 0.0)) p.all_imaginary = false;
  }
  if (!p.all_imaginary) p.warnings.push_back("predicted spectrum is not purely imaginary");

  const double r0 = linearized_rate_r0(omega0, model);
  const double N = 0.5 * n_min;
  if (std::pow(r0, -2.0 * N) > 1e-2) {
    p.regime_warning = true;
    p.warnings.push_back("r0^(-2N) = " + std::to_string(std::pow(r0, -2.0 * N)) +
                         " > 1e-2: separation outside the asymptotic regime");
  }
  return p;
}

double default_window(const TheoryPrediction& p, const Model& model) {
  double amax = 0.0;
  for (double x : p.a) amax = std::max(amax, std::abs(x));
  return 10.0 * model.d() * amax / p.M;
}

std::vector<ErrorRow> error_table(const SpectrumResult& spectrum, const TheoryPrediction& p, const Model& model,
                                  const std::vector<int>& distances, const std::string& mode) {
  const double window = std::max(default_window(p, model), 1e-10 * std::max(1.0, std::abs(p.base_omega)));
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < spectrum.omegas.size(); ++k) {
    if (std::abs(spectrum.omegas[k] - p.base_omega) < window) candidates.push_back(k);
  }
  const std::size_t m = p.omega_pred.size();
  if (candidates.size() < m) {
    throw MatchingError("error_table: " + std::to_string(candidates.size()) + " computed modes within " +
                        std::to_string(window) + " of omega0 = " + std::to_string(p.base_omega) + ", need " +
                        std::to_string(m));
  }
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k : candidates) pairs.emplace_back(std::abs(spectrum.omegas[k] - p.omega_pred[j]), j, k);
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<long> match(m, -1);
  std::vector<bool> used(spectrum.omegas.size(), false);
  for (const auto& [dist, j, k] : pairs) {
    if (match[j] >= 0 || used[k]) continue;
    match[j] = static_cast<long>(k);
    used[k] = true;
  }
  std::vector<ErrorRow> rows;
  for (std::size_t j = 0; j < m; ++j) {
    ErrorRow row;
    row.d = model.d();
    row.distances = distances;
    row.mode = mode;
    row.component = j;
    row.lambda_predicted = p.lambda_pred[j];
    row.lambda_computed = spectrum.lambda(static_cast<std::size_t>(match[j]));
    row.relative_error = std::abs(row.lambda_computed - row.lambda_predicted) / std::abs(row.lambda_computed);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ErrorRow> error_table(const LatticeField& multikink, const TheoryPrediction& p, const Model& model,
                                  const std::vector<int>& distances, const std::string& mode) {
  return error_table(compute_spectrum(multikink, model, false), p, model, distances, mode);
}

int splitting_count(const SpectrumResult& spectrum, double omega0, double window) {
  return static_cast<int>(std::count_if(spectrum.omegas.begin(), spectrum.omegas.end(),
                                        [&](double w) { return std::abs(w - omega0) < window; }));
}

BaseMode base_mode(const LatticeField& kink, const Model& model, ModeLabel label) {
  const SpectrumResult s = classify(compute_spectrum(kink, model, true), model);
  const auto pos = s.find(label);
  if (!pos) {
    throw HypothesisViolation("base_mode: the kink has no " + std::string(to_string(label)) + " mode at d = " +
                              std::to_string(model.d()));
  }
  const std::size_t idx = *pos;
  return {s.omegas[idx], s.vectors[idx]};
}

double splice_deviation(const LatticeField& u, const SeedSpec& spec, const Model& model, const PrimaryKinks& kinks) {
  return max_abs(difference(u, splice_multikink(spec, model, kinks)));
}

}  // namespace dkg
