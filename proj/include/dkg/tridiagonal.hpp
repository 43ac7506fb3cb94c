#pragma once

#include <span>
#include <vector>

namespace dkg {

/// Real symmetric tridiagonal matrix; only one off-diagonal is stored.
struct TridiagonalOperator {
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;  // size() - 1 entries

  TridiagonalOperator() = default;
  TridiagonalOperator(std::vector<double> diag, std::vector<double> off);

  std::size_t size() const { return diagonal.size(); }

  /// y = T x
  std::vector<double> apply(std::span<const double> x) const;

  /// Max absolute row sum.
  double norm_inf() const;

  /// Number of eigenvalues strictly below x (Sturm sequence count).
  std::size_t count_below(double x) const;
};

struct TridiagonalSolveOptions {
  double shift = 0.0;
  /// Pivots below threshold * max(1, |T|_inf) raise SingularJacobianError.
  double singular_threshold = 1e-14;
  /// Replace tiny pivots instead of throwing (inverse iteration).
  bool perturb_tiny_pivots = false;
};

/// Solves (T - shift I) x = rhs by Gaussian elimination with partial
/// pivoting (the LAPACK gtsv scheme). Indefinite matrices are fine.
std::vector<double> solve_tridiagonal(const TridiagonalOperator& t, std::span<const double> rhs,
                                      const TridiagonalSolveOptions& opts = {});

}  // namespace dkg
