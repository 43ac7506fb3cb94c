#include "dkg/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dkg/errors.hpp"

namespace dkg {

TridiagonalOperator::TridiagonalOperator(std::vector<double> diag, std::vector<double> off)
    : diagonal(std::move(diag)), off_diagonal(std::move(off)) {
  if (!diagonal.empty() && off_diagonal.size() + 1 != diagonal.size()) {
    throw InvalidArgumentError("tridiagonal operator: off-diagonal must be one shorter");
  }
}

std::vector<double> TridiagonalOperator::apply(std::span<const double> x) const {
  const std::size_t n = size();
  if (x.size() != n) throw GridMismatchError("tridiagonal apply: size mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diagonal[i] * x[i];
    if (i > 0) s += off_diagonal[i - 1] * x[i - 1];
    if (i + 1 < n) s += off_diagonal[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

double TridiagonalOperator::norm_inf() const {
  double m = 0.0;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = std::abs(diagonal[i]);
    if (i > 0) s += std::abs(off_diagonal[i - 1]);
    if (i + 1 < n) s += std::abs(off_diagonal[i]);
    m = std::max(m, s);
  }
  return m;
}

std::size_t TridiagonalOperator::count_below(double x) const {
  const std::size_t n = size();
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e2 = i > 0 ? off_diagonal[i - 1] * off_diagonal[i - 1] : 0.0;
    q = diagonal[i] - x - (i > 0 ? e2 / q : 0.0);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> solve_tridiagonal(const TridiagonalOperator& t, std::span<const double> rhs,
                                      const TridiagonalSolveOptions& opts) {
  const std::size_t n = t.size();
  if (rhs.size() != n) throw GridMismatchError("solve_tridiagonal: rhs size mismatch");
  if (n == 0) return {};

  std::vector<double> d(n), du(n > 1 ? n - 1 : 0), dl(n > 1 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) d[i] = t.diagonal[i] - opts.shift;
  for (std::size_t i = 0; i + 1 < n; ++i) du[i] = dl[i] = t.off_diagonal[i];
  std::vector<double> b(rhs.begin(), rhs.end());

  const double scale = std::max(1.0, t.norm_inf() + std::abs(opts.shift));
  const double threshold = opts.singular_threshold * scale;
  auto check = [&](std::size_t i) {
    if (std::abs(d[i]) < threshold) {
      if (opts.perturb_tiny_pivots) {
        d[i] = d[i] < 0.0 ? -threshold : threshold;
      } else {
        throw SingularJacobianError("tridiagonal solve: pivot " + std::to_string(d[i]) +
                                        " at row " + std::to_string(i),
                                    i, d[i]);
      }
    }
  };

  // After elimination dl[i] holds the second superdiagonal entry of row i.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      check(i);
      const double fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b[i + 1] -= fact * b[i];
      dl[i] = 0.0;
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      double temp = d[i + 1];
      d[i + 1] = du[i] - fact * temp;
      if (i + 2 < n) {
        dl[i] = du[i + 1];
        du[i + 1] = -fact * dl[i];
      } else {
        dl[i] = 0.0;
      }
      du[i] = temp;
      temp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = temp - fact * b[i + 1];
      check(i);
    }
  }
  check(n - 1);

  b[n - 1] /= d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (std::size_t k = n - 2; k-- > 0;) {
    b[k] = (b[k] - du[k] * b[k + 1] - dl[k] * b[k + 2]) / d[k];
  }
  return b;
}

}  // namespace dkg
