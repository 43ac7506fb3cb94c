#pragma once
// Small reference implementations used to cross-check the library; written
// from the definitions, without calling the code under test.

#include <cmath>
#include <vector>

namespace oracle {

inline constexpr double pi = 3.14159265358979323846;

// Neumann second difference, ghosts copy the end values.
inline std::vector<double> laplacian(const std::vector<double>& u) {
  const std::size_t n = u.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = i == 0 ? u[0] : u[i - 1];
    const double r = i + 1 == n ? u[n - 1] : u[i + 1];
    out[i] = l - 2 * u[i] + r;
  }
  return out;
}

inline std::vector<double> sg_residual(const std::vector<double>& u, double d) {
  auto r = laplacian(u);
  for (std::size_t i = 0; i < u.size(); ++i) r[i] = d * r[i] + std::sin(u[i]);
  return r;
}

// Jacobian of the sine-Gordon residual applied to v, matrix free.
inline std::vector<double> sg_jacobian_apply(const std::vector<double>& u, const std::vector<double>& v, double d) {
  auto r = laplacian(v);
  for (std::size_t i = 0; i < u.size(); ++i) r[i] = d * r[i] + std::cos(u[i]) * v[i];
  return r;
}

// Spatial rate from the characteristic equation d(r + 1/r - 2) = c, c > 0.
inline double rate(double d, double c) {
  const double b = 2.0 + c / d;
  return 0.5 * (b + std::sqrt(b * b - 4.0));
}

}  // namespace oracle
