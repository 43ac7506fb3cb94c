#pragma once

#include <span>

namespace dkg {

/// Ordinary least-squares line y = slope * x + intercept.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Throws FitError for fewer than two points or constant abscissae.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace dkg
