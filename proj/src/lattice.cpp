#include "dkg/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dkg/errors.hpp"

namespace dkg {

double LatticeField::at(int site) const {
  if (!contains(site)) {
    throw InvalidFieldError("site " + std::to_string(site) + " outside field support [" +
                            std::to_string(first()) + ", " + std::to_string(last()) + "]");
  }
  return values[static_cast<std::size_t>(site - offset)];
}

double& LatticeField::at(int site) {
  if (!contains(site)) {
    throw InvalidFieldError("site " + std::to_string(site) + " outside field support [" +
                            std::to_string(first()) + ", " + std::to_string(last()) + "]");
  }
  return values[static_cast<std::size_t>(site - offset)];
}

double l2_norm(const LatticeField& u) {
  double s = 0.0;
  for (double x : u.values) s += x * x;
  return std::sqrt(s);
}

double max_abs(const LatticeField& u) {
  double m = 0.0;
  for (double x : u.values) m = std::max(m, std::abs(x));
  return m;
}

LatticeField difference(const LatticeField& a, const LatticeField& b) {
  if (a.offset != b.offset || a.size() != b.size()) {
    throw GridMismatchError("difference: fields live on different supports");
  }
  LatticeField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

LatticeField reflect(const LatticeField& u) {
  LatticeField out = u;
  std::reverse(out.values.begin(), out.values.end());
  return out;
}

}  // namespace dkg
