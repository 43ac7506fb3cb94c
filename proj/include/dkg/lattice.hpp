#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dkg {

/// Real values on a contiguous block of lattice sites.
///
/// `offset` is the global index of `values[0]`, so a kink whose zero-crossing
/// sits between sites -1 and 0 can be stored with a negative offset and read
/// back with its own site labels.
struct LatticeField {
  int offset = 0;
  std::vector<double> values;

  LatticeField() = default;
  LatticeField(int first_site, std::vector<double> v) : offset(first_site), values(std::move(v)) {}

  static LatticeField constant(int first_site, std::size_t count, double value) {
    return LatticeField(first_site, std::vector<double>(count, value));
  }

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  int first() const { return offset; }
  int last() const { return offset + static_cast<int>(values.size()) - 1; }
  bool contains(int site) const { return site >= first() && site <= last(); }

  /// Value at a global site index. Throws InvalidFieldError when out of range.
  double at(int site) const;
  double& at(int site);

  std::span<const double> span() const { return values; }
  std::span<double> span() { return values; }
};

double l2_norm(const LatticeField& u);
double max_abs(const LatticeField& u);

/// Entrywise a - b on matching supports.
LatticeField difference(const LatticeField& a, const LatticeField& b);

/// Same values on the reflected index set: site n maps to (first + last) - n.
LatticeField reflect(const LatticeField& u);

}  // namespace dkg
