#pragma once

#include <map>
#include <string>

namespace qcone {

/// Numerical thresholds shared by the classifier, the decider and the slicer.
/// All are relative to the norm named in the comment.
struct Tolerances {
  double zero_eigenvalue = 1e-9;   // eigenvalue vs spectral norm of its matrix
  double symmetry = 1e-12;         // asymmetry vs matrix norm
  double det_s = 1e-9;             // |det S| vs ||S||^2 (rank drop of the harmonic part)
  double det_p = 1e-10;            // |det P| vs ||S||^2 (sign of det Re S)
  double zero_matrix = 1e-9;       // block norm vs unit hermitian scale
  double table_boundary = 1e-9;    // A = 1, A = B tests on normal-form parameters
  double witness = 1e-12;          // sign slack on support witnesses, times ||rho|| |z|^2
  double product_kernel = 1e-9;    // singular values of [S; H] vs its norm
  double slice_margin = 1e-3;      // required margin for grid-searched slices

  /// Applies "key=value" overrides; unknown keys throw Error(SchemaError).
  void apply(const std::map<std::string, double>& overrides);
  std::map<std::string, double> as_map() const;
};

}  // namespace qcone
