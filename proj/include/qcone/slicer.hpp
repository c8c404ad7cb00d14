#pragma once

// Cones in C^n, n >= 3: two-dimensional slices that certify one-sided
// extension, and recognition of the cones that admit two-sided support.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qcone/decider.hpp"
#include "qcone/normalform2.hpp"
#include "qcone/quadform.hpp"
#include "qcone/tolerances.hpp"

namespace qcone {

/// Complex 2-plane L = span(basis.col(0), basis.col(1)) in C^n.
struct Slice {
  Eigen::MatrixXcd basis;     // n x 2
  std::string description;    // axis | shear-z2 | shear-z1 | line | custom | random
  std::string construction;   // which case of the construction produced it
  std::optional<std::complex<double>> alpha;
};

struct SliceResult {
  Slice slice;
  Cone restricted;
  Classification classification;
  Verdict verdict;
  DiscReport discs;
};

struct NoSliceFound {
  std::string reason;
  bool two_sided = false;  // the case analysis established two-sided support
  int random_tried = 0;
};

struct SliceOptions {
  int budget = 256;
  std::uint64_t seed = 0;
  int verify_samples = 2000;
  std::vector<double> eps_grid{1e-3, 1e-2, 1e-1};
  Tolerances tol{};
};

/// Pulls the cone back to L: S' = B^T S B, H' = B^* H B.
Cone restrict(const Cone& cone, const Slice& slice);

/// Verdict for a cone in C^2 used as a slice. Besides the table verdicts, a
/// slice with definite hermitian part is one-sided through the discs
/// A w1^2 + B w2^2 = eps in the frame where H = I and S = diag(A, B).
Verdict slice_verdict(const Cone& restricted, const Classification& c, const Tolerances& tol = {});

std::variant<SliceResult, NoSliceFound> find_good_slice(const Cone& cone,
                                                        const SliceOptions& opts = {});

/// det S >= 1/4 and det Re S < 0 after the phase making det S > 0, for S in
/// the frame where the hermitian part is Im(z1 z2bar).
bool check_cor2(const Eigen::Matrix2cd& s);

enum class LinearTermsCase { Zero, Z1Z3, Z2Z3, Dependent, Independent };

const char* to_string(LinearTermsCase c);

/// Coordinates z = change * w in which a (1,1) cone with q = 0 reads
///   Re(w~^T S w~ + 2 R(w)) + Im(w1 conj(w2)),   w~ = (w1, w2),
/// with R = 0, w1 w3, w2 w3, c w1 w3 + w2 w3 or w1 w3 + w2 w4.
struct LinearTermsReduction {
  LinearTermsCase tag = LinearTermsCase::Zero;
  Eigen::MatrixXcd change;
  std::complex<double> c = 0.0;
  Cone reduced = Cone::zero(1);
};

/// Throws QNotZero when the quadratic part in the kernel directions of H is
/// not zero, DimensionMismatch unless the hermitian signature is (1,1).
LinearTermsReduction reduce_linear_terms(const Cone& cone, const Tolerances& tol = {});

struct ProductForm {
  Classification inner;
  Eigen::MatrixXcd change;  // z = change * w, rho depends on (w1, w2) only
};
struct SumOfSquares {
  int k = 0;  // Re(w1^2 + ... + wk^2)
  Eigen::MatrixXcd change;
};
struct LinearTimesAntiLinear {
  Eigen::MatrixXcd change;  // Re(w1 w2 + w1 conj(w3))
};
struct UnknownTwoSided {
  std::string reason;
};

using TwoSidedForm = std::variant<ProductForm, SumOfSquares, LinearTimesAntiLinear, UnknownTwoSided>;

const char* two_sided_form_name(const TwoSidedForm& f);

/// Recognizes M' x C^{n-2}, Re(z1^2 + ... + zk^2) (k > 2) and
/// Re(z1 z2 + z1 conj(z3)); every positive answer is verified pointwise.
TwoSidedForm classify_two_sided_nd(const Cone& cone, const Tolerances& tol = {});

}  // namespace qcone
