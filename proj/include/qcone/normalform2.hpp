#pragma once

// Normal forms of quadratic cones in C^2 up to complex linear changes of
// variables and positive rescaling of the defining function.
//
//   tag     hermitian sig.  defining function                         parameters
//   M20     (2,0)           Re(A z1^2 + B z2^2) + |z1|^2 + |z2|^2     0 <= B <= A, A > 1
//   M11_1   (1,1)           Re(A z1^2 + B z2^2) + |z1|^2 - |z2|^2     0 <= B <= A
//   M11_2   (1,1)           Re(A z1^2 + conj(A) z2^2) + Im(z1 z2bar)  Re A > 0, Im A >= 0
//   M11_3   (1,1)           Re(z1^2) + Im(z1 z2bar)
//   M10_1   (1,0)           Re(A z1^2 + z2^2) + |z1|^2                A >= 0
//   M10_2   (1,0)           Re(z1 z2) + |z1|^2
//   M00_1   (0,0)           Re(z1^2 + z2^2)

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

#include "qcone/quadform.hpp"
#include "qcone/reduction2.hpp"
#include "qcone/tolerances.hpp"

namespace qcone {

enum class NormalFormTag { M20, M11_1, M11_2, M11_3, M10_1, M10_2, M00_1 };

const char* to_string(NormalFormTag tag);
std::optional<NormalFormTag> parse_tag(std::string_view name);

/// Tag plus table parameters. `a` is complex only for M11_2; `b` is used by
/// M20 and M11_1.
struct NormalFormType {
  NormalFormTag tag = NormalFormTag::M20;
  std::complex<double> a = 0.0;
  double b = 0.0;

  double A() const { return a.real(); }
  double B() const { return b; }

  static NormalFormType m20(double A, double B) { return {NormalFormTag::M20, A, B}; }
  static NormalFormType m11_1(double A, double B) { return {NormalFormTag::M11_1, A, B}; }
  static NormalFormType m11_2(std::complex<double> A) { return {NormalFormTag::M11_2, A, 0.0}; }
  static NormalFormType m11_3() { return {NormalFormTag::M11_3, 0.0, 0.0}; }
  static NormalFormType m10_1(double A) { return {NormalFormTag::M10_1, A, 0.0}; }
  static NormalFormType m10_2() { return {NormalFormTag::M10_2, 0.0, 0.0}; }
  static NormalFormType m00_1() { return {NormalFormTag::M00_1, 0.0, 0.0}; }
};

/// Number of real parameters (0, 1 or 2) carried by a tag.
int parameter_count(NormalFormTag tag);

/// True when the parameters lie in the table range for the tag.
bool in_table_range(const NormalFormType& type);

/// Distance of the parameters to the nearest place where the classification
/// or the extension verdict changes (A = 1, A = B, B = 1, Re A = 0, ...).
/// Infinite for tags without such boundaries.
double boundary_margin(const NormalFormType& type);

/// The defining function of the table row.
Cone normal_form_cone(const NormalFormType& type);

std::string describe(const NormalFormType& type);

struct NormalFormResult {
  NormalFormType ntype;
  Eigen::Matrix2cd T = Eigen::Matrix2cd::Identity();  // z = T z*
  double lambda = 1.0;
  int sign = 1;
  double residual = 0.0;        // ||dS||_2 + ||dH||_2 of sign*lambda*rho(T .) - rho_normal
  double residual_bound = 0.0;  // 1e-8 * lambda * (||S|| + ||H||) * ||T||^2
  double margin = 0.0;          // boundary_margin(ntype)
  bool low_confidence = false;  // residual above bound or parameters within 1e-6 of a boundary
  // determinants of S, Re S, Im S in the Im(z1 z2bar) frame after the phase
  // making det S > 0; present for (1,1) inputs with det S != 0
  std::optional<LemmaCInvariants<double>> invariants;
};

enum class DegeneracyReason { DimensionDeficient, Reducible, PointCone, OutsideTable };

const char* to_string(DegeneracyReason reason);

struct DegeneracyReport {
  DegeneracyReason reason = DegeneracyReason::DimensionDeficient;
  std::string detail;
};

using Classification = std::variant<NormalFormResult, DegeneracyReport>;

/// sign * lambda * (T^T S T, T^* H T): the cone z -> sign * lambda * rho(T z).
template <typename Scalar>
QuadraticCone<Scalar> apply_change(const QuadraticCone<Scalar>& cone, const CMatrix<Scalar>& t,
                                   Scalar lambda, int sign) {
  if (t.rows() != cone.dim() || t.cols() != cone.dim())
    throw Error(ErrorCode::DimensionMismatch, "change of variables has the wrong size");
  const Scalar tn = t.norm();
  if (!(std::abs(t.determinant()) > Scalar(1e-12) * tn * tn))
    throw Error(ErrorCode::SingularMatrix, "change of variables is singular");
  const Scalar f = Scalar(sign) * lambda;
  return QuadraticCone<Scalar>::symmetrized(f * (t.transpose() * cone.harmonic() * t),
                                            f * (t.adjoint() * cone.hermitian() * t));
}

struct HermitianNormalization {
  Eigen::Matrix2cd T0;
  Cone cone;
};

/// Pulls the cone back so that its hermitian part becomes the representative
/// of its signature class: I for (2,0), the matrix of Im(z1 z2bar) for (1,1),
/// diag(1,0) for (1,0), 0 for (0,0); negative classes map to the negatives.
HermitianNormalization normalize_hermitian(const Cone& cone, const Tolerances& tol = {});

/// Reduces a cone in C^2 to its normal form or reports why the table excludes it.
Classification classify2(const Cone& cone, const Tolerances& tol = {});

/// Same tag, parameters within 1e-6 * max(1, |p|), and, for (1,1) results that
/// carry them, determinant invariants within 1e-8 * max(1, |x|).
bool uniqueness_certificate(const NormalFormResult& r1, const NormalFormResult& r2);

}  // namespace qcone
