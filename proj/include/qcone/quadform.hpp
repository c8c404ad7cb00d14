#pragma once

// Real quadratic forms on C^n written as
//
//   rho(z) = Re(z^T S z) + conj(z)^T H z,
//
// with S complex symmetric (harmonic part) and H hermitian (hermitian part).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcone/error.hpp"
#include "qcone/random.hpp"

namespace qcone {

template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using RMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Spectral norm; zero for empty matrices.
template <typename Derived>
typename Derived::RealScalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Derived::RealScalar;
  if (m.size() == 0) return Real(0);
  Eigen::JacobiSVD<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(
      m.eval());
  return svd.singularValues()(0);
}

template <typename Scalar>
class QuadraticCone {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = CMatrix<Scalar>;
  using Vector = CVector<Scalar>;

  /// Validates shapes and symmetry (relative tolerance 1e-12); the stored
  /// matrices are the exact symmetric/hermitian parts of the input.
  QuadraticCone(Matrix harmonic, Matrix hermitian) {
    if (harmonic.rows() != harmonic.cols() || hermitian.rows() != hermitian.cols() ||
        harmonic.rows() != hermitian.rows())
      throw Error(ErrorCode::DimensionMismatch, "S and H must be square of equal size");
    if (harmonic.rows() < 1)
      throw Error(ErrorCode::DimensionMismatch, "dimension must be at least 1");
    const Scalar tol = Scalar(1e-12);
    const Scalar s_norm = harmonic.norm();
    const Scalar h_norm = hermitian.norm();
    if ((harmonic - harmonic.transpose()).norm() > tol * s_norm)
      throw Error(ErrorCode::NotSymmetric, "harmonic part is not symmetric");
    if ((hermitian - hermitian.adjoint()).norm() > tol * h_norm)
      throw Error(ErrorCode::NotSymmetric, "hermitian part is not hermitian");
    s_ = (harmonic + harmonic.transpose()) / Scalar(2);
    h_ = (hermitian + hermitian.adjoint()) / Scalar(2);
  }

  /// Projects arbitrary square matrices onto Sym(n,C) x Herm(n); the Frobenius
  /// size of the discarded parts is written to *adjustment when requested.
  static QuadraticCone symmetrized(const Matrix& harmonic, const Matrix& hermitian,
                                   Scalar* adjustment = nullptr) {
    if (harmonic.rows() != harmonic.cols() || hermitian.rows() != hermitian.cols() ||
        harmonic.rows() != hermitian.rows())
      throw Error(ErrorCode::DimensionMismatch, "S and H must be square of equal size");
    Matrix s = (harmonic + harmonic.transpose()) / Scalar(2);
    Matrix h = (hermitian + hermitian.adjoint()) / Scalar(2);
    if (adjustment) *adjustment = (harmonic - s).norm() + (hermitian - h).norm();
    return QuadraticCone(std::move(s), std::move(h));
  }

  static QuadraticCone zero(Eigen::Index n) {
    return QuadraticCone(Matrix::Zero(n, n), Matrix::Zero(n, n));
  }

  Eigen::Index dim() const { return s_.rows(); }
  const Matrix& harmonic() const { return s_; }
  const Matrix& hermitian() const { return h_; }

  /// ||S||_2 + ||H||_2, the scale used by every relative tolerance.
  Scalar norm() const { return spectral_norm(s_) + spectral_norm(h_); }

  QuadraticCone scaled(Scalar factor) const { return QuadraticCone(s_ * factor, h_ * factor); }
  QuadraticCone operator-() const { return scaled(Scalar(-1)); }

 private:
  Matrix s_;
  Matrix h_;
};

using Cone = QuadraticCone<double>;

template <typename Scalar, typename Derived>
Scalar evaluate(const QuadraticCone<Scalar>& cone, const Eigen::MatrixBase<Derived>& z) {
  const auto harmonic = (z.transpose() * cone.harmonic() * z).value();
  const auto hermitian = (z.adjoint() * cone.hermitian() * z).value();
  return std::real(harmonic) + std::real(hermitian);
}

/// Symmetric real bilinear form B with B(z, z) = rho(z).
template <typename Scalar, typename DerivedU, typename DerivedV>
Scalar polar(const QuadraticCone<Scalar>& cone, const Eigen::MatrixBase<DerivedU>& u,
             const Eigen::MatrixBase<DerivedV>& v) {
  const auto harmonic = (u.transpose() * cone.harmonic() * v).value();
  const auto hermitian = (u.adjoint() * cone.hermitian() * v).value();
  return std::real(harmonic) + std::real(hermitian);
}

/// The 2n x 2n real symmetric matrix R with rho(x + iy) = [x; y]^T R [x; y].
template <typename Scalar>
RMatrix<Scalar> real_matrix(const QuadraticCone<Scalar>& cone) {
  const Eigen::Index n = cone.dim();
  const RMatrix<Scalar> p = cone.harmonic().real();
  const RMatrix<Scalar> q = cone.harmonic().imag();
  const RMatrix<Scalar> hr = cone.hermitian().real();
  const RMatrix<Scalar> hi = cone.hermitian().imag();
  RMatrix<Scalar> r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = p + hr;
  r.bottomRightCorner(n, n) = hr - p;
  r.topRightCorner(n, n) = -(q + hi);
  r.bottomLeftCorner(n, n) = -(q - hi);
  return r;
}

/// Inverse of real_matrix: the unique (S, H) represented by a real symmetric R.
template <typename Scalar>
QuadraticCone<Scalar> from_real_matrix(const RMatrix<Scalar>& r) {
  if (r.rows() != r.cols() || r.rows() % 2 != 0)
    throw Error(ErrorCode::DimensionMismatch, "real matrix must be 2n x 2n");
  const Eigen::Index n = r.rows() / 2;
  const RMatrix<Scalar> sym = (r + r.transpose()) / Scalar(2);
  const RMatrix<Scalar> xx = sym.topLeftCorner(n, n);
  const RMatrix<Scalar> yy = sym.bottomRightCorner(n, n);
  const RMatrix<Scalar> xy = sym.topRightCorner(n, n);
  const RMatrix<Scalar> hr = (xx + yy) / Scalar(2);
  const RMatrix<Scalar> p = (xx - yy) / Scalar(2);
  const RMatrix<Scalar> q = -(xy + xy.transpose()) / Scalar(2);
  const RMatrix<Scalar> hi = -(xy - xy.transpose()) / Scalar(2);
  CMatrix<Scalar> s(n, n), h(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      s(i, j) = {p(i, j), q(i, j)};
      h(i, j) = {hr(i, j), hi(i, j)};
    }
  return QuadraticCone<Scalar>::symmetrized(s, h);
}

// ---------------------------------------------------------------------------
// Polynomial form in the real coordinates x_1..x_n, y_1..y_n.
// Variable index k < n is x_{k+1}; n <= k < 2n is y_{k-n+1}.

template <typename Scalar>
struct Monomial {
  std::vector<int> vars;
  std::complex<Scalar> coeff;
};

template <typename Scalar>
using Polynomial = std::vector<Monomial<Scalar>>;

/// Splits a homogeneous real quadratic polynomial into harmonic and hermitian parts.
template <typename Scalar>
QuadraticCone<Scalar> decompose(Eigen::Index n, const Polynomial<Scalar>& poly) {
  RMatrix<Scalar> r = RMatrix<Scalar>::Zero(2 * n, 2 * n);
  for (const auto& term : poly) {
    if (term.vars.size() != 2)
      throw Error(ErrorCode::NonHomogeneous,
                  "monomial of degree " + std::to_string(term.vars.size()));
    if (term.coeff.imag() != Scalar(0))
      throw Error(ErrorCode::NonReal, "coefficient with nonzero imaginary part");
    const int a = term.vars[0];
    const int b = term.vars[1];
    if (a < 0 || b < 0 || a >= 2 * n || b >= 2 * n)
      throw Error(ErrorCode::DimensionMismatch, "variable index out of range");
    const Scalar c = term.coeff.real();
    if (a == b) {
      r(a, a) += c;
    } else {
      r(a, b) += c / Scalar(2);
      r(b, a) += c / Scalar(2);
    }
  }
  return from_real_matrix<Scalar>(r);
}

/// Upper-triangular monomial list of rho; zero coefficients are dropped.
template <typename Scalar>
Polynomial<Scalar> render(const QuadraticCone<Scalar>& cone) {
  const RMatrix<Scalar> r = real_matrix(cone);
  Polynomial<Scalar> out;
  for (int a = 0; a < r.rows(); ++a)
    for (int b = a; b < r.cols(); ++b) {
      const Scalar c = a == b ? r(a, a) : Scalar(2) * r(a, b);
      if (c != Scalar(0)) out.push_back({{a, b}, {c, Scalar(0)}});
    }
  return out;
}

// ---------------------------------------------------------------------------
// Signatures

struct HermitianSignature {
  int pi = 0;
  int nu = 0;
  friend bool operator==(const HermitianSignature&, const HermitianSignature&) = default;
};

struct RealSignature {
  int p = 0;
  int q = 0;
  friend bool operator==(const RealSignature&, const RealSignature&) = default;
};

/// Counts eigenvalues strictly above tol and strictly below -tol.
template <typename Derived>
std::pair<int, int> inertia(const Eigen::MatrixBase<Derived>& selfadjoint,
                            typename Derived::RealScalar tol) {
  using MatrixType = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (selfadjoint.size() == 0) return {0, 0};
  Eigen::SelfAdjointEigenSolver<MatrixType> es(selfadjoint.eval(), Eigen::EigenvaluesOnly);
  int pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > tol) ++pos;
    if (es.eigenvalues()(i) < -tol) ++neg;
  }
  return {pos, neg};
}

template <typename Scalar>
HermitianSignature hermitian_signature(const QuadraticCone<Scalar>& cone, Scalar tol) {
  const auto [pos, neg] = inertia(cone.hermitian(), tol);
  return {pos, neg};
}

/// Default threshold: 1e-9 * ||H||_2.
template <typename Scalar>
HermitianSignature hermitian_signature(const QuadraticCone<Scalar>& cone) {
  return hermitian_signature(cone, Scalar(1e-9) * spectral_norm(cone.hermitian()));
}

template <typename Scalar>
RealSignature real_signature(const QuadraticCone<Scalar>& cone, Scalar tol) {
  const auto [pos, neg] = inertia(real_matrix(cone), tol);
  return {pos, neg};
}

template <typename Scalar>
RealSignature real_signature(const QuadraticCone<Scalar>& cone) {
  const RMatrix<Scalar> r = real_matrix(cone);
  return real_signature(cone, Scalar(1e-9) * spectral_norm(r));
}

/// Returns (cone, +1) when pi >= nu, otherwise (-cone, -1). Ties keep the input.
template <typename Scalar>
std::pair<QuadraticCone<Scalar>, int> canonical_sign(const QuadraticCone<Scalar>& cone) {
  const HermitianSignature sig = hermitian_signature(cone);
  if (sig.pi < sig.nu) return {-cone, -1};
  return {cone, +1};
}

// ---------------------------------------------------------------------------
// Sampling points of M = {rho = 0}

template <typename Scalar>
struct ConeSample {
  CVector<Scalar> point;
  Scalar residual;
};

/// Relative residual bound for a point to count as lying on the cone.
template <typename Scalar>
Scalar cone_sample_bound(const QuadraticCone<Scalar>& cone, const CVector<Scalar>& point) {
  return Scalar(1e-10) * std::max(Scalar(1), cone.norm()) * point.squaredNorm();
}

/// Checks the residual invariant; throws VerificationFailed for points off M.
template <typename Scalar>
ConeSample<Scalar> make_cone_sample(const QuadraticCone<Scalar>& cone, CVector<Scalar> point) {
  const Scalar residual = std::abs(evaluate(cone, point));
  if (!(residual <= cone_sample_bound(cone, point)))
    throw Error(ErrorCode::VerificationFailed,
                "point is off the cone (residual " + std::to_string(double(residual)) + ")");
  return {std::move(point), residual};
}

/// Deterministic samples of M with |point| <= radius.
///
/// Each attempt draws a random real line u + t v and solves the real quadratic
/// rho(u + t v) = 0 in t. Real roots are rescaled to a random norm in
/// (0, radius]; homogeneity keeps them on M.
template <typename Scalar>
std::vector<ConeSample<Scalar>> sample_cone(const QuadraticCone<Scalar>& cone,
                                            std::uint64_t seed, int count, Scalar radius) {
  if (count < 1) throw Error(ErrorCode::InsufficientSamples, "count must be positive");
  if (!(radius > Scalar(0))) throw Error(ErrorCode::InsufficientSamples, "radius must be > 0");
  Rng rng(seed);
  const Eigen::Index n = cone.dim();
  std::vector<ConeSample<Scalar>> out;
  out.reserve(count);
  const long budget = 50L * count + 1000;
  for (long attempt = 0; attempt < budget && static_cast<int>(out.size()) < count; ++attempt) {
    CVector<Scalar> u(n), v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      u(i) = {Scalar(rng.normal()), Scalar(rng.normal())};
      v(i) = {Scalar(rng.normal()), Scalar(rng.normal())};
    }
    const Scalar a = evaluate(cone, v);
    const Scalar b = polar(cone, u, v);
    const Scalar c = evaluate(cone, u);
    Scalar roots[2];
    int nroots = 0;
    const Scalar scale = cone.norm() * u.squaredNorm();
    if (std::abs(a) <= Scalar(1e-14) * scale) {
      if (std::abs(b) > Scalar(1e-14) * scale) roots[nroots++] = -c / (Scalar(2) * b);
    } else {
      const Scalar disc = b * b - a * c;
      if (disc >= Scalar(0)) {
        const Scalar sq = std::sqrt(disc);
        const Scalar qq = -(b + std::copysign(sq, b));
        if (qq != Scalar(0)) {
          roots[nroots++] = qq / a;
          roots[nroots++] = c / qq;
        } else {
          roots[nroots++] = Scalar(0);
        }
      }
    }
    for (int k = 0; k < nroots && static_cast<int>(out.size()) < count; ++k) {
      CVector<Scalar> p = u + roots[k] * v;
      const Scalar len = p.norm();
      if (!(len > Scalar(0)) || !std::isfinite(double(len))) continue;
      const Scalar target = radius * Scalar(1.0 - rng.uniform());
      p *= target / len;
      const Scalar residual = std::abs(evaluate(cone, p));
      if (residual <= cone_sample_bound(cone, p)) out.push_back({std::move(p), residual});
    }
  }
  if (static_cast<int>(out.size()) < count)
    throw Error(ErrorCode::InsufficientSamples,
                "found " + std::to_string(out.size()) + " of " + std::to_string(count) +
                    " points; the form is (nearly) semidefinite");
  return out;
}

}  // namespace qcone
