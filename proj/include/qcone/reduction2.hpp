#pragma once

// 2x2 matrix reductions: Takagi factorization, SL(2,R) congruence normal
// forms of real symmetric matrices, SO(1,1) diagonal zeroing, factorization
// of the preservers of Im(z1 conj(z2)), and determinant invariants.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qcone/error.hpp"

namespace qcone {

template <typename Scalar>
using Complex2 = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <typename Scalar>
using Real2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using ComplexVec2 = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

/// Hermitian matrix of Im(z1 conj(z2)).
template <typename Scalar>
Complex2<Scalar> im_form_matrix() {
  using C = std::complex<Scalar>;
  Complex2<Scalar> h;
  h << C(0), C(0, Scalar(0.5)), C(0, Scalar(-0.5)), C(0);
  return h;
}

template <typename Derived>
typename Derived::RealScalar spectral_norm2(const Eigen::MatrixBase<Derived>& m) {
  return Eigen::JacobiSVD<typename Derived::PlainObject>(m.eval()).singularValues()(0);
}

// ---------------------------------------------------------------------------

template <typename Scalar>
struct TakagiFactorization {
  Complex2<Scalar> u;
  Scalar d1 = 0;
  Scalar d2 = 0;
};

/// u^T S u = diag(d1, d2) with u unitary and d1 >= d2 >= 0.
template <typename Scalar>
TakagiFactorization<Scalar> takagi2(const Complex2<Scalar>& s_in) {
  using C = std::complex<Scalar>;
  const Scalar scale = s_in.norm();
  if (std::abs(s_in(0, 1) - s_in(1, 0)) > Scalar(1e-12) * scale)
    throw Error(ErrorCode::NotSymmetric, "takagi2 needs a symmetric matrix");
  Complex2<Scalar> s = s_in;
  s(0, 1) = s(1, 0) = (s_in(0, 1) + s_in(1, 0)) / Scalar(2);

  TakagiFactorization<Scalar> out;
  out.u.setIdentity();
  if (scale == Scalar(0)) return out;

  Eigen::SelfAdjointEigenSolver<Complex2<Scalar>> es(s.adjoint() * s);
  const ComplexVec2<Scalar> x = es.eigenvectors().col(1);
  const Scalar d1 = std::sqrt(std::max(es.eigenvalues()(1), Scalar(0)));
  // With y = conj(S x)/d1, both x + y and i(x - y) satisfy S w = d1 conj(w).
  const ComplexVec2<Scalar> y = (s * x).conjugate() / d1;
  const ComplexVec2<Scalar> w1 = x + y;
  const ComplexVec2<Scalar> w2 = C(0, 1) * (x - y);
  ComplexVec2<Scalar> u1 = w1.norm() >= w2.norm() ? w1 : w2;
  u1.normalize();
  ComplexVec2<Scalar> u2(-std::conj(u1(1)), std::conj(u1(0)));
  const C c = (u2.transpose() * s * u2).value();
  if (std::abs(c) > Scalar(0)) u2 *= std::polar(Scalar(1), -std::arg(c) / Scalar(2));

  out.u.col(0) = u1;
  out.u.col(1) = u2;
  out.d1 = std::real((u1.transpose() * s * u1).value());
  out.d2 = std::real((u2.transpose() * s * u2).value());
  if (out.d1 < Scalar(0)) {
    // rounding can leave a tiny negative real part; a phase of i flips it
    out.u.col(0) *= C(0, 1);
    out.d1 = -out.d1;
  }
  if (out.d2 > out.d1) {
    out.u.col(0).swap(out.u.col(1));
    std::swap(out.d1, out.d2);
  }
  return out;
}

// ---------------------------------------------------------------------------

enum class Sl2Form { Scalar, Hyperbolic, RankOne };

/// g^T P g = canonical with det g = 1. canonical is sign*value*I (Scalar),
/// value*diag(1,-1) (Hyperbolic) or sign*diag(1,0) (RankOne). det P counts as
/// zero when |det P| <= det_tol * ||P||^2.
template <typename Scalar>
struct Sl2Reduction {
  Real2<Scalar> g;
  Real2<Scalar> canonical;
  Sl2Form form = Sl2Form::Scalar;
  int sign = 1;
  Scalar value = 0;
};

template <typename Scalar>
Sl2Reduction<Scalar> sl2_reduce_sym(const Real2<Scalar>& p_in, Scalar det_tol = Scalar(1e-9)) {
  const Real2<Scalar> p = (p_in + p_in.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Real2<Scalar>> es(p);
  const Scalar lo = es.eigenvalues()(0);
  const Scalar hi = es.eigenvalues()(1);
  const Scalar norm = std::max(std::abs(lo), std::abs(hi));
  if (norm == Scalar(0)) throw Error(ErrorCode::ZeroMatrix, "sl2_reduce_sym needs P != 0");

  // rotation with the larger eigenvalue first
  Real2<Scalar> r;
  r.col(0) = es.eigenvectors().col(1);
  r.col(1) = es.eigenvectors().col(0);
  if (r.determinant() < Scalar(0)) r.col(1) = -r.col(1);

  const Scalar det = lo * hi;
  const Scalar tol = det_tol * norm * norm;
  Sl2Reduction<Scalar> out;
  if (det > tol) {
    const Scalar a1 = std::sqrt(std::sqrt(lo / hi));
    out.g = r * Eigen::DiagonalMatrix<Scalar, 2>(a1, Scalar(1) / a1);
    out.form = Sl2Form::Scalar;
    out.sign = hi > Scalar(0) ? 1 : -1;
    out.value = std::sqrt(det);
    out.canonical = Scalar(out.sign) * out.value * Real2<Scalar>::Identity();
  } else if (det < -tol) {
    const Scalar a1 = std::sqrt(std::sqrt(-lo / hi));
    out.g = r * Eigen::DiagonalMatrix<Scalar, 2>(a1, Scalar(1) / a1);
    out.form = Sl2Form::Hyperbolic;
    out.sign = 1;
    out.value = std::sqrt(-det);
    out.canonical = out.value * Eigen::DiagonalMatrix<Scalar, 2>(Scalar(1), Scalar(-1)).toDenseMatrix();
  } else {
    const bool top = std::abs(hi) >= std::abs(lo);
    const Scalar lam = top ? hi : lo;
    Eigen::Matrix<Scalar, 2, 1> v = top ? es.eigenvectors().col(1) : es.eigenvectors().col(0);
    Eigen::Matrix<Scalar, 2, 1> w = top ? es.eigenvectors().col(0) : es.eigenvectors().col(1);
    Real2<Scalar> basis;
    basis << v, w;
    if (basis.determinant() < Scalar(0)) w = -w;
    const Scalar root = std::sqrt(std::abs(lam));
    out.g.col(0) = v / root;
    out.g.col(1) = w * root;
    out.form = Sl2Form::RankOne;
    out.sign = lam > Scalar(0) ? 1 : -1;
    out.value = Scalar(1);
    out.canonical << Scalar(out.sign), Scalar(0), Scalar(0), Scalar(0);
  }
  return out;
}

// ---------------------------------------------------------------------------

/// phi(tau) = 1/2 [[sigma, delta], [delta, sigma]], sigma = tau + 1/tau,
/// delta = tau - 1/tau. phi is an isomorphism R+ -> SO(1,1).
template <typename Scalar>
struct So11Element {
  Scalar tau = 1;
  Real2<Scalar> matrix = Real2<Scalar>::Identity();
};

template <typename Scalar>
So11Element<Scalar> so11_element(Scalar tau) {
  const Scalar sigma = tau + Scalar(1) / tau;
  const Scalar delta = tau - Scalar(1) / tau;
  So11Element<Scalar> k;
  k.tau = tau;
  k.matrix << sigma / Scalar(2), delta / Scalar(2), delta / Scalar(2), sigma / Scalar(2);
  return k;
}

template <typename Scalar>
struct So11Reduction {
  So11Element<Scalar> k;
  Real2<Scalar> qp;
};

/// Finds k in SO(1,1) such that k^T Q k has a zero diagonal entry.
///
/// With u = tau^2 the diagonal entries of k^T Q k vanish exactly when
///   (p + 2q + r) u^2 + 2(p - r) u + (p - 2q + r) = 0   (first entry)
///   (p + 2q + r) u^2 - 2(p - r) u + (p - 2q + r) = 0   (second entry)
/// for Q = [[p, q], [q, r]]. Both have discriminant -16 det Q. Among all
/// positive roots the one whose tau is nearest to 1 is used.
template <typename Scalar>
So11Reduction<Scalar> so11_zero_diag(const Real2<Scalar>& q_in) {
  const Real2<Scalar> qm = (q_in + q_in.transpose()) / Scalar(2);
  const Scalar norm = qm.norm() == Scalar(0) ? Scalar(0) : spectral_norm2(qm);
  const Scalar det = qm.determinant();
  if (det > Scalar(1e-9) * norm * norm)
    throw Error(ErrorCode::PositiveDeterminant, "so11_zero_diag needs det Q <= 0");
  So11Reduction<Scalar> out;
  if (norm == Scalar(0)) {
    out.qp = qm;
    return out;
  }
  const Scalar p = qm(0, 0), q = qm(0, 1), r = qm(1, 1);
  const Scalar a = p + Scalar(2) * q + r;
  const Scalar c = p - Scalar(2) * q + r;
  const Scalar small = Scalar(1e-14) * norm;

  std::vector<Scalar> roots;
  for (const Scalar b : {Scalar(2) * (p - r), Scalar(-2) * (p - r)}) {
    if (std::abs(a) <= small) {
      if (std::abs(b) > small) roots.push_back(-c / b);
      continue;
    }
    const Scalar disc = std::max(b * b - Scalar(4) * a * c, Scalar(0));
    const Scalar t = -(b + std::copysign(std::sqrt(disc), b)) / Scalar(2);
    if (t != Scalar(0)) {
      roots.push_back(t / a);
      roots.push_back(c / t);
    } else {
      roots.push_back(Scalar(0));
    }
  }
  Scalar best = std::numeric_limits<Scalar>::quiet_NaN();
  for (const Scalar u : roots) {
    if (!(u > Scalar(0)) || !std::isfinite(double(u))) continue;
    const Scalar tau = std::sqrt(u);
    if (std::isnan(double(best)) || std::abs(tau - Scalar(1)) < std::abs(best - Scalar(1)))
      best = tau;
  }
  if (std::isnan(double(best)))
    throw Error(ErrorCode::NoFiniteSolution,
                "no finite SO(1,1) element zeroes a diagonal entry (Q is a multiple of "
                "[[1, +-1], [+-1, 1]])");
  out.k = so11_element(best);
  out.qp = out.k.matrix.transpose() * qm * out.k.matrix;
  return out;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
struct PreserverFactor {
  Scalar theta = 0;
  Real2<Scalar> g = Real2<Scalar>::Identity();
};

/// Writes a preserver of Im(z1 conj(z2)) as k = e^{i theta} g with g in
/// SL(2,R) and theta in [0, pi).
template <typename Scalar>
PreserverFactor<Scalar> factor_preserver(const Complex2<Scalar>& k) {
  const Complex2<Scalar> he = im_form_matrix<Scalar>();
  const Scalar tol = Scalar(1e-10) * std::max(Scalar(1), k.squaredNorm());
  if ((k.adjoint() * he * k - he).norm() > tol)
    throw Error(ErrorCode::NotPreserver, "k does not preserve Im(z1 conj(z2))");
  Scalar theta = std::arg(k.determinant()) / Scalar(2);
  if (theta < Scalar(0)) theta += std::numbers::pi_v<Scalar>;
  if (theta >= std::numbers::pi_v<Scalar>) theta -= std::numbers::pi_v<Scalar>;
  const Complex2<Scalar> g = std::polar(Scalar(1), -theta) * k;
  if (g.imag().norm() > tol)
    throw Error(ErrorCode::NotPreserver, "k is not a unimodular multiple of a real matrix");
  PreserverFactor<Scalar> out;
  out.theta = theta;
  out.g = g.real();
  return out;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
struct LemmaCInvariants {
  std::complex<Scalar> det_s;
  Scalar det_p = 0;
  Scalar det_q = 0;
};

/// Determinants of S = P + iQ and of its real and imaginary parts.
template <typename Scalar>
LemmaCInvariants<Scalar> lemma_c_invariants(const Complex2<Scalar>& s) {
  const Real2<Scalar> p = s.real();
  const Real2<Scalar> q = s.imag();
  return {s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0), p.determinant(), q.determinant()};
}

}  // namespace qcone
