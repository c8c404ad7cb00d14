#pragma once

// Generators and independent oracles shared by the test suites.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qcone/normalform2.hpp"
#include "qcone/quadform.hpp"
#include "qcone/random.hpp"

namespace qtest {

using C = std::complex<double>;
using M2 = Eigen::Matrix2cd;
using MX = Eigen::MatrixXcd;
using VX = Eigen::VectorXcd;
inline const C I(0.0, 1.0);

inline M2 diag2(C a, C b) {
  M2 m = M2::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

inline M2 im_form() {
  M2 h;
  h << 0.0, 0.5 * I, -0.5 * I, 0.0;
  return h;
}

/// rho by explicit sums, independent of qcone::evaluate.
inline double rho_by_sums(const MX& s, const MX& h, const VX& z) {
  C harm = 0.0, herm = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      harm += z(i) * s(i, j) * z(j);
      herm += std::conj(z(i)) * h(i, j) * z(j);
    }
  return harm.real() + herm.real();
}

inline double rho_by_sums(const qcone::Cone& c, const VX& z) {
  return rho_by_sums(c.harmonic(), c.hermitian(), z);
}

/// Random complex symmetric matrix with standard normal entries.
inline MX random_symmetric(qcone::Rng& rng, Eigen::Index n) {
  const MX a = rng.complex_normal_matrix(n, n);
  return (a + a.transpose()) / 2.0;
}

inline MX random_hermitian(qcone::Rng& rng, Eigen::Index n) {
  const MX a = rng.complex_normal_matrix(n, n);
  return (a + a.adjoint()) / 2.0;
}

inline qcone::Cone random_cone(qcone::Rng& rng, Eigen::Index n) {
  return qcone::Cone(random_symmetric(rng, n), random_hermitian(rng, n));
}

/// Invertible matrix with condition number at most max_cond.
inline MX random_invertible(qcone::Rng& rng, Eigen::Index n, double max_cond = 50.0) {
  for (;;) {
    const MX t = rng.complex_normal_matrix(n, n);
    Eigen::JacobiSVD<MX> svd(t);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) > 0.0 && sv(0) / sv(n - 1) <= max_cond) return t;
  }
}

inline MX random_unitary(qcone::Rng& rng, Eigen::Index n) {
  Eigen::HouseholderQR<MX> qr(rng.complex_normal_matrix(n, n));
  return qr.householderQ() * MX::Identity(n, n);
}

/// Real 2x2 with determinant one.
inline Eigen::Matrix2d random_sl2(qcone::Rng& rng) {
  for (;;) {
    Eigen::Matrix2d g;
    g << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    const double d = g.determinant();
    if (std::abs(d) < 0.1) continue;
    if (d < 0.0) g.col(0) = -g.col(0);
    return g / std::sqrt(std::abs(d));
  }
}

/// Parameters drawn uniformly inside the table range of the tag.
inline qcone::NormalFormType random_type(qcone::Rng& rng, qcone::NormalFormTag tag) {
  using qcone::NormalFormType;
  switch (tag) {
    case qcone::NormalFormTag::M20: {
      const double a = rng.uniform(1.0, 4.0);
      return NormalFormType::m20(a, rng.uniform(0.0, a));
    }
    case qcone::NormalFormTag::M11_1: {
      const double a = rng.uniform(0.0, 3.0);
      return NormalFormType::m11_1(a, rng.uniform(0.0, a));
    }
    case qcone::NormalFormTag::M11_2:
      return NormalFormType::m11_2({rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)});
    case qcone::NormalFormTag::M10_1: return NormalFormType::m10_1(rng.uniform(0.0, 3.0));
    case qcone::NormalFormTag::M11_3: return NormalFormType::m11_3();
    case qcone::NormalFormTag::M10_2: return NormalFormType::m10_2();
    case qcone::NormalFormTag::M00_1: return NormalFormType::m00_1();
  }
  return NormalFormType::m00_1();
}

inline const std::vector<qcone::NormalFormTag>& all_tags() {
  static const std::vector<qcone::NormalFormTag> tags{
      qcone::NormalFormTag::M20,   qcone::NormalFormTag::M11_1, qcone::NormalFormTag::M11_2,
      qcone::NormalFormTag::M11_3, qcone::NormalFormTag::M10_1, qcone::NormalFormTag::M10_2,
      qcone::NormalFormTag::M00_1};
  return tags;
}

/// rho(z) = sign / lambda * rho_normal(T^{-1} z): the input whose normal form
/// is `type` with change T, factor lambda and sign.
inline qcone::Cone disguise(const qcone::NormalFormType& type, const M2& t, double lambda, int sign) {
  const qcone::Cone normal = qcone::normal_form_cone(type);
  const MX tinv = t.inverse();
  return qcone::apply_change<double>(normal, tinv, 1.0 / lambda, sign);
}

/// Parameter distance used by the round-trip checks.
inline double parameter_error(const qcone::NormalFormType& a, const qcone::NormalFormType& b) {
  return std::abs(a.a - b.a) + std::abs(a.b - b.b);
}

}  // namespace qtest
