#include <doctest.h>

#include <numbers>

#include "qcone/error.hpp"
#include "qcone/reduction2.hpp"
#include "support.hpp"

using namespace qcone;
using namespace qtest;

namespace {

Eigen::Matrix2d random_real_symmetric(Rng& rng) {
  Eigen::Matrix2d m;
  m << rng.normal(), rng.normal(), 0.0, rng.normal();
  m(1, 0) = m(0, 1);
  return m;
}

// Diagonal entries of phi(tau)^T Q phi(tau), computed by matrix products.
std::pair<double, double> so11_diagonal(const Eigen::Matrix2d& q, double tau) {
  const Eigen::Matrix2d k = so11_element(tau).matrix;
  const Eigen::Matrix2d qp = k.transpose() * q * k;
  return {qp(0, 0), qp(1, 1)};
}

// Roots of the diagonal entries on a log grid in [1e-3, 1e3], refined by bisection.
std::vector<double> scanned_roots(const Eigen::Matrix2d& q) {
  std::vector<double> roots;
  const int steps = 20000;
  for (int which = 0; which < 2; ++which) {
    auto f = [&](double t) {
      const auto d = so11_diagonal(q, t);
      return which == 0 ? d.first : d.second;
    };
    double prev_t = 1e-3, prev = f(prev_t);
    for (int i = 1; i <= steps; ++i) {
      const double t = std::pow(10.0, -3.0 + 6.0 * i / steps);
      const double v = f(t);
      if (v == 0.0) roots.push_back(t);
      if (prev * v < 0.0) {
        double lo = prev_t, hi = t;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          if ((f(lo) < 0.0) == (f(mid) < 0.0)) lo = mid;
          else hi = mid;
        }
        roots.push_back(0.5 * (lo + hi));
      }
      prev = v;
      prev_t = t;
    }
  }
  return roots;
}

M2 rotate_to_positive_det(const M2& s) {
  return std::polar(1.0, -std::arg(s.determinant()) / 2.0) * s;
}

}  // namespace

TEST_CASE("takagi2 on diagonal, zero and antidiagonal matrices") {
  const auto d = takagi2<double>(diag2(0.5, 1.0 / 3.0));
  CHECK(d.d1 == doctest::Approx(0.5));
  CHECK(d.d2 == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(std::abs(d.u(0, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(d.u(0, 1)) < 1e-12);

  const auto z = takagi2<double>(M2::Zero());
  CHECK(z.d1 == 0.0);
  CHECK(z.d2 == 0.0);
  CHECK((z.u - M2::Identity()).norm() == 0.0);

  M2 s;
  s << 0.0, 1.0, 1.0, 0.0;
  const auto a = takagi2<double>(s);
  CHECK(a.d1 == doctest::Approx(1.0));
  CHECK(a.d2 == doctest::Approx(1.0));
  CHECK((a.u.transpose() * s * a.u - M2::Identity()).norm() <= 1e-10);
}

TEST_CASE("takagi2 matches singular values on random matrices") {
  Rng rng(10);
  for (int i = 0; i < 1000; ++i) {
    const M2 s = random_symmetric(rng, 2);
    const auto t = takagi2<double>(s);
    const double norm = spectral_norm(s);
    Eigen::JacobiSVD<M2> svd(s);
    CHECK(std::abs(t.d1 - svd.singularValues()(0)) <= 1e-10 * norm);
    CHECK(std::abs(t.d2 - svd.singularValues()(1)) <= 1e-10 * norm);
    CHECK((t.u.transpose() * s * t.u - diag2(t.d1, t.d2)).norm() <= 1e-10 * norm);
    CHECK((t.u.adjoint() * t.u - M2::Identity()).norm() <= 1e-12);
  }
}

TEST_CASE("takagi2 with equal singular values") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    // unitary congruence of a scalar multiple of I: equal singular values
    const M2 u = random_unitary(rng, 2);
    const M2 s = u.transpose() * (2.0 * M2::Identity()) * u;
    const auto t = takagi2<double>(s);
    CHECK(t.d1 == doctest::Approx(2.0));
    CHECK(t.d2 == doctest::Approx(2.0));
    CHECK((t.u.transpose() * s * t.u - diag2(2.0, 2.0)).norm() <= 1e-10 * 2.0);
  }
}

TEST_CASE("takagi2 rejects non-symmetric input") {
  M2 s = M2::Zero();
  s(0, 1) = 1.0;
  CHECK_THROWS_AS(takagi2<double>(s), Error);
}

TEST_CASE("sl2_reduce_sym canonical forms") {
  const auto a = sl2_reduce_sym<double>(Eigen::Vector2d(2.0, 2.0).asDiagonal().toDenseMatrix());
  CHECK(a.form == Sl2Form::Scalar);
  CHECK((a.canonical - 2.0 * Eigen::Matrix2d::Identity()).norm() < 1e-12);

  const auto b = sl2_reduce_sym<double>(Eigen::Vector2d(1.0, -4.0).asDiagonal().toDenseMatrix());
  CHECK(b.form == Sl2Form::Hyperbolic);
  CHECK(std::abs(b.canonical(0, 0)) == doctest::Approx(2.0));
  CHECK(b.canonical(0, 0) * b.canonical(1, 1) == doctest::Approx(-4.0));

  Eigen::Matrix2d p;
  p << 1.0, 1.0, 1.0, 1.0;
  const auto c = sl2_reduce_sym<double>(p);
  CHECK(c.form == Sl2Form::RankOne);
  CHECK((c.g.transpose() * p * c.g - c.canonical).norm() <= 1e-10 * 2.0);
  CHECK(c.canonical(0, 0) == 1.0);

  CHECK_THROWS_AS(sl2_reduce_sym<double>(Eigen::Matrix2d::Zero()), Error);
}

TEST_CASE("sl2_reduce_sym on random matrices") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix2d p = random_real_symmetric(rng);
    const auto r = sl2_reduce_sym<double>(p);
    const double norm = p.norm();
    CHECK(std::abs(r.g.determinant() - 1.0) <= 1e-12 * std::max(1.0, r.g.squaredNorm()));
    CHECK((r.g.transpose() * p * r.g - r.canonical).norm() <= 1e-10 * norm * r.g.squaredNorm());
    if (r.form != Sl2Form::RankOne)
      CHECK(std::abs(r.canonical.determinant() - p.determinant()) <= 1e-10 * norm * norm);
  }
}

TEST_CASE("so11 elements preserve diag(1,-1)") {
  Rng rng(13);
  const Eigen::Matrix2d j = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  for (int i = 0; i < 100; ++i) {
    const double tau = std::exp(rng.uniform(-3.0, 3.0));
    const Eigen::Matrix2d k = so11_element(tau).matrix;
    CHECK(k.determinant() == doctest::Approx(1.0));
    CHECK((k.transpose() * j * k - j).norm() <= 1e-12 * k.squaredNorm());
  }
}

TEST_CASE("so11_zero_diag examples") {
  const auto a = so11_zero_diag<double>(Eigen::Vector2d(0.0, 5.0).asDiagonal().toDenseMatrix());
  CHECK(a.k.tau == doctest::Approx(1.0));
  CHECK(a.qp(0, 0) == doctest::Approx(0.0));

  Eigen::Matrix2d q;
  q << 2.0, 0.0, 0.0, -1.0;
  const auto b = so11_zero_diag<double>(q);
  CHECK(std::min(std::abs(b.qp(0, 0)), std::abs(b.qp(1, 1))) <= 1e-8 * 2.0);
  CHECK(b.qp.determinant() == doctest::Approx(-2.0));
  const auto roots = scanned_roots(q);
  REQUIRE(!roots.empty());
  const double best = *std::min_element(roots.begin(), roots.end(), [](double x, double y) {
    return std::abs(x - 1.0) < std::abs(y - 1.0);
  });
  CHECK(b.k.tau == doctest::Approx(best).epsilon(1e-8));

  q << 0.0, 3.0, 3.0, 0.0;
  CHECK(so11_zero_diag<double>(q).k.tau == doctest::Approx(1.0));

  CHECK_THROWS_AS(so11_zero_diag<double>(Eigen::Matrix2d::Identity()), Error);
  q << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(so11_zero_diag<double>(q), Error);
}

TEST_CASE("so11_zero_diag against a dense scan") {
  Rng rng(14);
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::Matrix2d q = random_real_symmetric(rng);
    if (q.determinant() > 0.0) q(1, 1) = -q(1, 1) - 2.0 * std::abs(q(0, 1) * q(0, 1) / q(0, 0));
    if (q.determinant() > 0.0) continue;
    So11Reduction<double> r;
    try {
      r = so11_zero_diag<double>(q);
    } catch (const Error&) {
      continue;  // null-aligned Q, no finite tau
    }
    const double norm = spectral_norm(q);
    CHECK(std::min(std::abs(r.qp(0, 0)), std::abs(r.qp(1, 1))) <= 1e-8 * norm * r.k.matrix.squaredNorm());
    CHECK(std::abs(r.qp.determinant() - q.determinant()) <= 1e-10 * norm * norm * r.k.matrix.squaredNorm() *
                                                                  r.k.matrix.squaredNorm());
    if (i < 200 && r.k.tau > 2e-3 && r.k.tau < 5e2) {
      const auto roots = scanned_roots(q);
      REQUIRE(!roots.empty());
      const double best = *std::min_element(roots.begin(), roots.end(), [](double x, double y) {
        return std::abs(x - 1.0) < std::abs(y - 1.0);
      });
      CHECK(std::abs(r.k.tau - 1.0) <= std::abs(best - 1.0) + 1e-6);
      ++compared;
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("factor_preserver examples") {
  const auto a = factor_preserver<double>(M2::Identity());
  CHECK(a.theta == doctest::Approx(0.0));
  CHECK((a.g - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  const auto b = factor_preserver<double>(std::polar(1.0, std::numbers::pi / 4) * M2::Identity());
  CHECK(b.theta == doctest::Approx(std::numbers::pi / 4));
  CHECK((b.g - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  M2 bad;
  bad << 2.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(factor_preserver<double>(bad), Error);
}

TEST_CASE("factor_preserver recovers random factorizations") {
  Rng rng(15);
  for (int i = 0; i < 1000; ++i) {
    const double theta0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Eigen::Matrix2d g0 = random_sl2(rng);
    const M2 k = std::polar(1.0, theta0) * g0.cast<C>();
    const auto f = factor_preserver<double>(k);
    CHECK(f.theta >= 0.0);
    CHECK(f.theta < std::numbers::pi);
    CHECK(std::abs(std::sin(f.theta - theta0)) <= 1e-9);
    CHECK(std::min((f.g - g0).norm(), (f.g + g0).norm()) <= 1e-9 * g0.norm());
    CHECK((std::polar(1.0, f.theta) * f.g.cast<C>() - k).norm() <= 1e-10 * k.norm());
    CHECK(f.g.determinant() == doctest::Approx(1.0));
  }
}

TEST_CASE("determinant invariants of S = P + iQ") {
  const auto a = lemma_c_invariants<double>(diag2(C(3, 4), C(3, -4)));
  CHECK(std::abs(a.det_s - 25.0) < 1e-12);
  CHECK(a.det_p == doctest::Approx(9.0));
  CHECK(a.det_q == doctest::Approx(-16.0));
  const auto z = lemma_c_invariants<double>(M2::Zero());
  CHECK(std::abs(z.det_s) == 0.0);
  CHECK(z.det_p == 0.0);
  CHECK(z.det_q == 0.0);

  Rng rng(16);
  for (int i = 0; i < 100; ++i) {
    const M2 s = random_symmetric(rng, 2);
    const auto inv = lemma_c_invariants<double>(s);
    const Eigen::Matrix2d p = s.real(), q = s.imag();
    const C expected(p.determinant() - q.determinant(),
                     q(0, 0) * p(1, 1) + p(0, 0) * q(1, 1) - 2.0 * q(0, 1) * p(0, 1));
    CHECK(std::abs(inv.det_s - expected) <= 1e-12 * s.squaredNorm());

    // a preserver e^{i theta} g acts by S -> e^{2 i theta} g^T S g
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Eigen::Matrix2d g = random_sl2(rng);
    const M2 moved = std::polar(1.0, 2.0 * theta) * (g.transpose().cast<C>() * s * g.cast<C>());
    const auto i1 = lemma_c_invariants<double>(rotate_to_positive_det(s));
    const auto i2 = lemma_c_invariants<double>(rotate_to_positive_det(moved));
    const double scale = std::max(1.0, std::abs(i1.det_s));
    CHECK(std::abs(std::abs(i1.det_s) - std::abs(i2.det_s)) <= 1e-8 * scale);
    CHECK(std::abs(i1.det_p - i2.det_p) <= 1e-8 * scale);
    CHECK(std::abs(i1.det_q - i2.det_q) <= 1e-8 * scale);
  }
}
