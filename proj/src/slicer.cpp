#include "qcone/slicer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qcone/error.hpp"
#include "qcone/random.hpp"
#include "qcone/reduction2.hpp"

namespace qcone {

namespace {

using C = std::complex<double>;
using MX = Eigen::MatrixXcd;
using VX = Eigen::VectorXcd;
using M2 = Eigen::Matrix2cd;
constexpr C I(0.0, 1.0);

using Outcome = std::variant<SliceResult, NoSliceFound>;

NoSliceFound failed(std::string reason) { return {std::move(reason), false, 0}; }
NoSliceFound two_sided(std::string reason) { return {std::move(reason), true, 0}; }

// Unit vectors u with S u = sigma conj(u), sigma > tol, sigma descending.
// A real eigenvector (a, b) of [[P, Q], [Q, -P]] (S = P + iQ) for sigma > 0
// gives u = a - i b; distinct eigenvectors give orthonormal u.
struct TakagiVector {
  double sigma;
  VX u;
};

std::vector<TakagiVector> takagi_positive(const MX& s, double tol) {
  const Eigen::Index n = s.rows();
  Eigen::MatrixXd m(2 * n, 2 * n);
  m << s.real(), s.imag(), s.imag(), -s.real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  std::vector<TakagiVector> out;
  for (Eigen::Index i = 2 * n - 1; i >= n; --i) {
    const double sigma = es.eigenvalues()(i);
    if (!(sigma > tol)) break;
    const Eigen::VectorXd ab = es.eigenvectors().col(i);
    VX u = ab.head(n).cast<C>() - I * ab.tail(n).cast<C>();
    u.normalize();
    out.push_back({sigma, u});
  }
  return out;
}

// Basis of {v : rows * v = 0}.
MX null_space(const MX& rows, Eigen::Index rank) {
  Eigen::JacobiSVD<MX> svd(rows, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(rows.cols() - rank);
}

Eigen::Index numerical_rank(const MX& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MX> svd(m);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++r;
  return r;
}

// Columns U with U^* H U = diag(eps), eps = +1 (largest eigenvalue first),
// then -1, then 0.
struct HermitianFrame {
  MX u;
  std::vector<int> eps;
  int pi = 0;
  int nu = 0;
};

HermitianFrame hermitian_frame(const MX& h, double zero) {
  Eigen::SelfAdjointEigenSolver<MX> es(h);
  const Eigen::Index n = h.rows();
  std::vector<Eigen::Index> pos, neg, nil;
  for (Eigen::Index i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > zero) pos.push_back(i);
  // largest first; equal eigenvalues keep the solver's order
  std::stable_sort(pos.begin(), pos.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.eigenvalues()(a) > es.eigenvalues()(b);
  });
  for (Eigen::Index i = 0; i < n; ++i)
    if (es.eigenvalues()(i) < -zero) neg.push_back(i);
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(es.eigenvalues()(i)) <= zero) nil.push_back(i);
  std::vector<Eigen::Index> order = pos;
  order.insert(order.end(), neg.begin(), neg.end());
  order.insert(order.end(), nil.begin(), nil.end());

  HermitianFrame f;
  f.u.resize(n, n);
  f.pi = static_cast<int>(pos.size());
  f.nu = static_cast<int>(neg.size());
  for (Eigen::Index c = 0; c < n; ++c) {
    const double ev = es.eigenvalues()(order[c]);
    const bool is_zero = std::abs(ev) <= zero;
    f.u.col(c) = es.eigenvectors().col(order[c]) / (is_zero ? 1.0 : std::sqrt(std::abs(ev)));
    f.eps.push_back(is_zero ? 0 : (ev > 0.0 ? 1 : -1));
  }
  return f;
}

M2 diag_to_oneone() {
  M2 t;
  t << 0.5, 0.5 * I, 0.5, -0.5 * I;
  return t;
}

Slice make_slice(const VX& b1, const VX& b2, std::string description, std::string construction,
                 std::optional<C> alpha = std::nullopt) {
  Slice s;
  s.basis.resize(b1.size(), 2);
  s.basis.col(0) = b1;
  s.basis.col(1) = b2;
  s.description = std::move(description);
  s.construction = std::move(construction);
  s.alpha = alpha;
  return s;
}

std::optional<SliceResult> try_slice(const Cone& cone, Slice slice, const SliceOptions& o) {
  try {
    Cone r = restrict(cone, slice);
    Classification c = classify2(r, o.tol);
    Verdict v = slice_verdict(r, c, o.tol);
    if (v.outcome != Verdict::Outcome::OneSided || !v.discs) return std::nullopt;
    DiscReport rep = inspect_discs(r, *v.discs, o.eps_grid, o.verify_samples, o.seed);
    if (!rep.ok) return std::nullopt;
    return SliceResult{std::move(slice), std::move(r), std::move(c), std::move(v), std::move(rep)};
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Moduli 2^0, 2^-1, 2^1, 2^-2, ... and 16 phases, phase 0 first.
std::vector<C> alternating_grid(int max_exp) {
  std::vector<C> out;
  std::vector<double> moduli{1.0};
  for (int k = 1; k <= max_exp; ++k) {
    moduli.push_back(std::ldexp(1.0, -k));
    moduli.push_back(std::ldexp(1.0, k));
  }
  for (double r : moduli)
    for (int j = 0; j < 16; ++j) out.push_back(std::polar(r, 2.0 * std::numbers::pi * j / 16.0));
  return out;
}

// Moduli 2^0 .. 2^20, then 2^-1 .. 2^-20, with 16 phases each.
std::vector<C> growing_grid() {
  std::vector<C> out;
  std::vector<double> moduli;
  for (int k = 0; k <= 20; ++k) moduli.push_back(std::ldexp(1.0, k));
  for (int k = 1; k <= 20; ++k) moduli.push_back(std::ldexp(1.0, -k));
  for (double r : moduli)
    for (int j = 0; j < 16; ++j) out.push_back(std::polar(r, 2.0 * std::numbers::pi * j / 16.0));
  return out;
}

// ---------------------------------------------------------------------------
// Hermitian part with at least two positive eigenvalues

Outcome slice_pi2(const Cone& cone, const Cone& work, const HermitianFrame& f,
                  const SliceOptions& o) {
  const Eigen::Index n = work.dim();
  MX u = f.u;
  MX s = u.transpose() * work.harmonic() * u;
  double A = 0.0, B = 0.0;
  const M2 top = s.topLeftCorner(2, 2);
  const double tiny = 1e-14 * std::max(1.0, top.norm());
  if (std::abs(top(0, 1)) <= tiny && std::abs(top(0, 0).imag()) <= tiny &&
      std::abs(top(1, 1).imag()) <= tiny && top(0, 0).real() >= top(1, 1).real() &&
      top(1, 1).real() >= 0.0) {
    // already diagonal: keep the given axes
    A = top(0, 0).real();
    B = top(1, 1).real();
  } else {
    const auto tk = takagi2<double>(top);
    u.leftCols(2) = (u.leftCols(2) * tk.u).eval();
    s = u.transpose() * work.harmonic() * u;
    A = tk.d1;
    B = tk.d2;
  }
  const double tb = o.tol.table_boundary * std::max(1.0, A);

  if (A > 1.0 + tb) {
    if (auto r = try_slice(cone, make_slice(u.col(0), u.col(1), "axis", "pi >= 2, A > 1: axis slice"), o))
      return *r;
    return failed("axis slice with A > 1 did not verify");
  }
  if (A * B < 1.0 - tb) {
    if (auto r = try_slice(cone,
                           make_slice(u.col(0), u.col(1), "axis", "pi >= 2, A, B <= 1, AB < 1: axis slice"),
                           o))
      return *r;
    return failed("axis slice with AB < 1 did not verify");
  }

  // A = B = 1: shear a third coordinate into the axis plane
  const double zero = o.tol.zero_eigenvalue * std::max(1.0, s.norm());
  std::vector<Eigen::Index> ks;
  for (Eigen::Index k = 2; k < n; ++k)
    if (f.eps[k] != 0) ks.push_back(k);
  for (Eigen::Index k = 2; k < n; ++k)
    if (f.eps[k] == 0) ks.push_back(k);

  for (Eigen::Index k : ks) {
    const C a = 2.0 * s(1, k);
    const C c = 2.0 * s(0, k);
    const C b = s(k, k);
    bool shear_z2 = true;
    std::string what;
    if (std::abs(a) > zero) {
      what = "pi >= 2, A = B = 1, a != 0: shear slice z_k = alpha z2";
    } else if (std::abs(c) > zero) {
      shear_z2 = false;
      what = "pi >= 2, A = B = 1, c != 0: shear slice z_k = alpha z1";
    } else if (std::abs(b) > zero || f.eps[k] != 0) {
      what = "pi >= 2, A = B = 1, a = c = 0: shear slice z_k = alpha z2, complex alpha";
    } else {
      continue;
    }
    for (const C alpha : alternating_grid(20)) {
      const Slice sl = shear_z2 ? make_slice(u.col(0), u.col(1) + alpha * u.col(k), "shear-z2", what, alpha)
                                : make_slice(u.col(0) + alpha * u.col(k), u.col(1), "shear-z1", what, alpha);
      Cone r = Cone::zero(2);
      try {
        r = restrict(work, sl);
      } catch (const Error&) {
        continue;
      }
      Eigen::SelfAdjointEigenSolver<M2> hs(r.hermitian(), Eigen::EigenvaluesOnly);
      const double hmin = hs.eigenvalues()(0), hmax = hs.eigenvalues()(1);
      if (!(hmin > o.tol.slice_margin * hmax)) continue;
      // |det S| in the frame where H = I
      const double d = std::abs(r.harmonic().determinant()) / (hmin * hmax);
      if (std::abs(d - 1.0) < o.tol.slice_margin) continue;
      if (auto res = try_slice(cone, sl, o)) return *res;
    }
  }
  return failed("no shear slice separated the Takagi values from 1");
}

// ---------------------------------------------------------------------------
// Hermitian signature (1,1)

// The slice for R = w1 w3 with S = [[A, B], [B, C]]; e1, e2, v3 are
// the images of the coordinate vectors.
Outcome slice_r_z1z3(const Cone& cone, const M2& s, const VX& e1, const VX& e2, const VX& v3,
                     double zero, const std::string& label, const SliceOptions& o) {
  const C A = s(0, 0), B = s(0, 1), Cc = s(1, 1);
  if (std::abs(Cc) <= zero)
    return two_sided(label + ", C = 0: {w1 = 0} lies in M");
  const double r = std::sqrt(std::norm(Cc) + 2.0);
  struct Candidate {
    C alpha, beta;
    std::string tag;
  };
  std::vector<Candidate> cands{
      {-(A + std::conj(Cc)) / 2.0, -B + I * r, label + ", Re C != 0: det S* = 2"},
      {-(A + Cc) / 2.0, -B + r, label + ", Re C = 0: det S* = -2"}};
  if (std::abs(Cc.real()) <= std::sqrt(o.tol.det_p) * std::abs(Cc)) std::swap(cands[0], cands[1]);
  for (const auto& cd : cands) {
    const Slice sl = make_slice(e1 + cd.alpha * v3, e2 + cd.beta * v3, "custom", cd.tag, cd.alpha);
    try {
      if (!check_cor2(restrict(cone, sl).harmonic())) continue;
    } catch (const Error&) {
      continue;
    }
    if (auto res = try_slice(cone, sl, o)) return *res;
  }
  return failed(label + ": constructed slice did not verify");
}

// R = w2 w3: the SL(2,R) element [[0, 1], [-1, 0]] with w3 -> -w3 turns it into w1 w3.
Outcome slice_r_z2z3(const Cone& cone, const M2& s, const VX& e1, const VX& e2, const VX& v3,
                     double zero, const std::string& label, const SliceOptions& o) {
  M2 g;
  g << 0.0, 1.0, -1.0, 0.0;
  const M2 sn = g.transpose() * s * g;
  if (std::abs(sn(1, 1)) <= zero) return two_sided(label + ", A = 0: {w2 = 0} lies in M");
  return slice_r_z1z3(cone, sn, VX(-e2), e1, VX(-v3), zero, label, o);
}

Outcome slice_oneone(const Cone& cone, const Cone& work, const HermitianFrame& f,
                     const SliceOptions& o) {
  const Eigen::Index n = work.dim();
  const Eigen::Index m = n - 2;
  const MX& u = f.u;
  const MX s = u.transpose() * work.harmonic() * u;
  const double scale = s.norm() + 1.0;
  const MX q = s.bottomRightCorner(m, m);

  if (q.norm() > 1e-10 * scale) {
    // diag(1,-1) frame: slice z2 = 0 after z3 -> z3 + c1 z1 with q(v') = 1
    const auto tq = takagi_positive(q, 0.0);
    if (tq.empty()) return failed("q != 0 but no Takagi vector");
    const VX vp = tq.front().u / std::sqrt(tq.front().sigma);
    const VX v = u.rightCols(m) * vp;
    const C c1 = (s.block(0, 2, 1, m) * vp)(0);
    const Slice sl = make_slice(u.col(0) - c1 * v, v, "line",
                                "(1,1), q != 0: line slice z2 = 0 with z3 shifted by c1 z1", C(0.0));
    if (auto r = try_slice(cone, sl, o)) return *r;
    return failed("(1,1), q != 0: line slice did not verify");
  }

  const LinearTermsReduction red = reduce_linear_terms(work, o.tol);
  const MX& t = red.change;
  const M2 s2 = red.reduced.harmonic().topLeftCorner(2, 2);
  const double zero = o.tol.zero_eigenvalue * std::max(1.0, red.reduced.norm());
  const VX e1 = t.col(0), e2 = t.col(1);
  switch (red.tag) {
    case LinearTermsCase::Zero: {
      const Slice sl = make_slice(e1, e2, "axis", "(1,1), q = 0, R = 0: axis slice");
      if (auto r = try_slice(cone, sl, o)) return *r;
      try {
        const Cone r = restrict(cone, sl);
        const Verdict v = decide2(classify2(r, o.tol), o.tol);
        if (v.outcome == Verdict::Outcome::TwoSided)
          return two_sided("(1,1), q = 0, R = 0: M = M' x C^{n-2} with M' two-sided (" + v.rule + ")");
      } catch (const Error&) {
      }
      return failed("(1,1), q = 0, R = 0: axis slice is not one-sided");
    }
    case LinearTermsCase::Z1Z3:
      return slice_r_z1z3(cone, s2, e1, e2, t.col(2), zero, "(1,1), q = 0, R = w1 w3", o);
    case LinearTermsCase::Z2Z3:
      return slice_r_z2z3(cone, s2, e1, e2, t.col(2), zero, "(1,1), q = 0, R = w2 w3", o);
    case LinearTermsCase::Dependent: {
      const C c = red.c;
      if (std::abs(c.imag()) <= o.tol.zero_eigenvalue * std::abs(c)) {
        // (w1, w2) -> (c w1 + w2, w2 / c) reduces to R = w1 w3
        const double cr = c.real();
        M2 winv;
        winv << 1.0 / cr, -1.0, 0.0, cr;
        const M2 sn = winv.transpose() * s2 * winv;
        return slice_r_z1z3(cone, sn, VX(e1 / cr), VX(-e1 + cr * e2), t.col(2), zero,
                            "(1,1), q = 0, R = c w1 w3 + w2 w3, c real", o);
      }
      const std::string label = "(1,1), q = 0, R = c w1 w3 + w2 w3, c complex: shear slice w3 = alpha w2";
      for (const C alpha : growing_grid()) {
        const Slice sl = make_slice(e1, e2 + alpha * t.col(2), "shear-z2", label, alpha);
        try {
          const Cone r = restrict(cone, sl);
          const M2 rs = r.harmonic();
          if (!check_cor2(rs)) continue;
          // keep a margin away from the one-sided boundary
          const C d = rs.determinant();
          const M2 st = std::polar(1.0, -std::arg(d) / 2.0) * rs;
          if (std::abs(d) < 0.25 + o.tol.slice_margin) continue;
          if (st.real().determinant() > -o.tol.slice_margin) continue;
        } catch (const Error&) {
          continue;
        }
        if (auto res = try_slice(cone, sl, o)) return *res;
      }
      return failed(label + ": no grid point satisfied the determinant conditions");
    }
    case LinearTermsCase::Independent: {
      const VX v3 = t.col(2), v4 = t.col(3);
      if (std::abs(s2(1, 1)) > zero)
        return slice_r_z1z3(cone, s2, e1, e2, v3, zero, "(1,1), q = 0, R = w1 w3 + w2 w4, C != 0, w4 = 0", o);
      if (std::abs(s2(0, 0)) > zero)
        return slice_r_z2z3(cone, s2, e1, e2, v4, zero, "(1,1), q = 0, R = w1 w3 + w2 w4, A != 0, w3 = 0", o);
      const C beta = -s2(0, 1) / 2.0 + I;
      const Slice sl = make_slice(e1 + 0.5 * v3 + beta * v4, e2 + beta * v3 - 0.5 * v4, "custom",
                                  "(1,1), q = 0, R = w1 w3 + w2 w4, A = C = 0: explicit slice, det S* = 3");
      if (auto r = try_slice(cone, sl, o)) return *r;
      return failed("(1,1), R = w1 w3 + w2 w4, A = C = 0: explicit slice did not verify");
    }
  }
  return failed("unreachable");
}

// ---------------------------------------------------------------------------
// Hermitian signature (1,0): rho = Re(A z1^2 + z1 l(z') + q(z')) + |z1|^2

Outcome slice_one_zero(const Cone& cone, const Cone& work, const HermitianFrame& f,
                       const SliceOptions& o) {
  const Eigen::Index n = work.dim();
  const Eigen::Index m = n - 1;
  const MX& u = f.u;
  const MX s = u.transpose() * work.harmonic() * u;
  const double zero = o.tol.zero_eigenvalue * std::max(1.0, s.norm());
  const VX l = 2.0 * s.block(0, 1, 1, m).transpose();
  const MX q = s.bottomRightCorner(m, m);
  if (q.norm() <= zero) return two_sided("(1,0), q = 0: {z1 = 0} lies in M");

  auto top = [](const MX& mat) -> std::optional<VX> {
    const auto tv = takagi_positive(mat, 0.0);
    if (tv.empty()) return std::nullopt;
    return tv.front().u;
  };

  VX vp;
  std::string what;
  if (l.norm() <= zero) {
    vp = *top(q);
    what = "(1,0), l = 0: slice along a direction with q != 0";
  } else {
    const VX vl = l.conjugate() / l.squaredNorm();
    const C qvl = (vl.transpose() * q * vl).value();
    if (std::abs(qvl) > zero * vl.squaredNorm()) {
      vp = vl;
      what = "(1,0), q(v_l) != 0: slice along the direction of l";
    } else {
      const MX k = null_space(l.transpose(), 1);
      const MX qk = k.transpose() * q * k;
      if (qk.norm() > zero) {
        vp = k * *top(qk);
        what = "(1,0), q(v_l) = 0: slice along a direction in ker l with q != 0";
      } else {
        vp = *top(q);
        what = "(1,0), q(v_l) = 0, q = 0 on ker l: slice along a mixed direction";
      }
    }
  }
  const Slice sl = make_slice(u.col(0), u.rightCols(m) * vp, "axis", what);
  if (auto r = try_slice(cone, sl, o)) return *r;
  return failed(what + ": slice did not verify");
}

// Pointwise check of rho(T w) = form(w) on random w.
template <typename Form>
bool verify_pointwise(const Cone& cone, const MX& t, Form form, std::uint64_t seed) {
  Rng rng(seed);
  const double bound = 1e-10 * std::max(1.0, cone.norm() * t.squaredNorm());
  for (int i = 0; i < 64; ++i) {
    const VX w = rng.complex_normal_vector(cone.dim());
    const double lhs = evaluate(cone, (t * w).eval());
    if (!(std::abs(lhs - form(w)) <= bound * w.squaredNorm())) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

Cone restrict(const Cone& cone, const Slice& slice) {
  const MX& b = slice.basis;
  if (b.rows() != cone.dim() || b.cols() != 2)
    throw Error(ErrorCode::DimensionMismatch, "slice basis must be n x 2");
  const double n0 = b.col(0).squaredNorm(), n1 = b.col(1).squaredNorm();
  const MX gram = b.adjoint() * b;
  if (!(n0 > 0.0 && n1 > 0.0) || !(std::abs(gram.determinant()) >= 1e-10 * n0 * n1))
    throw Error(ErrorCode::DegenerateBasis, "slice basis is degenerate");
  return Cone::symmetrized(b.transpose() * cone.harmonic() * b, b.adjoint() * cone.hermitian() * b);
}

Verdict slice_verdict(const Cone& restricted, const Classification& c, const Tolerances& tol) {
  Verdict v = decide2(c, tol);
  if (v.outcome != Verdict::Outcome::Degenerate) return v;
  const double scale = restricted.norm();
  if (scale == 0.0) return v;
  const HermitianSignature sig = hermitian_signature(restricted, tol.zero_eigenvalue * scale);
  if (sig.pi != 2 && sig.nu != 2) return v;
  const int sign = sig.pi == 2 ? 1 : -1;
  const Cone rc = sign > 0 ? restricted : -restricted;
  const HermitianNormalization hn = normalize_hermitian(rc, tol);
  const auto tk = takagi2<double>(hn.cone.harmonic());
  DiscFamily fam;
  fam.kind = DiscFamily::Kind::LevelSet;
  fam.C = M2::Zero();
  if (tk.d1 > tol.zero_matrix * scale) {
    fam.C(0, 0) = tk.d1;
    fam.C(1, 1) = tk.d2;
  } else {
    fam.C(0, 0) = 1.0;
  }
  fam.side = 1;
  v.normal_side = 1;
  v.normal_discs = fam;
  fam.frame = hn.T0 * tk.u;
  fam.side = sign;
  v.outcome = Verdict::Outcome::OneSided;
  v.side = sign;
  v.discs = fam;
  v.rule = "definite hermitian part: discs A w1^2 + B w2^2 = eps with H = I";
  v.degeneracy.reset();
  return v;
}

bool check_cor2(const Eigen::Matrix2cd& s) {
  const C d = s.determinant();
  if (!(std::abs(d) > 0.0)) return false;
  const M2 st = std::polar(1.0, -std::arg(d) / 2.0) * s;
  const C dt = st.determinant();
  const Eigen::Matrix2d p = st.real();
  return dt.real() >= 0.25 - 1e-9 && std::abs(dt.imag()) <= 1e-9 * std::max(1.0, std::abs(dt)) &&
         p.determinant() < -1e-12;
}

const char* to_string(LinearTermsCase c) {
  switch (c) {
    case LinearTermsCase::Zero: return "R = 0";
    case LinearTermsCase::Z1Z3: return "R = z1 z3";
    case LinearTermsCase::Z2Z3: return "R = z2 z3";
    case LinearTermsCase::Dependent: return "R = c z1 z3 + z2 z3";
    case LinearTermsCase::Independent: return "R = z1 z3 + z2 z4";
  }
  return "?";
}

LinearTermsReduction reduce_linear_terms(const Cone& cone, const Tolerances& tol) {
  const Eigen::Index n = cone.dim();
  if (n < 3) throw Error(ErrorCode::DimensionMismatch, "linear terms need n >= 3");
  const double scale = cone.norm();
  const HermitianFrame f = hermitian_frame(cone.hermitian(), tol.zero_eigenvalue * scale);
  if (f.pi != 1 || f.nu != 1)
    throw Error(ErrorCode::DimensionMismatch, "linear terms need hermitian signature (1,1)");
  const Eigen::Index m = n - 2;
  MX ue = f.u;
  ue.leftCols(2) = (f.u.leftCols(2) * diag_to_oneone()).eval();
  const MX s = ue.transpose() * cone.harmonic() * ue;
  const double local = s.norm() + 0.5;
  if (s.bottomRightCorner(m, m).norm() > 1e-10 * local)
    throw Error(ErrorCode::QNotZero, "quadratic part in the kernel of H is not zero");

  const VX l1 = s.block(0, 2, 1, m).transpose();
  const VX l2 = s.block(1, 2, 1, m).transpose();
  const double zero = tol.zero_eigenvalue * local;

  LinearTermsReduction out;
  MX g = MX::Identity(m, m);
  auto dual_with_kernel = [&](const VX& l) {
    MX gm(m, m);
    gm.col(0) = l.conjugate() / l.squaredNorm();
    if (m > 1) gm.rightCols(m - 1) = null_space(l.transpose(), 1);
    return gm;
  };
  if (l1.norm() <= zero && l2.norm() <= zero) {
    out.tag = LinearTermsCase::Zero;
  } else if (l2.norm() <= zero) {
    out.tag = LinearTermsCase::Z1Z3;
    g = dual_with_kernel(l1);
  } else if (l1.norm() <= zero) {
    out.tag = LinearTermsCase::Z2Z3;
    g = dual_with_kernel(l2);
  } else {
    MX rows(2, m);
    rows.row(0) = l1.transpose();
    rows.row(1) = l2.transpose();
    if (m < 2 || numerical_rank(rows, zero) < 2) {
      out.tag = LinearTermsCase::Dependent;
      out.c = l2.dot(l1) / l2.squaredNorm();
      g = dual_with_kernel(l2);
    } else {
      out.tag = LinearTermsCase::Independent;
      g.leftCols(2) = rows.adjoint() * (rows * rows.adjoint()).inverse();
      if (m > 2) g.rightCols(m - 2) = null_space(rows, 2);
    }
  }
  MX block = MX::Identity(n, n);
  block.bottomRightCorner(m, m) = g;
  out.change = ue * block;
  out.reduced = apply_change(cone, out.change, 1.0, +1);
  return out;
}

std::variant<SliceResult, NoSliceFound> find_good_slice(const Cone& cone, const SliceOptions& o) {
  const Eigen::Index n = cone.dim();
  if (n < 3) throw Error(ErrorCode::DimensionMismatch, "slices are for n >= 3");
  const double scale = cone.norm();
  if (scale == 0.0) return failed("rho is identically zero");

  HermitianFrame f = hermitian_frame(cone.hermitian(), o.tol.zero_eigenvalue * scale);
  Cone work = cone;
  if (f.pi < f.nu) {
    work = -cone;
    f = hermitian_frame(work.hermitian(), o.tol.zero_eigenvalue * scale);
  }

  Outcome structured = failed("");
  if (f.pi >= 2) {
    structured = slice_pi2(cone, work, f, o);
  } else if (f.pi == 1 && f.nu == 1) {
    structured = slice_oneone(cone, work, f, o);
  } else if (f.pi == 1) {
    structured = slice_one_zero(cone, work, f, o);
  } else {
    structured = two_sided("hermitian part vanishes: M is not minimal");
  }
  if (std::holds_alternative<SliceResult>(structured)) return structured;
  NoSliceFound nf = std::get<NoSliceFound>(structured);
  if (nf.two_sided) return nf;

  // random unitary-invariant 2-planes
  Rng rng(o.seed);
  for (int i = 0; i < o.budget; ++i) {
    const MX g = rng.complex_normal_matrix(n, 2);
    Eigen::HouseholderQR<MX> qr(g);
    const MX basis = qr.householderQ() * MX::Identity(n, 2);
    ++nf.random_tried;
    if (auto r = try_slice(cone, make_slice(basis.col(0), basis.col(1), "random", "random 2-plane"), o))
      return *r;
  }
  if (nf.reason.empty()) nf.reason = "no slice found";
  nf.reason += "; no random 2-plane was one-sided";
  return nf;
}

const char* two_sided_form_name(const TwoSidedForm& f) {
  switch (f.index()) {
    case 0: return "product";
    case 1: return "sum_of_squares";
    case 2: return "linear_times_antilinear";
    default: return "unknown";
  }
}

TwoSidedForm classify_two_sided_nd(const Cone& cone, const Tolerances& tol) {
  const Eigen::Index n = cone.dim();
  const double scale = cone.norm();
  if (scale == 0.0) return UnknownTwoSided{"rho is identically zero"};
  const MX& s = cone.harmonic();
  const MX& h = cone.hermitian();

  // common kernel of S and H
  MX stacked(2 * n, n);
  stacked << s, h;
  Eigen::JacobiSVD<MX> svd(stacked, Eigen::ComputeFullV);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol.product_kernel * scale) ++rank;
  if (rank < 2) return UnknownTwoSided{"rho depends on fewer than two complex directions"};
  if (rank == 2) {
    const MX t = svd.matrixV();
    Slice sl;
    sl.basis = t.leftCols(2);
    const Cone inner = restrict(cone, sl);
    auto form = [&](const VX& w) { return evaluate(inner, w.head(2).eval()); };
    if (!verify_pointwise(cone, t, form, 11))
      return UnknownTwoSided{"product decomposition failed the pointwise check"};
    return ProductForm{classify2(inner, tol), t};
  }

  if (spectral_norm(h) <= tol.zero_eigenvalue * scale) {
    const auto tv = takagi_positive(s, tol.zero_eigenvalue * scale);
    const int k = static_cast<int>(tv.size());
    if (k > 2) {
      MX t(n, n);
      for (int j = 0; j < k; ++j) t.col(j) = tv[j].u / std::sqrt(tv[j].sigma);
      if (k < n) {
        Eigen::JacobiSVD<MX> ss(s, Eigen::ComputeFullV);
        t.rightCols(n - k) = ss.matrixV().rightCols(n - k);
      }
      auto form = [k](const VX& w) { return w.head(k).array().square().sum().real(); };
      if (verify_pointwise(cone, t, form, 12)) return SumOfSquares{k, t};
      return UnknownTwoSided{"sum of squares failed the pointwise check"};
    }
  }

  // Re(alpha (lambda + conj(mu))): S = (l a^T + a l^T)/2, H = (conj(m) a^T + conj(a) m^T)/2
  if (n >= 3 && numerical_rank(s, tol.zero_eigenvalue * scale) == 2 &&
      numerical_rank(h, tol.zero_eigenvalue * scale) == 2) {
    Eigen::JacobiSVD<MX> ss(s, Eigen::ComputeThinU);
    Eigen::SelfAdjointEigenSolver<MX> hs(h);
    const MX rs = ss.matrixU().leftCols(2);
    MX rh(n, 2);
    rh.col(0) = hs.eigenvectors().col(0).conjugate();
    rh.col(1) = hs.eigenvectors().col(n - 1).conjugate();
    MX both(n, 4);
    both << rs, -rh;
    if (numerical_rank(both, 1e-8) == 3) {
      const VX x = null_space(both, 3).col(0);
      const VX a = (rs * x.head(2)).normalized();

      MX ls(n * n, n);
      VX rhs_s(n * n);
      ls.setZero();
      Eigen::MatrixXd lm = Eigen::MatrixXd::Zero(2 * n * n, 2 * n);
      Eigen::VectorXd rhs_h(2 * n * n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const Eigen::Index r = i * n + j;
          ls(r, i) += 0.5 * a(j);
          ls(r, j) += 0.5 * a(i);
          rhs_s(r) = s(i, j);
          // conj(m_i) a_j / 2 + conj(a_i) m_j / 2 split into real and imaginary rows
          const C ci = 0.5 * a(j), cj = 0.5 * std::conj(a(i));
          lm(2 * r, i) += ci.real();
          lm(2 * r, n + i) += ci.imag();
          lm(2 * r + 1, i) += ci.imag();
          lm(2 * r + 1, n + i) += -ci.real();
          lm(2 * r, j) += cj.real();
          lm(2 * r, n + j) += -cj.imag();
          lm(2 * r + 1, j) += cj.imag();
          lm(2 * r + 1, n + j) += cj.real();
          rhs_h(2 * r) = h(i, j).real();
          rhs_h(2 * r + 1) = h(i, j).imag();
        }
      const VX l = ls.completeOrthogonalDecomposition().solve(rhs_s);
      const Eigen::VectorXd mri = lm.completeOrthogonalDecomposition().solve(rhs_h);
      const VX mvec = mri.head(n).cast<C>() + I * mri.tail(n).cast<C>();
      const MX sfit = 0.5 * (l * a.transpose() + a * l.transpose());
      const MX hfit = 0.5 * (mvec.conjugate() * a.transpose() + a.conjugate() * mvec.transpose());
      MX alm(n, 3);
      alm << a, l, mvec;
      Eigen::JacobiSVD<MX> as(alm);
      const bool independent =
          as.singularValues()(2) > 1e-8 * as.singularValues()(0);
      if (independent && (s - sfit).norm() + (h - hfit).norm() <= 1e-10 * scale * n) {
        MX rows(n, n);
        rows.row(0) = a.transpose();
        rows.row(1) = l.transpose();
        rows.row(2) = mvec.transpose();
        if (n > 3) rows.bottomRows(n - 3) = null_space(alm.transpose(), 3).adjoint();
        const MX t = rows.inverse();
        auto form = [](const VX& w) { return (w(0) * w(1) + w(0) * std::conj(w(2))).real(); };
        if (verify_pointwise(cone, t, form, 13)) return LinearTimesAntiLinear{t};
      }
    }
  }
  return UnknownTwoSided{"not a product, a sum of squares or Re(z1 z2 + z1 conj(z3))"};
}

}  // namespace qcone
