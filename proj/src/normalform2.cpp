#include "qcone/normalform2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace qcone {

namespace {

using C = std::complex<double>;
using M2 = Eigen::Matrix2cd;
using R2 = Eigen::Matrix2d;
using Step = std::variant<NormalFormType, DegeneracyReport>;

constexpr C I(0.0, 1.0);

double norm2(const M2& m) { return spectral_norm(m); }

M2 diag2(C a, C b) {
  M2 m;
  m << a, 0.0, 0.0, b;
  return m;
}

M2 scalar2(C a) { return diag2(a, a); }

M2 as_complex(const R2& r) { return r.cast<C>(); }

// From the Im(z1 z2bar) frame to the diag(1,-1) frame: Im(z1 z2bar) = |w1|^2 - |w2|^2
// for z = oneone_to_diag() w.
M2 oneone_to_diag() {
  M2 t;
  t << 1.0, 1.0, -I, I;
  return t;
}

M2 diag_to_oneone() {
  M2 t;
  t << 0.5, 0.5 * I, 0.5, -0.5 * I;
  return t;
}

// Running reduction: rho_current(w) = sign * lambda * rho_input(T w).
struct Frame {
  M2 s;
  M2 h;
  M2 t = M2::Identity();
  double lambda = 1.0;
  int sign = 1;

  void change(const M2& step) {
    s = (step.transpose() * s * step).eval();
    s = ((s + s.transpose()) / 2.0).eval();
    h = (step.adjoint() * h * step).eval();
    t = (t * step).eval();
  }
  void rotate(double theta) { change(scalar2(std::polar(1.0, theta))); }
  void scale(double f) {
    s *= f;
    h *= f;
    lambda *= f;
  }
  void flip() {
    s = -s;
    h = -h;
    sign = -sign;
  }
};

// Hermitian part is diag(1,-1); makes the diagonal of S nonnegative and sorted.
NormalFormType finish_diag(Frame& f) {
  if (std::abs(f.s(0, 0)) < std::abs(f.s(1, 1))) {
    M2 swap;
    swap << 0.0, 1.0, 1.0, 0.0;
    f.change(swap);
    f.flip();
  }
  const C c1 = f.s(0, 0);
  const C c2 = f.s(1, 1);
  const double p1 = std::abs(c1) > 0.0 ? -std::arg(c1) / 2.0 : 0.0;
  const double p2 = std::abs(c2) > 0.0 ? -std::arg(c2) / 2.0 : 0.0;
  f.change(diag2(std::polar(1.0, p1), std::polar(1.0, p2)));
  f.h = diag2(1.0, -1.0);
  return NormalFormType::m11_1(std::abs(c1), std::abs(c2));
}

NormalFormType finish_oneone(Frame& f) {
  f.change(oneone_to_diag());
  return finish_diag(f);
}

// det S > 0 and det P > 0: M11_2.
NormalFormType case_positive_p(Frame& f) {
  const auto red = sl2_reduce_sym<double>(f.s.real(), 0.0);
  f.change(as_complex(red.g));
  Eigen::SelfAdjointEigenSolver<R2> es(R2(f.s.imag()));
  R2 rot = es.eigenvectors();
  if (rot.determinant() < 0.0) rot.col(1) = -rot.col(1);
  f.change(as_complex(rot));
  if (f.s(0, 0).real() < 0.0) f.change(scalar2(I));
  C a = (f.s(0, 0) + std::conj(f.s(1, 1))) / 2.0;
  if (a.imag() < 0.0) {
    M2 g;
    g << 0.0, 1.0, -1.0, 0.0;
    f.change(g);
    a = std::conj(a);
  }
  return NormalFormType::m11_2(a);
}

// det P < 0 in the Im(z1 z2bar) frame with det S >= 0 real: M11_1.
NormalFormType case_negative_p(Frame& f) {
  const auto red = sl2_reduce_sym<double>(f.s.real(), 0.0);
  f.change(as_complex(red.g));
  const auto zero = so11_zero_diag<double>(f.s.imag());
  f.change(as_complex(zero.k.matrix));
  return finish_oneone(f);
}

Step reduce_oneone(Frame& f, const Tolerances& tol,
                             std::optional<LemmaCInvariants<double>>& invariants) {
  const double ns = norm2(f.s);
  if (ns <= tol.zero_matrix) return finish_oneone(f);

  const C d = f.s.determinant();
  if (std::abs(d) > tol.det_s * ns * ns) {
    f.rotate(-std::arg(d) / 4.0);
    invariants = lemma_c_invariants<double>(f.s);
    const double det_p = R2(f.s.real()).determinant();
    if (det_p > tol.det_p * ns * ns) return case_positive_p(f);
    if (det_p < -tol.det_p * ns * ns) return case_negative_p(f);
    // det P = 0, det Q = -det S < 0
    const auto red = sl2_reduce_sym<double>(f.s.imag(), 0.0);
    f.change(as_complex(red.g));
    const double np = R2(f.s.real()).norm();
    if (np <= std::sqrt(tol.det_p) * norm2(f.s)) return finish_oneone(f);
    std::ostringstream os;
    os << "det Re S = 0 with Re S of norm " << np
       << " in the Im(z1 z2bar) frame: Re S has rank one along an isotropic direction of Im S;"
          " no table row is linearly equivalent";
    return DegeneracyReport{DegeneracyReason::OutsideTable, os.str()};
  }

  // det S = 0, S = d1 v v^T
  const auto tk = takagi2<double>(f.s);
  const Eigen::Vector2cd v = tk.u.col(0).conjugate();
  const double omega = std::imag(std::conj(v(0)) * v(1));
  if (omega * omega > tol.det_p) return case_negative_p(f);

  const int k = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
  f.rotate(-std::arg(v(k)));
  const auto red = sl2_reduce_sym<double>(f.s.real(), 1e-6);
  f.change(as_complex(red.g));
  if (red.sign < 0) f.change(scalar2(I));
  return NormalFormType::m11_3();
}

Step reduce_one_zero(Frame& f, const Tolerances& tol) {
  const C a = f.s(0, 0), b = f.s(0, 1), c = f.s(1, 1);
  const double ns = std::max(norm2(f.s), 1.0);
  if (std::abs(c) > tol.zero_eigenvalue * ns) {
    M2 t;
    t << 1.0, 0.0, -b / c, 1.0;
    f.change(t);
    const C a1 = f.s(0, 0);
    const double p1 = std::abs(a1) > 0.0 ? -std::arg(a1) / 2.0 : 0.0;
    f.change(diag2(std::polar(1.0, p1), std::polar(1.0 / std::sqrt(std::abs(c)), -std::arg(c) / 2.0)));
    f.h = diag2(1.0, 0.0);
    return NormalFormType::m10_1(std::abs(a1));
  }
  if (std::abs(b) > tol.zero_eigenvalue * ns) {
    M2 t;
    t << 1.0, 0.0, -a / (2.0 * b), 1.0 / (2.0 * b);
    f.change(t);
    f.h = diag2(1.0, 0.0);
    return NormalFormType::m10_2();
  }
  if (std::abs(a) <= 1.0 + tol.table_boundary)
    return DegeneracyReport{DegeneracyReason::DimensionDeficient,
                            "rho depends on z1 only and |A| <= 1"};
  return DegeneracyReport{DegeneracyReason::Reducible,
                          "rho depends on z1 only and |A| > 1: union of two hyperplanes"};
}

Step reduce_zero_zero(Frame& f, const Tolerances& tol) {
  const auto tk = takagi2<double>(f.s);
  if (tk.d2 <= tol.zero_eigenvalue * tk.d1)
    return DegeneracyReport{DegeneracyReason::Reducible,
                            "no hermitian part and rank S = 1: union of two hyperplanes"};
  f.change(tk.u * diag2(1.0, std::sqrt(tk.d1 / tk.d2)));
  f.scale(1.0 / tk.d1);
  f.h.setZero();
  return NormalFormType::m00_1();
}

// Classification of sign * cone, whose hermitian signature has pi >= nu.
Classification reduce(const Cone& cone, int sign, const Tolerances& tol) {
  const Cone signed_cone = sign > 0 ? cone : -cone;
  const HermitianNormalization hn = normalize_hermitian(signed_cone, tol);
  Frame f;
  f.s = hn.cone.harmonic();
  f.h = hn.cone.hermitian();
  f.t = hn.T0;

  const double scale = norm2(cone.harmonic()) + norm2(cone.hermitian());
  const HermitianSignature sig = hermitian_signature(signed_cone, tol.zero_eigenvalue * scale);

  std::optional<LemmaCInvariants<double>> invariants;
  Step step;
  if (sig.pi == 2) {
    const auto tk = takagi2<double>(f.s);
    f.change(tk.u);
    f.h = M2::Identity();
    if (tk.d1 <= 1.0 + tol.table_boundary)
      step = DegeneracyReport{DegeneracyReason::DimensionDeficient,
                              "hermitian part definite and A <= 1: M is not a hypersurface"};
    else
      step = NormalFormType::m20(tk.d1, tk.d2);
  } else if (sig.pi == 1 && sig.nu == 1) {
    step = reduce_oneone(f, tol, invariants);
  } else if (sig.pi == 1) {
    step = reduce_one_zero(f, tol);
  } else {
    step = reduce_zero_zero(f, tol);
  }
  if (const auto* report = std::get_if<DegeneracyReport>(&step)) return *report;

  NormalFormResult r;
  r.ntype = std::get<NormalFormType>(step);
  r.T = f.t;
  r.lambda = f.lambda;
  r.sign = sign * f.sign;
  r.invariants = invariants;
  const Cone target = normal_form_cone(r.ntype);
  const Cone reached = apply_change<double>(cone, r.T, r.lambda, r.sign);
  r.residual = norm2(reached.harmonic() - target.harmonic()) +
               norm2(reached.hermitian() - target.hermitian());
  const double tn = norm2(r.T);
  r.residual_bound = 1e-8 * r.lambda * scale * tn * tn;
  r.margin = boundary_margin(r.ntype);
  r.low_confidence = !(r.residual <= r.residual_bound) || r.margin < 1e-6;
  return r;
}

bool close(double x, double y, double rel) {
  return std::abs(x - y) <= rel * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

const char* to_string(NormalFormTag tag) {
  switch (tag) {
    case NormalFormTag::M20: return "M20";
    case NormalFormTag::M11_1: return "M11_1";
    case NormalFormTag::M11_2: return "M11_2";
    case NormalFormTag::M11_3: return "M11_3";
    case NormalFormTag::M10_1: return "M10_1";
    case NormalFormTag::M10_2: return "M10_2";
    case NormalFormTag::M00_1: return "M00_1";
  }
  return "?";
}

std::optional<NormalFormTag> parse_tag(std::string_view name) {
  for (NormalFormTag t : {NormalFormTag::M20, NormalFormTag::M11_1, NormalFormTag::M11_2,
                          NormalFormTag::M11_3, NormalFormTag::M10_1, NormalFormTag::M10_2,
                          NormalFormTag::M00_1})
    if (name == to_string(t)) return t;
  return std::nullopt;
}

const char* to_string(DegeneracyReason reason) {
  switch (reason) {
    case DegeneracyReason::DimensionDeficient: return "DimensionDeficient";
    case DegeneracyReason::Reducible: return "Reducible";
    case DegeneracyReason::PointCone: return "PointCone";
    case DegeneracyReason::OutsideTable: return "OutsideTable";
  }
  return "?";
}

int parameter_count(NormalFormTag tag) {
  switch (tag) {
    case NormalFormTag::M20:
    case NormalFormTag::M11_1:
    case NormalFormTag::M11_2: return 2;
    case NormalFormTag::M10_1: return 1;
    default: return 0;
  }
}

bool in_table_range(const NormalFormType& t) {
  switch (t.tag) {
    case NormalFormTag::M20: return t.b >= 0.0 && t.b <= t.A() && t.A() > 1.0;
    case NormalFormTag::M11_1: return t.b >= 0.0 && t.b <= t.A();
    case NormalFormTag::M11_2: return t.a.real() > 0.0 && t.a.imag() >= 0.0;
    case NormalFormTag::M10_1: return t.A() >= 0.0;
    default: return true;
  }
}

double boundary_margin(const NormalFormType& t) {
  switch (t.tag) {
    case NormalFormTag::M20: return std::min(t.A() - 1.0, t.A() - t.b);
    case NormalFormTag::M11_1:
      return std::min({t.A() - t.b, std::abs(t.A() - 1.0), std::abs(t.b - 1.0)});
    case NormalFormTag::M11_2: return t.a.real();
    default: return std::numeric_limits<double>::infinity();
  }
}

Cone normal_form_cone(const NormalFormType& t) {
  const M2 he = im_form_matrix<double>();
  switch (t.tag) {
    case NormalFormTag::M20: return Cone(diag2(t.A(), t.b), M2::Identity());
    case NormalFormTag::M11_1: return Cone(diag2(t.A(), t.b), diag2(1.0, -1.0));
    case NormalFormTag::M11_2: return Cone(diag2(t.a, std::conj(t.a)), he);
    case NormalFormTag::M11_3: return Cone(diag2(1.0, 0.0), he);
    case NormalFormTag::M10_1: return Cone(diag2(t.A(), 1.0), diag2(1.0, 0.0));
    case NormalFormTag::M10_2: {
      M2 s;
      s << 0.0, 0.5, 0.5, 0.0;
      return Cone(s, diag2(1.0, 0.0));
    }
    case NormalFormTag::M00_1: return Cone(M2::Identity(), M2::Zero());
  }
  throw Error(ErrorCode::SchemaError, "unknown tag");
}

std::string describe(const NormalFormType& t) {
  std::ostringstream os;
  os.precision(12);
  os << to_string(t.tag);
  switch (t.tag) {
    case NormalFormTag::M20:
    case NormalFormTag::M11_1: os << "(A=" << t.A() << ", B=" << t.b << ")"; break;
    case NormalFormTag::M11_2: os << "(A=" << t.a.real() << "+" << t.a.imag() << "i)"; break;
    case NormalFormTag::M10_1: os << "(A=" << t.A() << ")"; break;
    default: break;
  }
  return os.str();
}

HermitianNormalization normalize_hermitian(const Cone& cone, const Tolerances& tol) {
  if (cone.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "normalize_hermitian needs n = 2");
  const double scale = norm2(cone.harmonic()) + norm2(cone.hermitian());
  const double zero = tol.zero_eigenvalue * scale;
  Eigen::SelfAdjointEigenSolver<M2> es(M2(cone.hermitian()));
  // columns ordered positive (largest first), negative, zero
  std::vector<int> pos, neg, nil;
  for (int i = 0; i < 2; ++i)
    if (es.eigenvalues()(i) > zero) pos.push_back(i);
  // equal eigenvalues keep the solver's order
  std::stable_sort(pos.begin(), pos.end(),
                   [&](int a, int b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });
  for (int i = 0; i < 2; ++i)
    if (es.eigenvalues()(i) < -zero) neg.push_back(i);
  for (int i = 0; i < 2; ++i)
    if (std::abs(es.eigenvalues()(i)) <= zero) nil.push_back(i);
  std::vector<int> order = pos;
  order.insert(order.end(), neg.begin(), neg.end());
  order.insert(order.end(), nil.begin(), nil.end());

  M2 t0;
  Eigen::Vector2cd target;
  for (int c = 0; c < 2; ++c) {
    const double ev = es.eigenvalues()(order[c]);
    const bool is_zero = std::abs(ev) <= zero;
    t0.col(c) = es.eigenvectors().col(order[c]) / (is_zero ? 1.0 : std::sqrt(std::abs(ev)));
    target(c) = is_zero ? 0.0 : (ev > 0.0 ? 1.0 : -1.0);
  }
  M2 h = target.asDiagonal();
  if (pos.size() == 1 && neg.size() == 1) {
    t0 = t0 * diag_to_oneone();
    h = im_form_matrix<double>();
  }
  const M2 s = t0.transpose() * cone.harmonic() * t0;
  return {t0, Cone::symmetrized(s, h)};
}

Classification classify2(const Cone& cone, const Tolerances& tol) {
  if (cone.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "classify2 needs n = 2");
  const double scale = norm2(cone.harmonic()) + norm2(cone.hermitian());
  if (scale == 0.0)
    return DegeneracyReport{DegeneracyReason::DimensionDeficient, "rho is identically zero"};

  const RMatrix<double> rm = real_matrix(cone);
  const RealSignature rs = real_signature(cone, tol.zero_eigenvalue * spectral_norm(rm));
  if (rs.p == 0 || rs.q == 0) {
    if (rs.p + rs.q == 4)
      return DegeneracyReport{DegeneracyReason::PointCone, "rho is definite: M = {0}"};
    return DegeneracyReport{DegeneracyReason::DimensionDeficient,
                            "rho is semidefinite: M is a real subspace"};
  }
  if (rs.p == 1 && rs.q == 1)
    return DegeneracyReport{DegeneracyReason::Reducible,
                            "real signature (1,1): M is a union of two hyperplanes"};

  const HermitianSignature sig = hermitian_signature(cone, tol.zero_eigenvalue * scale);
  if (sig.pi > sig.nu) return reduce(cone, +1, tol);
  if (sig.pi < sig.nu) return reduce(cone, -1, tol);
  Classification first = reduce(cone, +1, tol);
  if (std::holds_alternative<NormalFormResult>(first)) return first;
  Classification second = reduce(cone, -1, tol);
  if (std::holds_alternative<NormalFormResult>(second)) return second;
  return first;
}

bool uniqueness_certificate(const NormalFormResult& r1, const NormalFormResult& r2) {
  if (r1.ntype.tag != r2.ntype.tag) return false;
  const double rel = 1e-6;
  if (!close(r1.ntype.a.real(), r2.ntype.a.real(), rel)) return false;
  if (!close(r1.ntype.a.imag(), r2.ntype.a.imag(), rel)) return false;
  if (!close(r1.ntype.b, r2.ntype.b, rel)) return false;
  if (r1.invariants && r2.invariants) {
    const auto& x = *r1.invariants;
    const auto& y = *r2.invariants;
    if (!close(std::abs(x.det_s), std::abs(y.det_s), 1e-8)) return false;
    if (!close(x.det_p, y.det_p, 1e-8)) return false;
    if (!close(x.det_q, y.det_q, 1e-8)) return false;
  }
  return true;
}

}  // namespace qcone
