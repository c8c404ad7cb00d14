#include "qcone/decider.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qcone/random.hpp"

namespace qcone {

namespace {

using C = std::complex<double>;
using M2 = Eigen::Matrix2cd;
constexpr C I(0.0, 1.0);

M2 diag2(C a, C b) {
  M2 m;
  m << a, 0.0, 0.0, b;
  return m;
}

Hypersurface hyperplane(C a, C b, std::string label) {
  Eigen::VectorXcd l(2);
  l << a, b;
  return {l, std::move(label)};
}

std::string format_coefficient(C c) {
  const double tiny = 1e-12;
  if (std::abs(c.imag()) <= tiny) c.imag(0.0);
  if (std::abs(c.real()) <= tiny) c.real(0.0);
  std::ostringstream os;
  os.precision(6);
  if (c.imag() == 0.0) {
    if (c.real() == 1.0) return "";
    if (c.real() == -1.0) return "-";
    os << c.real() << "*";
  } else if (c.real() == 0.0) {
    os << c.imag() << "i*";
  } else {
    os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)*";
  }
  return os.str();
}

// The label scales the functional so that its largest entry is one.
std::string format_functional(const Eigen::VectorXcd& l) {
  Eigen::Index top = 0;
  l.cwiseAbs().maxCoeff(&top);
  const Eigen::VectorXcd u = l / l(top);
  std::ostringstream os;
  bool first = true;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u(i)) <= 1e-12) continue;
    if (!first) os << " + ";
    os << format_coefficient(u(i)) << "z" << i + 1;
    first = false;
  }
  os << " = 0";
  return os.str();
}

Hypersurface pull_back(const Hypersurface& h, const M2& t) {
  // {l . w = 0} with w = T^{-1} z
  const Eigen::VectorXcd l = (h.functional.transpose() * t.inverse()).transpose();
  return {l, format_functional(l)};
}

SupportWitness pull_back(const SupportWitness& w, const M2& t, int sign) {
  SupportWitness out = w;
  out.aplus = pull_back(sign > 0 ? w.aplus : w.aminus, t);
  out.aminus = pull_back(sign > 0 ? w.aminus : w.aplus, t);
  return out;
}

SupportWitness non_minimal(Hypersurface h) {
  SupportWitness w;
  w.aplus = h;
  w.aminus = std::move(h);
  w.kind = SupportWitness::Kind::NonMinimal;
  return w;
}

/// Orthonormal basis of the kernel of the row vector l (n x (n-1)).
Eigen::MatrixXcd kernel_basis(const Eigen::VectorXcd& l) {
  const Eigen::Index n = l.size();
  Eigen::MatrixXcd row = l.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(row, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(n - 1);
}

std::string vec_str(const Eigen::VectorXcd& z) {
  std::ostringstream os;
  os.precision(10);
  os << "(";
  for (Eigen::Index i = 0; i < z.size(); ++i) os << (i ? ", " : "") << z(i);
  os << ")";
  return os.str();
}

}  // namespace

const char* to_string(Verdict::Outcome outcome) {
  switch (outcome) {
    case Verdict::Outcome::OneSided: return "OneSided";
    case Verdict::Outcome::TwoSided: return "TwoSided";
    case Verdict::Outcome::Degenerate: return "Degenerate";
  }
  return "?";
}

const char* to_string(SupportWitness::Kind kind) {
  return kind == SupportWitness::Kind::NonMinimal ? "NonMinimal" : "TwoSidedProper";
}

const char* to_string(DiscFamily::Kind kind) {
  return kind == DiscFamily::Kind::LevelSet ? "level-set" : "affine-line";
}

Verdict::Outcome table_outcome(const NormalFormType& t, const Tolerances& tol) {
  using O = Verdict::Outcome;
  switch (t.tag) {
    case NormalFormTag::M20:
    case NormalFormTag::M10_1: return O::OneSided;
    case NormalFormTag::M11_1: {
      const double tb = tol.table_boundary * std::max(1.0, t.A());
      if (std::abs(t.A() - t.b) <= tb || t.A() <= 1.0 + tb) return O::TwoSided;
      return O::OneSided;
    }
    default: return O::TwoSided;
  }
}

DiscFamily build_disc_family(const NormalFormType& t, const Tolerances& tol) {
  if (table_outcome(t, tol) != Verdict::Outcome::OneSided)
    throw Error(ErrorCode::NotOneSided, describe(t) + " has two-sided support");
  DiscFamily fam;
  switch (t.tag) {
    case NormalFormTag::M20:
      fam.C = diag2(t.A(), t.b);
      fam.side = 1;
      break;
    case NormalFormTag::M10_1:
      fam.C = diag2(t.A(), 1.0);
      fam.side = 1;
      break;
    case NormalFormTag::M11_1:
      if (t.b < 1.0) {
        // z1 = i eps: rho = Re(B z2^2) + eps^2 (1 - A) - |z2|^2 < 0
        fam.kind = DiscFamily::Kind::AffineLine;
      } else {
        // A z1^2 + B z2^2 = -eps
        fam.C = diag2(-t.A(), -t.b);
      }
      fam.side = -1;
      break;
    default: break;
  }
  return fam;
}

Verdict decide2(const NormalFormResult& r, const Tolerances& tol) {
  Verdict v;
  const NormalFormType& t = r.ntype;
  v.outcome = table_outcome(t, tol);
  if (v.outcome == Verdict::Outcome::OneSided) {
    DiscFamily fam = build_disc_family(t, tol);
    v.normal_side = fam.side;
    v.normal_discs = fam;
    fam.frame = r.T;
    fam.side = fam.side * r.sign;
    v.side = fam.side;
    v.discs = fam;
    switch (t.tag) {
      case NormalFormTag::M20: v.rule = "M20: discs A z1^2 + B z2^2 = eps in {rho > 0}"; break;
      case NormalFormTag::M10_1: v.rule = "M10_1: discs A z1^2 + z2^2 = eps in {rho > 0}"; break;
      default:
        v.rule = t.b < 1.0 ? "M11_1, B < 1 < A: discs z1 = i eps in {rho < 0}"
                           : "M11_1, 1 <= B < A: discs A z1^2 + B z2^2 = -eps in {rho < 0}";
    }
    return v;
  }

  SupportWitness w;
  switch (t.tag) {
    case NormalFormTag::M11_1: {
      const double tb = tol.table_boundary * std::max(1.0, t.A());
      if (std::abs(t.A() - t.b) <= tb) {
        w = non_minimal(hyperplane(-I, 1.0, "z2 = i z1"));
        v.rule = "M11_1, A = B: {z2 = i z1} lies in M";
      } else {
        w.aplus = hyperplane(0.0, 1.0, "z2 = 0");
        w.aminus = hyperplane(1.0, 0.0, "z1 = 0");
        v.rule = "M11_1, B <= A <= 1: rho >= 0 on {z2 = 0}, rho <= 0 on {z1 = 0}";
      }
      break;
    }
    case NormalFormTag::M11_2: {
      // e^{2 i lambda} = -A / conj(A); rho(z1, e^{i lambda} z1) = -|z1|^2 sin(lambda)
      const double l1 = std::numbers::pi / 2.0 + std::arg(t.a);
      const double l2 = l1 + std::numbers::pi;
      const Hypersurface line1 = hyperplane(-std::polar(1.0, l1), 1.0, "z2 = e^{i lambda1} z1");
      const Hypersurface line2 = hyperplane(-std::polar(1.0, l2), 1.0, "z2 = e^{i lambda2} z1");
      const bool first_negative = std::sin(l1) > 0.0;
      w.aplus = first_negative ? line2 : line1;
      w.aminus = first_negative ? line1 : line2;
      w.line_angles = std::make_pair(l1, l2);
      v.rule = "M11_2: lines z2 = e^{i lambda_j} z1 on opposite sides";
      break;
    }
    case NormalFormTag::M11_3:
    case NormalFormTag::M10_2:
      w = non_minimal(hyperplane(1.0, 0.0, "z1 = 0"));
      v.rule = std::string(to_string(t.tag)) + ": {z1 = 0} lies in M";
      break;
    case NormalFormTag::M00_1:
      w = non_minimal(hyperplane(-I, 1.0, "z2 = i z1"));
      v.rule = "M00_1: {z2 = i z1} lies in M";
      break;
    default: break;
  }
  v.normal_witness = w;
  v.witness = pull_back(w, r.T, r.sign);
  return v;
}

Verdict decide2(const Classification& c, const Tolerances& tol) {
  if (const auto* r = std::get_if<NormalFormResult>(&c)) return decide2(*r, tol);
  Verdict v;
  v.outcome = Verdict::Outcome::Degenerate;
  v.degeneracy = std::get<DegeneracyReport>(c);
  v.rule = std::string("degenerate: ") + to_string(v.degeneracy->reason);
  return v;
}

// ---------------------------------------------------------------------------

DiscReport inspect_discs(const Cone& cone, const DiscFamily& fam, const std::vector<double>& eps_grid,
                         int samples, std::uint64_t seed, std::vector<SamplePoint>* dump) {
  if (eps_grid.empty()) throw Error(ErrorCode::InsufficientSamples, "empty eps grid");
  if (cone.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "disc families live in C^2");
  Rng rng(seed);
  DiscReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.touch_residual = std::numeric_limits<double>::infinity();
  rep.origin_value = evaluate(cone, Eigen::Vector2cd::Zero().eval());
  rep.ok = rep.origin_value == 0.0;

  // index solved for, and the free coordinate
  int j = 0;
  if (fam.kind == DiscFamily::Kind::LevelSet &&
      std::abs(fam.C(1, 1)) > std::abs(fam.C(0, 0)))
    j = 1;
  const int k = 1 - j;

  auto record = [&](double eps, const Eigen::Vector2cd& w, bool touch) {
    const Eigen::VectorXcd z = fam.frame * w;
    const double rho = evaluate(cone, z);
    const double m = fam.side * rho;
    if (touch) {
      rep.touch_residual = std::min(rep.touch_residual, m);
      ++rep.touch_points;
    } else {
      rep.min_margin = std::min(rep.min_margin, m);
      ++rep.disc_points;
    }
    if (!(m > 0.0) && rep.ok) {
      rep.ok = false;
      rep.offending_eps = eps;
      rep.offending_point = z;
    }
    if (dump) dump->push_back({eps, z, rho, touch ? "touch" : "disc"});
  };

  auto sample_level = [&](double eps, bool touch) {
    long found = 0;
    const long budget = 50L * samples;
    for (long attempt = 0; attempt < budget && found < samples; ++attempt) {
      Eigen::Vector2cd w;
      if (fam.kind == DiscFamily::Kind::AffineLine) {
        const double rmax = std::sqrt(std::max(fam.radius * fam.radius - eps * eps, 0.0));
        w(0) = I * eps;
        w(1) = rmax * rng.unit_disc();
        if (touch && std::abs(w(1)) < 1e-3) continue;
        record(eps, w, touch);
        ++found;
        continue;
      }
      const C t = fam.radius * rng.unit_disc();
      const C a = fam.C(j, j), b = fam.C(j, k), c = fam.C(k, k) * t * t - eps;
      C roots[2];
      if (std::abs(a) == 0.0) {
        if (std::abs(b * t) == 0.0) continue;
        roots[0] = roots[1] = -c / (2.0 * b * t);
      } else {
        const C disc = std::sqrt(b * b * t * t - a * c);
        roots[0] = (-b * t + disc) / a;
        roots[1] = (-b * t - disc) / a;
      }
      for (const C x : roots) {
        w(j) = x;
        w(k) = t;
        if (w.norm() > fam.radius) continue;
        if (touch && w.norm() < 1e-3) continue;
        record(eps, w, touch);
        ++found;
      }
    }
    if (found == 0)
      throw Error(ErrorCode::VerificationFailed,
                  "no disc points inside the truncation radius at eps = " + std::to_string(eps));
  };

  for (const double eps : eps_grid) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InsufficientSamples, "eps must be > 0");
    sample_level(eps, false);
  }
  sample_level(0.0, true);
  return rep;
}

DiscReport verify_discs(const Cone& cone, const DiscFamily& fam, const std::vector<double>& eps_grid,
                        int samples, std::uint64_t seed, std::vector<SamplePoint>* dump) {
  DiscReport rep = inspect_discs(cone, fam, eps_grid, samples, seed, dump);
  if (!rep.ok) {
    std::ostringstream os;
    os << "side*rho = " << std::min(rep.min_margin, rep.touch_residual) << " <= 0 at eps = "
       << rep.offending_eps << ", z = " << vec_str(rep.offending_point);
    if (rep.origin_value != 0.0) os << "; rho(0) = " << rep.origin_value;
    throw Error(ErrorCode::VerificationFailed, os.str());
  }
  return rep;
}

SupportReport inspect_support(const Cone& cone, const SupportWitness& w, int samples,
                              std::uint64_t seed, const Tolerances& tol,
                              std::vector<SamplePoint>* dump) {
  const Eigen::Index n = cone.dim();
  if (w.aplus.functional.size() != n || w.aminus.functional.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "witness functional has the wrong size");
  Rng rng(seed);
  SupportReport rep;
  rep.tolerance = tol.witness * cone.norm();
  rep.plus_min_margin = std::numeric_limits<double>::infinity();
  rep.minus_max_margin = -std::numeric_limits<double>::infinity();

  auto scan = [&](const Hypersurface& h, bool plus) {
    const Eigen::MatrixXcd basis = kernel_basis(h.functional);
    for (int s = 0; s < samples; ++s) {
      Eigen::VectorXcd z = basis * rng.complex_normal_vector(basis.cols());
      const double len = z.norm();
      if (len == 0.0) continue;
      z *= (1.0 - rng.uniform()) / len;
      const double rho = evaluate(cone, z);
      const double m = rho / z.squaredNorm();
      if (plus)
        rep.plus_min_margin = std::min(rep.plus_min_margin, m);
      else
        rep.minus_max_margin = std::max(rep.minus_max_margin, m);
      ++rep.points;
      if (dump) dump->push_back({0.0, z, rho, plus ? "aplus" : "aminus"});
    }
  };
  scan(w.aplus, true);
  scan(w.aminus, false);

  rep.ok = true;
  std::ostringstream os;
  if (rep.plus_min_margin < -rep.tolerance) {
    rep.ok = false;
    os << "rho/|z|^2 = " << rep.plus_min_margin << " < 0 on A+ {" << w.aplus.label << "}";
  }
  if (rep.minus_max_margin > rep.tolerance) {
    if (!rep.ok) os << "; ";
    rep.ok = false;
    os << "rho/|z|^2 = " << rep.minus_max_margin << " > 0 on A- {" << w.aminus.label << "}";
  }
  if (w.kind == SupportWitness::Kind::NonMinimal &&
      (rep.plus_min_margin > rep.tolerance || rep.minus_max_margin < -rep.tolerance)) {
    if (!rep.ok) os << "; ";
    rep.ok = false;
    os << "hypersurface is not contained in M";
  }
  rep.failure = os.str();
  return rep;
}

SupportReport verify_support(const Cone& cone, const SupportWitness& w, int samples,
                             std::uint64_t seed, const Tolerances& tol,
                             std::vector<SamplePoint>* dump) {
  SupportReport rep = inspect_support(cone, w, samples, seed, tol, dump);
  if (!rep.ok) throw Error(ErrorCode::VerificationFailed, rep.failure);
  return rep;
}

// ---------------------------------------------------------------------------

Cone example_cone() {
  return Cone(diag2(0.5, 1.0 / 3.0), diag2(1.0, -1.0));
}

JumpReport jump_demo(const std::vector<ConeSample<double>>& points) {
  const Cone m = example_cone();
  JumpReport rep;
  for (const auto& sample : points) {
    const ConeSample<double> p = make_cone_sample(m, sample.point);
    const C z1 = p.point(0), z2 = p.point(1);
    const double len = p.point.norm();
    if (len == 0.0) continue;
    const C f = (z2 * z2 * z2 - z1 * z1 * z1) / (z1 * z2);
    rep.continuity_ratio = std::max(rep.continuity_ratio, std::abs(f) / len);
    ++rep.points;
    if (std::min(std::abs(z1), std::abs(z2)) >= 1e-2) {
      const C fplus = z2 * z2 / z1;
      const C fminus = z1 * z1 / z2;
      rep.identity_residual = std::max(rep.identity_residual, std::abs(fplus - fminus - f));
      ++rep.identity_points;
    }
  }
  return rep;
}

JumpReport jump_demo(std::uint64_t seed, int samples) {
  return jump_demo(sample_cone(example_cone(), seed, samples, 1.0));
}

}  // namespace qcone
