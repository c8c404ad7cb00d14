#include "qcone/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcone/decider.hpp"
#include "qcone/error.hpp"
#include "qcone/normalform2.hpp"
#include "qcone/slicer.hpp"
#include "qcone/tolerances.hpp"

namespace qcone::cli {

namespace {

using json = nlohmann::json;
using C = std::complex<double>;
using MX = Eigen::MatrixXcd;

// ---------------------------------------------------------------------------
// Input

[[noreturn]] void schema(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::SchemaError, path + ": " + msg);
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) schema(path, "expected a number");
  return j.get<double>();
}

C complex_at(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_object()) schema(path, "expected {\"re\", \"im\"} or a number");
  double re = 0.0, im = 0.0;
  for (const auto& [key, value] : j.items()) {
    if (key == "re")
      re = number_at(value, path + ".re");
    else if (key == "im")
      im = number_at(value, path + ".im");
    else
      schema(path, "unknown field '" + key + "'");
  }
  return {re, im};
}

MX matrix_at(const json& j, Eigen::Index n, const std::string& path) {
  MX m = MX::Zero(n, n);
  if (j.is_array() && j.empty()) return m;
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    schema(path, "expected " + std::to_string(n) + " rows");
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = j[r];
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      schema(rp, "expected " + std::to_string(n) + " entries");
    for (Eigen::Index c = 0; c < n; ++c)
      m(r, c) = complex_at(row[c], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

int variable_index(const std::string& name, Eigen::Index n, const std::string& path) {
  if (name.size() < 2 || (name[0] != 'x' && name[0] != 'y'))
    schema(path, "variable '" + name + "' is not x<k> or y<k>");
  int k = 0;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[i])))
      schema(path, "variable '" + name + "' is not x<k> or y<k>");
    k = k * 10 + (name[i] - '0');
    if (k > 1000000) schema(path, "variable index too large");
  }
  if (k < 1 || k > n) schema(path, "variable '" + name + "' outside 1.." + std::to_string(n));
  return (name[0] == 'x' ? 0 : static_cast<int>(n)) + k - 1;
}

// ---------------------------------------------------------------------------
// Output

json cnum(C z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json real_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

template <typename Derived>
json cmat(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(cnum(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json cvec(const Eigen::VectorXcd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(cnum(v(i)));
  return out;
}

json cone_json(const Cone& cone) {
  return json{{"n", cone.dim()}, {"S", cmat(cone.harmonic())}, {"H", cmat(cone.hermitian())}};
}

json tolerances_json(const Tolerances& tol) {
  json j = json::object();
  for (const auto& [k, v] : tol.as_map()) j[k] = v;
  return j;
}

json signatures_json(const Cone& cone, const Tolerances& tol) {
  const double scale = cone.norm();
  const HermitianSignature hs = hermitian_signature(cone, tol.zero_eigenvalue * scale);
  const RMatrix<double> rm = real_matrix(cone);
  const RealSignature rs = real_signature(cone, tol.zero_eigenvalue * spectral_norm(rm));
  return json{{"hermitian", {hs.pi, hs.nu}}, {"real", {rs.p, rs.q}}};
}

json type_json(const NormalFormType& t) {
  json j{{"tag", to_string(t.tag)}, {"description", describe(t)}};
  switch (t.tag) {
    case NormalFormTag::M20:
    case NormalFormTag::M11_1: j["params"] = json{{"A", t.A()}, {"B", t.B()}}; break;
    case NormalFormTag::M11_2: j["params"] = json{{"A", cnum(t.a)}}; break;
    case NormalFormTag::M10_1: j["params"] = json{{"A", t.A()}}; break;
    default: j["params"] = json::object();
  }
  return j;
}

json classification_json(const Classification& c) {
  if (const auto* d = std::get_if<DegeneracyReport>(&c))
    return json{{"degenerate", true}, {"reason", to_string(d->reason)}, {"detail", d->detail}};
  const auto& r = std::get<NormalFormResult>(c);
  json j{{"degenerate", false},
         {"normal_form", type_json(r.ntype)},
         {"T", cmat(r.T)},
         {"lambda", r.lambda},
         {"sign", r.sign},
         {"residual", r.residual},
         {"residual_bound", r.residual_bound},
         {"boundary_margin", real_or_null(r.margin)},
         {"low_confidence", r.low_confidence}};
  if (r.invariants)
    j["invariants"] = json{{"det_S", cnum(r.invariants->det_s)}, {"det_P", r.invariants->det_p},
                           {"det_Q", r.invariants->det_q}};
  return j;
}

json discs_json(const DiscFamily& f) {
  return json{{"kind", to_string(f.kind)}, {"C", cmat(f.C)}, {"side", f.side},
              {"radius", f.radius},        {"frame", cmat(f.frame)}};
}

json hyper_json(const Hypersurface& h) {
  return json{{"functional", cvec(h.functional)}, {"label", h.label}};
}

json witness_json(const SupportWitness& w) {
  json j{{"kind", to_string(w.kind)}, {"aplus", hyper_json(w.aplus)}, {"aminus", hyper_json(w.aminus)}};
  if (w.line_angles) j["line_angles"] = {w.line_angles->first, w.line_angles->second};
  return j;
}

json verdict_json(const Verdict& v) {
  json j{{"outcome", to_string(v.outcome)}, {"rule", v.rule}};
  if (v.outcome == Verdict::Outcome::OneSided) {
    j["side"] = v.side;
    j["normal_side"] = v.normal_side;
  }
  if (v.discs) j["discs"] = discs_json(*v.discs);
  if (v.normal_discs) j["normal_discs"] = discs_json(*v.normal_discs);
  if (v.witness) j["witness"] = witness_json(*v.witness);
  if (v.normal_witness) j["normal_witness"] = witness_json(*v.normal_witness);
  if (v.degeneracy)
    j["degeneracy"] = json{{"reason", to_string(v.degeneracy->reason)}, {"detail", v.degeneracy->detail}};
  return j;
}

json disc_report_json(const DiscReport& r) {
  json j{{"min_margin", r.min_margin},       {"touch_residual", r.touch_residual},
         {"origin_value", r.origin_value},   {"disc_points", r.disc_points},
         {"touch_points", r.touch_points},   {"ok", r.ok}};
  if (!r.ok) {
    j["offending_eps"] = r.offending_eps;
    j["offending_point"] = cvec(r.offending_point);
  }
  return j;
}

json support_report_json(const SupportReport& r) {
  json j{{"plus_min_margin", r.plus_min_margin}, {"minus_max_margin", r.minus_max_margin},
         {"tolerance", r.tolerance},             {"points", r.points},
         {"ok", r.ok}};
  if (!r.ok) j["failure"] = r.failure;
  return j;
}

json slice_json(const SliceResult& s) {
  json j{{"basis", cmat(s.slice.basis)},
         {"description", s.slice.description},
         {"construction", s.slice.construction},
         {"restricted", cone_json(s.restricted)},
         {"classification", classification_json(s.classification)},
         {"verdict", verdict_json(s.verdict)},
         {"discs", disc_report_json(s.discs)}};
  if (s.slice.alpha) j["alpha"] = cnum(*s.slice.alpha);
  return j;
}

json two_sided_json(const TwoSidedForm& f) {
  json j{{"form", two_sided_form_name(f)}};
  std::visit(
      [&](const auto& x) {
        using X = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<X, ProductForm>) {
          j["inner"] = classification_json(x.inner);
          j["inner_verdict"] = verdict_json(decide2(x.inner));
          j["change"] = cmat(x.change);
        } else if constexpr (std::is_same_v<X, SumOfSquares>) {
          j["k"] = x.k;
          j["change"] = cmat(x.change);
        } else if constexpr (std::is_same_v<X, LinearTimesAntiLinear>) {
          j["change"] = cmat(x.change);
        } else {
          j["reason"] = x.reason;
        }
      },
      f);
  return j;
}

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::SchemaError:
    case ErrorCode::NonReal:
    case ErrorCode::NonHomogeneous:
    case ErrorCode::DegreeError:
    case ErrorCode::NotSymmetric:
    case ErrorCode::DimensionMismatch: return kSchemaError;
    default: return kVerificationFailed;
  }
}

// ---------------------------------------------------------------------------
// Commands

struct Options {
  std::string input;
  std::uint64_t seed = 0;
  int samples = 10000;
  std::string eps = "1e-3,1e-2,1e-1";
  int budget = 256;
  std::string csv;
  std::string tol_overrides;
  std::string tag = "M11_1";
  std::string values = "0.25,0.5,0.75,1,1.25,1.5,1.75,2";
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      schema(what, "'" + item + "' is not a number");
    }
  }
  if (out.empty()) schema(what, "empty list");
  return out;
}

std::vector<double> parse_eps(const std::string& text) {
  std::vector<double> out = parse_list(text, "--eps");
  for (const double e : out)
    if (!(e > 0.0) || !std::isfinite(e)) schema("--eps", "eps values must be positive");
  return out;
}

Tolerances parse_tolerances(const std::string& text) {
  Tolerances tol;
  if (text.empty()) return tol;
  std::map<std::string, double> overrides;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) schema("--tol-overrides", "'" + item + "' is not key=value");
    overrides[item.substr(0, eq)] = parse_list(item.substr(eq + 1), "--tol-overrides")[0];
  }
  tol.apply(overrides);
  return tol;
}

std::string read_input(const Options& o, std::istream& in) {
  std::stringstream buf;
  if (o.input.empty() || o.input == "-") {
    buf << in.rdbuf();
  } else {
    std::ifstream f(o.input);
    if (!f) schema("input", "cannot open '" + o.input + "'");
    buf << f.rdbuf();
  }
  return buf.str();
}

void write_csv(const std::string& path, const std::vector<SamplePoint>& pts, Eigen::Index n) {
  std::ofstream f(path);
  if (!f) schema("--csv", "cannot write '" + path + "'");
  f << "eps";
  for (Eigen::Index i = 1; i <= n; ++i) f << ",re_z" << i << ",im_z" << i;
  f << ",rho,set\n";
  f << std::setprecision(17);
  for (const auto& p : pts) {
    f << p.eps;
    for (Eigen::Index i = 0; i < p.z.size(); ++i) f << ',' << p.z(i).real() << ',' << p.z(i).imag();
    f << ',' << p.rho << ',' << p.set << '\n';
  }
}

struct Context {
  const Options& opts;
  Tolerances tol;
  json report;
  int code = kSuccess;
};

void require_dim2(const ConeSpec& spec) {
  if (spec.n != 2)
    throw Error(ErrorCode::DimensionMismatch,
                "n = " + std::to_string(spec.n) + ": normal forms are defined for n = 2; use 'slice'");
}

void cmd_classify(Context& cx, const ConeSpec& spec) {
  require_dim2(spec);
  const Classification c = classify2(spec.cone, cx.tol);
  cx.report["classification"] = classification_json(c);
  if (std::holds_alternative<DegeneracyReport>(c)) cx.code = kDegenerate;
}

void cmd_decide(Context& cx, const ConeSpec& spec) {
  require_dim2(spec);
  const Classification c = classify2(spec.cone, cx.tol);
  const Verdict v = decide2(c, cx.tol);
  cx.report["classification"] = classification_json(c);
  cx.report["verdict"] = verdict_json(v);
  if (v.outcome == Verdict::Outcome::Degenerate) cx.code = kDegenerate;
}

void cmd_verify(Context& cx, const ConeSpec& spec) {
  const auto eps = parse_eps(cx.opts.eps);
  std::vector<SamplePoint> dump;
  std::vector<SamplePoint>* dp = cx.opts.csv.empty() ? nullptr : &dump;
  if (spec.n == 2) {
    const Classification c = classify2(spec.cone, cx.tol);
    const Verdict v = decide2(c, cx.tol);
    cx.report["classification"] = classification_json(c);
    cx.report["verdict"] = verdict_json(v);
    if (v.outcome == Verdict::Outcome::Degenerate) {
      cx.code = kDegenerate;
      return;
    }
    if (v.outcome == Verdict::Outcome::OneSided) {
      const DiscReport r = inspect_discs(spec.cone, *v.discs, eps, cx.opts.samples, cx.opts.seed, dp);
      cx.report["verification"] = disc_report_json(r);
      if (!r.ok) cx.code = kVerificationFailed;
    } else {
      const SupportReport r =
          inspect_support(spec.cone, *v.witness, cx.opts.samples, cx.opts.seed, cx.tol, dp);
      cx.report["verification"] = support_report_json(r);
      if (!r.ok) cx.code = kVerificationFailed;
    }
  } else {
    SliceOptions so;
    so.budget = cx.opts.budget;
    so.seed = cx.opts.seed;
    so.eps_grid = eps;
    so.tol = cx.tol;
    const auto res = find_good_slice(spec.cone, so);
    if (const auto* s = std::get_if<SliceResult>(&res)) {
      cx.report["slice"] = slice_json(*s);
      std::vector<SamplePoint> local;
      const DiscReport r =
          inspect_discs(s->restricted, *s->verdict.discs, eps, cx.opts.samples, cx.opts.seed, dp ? &local : nullptr);
      for (auto& p : local) {
        p.z = (s->slice.basis * p.z).eval();
        dump.push_back(std::move(p));
      }
      cx.report["verification"] = disc_report_json(r);
      if (!r.ok) cx.code = kVerificationFailed;
    } else {
      const auto& nf = std::get<NoSliceFound>(res);
      cx.report["no_slice"] = json{{"reason", nf.reason}, {"two_sided", nf.two_sided},
                                   {"random_tried", nf.random_tried}};
      const TwoSidedForm f = classify_two_sided_nd(spec.cone, cx.tol);
      cx.report["two_sided"] = two_sided_json(f);
      if (std::holds_alternative<UnknownTwoSided>(f)) cx.code = kNoSliceUnknown;
    }
  }
  if (dp) write_csv(cx.opts.csv, dump, spec.n);
}

void cmd_slice(Context& cx, const ConeSpec& spec) {
  if (spec.n < 3)
    throw Error(ErrorCode::DimensionMismatch, "slice needs n >= 3; use 'decide' for n = 2");
  if (spec.cone.norm() == 0.0) {
    cx.report["degenerate"] = "rho is identically zero";
    cx.code = kDegenerate;
    return;
  }
  SliceOptions so;
  so.budget = cx.opts.budget;
  so.seed = cx.opts.seed;
  so.eps_grid = parse_eps(cx.opts.eps);
  so.tol = cx.tol;
  const auto res = find_good_slice(spec.cone, so);
  if (const auto* s = std::get_if<SliceResult>(&res)) {
    cx.report["outcome"] = "OneSided";
    cx.report["slice"] = slice_json(*s);
    return;
  }
  const auto& nf = std::get<NoSliceFound>(res);
  cx.report["no_slice"] = json{{"reason", nf.reason}, {"two_sided", nf.two_sided},
                               {"random_tried", nf.random_tried}};
  const TwoSidedForm f = classify_two_sided_nd(spec.cone, cx.tol);
  cx.report["two_sided"] = two_sided_json(f);
  cx.report["outcome"] = nf.two_sided ? "TwoSided" : "Undetermined";
  if (std::holds_alternative<UnknownTwoSided>(f)) cx.code = kNoSliceUnknown;
}

// Continuity bound observed by sampling, with headroom.
constexpr double kJumpContinuityBound = 1.75;

void cmd_jump_demo(Context& cx) {
  const JumpReport r = jump_demo(cx.opts.seed, cx.opts.samples);
  const bool ok = r.identity_residual <= 1e-12 && std::isfinite(r.continuity_ratio) &&
                  r.continuity_ratio <= kJumpContinuityBound;
  cx.report["jump"] = json{{"identity_residual", r.identity_residual},
                           {"continuity_ratio", r.continuity_ratio},
                           {"continuity_bound", kJumpContinuityBound},
                           {"identity_points", r.identity_points},
                           {"points", r.points},
                           {"ok", ok}};
  if (!ok) cx.code = kVerificationFailed;
}

void cmd_atlas(Context& cx) {
  const auto tag = parse_tag(cx.opts.tag);
  if (!tag) schema("--tag", "unknown tag '" + cx.opts.tag + "'");
  const auto values = parse_list(cx.opts.values, "--values");
  std::vector<NormalFormType> cells;
  switch (*tag) {
    case NormalFormTag::M20:
    case NormalFormTag::M11_1:
      for (double a : values)
        for (double b : values)
          cells.push_back(*tag == NormalFormTag::M20 ? NormalFormType::m20(a, b) : NormalFormType::m11_1(a, b));
      break;
    case NormalFormTag::M11_2:
      for (double re : values)
        for (double im : values) cells.push_back(NormalFormType::m11_2({re, im}));
      break;
    case NormalFormTag::M10_1:
      for (double a : values) cells.push_back(NormalFormType::m10_1(a));
      break;
    case NormalFormTag::M11_3: cells.push_back(NormalFormType::m11_3()); break;
    case NormalFormTag::M10_2: cells.push_back(NormalFormType::m10_2()); break;
    case NormalFormTag::M00_1: cells.push_back(NormalFormType::m00_1()); break;
  }
  json rows = json::array();
  bool all_agree = true;
  std::ostringstream csv;
  csv << std::setprecision(17) << "tag,a_re,a_im,b,table,decided,agree\n";
  for (const auto& t : cells) {
    json row = type_json(t);
    if (!in_table_range(t)) {
      row["in_range"] = false;
      rows.push_back(row);
      continue;
    }
    const auto expected = table_outcome(t, cx.tol);
    const Verdict v = decide2(classify2(normal_form_cone(t), cx.tol), cx.tol);
    if (v.outcome == Verdict::Outcome::Degenerate) {
      // e.g. M11_1(1,1) = 2 x1^2 - 2 y2^2 is a pair of hyperplanes
      row["in_range"] = true;
      row["table"] = to_string(expected);
      row["decided"] = to_string(v.outcome);
      row["excluded"] = v.rule;
      rows.push_back(row);
      csv << to_string(t.tag) << ',' << t.a.real() << ',' << t.a.imag() << ',' << t.b << ','
          << to_string(expected) << ",Degenerate,\n";
      continue;
    }
    const bool agree = v.outcome == expected;
    all_agree = all_agree && agree;
    row["in_range"] = true;
    row["table"] = to_string(expected);
    row["decided"] = to_string(v.outcome);
    row["rule"] = v.rule;
    row["agree"] = agree;
    rows.push_back(row);
    csv << to_string(t.tag) << ',' << t.a.real() << ',' << t.a.imag() << ',' << t.b << ','
        << to_string(expected) << ',' << to_string(v.outcome) << ',' << (agree ? 1 : 0) << '\n';
  }
  cx.report["atlas"] = json{{"tag", to_string(*tag)}, {"values", values}, {"cells", rows},
                            {"all_agree", all_agree}};
  if (!cx.opts.csv.empty()) {
    std::ofstream f(cx.opts.csv);
    if (!f) schema("--csv", "cannot write '" + cx.opts.csv + "'");
    f << csv.str();
  }
  if (!all_agree) cx.code = kVerificationFailed;
}

}  // namespace

// ---------------------------------------------------------------------------

ConeSpec parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    schema("$", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) schema("$", "expected an object");
  for (const auto& [key, value] : j.items())
    if (key != "n" && key != "S" && key != "H" && key != "poly") schema("$." + key, "unknown field");
  if (!j.contains("n") || !j["n"].is_number_integer()) schema("$.n", "expected an integer");
  const long long n = j["n"].get<long long>();
  if (n < 1 || n > 64) schema("$.n", "must lie in 1..64");

  ConeSpec spec;
  spec.n = n;
  const bool has_matrix = j.contains("S") || j.contains("H");
  const bool has_poly = j.contains("poly");
  if (has_matrix == has_poly) schema("$", "give either S/H or poly");

  if (has_matrix) {
    spec.form = "matrix";
    const MX s = j.contains("S") ? matrix_at(j["S"], n, "$.S") : MX::Zero(n, n);
    const MX h = j.contains("H") ? matrix_at(j["H"], n, "$.H") : MX::Zero(n, n);
    spec.cone = Cone::symmetrized(s, h, &spec.adjustment);
    return spec;
  }

  spec.form = "poly";
  const json& p = j["poly"];
  if (!p.is_array()) schema("$.poly", "expected an array of terms");
  Polynomial<double> poly;
  for (std::size_t t = 0; t < p.size(); ++t) {
    const std::string tp = "$.poly[" + std::to_string(t) + "]";
    const json& term = p[t];
    if (!term.is_object()) schema(tp, "expected {\"vars\", \"coeff\"}");
    for (const auto& [key, value] : term.items())
      if (key != "vars" && key != "coeff") schema(tp + "." + key, "unknown field");
    if (!term.contains("vars") || !term["vars"].is_array()) schema(tp + ".vars", "expected an array");
    if (!term.contains("coeff")) schema(tp + ".coeff", "missing");
    const json& vars = term["vars"];
    if (vars.size() != 2)
      throw Error(ErrorCode::DegreeError,
                  tp + ".vars: monomial of degree " + std::to_string(vars.size()) + ", expected 2");
    Monomial<double> m;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const std::string vp = tp + ".vars[" + std::to_string(v) + "]";
      if (!vars[v].is_string()) schema(vp, "expected a variable name");
      m.vars.push_back(variable_index(vars[v].get<std::string>(), n, vp));
    }
    const C coeff = complex_at(term["coeff"], tp + ".coeff");
    if (coeff.imag() != 0.0) throw Error(ErrorCode::NonReal, tp + ".coeff: coefficient is not real");
    m.coeff = coeff;
    poly.push_back(m);
  }
  spec.cone = decompose<double>(n, poly);
  return spec;
}

std::string render_matrix_spec(const Cone& cone) { return cone_json(cone).dump(); }

std::string render_poly_spec(const Cone& cone) {
  const Eigen::Index n = cone.dim();
  json terms = json::array();
  auto name = [n](int k) {
    return (k < n ? "x" : "y") + std::to_string((k < n ? k : k - n) + 1);
  };
  for (const auto& m : render(cone))
    terms.push_back(json{{"vars", {name(m.vars[0]), name(m.vars[1])}}, {"coeff", m.coeff.real()}});
  return json{{"n", n}, {"poly", terms}}.dump();
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic cones in C^n: normal forms, one-sided extension, two-sided support", "qcone"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input) sub->add_option("input", o.input, "JSON cone file ('-' or omitted: stdin)");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--tol-overrides", o.tol_overrides, "key=value,... tolerance overrides");
  };
  CLI::App* classify = app.add_subcommand("classify", "normal form of a cone in C^2");
  add_common(classify, true);
  CLI::App* decide = app.add_subcommand("decide", "one-sided extension or two-sided support, n = 2");
  add_common(decide, true);
  CLI::App* verify = app.add_subcommand("verify", "decide and check the certificate by sampling");
  add_common(verify, true);
  verify->add_option("--samples", o.samples, "samples per disc or witness")->check(CLI::PositiveNumber);
  verify->add_option("--eps", o.eps, "comma separated eps grid");
  verify->add_option("--budget", o.budget, "random slices for n >= 3")->check(CLI::PositiveNumber);
  verify->add_option("--csv", o.csv, "write sampled points to this CSV file");
  CLI::App* slice = app.add_subcommand("slice", "two-dimensional slice for n >= 3");
  add_common(slice, true);
  slice->add_option("--budget", o.budget, "random slices after the case analysis")->check(CLI::PositiveNumber);
  slice->add_option("--eps", o.eps, "comma separated eps grid");
  CLI::App* jump = app.add_subcommand("jump-demo", "jump decomposition of a CR function on the example cone");
  add_common(jump, false);
  jump->add_option("--samples", o.samples, "cone samples")->check(CLI::PositiveNumber);
  CLI::App* atlas = app.add_subcommand("atlas", "table verdicts over a parameter grid");
  add_common(atlas, false);
  atlas->add_option("--tag", o.tag, "normal form tag (M20, M11_1, M11_2, M11_3, M10_1, M10_2, M00_1)");
  atlas->add_option("--values", o.values, "comma separated parameter values");
  atlas->add_option("--csv", o.csv, "write the grid to this CSV file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kSchemaError;
  }

  const auto start = std::chrono::steady_clock::now();
  CLI::App* sub = app.get_subcommands().front();
  json report{{"tool", "qcone"}, {"version", kVersion}, {"command", sub->get_name()}, {"seed", o.seed}};
  int code = kSuccess;
  try {
    Context cx{o, parse_tolerances(o.tol_overrides), json::object(), kSuccess};
    report["tolerances"] = tolerances_json(cx.tol);
    if (sub == verify || sub == jump) report["samples"] = o.samples;
    if (sub == verify || sub == slice) report["eps"] = parse_eps(o.eps);
    if (sub == verify || sub == slice) report["budget"] = o.budget;

    if (sub == jump) {
      cmd_jump_demo(cx);
    } else if (sub == atlas) {
      cmd_atlas(cx);
    } else {
      const ConeSpec spec = parse_spec(read_input(o, in));
      report["input"] = cone_json(spec.cone);
      report["input"]["form"] = spec.form;
      report["input"]["symmetrization_adjustment"] = spec.adjustment;
      report["signatures"] = signatures_json(spec.cone, cx.tol);
      if (sub == classify) cmd_classify(cx, spec);
      else if (sub == decide) cmd_decide(cx, spec);
      else if (sub == verify) cmd_verify(cx, spec);
      else cmd_slice(cx, spec);
    }
    report.update(cx.report);
    code = cx.code;
  } catch (const Error& e) {
    code = exit_for(e);
    report["error"] = json{{"code", to_string(e.code())}, {"message", e.what()}};
    err << e.what() << "\n";
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  report["timings"] = json{{"total_ms", ms}};
  report["exit_code"] = code;
  out << report.dump(2) << "\n";
  return code;
}

}  // namespace qcone::cli
