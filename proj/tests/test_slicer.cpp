#include <doctest.h>

#include <fstream>
#include <sstream>

#include "qcone/cli.hpp"
#include "qcone/error.hpp"
#include "qcone/slicer.hpp"
#include "support.hpp"

using namespace qcone;
using namespace qtest;

namespace {

Cone fixture(const std::string& name) {
  std::ifstream f(std::string(QCONE_FIXTURE_DIR) + "/" + name + ".json");
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return cli::parse_spec(ss.str()).cone;
}

MX diag_n(std::initializer_list<C> d) {
  MX m = MX::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (const C& x : d) m(i, i) = x, ++i;
  return m;
}

// Hermitian part Im(z1 conj(z2)) in C^n.
MX im_form_n(Eigen::Index n) {
  MX h = MX::Zero(n, n);
  h.topLeftCorner(2, 2) = im_form();
  return h;
}

Slice slice_of(const MX& basis) {
  Slice s;
  s.basis = basis;
  s.description = "custom";
  return s;
}

double restriction_error(const Cone& cone, const Slice& s, const Cone& restricted, Rng& rng, int samples) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const VX w = rng.complex_normal_vector(2);
    const VX z = s.basis * w;
    const double scale = std::max(1.0, cone.norm()) * z.squaredNorm();
    worst = std::max(worst, std::abs(rho_by_sums(restricted, w) - rho_by_sums(cone, z)) / scale);
  }
  return worst;
}

SliceResult expect_slice(const std::variant<SliceResult, NoSliceFound>& r) {
  if (const auto* none = std::get_if<NoSliceFound>(&r)) FAIL("no slice: ", none->reason);
  return std::get<SliceResult>(r);
}

void check_sound(const Cone& cone, const SliceResult& r, Rng& rng) {
  CHECK(r.verdict.outcome == Verdict::Outcome::OneSided);
  CHECK(r.discs.ok);
  CHECK(restriction_error(cone, r.slice, r.restricted, rng, 50) <= 1e-10);
  // independent re-run with another seed
  const DiscReport again = inspect_discs(r.restricted, *r.verdict.discs, {1e-3, 1e-2, 1e-1}, 500, 99);
  CHECK(again.ok);
}

}  // namespace

TEST_CASE("axis slice of a product-like cone is the example cone") {
  const Cone c(diag_n({0.5, 1.0 / 3.0, 1.0}), diag_n({1.0, -1.0, 1.0}));
  const Cone r = restrict(c, slice_of(MX::Identity(3, 2)));
  CHECK((r.harmonic() - diag2(0.5, 1.0 / 3.0)).norm() <= 1e-15);
  CHECK((r.hermitian() - diag2(1.0, -1.0)).norm() <= 1e-15);
}

TEST_CASE("shear slice z3 = alpha z2 changes the z2 coefficients") {
  const double a = 0.6, b = -1.3, c = 0.4, eps3 = -1.0, alpha = 0.75;
  MX s = MX::Zero(3, 3);
  s(0, 0) = 1.0;
  s(1, 1) = 1.0;
  s(0, 1) = s(1, 0) = c / 2.0;
  s(1, 2) = s(2, 1) = a / 2.0;
  s(2, 2) = b;
  const Cone cone(s, diag_n({1.0, 1.0, eps3}));
  MX basis = MX::Zero(3, 2);
  basis(0, 0) = 1.0;
  basis(1, 1) = 1.0;
  basis(2, 1) = alpha;
  const Cone r = restrict(cone, slice_of(basis));
  CHECK(std::abs(r.harmonic()(1, 1) - (1.0 + alpha * a + alpha * alpha * b)) <= 1e-14);
  CHECK(std::abs(r.harmonic()(0, 1) - c / 2.0) <= 1e-14);
  CHECK(std::abs(r.hermitian()(1, 1) - (1.0 + eps3 * alpha * alpha)) <= 1e-14);
}

TEST_CASE("restrict is the pointwise pull-back and composes") {
  Rng rng(40);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index n = 3 + i % 3;
    const Cone c = random_cone(rng, n);
    const Slice s = slice_of(rng.complex_normal_matrix(n, 2));
    const Cone r = restrict(c, s);
    CHECK(restriction_error(c, s, r, rng, 100) <= 1e-10);
    const MX g = random_invertible(rng, 2);
    const Cone twice = restrict(r, slice_of(g));
    const Cone once = restrict(c, slice_of(s.basis * g));
    CHECK((twice.harmonic() - once.harmonic()).norm() <= 1e-10 * once.norm());
    CHECK((twice.hermitian() - once.hermitian()).norm() <= 1e-10 * once.norm());
  }
}

TEST_CASE("restrict rejects a degenerate basis") {
  Rng rng(41);
  const Cone c = random_cone(rng, 3);
  MX basis = MX::Zero(3, 2);
  basis(0, 0) = 1.0;
  basis(0, 1) = 2.0;
  CHECK_THROWS_AS(restrict(c, slice_of(basis)), Error);
}

TEST_CASE("check_cor2 examples") {
  M2 s;
  s << 1.0, 2.0 * I, 2.0 * I, -1.0;
  CHECK(std::abs(s.determinant() - 3.0) <= 1e-15);
  CHECK(check_cor2(s));
  CHECK_FALSE(check_cor2(diag2(C(1, 1), C(1, -1))));
  M2 rank_one;
  rank_one << 1.0, I, I, -1.0;
  CHECK(std::abs(rank_one.determinant()) == 0.0);
  CHECK_FALSE(check_cor2(rank_one));
  // a phase does not change the verdict
  CHECK(check_cor2(std::polar(1.0, 0.7) * s));
  // det S below 1/4
  CHECK_FALSE(check_cor2(0.2 * s));
}

TEST_CASE("check_cor2 implies M11_1 with A >= 1, A != B and a one-sided verdict") {
  Rng rng(42);
  int hits = 0;
  for (int i = 0; i < 3000; ++i) {
    const M2 s = 2.0 * random_symmetric(rng, 2);
    if (!check_cor2(s)) continue;
    const Cone c(s, im_form());
    const Classification cls = classify2(c);
    REQUIRE(std::holds_alternative<NormalFormResult>(cls));
    const auto& r = std::get<NormalFormResult>(cls);
    CHECK(r.ntype.tag == NormalFormTag::M11_1);
    CHECK(r.ntype.A() >= 1.0 - 1e-8);
    CHECK(std::abs(r.ntype.A() - r.ntype.B()) > 1e-9);
    const Verdict v = decide2(r);
    CHECK(v.outcome == Verdict::Outcome::OneSided);
    CHECK(v.normal_side == -1);
    ++hits;
  }
  CHECK(hits > 100);
}

TEST_CASE("reduce_linear_terms examples") {
  // Re(w~^T S w~ + 2 w1 l1 + 2 w2 l2) + Im(w1 conj(w2))
  auto make = [](Eigen::Index n, const VX& l1, const VX& l2) {
    MX s = MX::Zero(n, n);
    s(0, 0) = 0.3;
    s(0, 1) = s(1, 0) = C(0.1, 0.2);
    for (Eigen::Index k = 2; k < n; ++k) {
      s(0, k) = s(k, 0) = l1(k - 2);
      s(1, k) = s(k, 1) = l2(k - 2);
    }
    return Cone(s, im_form_n(n));
  };
  Rng rng(43);
  auto check_change = [&](const Cone& c, const LinearTermsReduction& red) {
    for (int i = 0; i < 50; ++i) {
      const VX w = rng.complex_normal_vector(c.dim());
      const VX z = red.change * w;
      CHECK(std::abs(rho_by_sums(red.reduced, w) - rho_by_sums(c, z)) <= 1e-10 * c.norm() * z.squaredNorm());
    }
  };

  {
    const Cone c = make(3, VX::Zero(1), VX::Zero(1));
    const auto red = reduce_linear_terms(c);
    CHECK(red.tag == LinearTermsCase::Zero);
    check_change(c, red);
  }
  {
    const Cone c = make(3, VX::Ones(1), 2.0 * VX::Ones(1));
    const auto red = reduce_linear_terms(c);
    CHECK(red.tag == LinearTermsCase::Dependent);
    CHECK(std::abs(red.c - 0.5) <= 1e-12);
    CHECK(std::abs(red.reduced.harmonic()(0, 2) - 0.5) <= 1e-12);
    CHECK(std::abs(red.reduced.harmonic()(1, 2) - 1.0) <= 1e-12);
    CHECK((red.reduced.hermitian() - im_form_n(3)).norm() <= 1e-12);
    check_change(c, red);
  }
  {
    VX l1 = VX::Zero(2), l2 = VX::Zero(2);
    l1(0) = 1.0;
    l2(1) = 1.0;
    const Cone c = make(4, l1, l2);
    const auto red = reduce_linear_terms(c);
    CHECK(red.tag == LinearTermsCase::Independent);
    check_change(c, red);
  }
  {
    const Cone c = make(3, VX::Ones(1), VX::Zero(1));
    CHECK(reduce_linear_terms(c).tag == LinearTermsCase::Z1Z3);
    const Cone d = make(3, VX::Zero(1), VX::Ones(1));
    CHECK(reduce_linear_terms(d).tag == LinearTermsCase::Z2Z3);
  }
  {
    MX s = MX::Zero(3, 3);
    s(2, 2) = 1.0;
    CHECK_THROWS_AS(reduce_linear_terms(Cone(s, im_form_n(3))), Error);
    CHECK_THROWS_AS(reduce_linear_terms(Cone(MX::Identity(3, 3), MX::Identity(3, 3))), Error);
  }
}

TEST_CASE("reduce_linear_terms on random coordinates") {
  Rng rng(44);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index n = 3 + i % 3;
    MX s = MX::Zero(n, n);
    s.topLeftCorner(2, 2) = random_symmetric(rng, 2);
    s.block(0, 2, 2, n - 2) = rng.complex_normal_matrix(2, n - 2);
    if (i % 4 == 0) s.row(1).tail(n - 2) = C(0.5, -1.0) * s.row(0).tail(n - 2);
    s.block(2, 0, n - 2, 2) = s.block(0, 2, 2, n - 2).transpose();
    const MX t = random_invertible(rng, n);
    // pull back through a change that keeps the structure hidden
    const Cone c = apply_change<double>(Cone(s, im_form_n(n)), t.inverse(), 1.0, 1);
    const auto red = reduce_linear_terms(c);
    if (i % 4 == 0) CHECK(red.tag == LinearTermsCase::Dependent);
    else if (n >= 4) CHECK(red.tag == LinearTermsCase::Independent);
    for (int k = 0; k < 10; ++k) {
      const VX w = rng.complex_normal_vector(n);
      const VX z = red.change * w;
      CHECK(std::abs(rho_by_sums(red.reduced, w) - rho_by_sums(c, z)) <=
            1e-9 * c.norm() * z.squaredNorm());
    }
  }
}

TEST_CASE("find_good_slice: pi >= 2 with A > 1 uses the axis slice") {
  MX s = MX::Zero(3, 3);
  s(0, 0) = 2.0;
  s(1, 1) = 1.0;
  const Cone c(s, MX::Identity(3, 3));
  Rng rng(45);
  const SliceResult r = expect_slice(find_good_slice(c));
  CHECK(r.slice.description == "axis");
  const auto& nf = std::get<NormalFormResult>(r.classification);
  CHECK(nf.ntype.tag == NormalFormTag::M20);
  CHECK(nf.ntype.A() == doctest::Approx(2.0));
  CHECK(nf.ntype.B() == doctest::Approx(1.0));
  CHECK(r.verdict.side == 1);
  check_sound(c, r, rng);
}

TEST_CASE("find_good_slice: A = B = 1 with a z1 z3 term shears along z1") {
  MX s = MX::Zero(3, 3);
  s(0, 0) = 1.0;
  s(1, 1) = 1.0;
  s(0, 2) = s(2, 0) = 1.0;
  const Cone c(s, MX::Identity(3, 3));
  Rng rng(46);
  const SliceResult r = expect_slice(find_good_slice(c));
  CHECK(r.slice.description == "shear-z1");
  REQUIRE(r.slice.alpha.has_value());
  const M2 rs = r.restricted.harmonic();
  CHECK(std::abs(std::abs(rs.determinant()) / std::abs(r.restricted.hermitian().determinant()) - 1.0) >= 1e-3);
  check_sound(c, r, rng);
}

TEST_CASE("find_good_slice: independent linear terms with A = C = 0 use det S* = 3") {
  const Cone c = fixture("slice_r_independent");
  Rng rng(47);
  const SliceResult r = expect_slice(find_good_slice(c));
  CHECK(r.slice.construction.find("det S* = 3") != std::string::npos);
  CHECK((r.restricted.hermitian() - im_form()).norm() <= 1e-12);
  const M2 s = r.restricted.harmonic();
  CHECK(std::abs(std::abs(s.determinant()) - 3.0) <= 1e-12);
  const M2 rotated = std::polar(1.0, -std::arg(s.determinant()) / 2.0) * s;
  CHECK(rotated.real().determinant() == doctest::Approx(-1.0));
  CHECK(check_cor2(s));
  check_sound(c, r, rng);
}

TEST_CASE("find_good_slice succeeds on every one-sided fixture") {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"slice_pi2_axis_a_large", "A > 1: axis slice"},
      {"slice_pi2_axis_ab_small", "AB < 1: axis slice"},
      {"slice_pi2_shear", "c != 0: shear slice"},
      {"slice_r_zero", "R = 0"},
      {"slice_r_z1z3", "R = w1 w3"},
      {"slice_r_z2z3", "R = w2 w3"},
      {"slice_r_dependent", "R = c w1 w3 + w2 w3"},
      {"slice_r_independent", "R = w1 w3 + w2 w4"},
      {"slice_q_nonzero", "q != 0"},
      {"slice_10_l_zero", "l = 0"},
      {"slice_10_l_direction", "q(v_l) != 0"},
      {"slice_10_kernel", "direction in ker l"},
      {"slice_10_mixed", "mixed direction"},
  };
  Rng rng(48);
  for (const auto& [name, tag] : cases) {
    CAPTURE(name);
    const Cone c = fixture(name);
    const SliceResult r = expect_slice(find_good_slice(c));
    CHECK_MESSAGE(r.slice.construction.find(tag) != std::string::npos, r.slice.construction);
    check_sound(c, r, rng);
  }
}

TEST_CASE("two-sided cones in C^3") {
  {
    // example cone times C
    const Cone c(diag_n({0.5, 1.0 / 3.0, 0.0}), diag_n({1.0, -1.0, 0.0}));
    const TwoSidedForm f = classify_two_sided_nd(c);
    REQUIRE(std::holds_alternative<ProductForm>(f));
    const auto& inner = std::get<NormalFormResult>(std::get<ProductForm>(f).inner);
    CHECK(inner.ntype.tag == NormalFormTag::M11_1);
    CHECK(inner.ntype.A() == doctest::Approx(0.5));
    CHECK(inner.ntype.B() == doctest::Approx(1.0 / 3.0));
    const auto none = find_good_slice(c);
    REQUIRE(std::holds_alternative<NoSliceFound>(none));
    CHECK(std::get<NoSliceFound>(none).two_sided);
  }
  {
    const Cone c(MX::Identity(3, 3), MX::Zero(3, 3));
    const TwoSidedForm f = classify_two_sided_nd(c);
    REQUIRE(std::holds_alternative<SumOfSquares>(f));
    CHECK(std::get<SumOfSquares>(f).k == 3);
  }
  {
    // Re(z1 z2 + z1 conj(z3)); rho vanishes on z1 = 0
    MX s = MX::Zero(3, 3), h = MX::Zero(3, 3);
    s(0, 1) = s(1, 0) = 0.5;
    h(2, 0) = h(0, 2) = 0.5;
    const Cone c(s, h);
    CHECK(std::holds_alternative<LinearTimesAntiLinear>(classify_two_sided_nd(c)));
    Rng rng(49);
    for (int i = 0; i < 20; ++i) {
      VX z = rng.complex_normal_vector(3);
      const C z1 = z(0);
      const double expected = (z1 * z(1) + z1 * std::conj(z(2))).real();
      CHECK(rho_by_sums(c, z) == doctest::Approx(expected).epsilon(1e-12));
      z(0) = 0.0;
      CHECK(std::abs(rho_by_sums(c, z)) <= 1e-15);
    }
  }
  for (const auto& [name, form] : std::vector<std::pair<std::string, std::string>>{
           {"product", "product"}, {"ts1", "sum_of_squares"}, {"ts2", "linear_times_antilinear"}}) {
    CAPTURE(name);
    CHECK(std::string(two_sided_form_name(classify_two_sided_nd(fixture(name)))) == form);
  }
}

TEST_CASE("two-sided forms survive a change of variables and are verified") {
  Rng rng(50);
  for (int i = 0; i < 60; ++i) {
    const Eigen::Index n = 3 + i % 3;
    const MX t = random_invertible(rng, n);
    MX s = MX::Zero(n, n), h = MX::Zero(n, n);
    std::string expected;
    switch (i % 3) {
      case 0:
        s = MX::Identity(n, n);
        expected = "sum_of_squares";
        break;
      case 1:
        s(0, 1) = s(1, 0) = 0.5;
        h(2, 0) = h(0, 2) = 0.5;
        expected = "linear_times_antilinear";
        break;
      default:
        s.topLeftCorner(2, 2) = random_symmetric(rng, 2);
        h.topLeftCorner(2, 2) = random_hermitian(rng, 2);
        expected = "product";
    }
    const Cone c = apply_change<double>(Cone(s, h), t, 1.0, 1);
    const TwoSidedForm f = classify_two_sided_nd(c);
    CHECK(std::string(two_sided_form_name(f)) == expected);
    if (const auto* sq = std::get_if<SumOfSquares>(&f)) {
      for (int k = 0; k < 10; ++k) {
        const VX w = rng.complex_normal_vector(n);
        const VX z = sq->change * w;
        const double expected_rho = w.head(sq->k).cwiseProduct(w.head(sq->k)).sum().real();
        CHECK(std::abs(rho_by_sums(c, z) - expected_rho) <= 1e-9 * c.norm() * z.squaredNorm());
      }
    }
    if (const auto* lt = std::get_if<LinearTimesAntiLinear>(&f)) {
      for (int k = 0; k < 10; ++k) {
        const VX w = rng.complex_normal_vector(n);
        const VX z = lt->change * w;
        const double expected_rho = (w(0) * w(1) + w(0) * std::conj(w(2))).real();
        CHECK(std::abs(rho_by_sums(c, z) - expected_rho) <= 1e-9 * c.norm() * z.squaredNorm());
      }
    }
  }
}

TEST_CASE("classify_two_sided_nd reports unknown rather than guessing") {
  Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    const Cone c = random_cone(rng, 3 + i % 3);
    CHECK(std::holds_alternative<UnknownTwoSided>(classify_two_sided_nd(c)));
  }
}

TEST_CASE("every slice returned on random cones is sound") {
  Rng rng(52);
  int found = 0;
  for (int i = 0; i < 120; ++i) {
    const Eigen::Index n = 3 + i % 3;
    MX h = random_hermitian(rng, n);
    if (i % 4 == 1) {
      // rank two hermitian part of signature (1,1)
      const MX u = random_invertible(rng, n);
      h = u.adjoint() * im_form_n(n) * u;
    } else if (i % 4 == 2) {
      // rank one hermitian part
      const VX v = rng.complex_normal_vector(n);
      h = v * v.adjoint();
    }
    const Cone c(random_symmetric(rng, n), h);
    SliceOptions opts;
    opts.seed = static_cast<std::uint64_t>(i);
    opts.verify_samples = 500;
    const auto res = find_good_slice(c, opts);
    if (const auto* r = std::get_if<SliceResult>(&res)) {
      check_sound(c, *r, rng);
      ++found;
    }
  }
  CHECK(found > 100);
}

TEST_CASE("find_good_slice is deterministic for a fixed seed") {
  Rng rng(53);
  const Cone c = random_cone(rng, 4);
  SliceOptions opts;
  opts.seed = 5;
  const auto a = find_good_slice(c, opts);
  const auto b = find_good_slice(c, opts);
  REQUIRE(a.index() == b.index());
  if (const auto* ra = std::get_if<SliceResult>(&a))
    CHECK((ra->slice.basis - std::get<SliceResult>(b).slice.basis).norm() == 0.0);
}
