#pragma once

// One-sided extension versus two-sided support for cones in C^2, with
// witnesses that can be checked by sampling.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcone/normalform2.hpp"
#include "qcone/quadform.hpp"
#include "qcone/tolerances.hpp"

namespace qcone {

/// Family of analytic discs D_eps, eps > 0, written in coordinates w with
/// z = frame * w and truncated to |w| <= radius.
struct DiscFamily {
  enum class Kind { LevelSet, AffineLine };
  Kind kind = Kind::LevelSet;
  Eigen::Matrix2cd C = Eigen::Matrix2cd::Zero();  // LevelSet: w^T C w = eps
  int side = 1;                                   // sign of rho on D_eps, eps > 0
  double radius = 1.0;
  Eigen::Matrix2cd frame = Eigen::Matrix2cd::Identity();
};

/// Complex hyperplane {z : functional . z = 0} through the origin.
struct Hypersurface {
  Eigen::VectorXcd functional;
  std::string label;
};

struct SupportWitness {
  enum class Kind { TwoSidedProper, NonMinimal };
  Hypersurface aplus;   // contained in the closure of {rho > 0}
  Hypersurface aminus;  // contained in the closure of {rho < 0}
  Kind kind = Kind::TwoSidedProper;
  std::optional<std::pair<double, double>> line_angles;  // M11_2: lambda_1, lambda_2
};

struct Verdict {
  enum class Outcome { OneSided, TwoSided, Degenerate };
  Outcome outcome = Outcome::Degenerate;
  std::string rule;  // table row that decided the outcome

  // OneSided: side in the original coordinates, family pulled back through T
  int side = 0;
  int normal_side = 0;
  std::optional<DiscFamily> discs;
  std::optional<DiscFamily> normal_discs;

  // TwoSided: witnesses in original and in normal coordinates
  std::optional<SupportWitness> witness;
  std::optional<SupportWitness> normal_witness;

  std::optional<DegeneracyReport> degeneracy;
};

const char* to_string(Verdict::Outcome outcome);
const char* to_string(SupportWitness::Kind kind);
const char* to_string(DiscFamily::Kind kind);

/// Disc family for a one-sided normal form, in normal coordinates.
/// Throws NotOneSided for two-sided types.
DiscFamily build_disc_family(const NormalFormType& type, const Tolerances& tol = {});

Verdict decide2(const NormalFormResult& r, const Tolerances& tol = {});
Verdict decide2(const Classification& c, const Tolerances& tol = {});

/// Expected outcome of the table as a function of tag and parameters only.
Verdict::Outcome table_outcome(const NormalFormType& type, const Tolerances& tol = {});

struct SamplePoint {
  double eps = 0.0;
  Eigen::VectorXcd z;
  double rho = 0.0;
  std::string set;  // "disc", "touch", "aplus", "aminus"
};

struct DiscReport {
  double min_margin = 0.0;      // min side*rho over D_eps samples, eps in the grid
  double touch_residual = 0.0;  // min side*rho over D_0 samples with |z| >= 1e-3
  double origin_value = 0.0;    // rho(0)
  long disc_points = 0;
  long touch_points = 0;
  bool ok = false;
  double offending_eps = 0.0;
  Eigen::VectorXcd offending_point;
};

struct SupportReport {
  double plus_min_margin = 0.0;   // min rho/|z|^2 on aplus
  double minus_max_margin = 0.0;  // max rho/|z|^2 on aminus
  double tolerance = 0.0;         // witness * (||S|| + ||H||)
  long points = 0;
  bool ok = false;
  std::string failure;
};

/// Samples every D_eps (and D_0) and records the sign margins; never throws
/// on a failed check.
DiscReport inspect_discs(const Cone& cone, const DiscFamily& fam, const std::vector<double>& eps_grid,
                         int samples, std::uint64_t seed, std::vector<SamplePoint>* dump = nullptr);

/// inspect_discs followed by VerificationFailed unless every margin is positive.
DiscReport verify_discs(const Cone& cone, const DiscFamily& fam, const std::vector<double>& eps_grid,
                        int samples, std::uint64_t seed, std::vector<SamplePoint>* dump = nullptr);

SupportReport inspect_support(const Cone& cone, const SupportWitness& w, int samples,
                              std::uint64_t seed, const Tolerances& tol = {},
                              std::vector<SamplePoint>* dump = nullptr);

SupportReport verify_support(const Cone& cone, const SupportWitness& w, int samples,
                             std::uint64_t seed, const Tolerances& tol = {},
                             std::vector<SamplePoint>* dump = nullptr);

/// The cone Re(z1^2/2 + z2^2/3) + |z1|^2 - |z2|^2.
Cone example_cone();

struct JumpReport {
  double identity_residual = 0.0;  // max |F+ - F- - f| with min(|z1|, |z2|) >= 1e-2
  double continuity_ratio = 0.0;   // max |f(z)| / |z|
  long identity_points = 0;
  long points = 0;
};

/// f = z2^2/z1 - z1^2/z2 = F+ - F- with F+ = z2^2/z1, F- = z1^2/z2, on points of
/// the example cone.
JumpReport jump_demo(std::uint64_t seed, int samples);
JumpReport jump_demo(const std::vector<ConeSample<double>>& points);

}  // namespace qcone
