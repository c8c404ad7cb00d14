#pragma once

// Command surface of the qcone tool: input parsing, JSON reports, exit codes.

#include <iosfwd>
#include <string>
#include <vector>

#include "qcone/quadform.hpp"

namespace qcone::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kSuccess = 0,
  kDegenerate = 2,
  kVerificationFailed = 3,
  kSchemaError = 4,
  kNoSliceUnknown = 5,
};

struct ConeSpec {
  Eigen::Index n = 0;
  Cone cone = Cone::zero(1);
  std::string form;           // "matrix" or "poly"
  double adjustment = 0.0;    // size of the discarded non-symmetric parts
};

/// Parses the JSON input schema (see docs/formats.md). Throws Error with
/// SchemaError (message carries the field path), NonReal or DegreeError.
ConeSpec parse_spec(const std::string& text);

/// Matrix form {"n", "S", "H"} with {"re", "im"} entries.
std::string render_matrix_spec(const Cone& cone);
/// Polynomial form {"n", "poly"} over x1..xn, y1..yn.
std::string render_poly_spec(const Cone& cone);

/// Runs one sub-command. `args` excludes the program name. The report goes
/// to `out`, diagnostics to `err`; the return value is the exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace qcone::cli
