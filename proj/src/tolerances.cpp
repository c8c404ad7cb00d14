#include "qcone/tolerances.hpp"

#include "qcone/error.hpp"

namespace qcone {

namespace {

template <typename F>
void for_each_field(Tolerances& t, F&& f) {
  f("zero_eigenvalue", t.zero_eigenvalue);
  f("symmetry", t.symmetry);
  f("det_s", t.det_s);
  f("det_p", t.det_p);
  f("zero_matrix", t.zero_matrix);
  f("table_boundary", t.table_boundary);
  f("witness", t.witness);
  f("product_kernel", t.product_kernel);
  f("slice_margin", t.slice_margin);
}

}  // namespace

void Tolerances::apply(const std::map<std::string, double>& overrides) {
  for (const auto& [key, value] : overrides) {
    bool found = false;
    for_each_field(*this, [&](const char* name, double& field) {
      if (key == name) {
        field = value;
        found = true;
      }
    });
    if (!found) throw Error(ErrorCode::SchemaError, "unknown tolerance '" + key + "'");
    if (!(value >= 0.0)) throw Error(ErrorCode::SchemaError, "tolerance '" + key + "' must be >= 0");
  }
}

std::map<std::string, double> Tolerances::as_map() const {
  std::map<std::string, double> out;
  Tolerances copy = *this;
  for_each_field(copy, [&](const char* name, double& field) { out[name] = field; });
  return out;
}

}  // namespace qcone
