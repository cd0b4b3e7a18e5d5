#include "reachplan/lie.hpp"

#include <stdexcept>

namespace reachplan::lie {

namespace {

Polynomial state_sum(const Polynomial& v, const VectorField& f) {
  if (f.state_vars.size() != f.components.size())
    throw std::invalid_argument("VectorField: one component per state variable required");
  Polynomial out(v.space());
  for (std::size_t i = 0; i < f.components.size(); ++i) {
    if (f.components[i].space() != v.space()) throw std::invalid_argument("lie: variable space mismatch");
    out = out + v.partial(f.state_vars[i]) * f.components[i];
  }
  return out;
}

}  // namespace

Polynomial lie_f(const Polynomial& v, const VectorField& f) {
  return v.partial(f.time_var).scale(f.time_rate) + state_sum(v, f);
}

Polynomial lie_g(const Polynomial& v, const VectorField& g) { return state_sum(v, g); }

VectorField shared_state_field(std::span<const Polynomial> components) {
  if (components.size() != 3) throw std::invalid_argument("shared_state_field: need 3 components");
  const auto& space = components[0].space();
  VectorField f;
  f.time_var = space.index("t");
  f.state_vars = {space.index("x"), space.index("y"), space.index("th")};
  f.components.assign(components.begin(), components.end());
  return f;
}

}  // namespace reachplan::lie
