#pragma once

#include <span>
#include <vector>

#include "reachplan/polynomial.hpp"

namespace reachplan::lie {

using poly::Polynomial;

/// Polynomial vector field acting on the named state variables. `time_rate`
/// is dt'/dt when time itself has been rescaled (1 in physical units).
struct VectorField {
  std::vector<std::size_t> state_vars;
  std::vector<Polynomial> components;
  std::size_t time_var = 0;
  double time_rate = 1.0;
};

/// dv/dt * time_rate + sum_i dv/dx_i * f_i
Polynomial lie_f(const Polynomial& v, const VectorField& f);

/// sum_i dv/dx_i * g_i (no time term)
Polynomial lie_g(const Polynomial& v, const VectorField& g);

/// Convenience layout for the (t, x, y, th, k1, k2) model space.
VectorField shared_state_field(std::span<const Polynomial> components);

}  // namespace reachplan::lie
