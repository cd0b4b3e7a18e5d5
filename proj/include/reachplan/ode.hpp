#pragma once

#include <array>
#include <cstddef>

namespace reachplan {

/// One classical fourth-order Runge-Kutta step of x' = f(t, x).
template <std::size_t N, class F>
std::array<double, N> rk4_step(const F& f, double t, const std::array<double, N>& x, double h) {
  auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  const auto k1 = f(t, x);
  const auto k2 = f(t + 0.5 * h, axpy(x, 0.5 * h, k1));
  const auto k3 = f(t + 0.5 * h, axpy(x, 0.5 * h, k2));
  const auto k4 = f(t + h, axpy(x, h, k3));
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace reachplan
