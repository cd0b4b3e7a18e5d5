#include "reachplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace reachplan::planner {

TimingReport check_timing(const TimingConfig& cfg) {
  TimingReport r;
  r.T_min = cfg.tau_plan + cfg.tau_stop;
  r.T_sense_min = r.T_min + cfg.tau_plan;
  r.D_sense = cfg.v_max * cfg.T_sense;
  for (double v : {cfg.tau_plan, cfg.tau_stop, cfg.T, cfg.T_sense, cfg.v_max})
    if (!(v > 0.0)) {
      r.ok = false;
      r.violations.push_back("all timing entries must be positive");
      break;
    }
  if (cfg.tau_plan + cfg.tau_stop > cfg.T) {
    std::ostringstream os;
    os << "tau_plan + tau_stop = " << cfg.tau_plan + cfg.tau_stop << " exceeds T = " << cfg.T;
    r.ok = false;
    r.violations.push_back(os.str());
  }
  if (cfg.T + cfg.tau_plan > cfg.T_sense) {
    std::ostringstream os;
    os << "T + tau_plan = " << cfg.T + cfg.tau_plan << " exceeds T_sense = " << cfg.T_sense;
    r.ok = false;
    r.violations.push_back(os.str());
  }
  return r;
}

std::array<double, 3> dubins_endpoint(const TrajParams& k, double T) {
  const double a = k.k1 * T;
  if (std::abs(k.k1) < 1e-8) return {k.k2 * T, 0.5 * k.k2 * k.k1 * T * T, a};
  return {k.k2 * std::sin(a) / k.k1, k.k2 * (1.0 - std::cos(a)) / k.k1, a};
}

double plan_cost(const TrajParams& k, const Vec2& goal_local, const CostSpec& cost, const TrajParams& k_prev, double T) {
  const auto e = dubins_endpoint(k, T);
  const double dx = e[0] - goal_local[0], dy = e[1] - goal_local[1];
  double J = cost.w_goal * (dx * dx + dy * dy) + cost.w_speed * (k.k2 - cost.v_des) * (k.k2 - cost.v_des);
  if (cost.w_change > 0.0) {
    const double a = k.k1 - k_prev.k1, b = k.k2 - k_prev.k2;
    J += cost.w_change * (a * a + b * b);
  }
  return J;
}

TrajParams braking_plan(const TrajParams& k) { return {k.k1, 0.0}; }

PlanResult optimize(const safeset::SafeSetPoly& h, const poly::Box& K, const CostSpec& cost, const Pose& pose,
                    const TrajParams& k_prev, const OptimizerOptions& opt) {
  const double c = std::cos(pose.th), s = std::sin(pose.th);
  const double gx = cost.goal[0] - pose.x, gy = cost.goal[1] - pose.y;
  const Vec2 goal_local{c * gx + s * gy, -s * gx + c * gy};

  // work in scaled z in [-1,1]^2
  auto to_k = [&](const std::array<double, 2>& z) {
    return TrajParams{K[0].center() + 0.5 * K[0].width() * z[0], K[1].center() + 0.5 * K[1].width() * z[1]};
  };
  auto hval = [&](const std::array<double, 2>& z) {
    const auto k = to_k(z);
    const std::array<double, 2> kk{k.k1, k.k2};
    return h(kk);
  };
  auto J = [&](const std::array<double, 2>& z) { return plan_cost(to_k(z), goal_local, cost, k_prev, opt.T); };

  PlanResult res;
  // feasibility prescan
  std::vector<std::array<double, 2>> feasible;
  for (int i = 0; i < opt.prescan; ++i)
    for (int j = 0; j < opt.prescan; ++j) {
      const std::array<double, 2> z{-1.0 + 2.0 * i / (opt.prescan - 1), -1.0 + 2.0 * j / (opt.prescan - 1)};
      if (hval(z) > 0.0) feasible.push_back(z);
    }
  if (feasible.empty()) {
    res.braking = true;
    res.k = braking_plan(k_prev);
    res.reason = "no feasible parameters on the prescan grid";
    return res;
  }

  auto project = [](std::array<double, 2> z) {
    for (auto& v : z) v = std::clamp(v, -1.0, 1.0);
    return z;
  };
  double best_J = std::numeric_limits<double>::infinity();
  std::array<double, 2> best{};
  const int n = opt.starts_per_axis;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::array<double, 2> z{n == 1 ? 0.0 : -2.0 / 3.0 + (4.0 / 3.0) * a / (n - 1),
                              n == 1 ? 0.0 : -2.0 / 3.0 + (4.0 / 3.0) * b / (n - 1)};
      if (hval(z) <= 0.0) {
        // nearest strictly feasible prescan point
        double dmin = std::numeric_limits<double>::infinity();
        std::array<double, 2> zn{};
        for (const auto& f : feasible) {
          const double d = std::hypot(f[0] - z[0], f[1] - z[1]);
          if (d < dmin) {
            dmin = d;
            zn = f;
          }
        }
        z = zn;
      }
      for (double mu : {1e-2, 1e-3, 1e-4, 1e-5}) {
        auto phi = [&](const std::array<double, 2>& q) {
          const double hv = hval(q);
          return hv <= 0.0 ? std::numeric_limits<double>::infinity() : J(q) - mu * std::log(hv);
        };
        double fz = phi(z);
        for (int it = 0; it < opt.max_iterations; ++it) {
          std::array<double, 2> g{};
          for (int d = 0; d < 2; ++d) {
            auto zp = z, zm = z;
            zp[static_cast<std::size_t>(d)] += opt.fd_step;
            zm[static_cast<std::size_t>(d)] -= opt.fd_step;
            const double fp = phi(zp), fm = phi(zm);
            g[static_cast<std::size_t>(d)] = std::isfinite(fp) && std::isfinite(fm) ? (fp - fm) / (2.0 * opt.fd_step) : 0.0;
          }
          const double gn = std::hypot(g[0], g[1]);
          if (gn < 1e-9) break;
          double step = 0.5 / std::max(1.0, gn);
          bool moved = false;
          while (step > 1e-10) {
            const auto zn = project({z[0] - step * g[0], z[1] - step * g[1]});
            const double fn = phi(zn);
            if (fn < fz) {
              moved = std::hypot(zn[0] - z[0], zn[1] - z[1]) > 1e-12;
              z = zn;
              fz = fn;
              break;
            }
            step *= 0.5;
          }
          if (!moved) break;
        }
      }
      const double jz = J(z);
      if (hval(z) >= 0.0 && jz < best_J) {
        best_J = jz;
        best = z;
      }
    }
  if (!std::isfinite(best_J)) {
    res.braking = true;
    res.k = braking_plan(k_prev);
    res.reason = "optimizer found no feasible local minimum";
    return res;
  }
  res.k = to_k(best);
  // exact box membership after the affine map
  res.k.k1 = std::clamp(res.k.k1, K[0].lo, K[0].hi);
  res.k.k2 = std::clamp(res.k.k2, K[1].lo, K[1].hi);
  const std::array<double, 2> kk{res.k.k1, res.k.k2};
  res.h_value = h(kk);
  res.cost = plan_cost(res.k, goal_local, cost, k_prev, opt.T);
  if (res.h_value < 0.0) {
    res.braking = true;
    res.k = braking_plan(k_prev);
    res.reason = "returned parameters failed the final safety check";
  }
  return res;
}

}  // namespace reachplan::planner
