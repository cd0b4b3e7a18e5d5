#include "reachplan/safeset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reachplan::safeset {

using poly::Polynomial;

double Obstacle::length() const { return std::hypot(b[0] - a[0], b[1] - a[1]); }

double Footprint::circumradius() const { return std::hypot(half_length, half_width); }

LocalObstacleSet localize(const std::vector<Obstacle>& obstacles, const Pose& pose, Vec2 origin) {
  const double c = std::cos(pose.th), s = std::sin(pose.th);
  auto to_local = [&](const Vec2& p) -> Vec2 {
    const double dx = p[0] - pose.x, dy = p[1] - pose.y;
    return {c * dx + s * dy + origin[0], -s * dx + c * dy + origin[1]};
  };
  LocalObstacleSet out;
  for (const auto& o : obstacles) {
    for (double v : {o.a[0], o.a[1], o.b[0], o.b[1]})
      if (!std::isfinite(v)) throw std::invalid_argument("localize: non-finite obstacle coordinate");
    const int n = std::max(1, static_cast<int>(std::ceil(o.length() / kSegmentSpacing - 1e-12)));
    if (o.length() == 0.0) {
      out.points.push_back(to_local(o.a));
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      const double u = static_cast<double>(i) / n;
      out.points.push_back(to_local({o.a[0] + u * (o.b[0] - o.a[0]), o.a[1] + u * (o.b[1] - o.a[1])}));
    }
  }
  return out;
}

std::vector<Vec2> dilation_offsets(const Footprint& fp, double spacing) {
  const double R = fp.circumradius() + 0.5 * spacing;
  const double hw = fp.half_width, hl = fp.half_length;
  std::vector<Vec2> out;
  const int rows = std::max(1, static_cast<int>(std::ceil(R / hw - 1e-12)));
  for (int j = 0; j < rows; ++j) {
    const double yc = rows == 1 ? 0.0 : -R + hw + j * (2.0 * R - 2.0 * hw) / (rows - 1);
    // widest chord of the disk inside this row's band
    const double ymin = std::max(0.0, std::abs(yc) - hw);
    const double xr = std::sqrt(std::max(0.0, R * R - ymin * ymin));
    const int cols = std::max(1, static_cast<int>(std::ceil(xr / hl - 1e-12)));
    for (int i = 0; i < cols; ++i) {
      const double xc = cols == 1 ? 0.0 : -xr + hl + i * (2.0 * xr - 2.0 * hl) / (cols - 1);
      out.push_back({xc, yc});
    }
  }
  return out;
}

LocalObstacleSet dilate(const LocalObstacleSet& pts, const Footprint& fp, double spacing,
                        const std::vector<poly::Interval>& keep) {
  const auto offs = dilation_offsets(fp, spacing);
  LocalObstacleSet out;
  for (const auto& p : pts.points)
    for (const auto& o : offs) {
      const Vec2 q{p[0] + o[0], p[1] + o[1]};
      if (keep.size() >= 2 && (!keep[0].contains(q[0]) || !keep[1].contains(q[1]))) continue;
      out.points.push_back(q);
    }
  return out;
}

double SafeSetPoly::operator()(std::span<const double> k) const {
  std::vector<double> z(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) z[i] = (k[i] - maps[i].offset) / maps[i].scale;
  return h.eval(z);
}

double safe_margin(const SafeSetPoly& h, std::span<const double> k) { return h(k); }

nlohmann::json SafeSetPoly::to_json() const {
  nlohmann::json j;
  j["h"] = poly::to_json(h);
  auto jm = nlohmann::json::array();
  for (std::size_t i = 0; i < maps.size(); ++i) jm.push_back({{"var", params[i]}, {"scale", maps[i].scale}, {"offset", maps[i].offset}});
  j["scaling_maps"] = jm;
  j["fallback"] = fallback;
  j["obstacle_points"] = obstacle_points;
  j["diagnostics"] = diagnostics;
  return j;
}

SafeSetPoly SafeSetPoly::from_json(const nlohmann::json& j) {
  SafeSetPoly s;
  s.h = poly::polynomial_from_json(j.at("h"));
  for (const auto& m : j.at("scaling_maps")) {
    s.params.push_back(m.at("var").get<std::string>());
    s.maps.push_back({m.at("scale").get<double>(), m.at("offset").get<double>()});
  }
  s.h = s.h.reembed(poly::VariableSpace(s.params));
  s.fallback = j.value("fallback", false);
  s.obstacle_points = j.value("obstacle_points", 0);
  s.diagnostics = j.value("diagnostics", nlohmann::json::object());
  return s;
}

SafeSetPoly fallback_h(const frs::Certificate& cert) {
  SafeSetPoly s;
  s.params = cert.params;
  const std::size_t first = 1 + cert.states.size();
  for (std::size_t i = 0; i < cert.params.size(); ++i) s.maps.push_back(cert.maps[first + i]);
  s.h = Polynomial::constant(poly::VariableSpace(cert.params), -1.0);
  s.fallback = true;
  return s;
}

SafeSetPoly intersect(const frs::Certificate& cert, const LocalObstacleSet& obs, const IntersectOptions& opt) {
  SafeSetPoly out = fallback_h(cert);
  out.fallback = false;
  out.obstacle_points = static_cast<int>(obs.points.size());
  const auto& sp = cert.space;
  const std::size_t npos = std::min<std::size_t>(2, cert.states.size());
  const std::size_t first_param = 1 + cert.states.size();
  std::vector<std::size_t> kvars, free_vars;
  for (std::size_t i = npos; i < cert.states.size(); ++i) free_vars.push_back(1 + i);
  for (std::size_t i = 0; i < cert.params.size(); ++i) kvars.push_back(first_param + i);
  free_vars.insert(free_vars.end(), kvars.begin(), kvars.end());

  const int wdeg = cert.w.degree();
  const int two_l = std::max(opt.degree + opt.degree % 2, wdeg + wdeg % 2);

  sos::SosProgram prog(sp);
  const sos::LinPoly h = prog.add_polynomial(kvars, opt.degree);
  const auto one = Polynomial::constant(sp, 1.0);
  const auto point_gens = sos::unit_box_generators(sp, free_vars);
  int n = 0;
  for (const auto& p : obs.points) {
    std::vector<std::pair<std::size_t, double>> fix;
    for (std::size_t i = 0; i < npos; ++i) fix.emplace_back(1 + i, (p[i] - cert.maps[1 + i].offset) / cert.maps[1 + i].scale);
    const Polynomial wp = cert.w.fix(fix);
    prog.add_sos("point " + std::to_string(n++), sos::LinPoly(one - wp) - h, free_vars, point_gens, two_l);
  }
  prog.add_sos("h <= 1", sos::LinPoly(one) - h, kvars, sos::unit_box_generators(sp, kvars), two_l);

  std::vector<std::string> knames;
  for (auto k : kvars) knames.push_back(sp.name(k));
  const poly::VariableSpace ksp(knames);
  const auto mom_k = poly::box_moments(ksp, poly::Box(std::vector<poly::Interval>(kvars.size(), {-1.0, 1.0})), opt.degree);
  poly::MomentVector mom{sp, opt.degree, {}};
  for (const auto& [e, val] : mom_k.values) {
    poly::Exponent full(sp.count(), 0);
    for (std::size_t i = 0; i < kvars.size(); ++i) full[kvars[i]] = e[i];
    mom.values[full] = val;
  }
  prog.minimize_integral(h, mom, -1.0);

  const auto sol = prog.solve(opt.solver);
  nlohmann::json d;
  d["status"] = sdp::to_string(sol.status);
  d["iterations"] = sol.raw.iterations;
  d["two_l"] = two_l;
  if (sol.status != sdp::Status::optimal) {
    auto fb = fallback_h(cert);
    fb.obstacle_points = out.obstacle_points;
    fb.diagnostics = d;
    return fb;
  }
  // Shift h down by a bound on what the numerical residuals could hide:
  // on the unit box every basis monomial is at most 1 in magnitude.
  double shift = 0.0;
  for (const auto& r : sol.reports) {
    const double slack = (r.max_residual + std::max(0.0, -r.min_gram_eig)) * r.rows * (1.0 + r.gram_blocks);
    shift = std::max(shift, slack);
  }
  const Polynomial hv = h.evaluate(sol.values) - shift;
  out.h = hv.reembed(ksp);
  d["objective"] = -sol.objective;
  d["residual_shift"] = shift;
  out.diagnostics = d;
  return out;
}

std::vector<Obstacle> obstacles_from_json(const nlohmann::json& j) {
  const auto& arr = j.is_object() ? j.at("obstacles") : j;
  std::vector<Obstacle> out;
  for (const auto& o : arr) {
    Obstacle ob;
    if (o.contains("point")) {
      ob = Obstacle::point({o["point"].at(0).get<double>(), o["point"].at(1).get<double>()});
    } else {
      ob = Obstacle::segment({o.at("a").at(0).get<double>(), o.at("a").at(1).get<double>()},
                             {o.at("b").at(0).get<double>(), o.at("b").at(1).get<double>()});
    }
    ob.sensed_time = o.value("sensed_time", 0.0);
    out.push_back(ob);
  }
  return out;
}

nlohmann::json obstacles_to_json(const std::vector<Obstacle>& obs) {
  auto arr = nlohmann::json::array();
  for (const auto& o : obs) arr.push_back({{"a", {o.a[0], o.a[1]}}, {"b", {o.b[0], o.b[1]}}, {"sensed_time", o.sensed_time}});
  return {{"obstacles", arr}};
}

}  // namespace reachplan::safeset
