#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "reachplan/cli.hpp"
#include "reachplan/config.hpp"
#include "reachplan/planner.hpp"
#include "reachplan/vehicle.hpp"

namespace py = pybind11;
using namespace reachplan;

namespace {

// Runs one CLI subcommand in-process; returns (exit code, stdout, stderr).
py::tuple run(const std::vector<std::string>& args) {
  std::vector<std::string> full{"reachplan"};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : full) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

py::dict check_timing(double tau_plan, double tau_stop, double T, double T_sense, double v_max) {
  const auto r = planner::check_timing({tau_plan, tau_stop, T, T_sense, v_max});
  py::dict d;
  d["ok"] = r.ok;
  d["T_min"] = r.T_min;
  d["T_sense_min"] = r.T_sense_min;
  d["D_sense"] = r.D_sense;
  d["violations"] = r.violations;
  return d;
}

// Closed-loop unicycle under constant parameters; rows are (t, x, y, th, thdot, v).
std::vector<std::array<double, 6>> simulate_unicycle(double k1, double k2, std::array<double, 5> init,
                                                     double duration) {
  const auto tr = vehicle::simulate_unicycle(vehicle::UnicycleState::from_array(init),
                                             vehicle::ParamSchedule::constant({k1, k2}), duration);
  std::vector<std::array<double, 6>> rows;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const auto& s = tr.states[i];
    rows.push_back({tr.t[i], s.x, s.y, s.th, s.thdot, s.v});
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reachability-based safe trajectory planning";
  m.attr("__version__") = config::kToolVersion;
  m.def("run", &run, py::arg("args"), "Run a reachplan subcommand; returns (code, stdout, stderr).");
  m.def("check_timing", &check_timing, py::arg("tau_plan") = 0.5, py::arg("tau_stop") = 0.5, py::arg("T") = 1.0,
        py::arg("T_sense") = 1.5, py::arg("v_max") = 1.0);
  m.def("simulate_unicycle", &simulate_unicycle, py::arg("k1"), py::arg("k2"),
        py::arg("init") = std::array<double, 5>{0, 0, 0, 0, 0}, py::arg("duration") = 1.0);
}
