#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "reachplan/simworld.hpp"

namespace reachplan::config {

inline constexpr const char* kToolVersion = "0.1.0";

struct ValidationConfig {
  int trajectories = 1000;
  int unicycle_trajectories = 100;
  double tol = 1e-4;
  std::uint64_t seed = 11;
  /// trajectories used by the gate in front of simulate/batch
  int gate_trajectories = 100;
};

struct RunConfig {
  simworld::WorldConfig world;
  int d_dec = 4;
  int two_l = 0;  // 0 picks the smallest valid relaxation degree
  sdp::SolverOptions frs_solver = frs::frs_solver_defaults();
  ValidationConfig validation;
  std::uint64_t seed = 1;
  int trials = 100;
  int threads = 1;
  std::string out_dir = "out";
};

nlohmann::json to_json(const RunConfig& c);

/// Overlays the keys present in `j`; unknown keys and wrong types throw
/// std::invalid_argument naming the offending path.
void merge(RunConfig& c, const nlohmann::json& j);

/// Parses a JSON config file over the defaults.
RunConfig load(const std::string& path);

/// Rejects inconsistent values (empty boxes, non-positive steps, ...).
void validate(const RunConfig& c);

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::string hash(const RunConfig& c);
/// Hash of the inputs that determine the FRS certificate.
std::string frs_hash(const RunConfig& c);

}  // namespace reachplan::config
