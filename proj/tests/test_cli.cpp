#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "reachplan/cli.hpp"
#include "reachplan/config.hpp"

using namespace reachplan;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "reachplan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("reachplan_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& s) {
  std::ofstream f(p);
  f << s;
}

}  // namespace

TEST_CASE("missing or unknown subcommand is a usage error") {
  CHECK(run({}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({"check-timing", "--no-such-flag"}).code == 2);
}

TEST_CASE("version flag") {
  const auto r = run({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find(config::kToolVersion) != std::string::npos);
}

TEST_CASE("check-timing defaults pass and report the minimal horizon") {
  const auto r = run({"check-timing", "--json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["ok"].get<bool>());
  CHECK(j["T_min"].get<double>() == doctest::Approx(1.0));
  CHECK(j["T_sense_min"].get<double>() == doctest::Approx(1.5));
  CHECK(j["tool_version"] == config::kToolVersion);
  CHECK(j.contains("config_hash"));
}

TEST_CASE("check-timing flags a too-short horizon as a domain failure") {
  const auto r = run({"check-timing", "--json", "--T", "0.5"});
  CHECK(r.code == 1);
  const auto j = nlohmann::json::parse(r.out);
  CHECK_FALSE(j["ok"].get<bool>());
  CHECK_FALSE(j["violations"].empty());
}

TEST_CASE("config overrides change the stamped hash") {
  const auto a = nlohmann::json::parse(run({"check-timing", "--json"}).out);
  const auto b = nlohmann::json::parse(run({"check-timing", "--json", "--tau-plan", "0.4"}).out);
  CHECK(a["config_hash"] != b["config_hash"]);
}

TEST_CASE("strict config: unknown keys and wrong types are usage errors") {
  const auto dir = scratch("cfg");
  write(dir / "unknown.json", R"({"no_such_key": 1})");
  write(dir / "type.json", R"({"batch": {"trials": "many"}})");
  write(dir / "bad.json", "{not json");
  CHECK(run({"check-timing", "--config", (dir / "unknown.json").string()}).code == 2);
  CHECK(run({"check-timing", "--config", (dir / "type.json").string()}).code == 2);
  CHECK(run({"check-timing", "--config", (dir / "bad.json").string()}).code == 2);
  CHECK(run({"check-timing", "--config", (dir / "absent.json").string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("artifacts are never overwritten") {
  const auto dir = scratch("immutable");
  const auto cert = dir / "cert.json";
  write(cert, "{}");
  const auto r = run({"compute-frs", "--out", cert.string()});
  CHECK(r.code == 2);
  std::ifstream f(cert);
  std::string s((std::istreambuf_iterator<char>(f)), {});
  CHECK(s == "{}");
  fs::remove_all(dir);
}

TEST_CASE("malformed certificate is reported, not crashed on") {
  const auto dir = scratch("badcert");
  write(dir / "cert.json", R"({"w": 3})");
  const auto r = run({"validate-frs", "--cert", (dir / "cert.json").string()});
  CHECK(r.code != 0);
  CHECK_FALSE(r.err.empty());
  fs::remove_all(dir);
}

TEST_CASE("thread count does not change the config hash") {
  const auto a = nlohmann::json::parse(run({"check-timing", "--json"}).out);
  const auto dir = scratch("threads");
  write(dir / "t.json", R"({"batch": {"threads": 4}})");
  const auto b = nlohmann::json::parse(run({"check-timing", "--json", "--config", (dir / "t.json").string()}).out);
  CHECK(a["config_hash"] == b["config_hash"]);
  fs::remove_all(dir);
}
