#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "acceptance.hpp"
#include "commands.hpp"
#include "doctest.h"
#include "record.hpp"
#include "run_config.hpp"
#include "wavechaos/errors.hpp"

using namespace wavechaos;
using namespace wavechaos::cli;
namespace fs = std::filesystem;

namespace {

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "wavechaos");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Drops comment lines, which carry the config hash.
std::string csv_body(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + '\n';
  return out;
}

fs::path scratch(const std::string& name) { return fs::temp_directory_path() / ("wavechaos_cli_" + name); }

}  // namespace

TEST_CASE("records round trip in both formats") {
  Record r;
  r.command = "chaos-norm";
  r.config_hash = "0123456789abcdef";
  r.set("value", 1.0 / 3.0);
  r.set("samples", 1000LL);
  r.set("converged", true);
  r.set("noise", "family=white;d=1");
  r.columns = {"n", "value"};
  r.rows = {{1.0, 0.1 + 0.2}, {2.0, std::nextafter(1.0, 2.0)}};
  for (Format f : {Format::csv, Format::text}) {
    const Record back = parse(render(r, f), f);
    CHECK(back == r);
  }
  CHECK(r.get("converged") == "true");
  CHECK(std::stod(r.get("value")) == 1.0 / 3.0);
  CHECK_THROWS_AS((void)r.get("missing"), ConfigError);
  CHECK(format_from_string("structured-text") == Format::text);
  CHECK_THROWS_AS((void)format_from_string("xml"), ConfigError);
}

TEST_CASE("config hash is stable and value-based") {
  RunConfig a = default_config("chaos-norm");
  RunConfig b = default_config("chaos-norm");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);

  apply_config_document(a, json::parse(R"({"params": {"t": 1}})"));
  apply_config_document(b, json::parse(R"({"params": {"t": 1.0}})"));
  CHECK(a.hash() == b.hash());

  apply_config_document(b, json::parse(R"({"params": {"t": 2.0}})"));
  CHECK(a.hash() != b.hash());
  RunConfig c = a;
  c.seed += 1;
  CHECK(c.hash() != a.hash());
  // The output path does not change what is computed.
  c = a;
  c.out = "elsewhere.csv";
  CHECK(c.hash() == a.hash());
}

TEST_CASE("config documents are strict") {
  RunConfig c = default_config("series");
  CHECK_THROWS_AS(apply_config_document(c, json::parse(R"({"params": {"thetaa": 1}})")), ConfigError);
  CHECK_THROWS_AS(apply_config_document(c, json::parse(R"({"colour": "red"})")), ConfigError);
  CHECK_THROWS_AS(apply_config_document(c, json::parse(R"({"params": {"N": "six"}})")), ConfigError);
  CHECK_THROWS_AS(apply_config_document(c, json::parse(R"({"params": {"N": 2.5}})")), ConfigError);
  CHECK_THROWS_AS(apply_config_document(c, json::parse(R"({"command": "tn"})")), ConfigError);
  CHECK_THROWS_AS((void)default_config("nonsense"), ConfigError);

  const auto path = scratch("bad.json");
  std::ofstream(path) << R"({"params": {"unknown": 1}})";
  CHECK(invoke({"series", "--config", path.string()}) == 2);
  fs::remove(path);
}

TEST_CASE("exit codes") {
  CHECK(invoke({"series", "--family", "white", "--d", "1", "--theta", "0", "--t", "5"}) == 0);
  CHECK(invoke({"series", "--no-such-flag"}) == 2);
  CHECK(invoke({"series", "--family", "pink"}) == 2);
  CHECK(invoke({"asymptote", "--alpha", "3"}) == 2);
  CHECK(invoke({"reproduce", "--section", "13"}) == 2);
}

TEST_CASE("zero coupling gives a unit second moment") {
  RunConfig c = default_config("series");
  apply_config_document(c, json::parse(R"({"params": {"family": "white", "d": 1, "theta": 0, "t": 5}})"));
  const Outcome o = execute(c);
  CHECK(o.status == 0);
  CHECK(std::stod(o.record.get("value")) == 1.0);
}

TEST_CASE("critical times at the Sobolev bound") {
  RunConfig c = default_config("critical-time");
  apply_config_document(c, json::parse(R"({"params": {"theta": 1, "p": 2, "M-bound": true}})"));
  const Outcome o = execute(c);
  CHECK(o.status == 0);
  constexpr double pi = std::numbers::pi;
  CHECK(std::stod(o.record.get("T_p")) == doctest::Approx(2.0 * pi * pi).epsilon(1e-12));
  CHECK(std::stod(o.record.get("T_p_prime")) == doctest::Approx(4.0 * pi).epsilon(1e-12));
  CHECK(o.record.get("chain_holds") == "true");
}

TEST_CASE("repeated runs write identical CSV bodies") {
  const auto a = scratch("a.csv"), b = scratch("b.csv");
  const std::vector<std::string> args{"chaos-norm", "--family", "white",     "--d",  "1",        "--n", "2",
                                      "--t",        "1",        "--samples", "2000", "--format", "csv"};
  auto with_out = [&](const fs::path& p) {
    auto v = args;
    v.push_back("--out");
    v.push_back(p.string());
    return v;
  };
  REQUIRE(invoke(with_out(a)) == 0);
  REQUIRE(invoke(with_out(b)) == 0);
  const std::string first = slurp(a), second = slurp(b);
  CHECK(!csv_body(first).empty());
  CHECK(csv_body(first) == csv_body(second));
  CHECK(first == second);
  CHECK(!fs::exists(a.string() + ".tmp"));
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("acceptance section parsing") {
  CHECK(parse_sections("all").size() == 12);
  CHECK(parse_sections("3,7") == std::vector<int>{3, 7});
  CHECK_THROWS_AS((void)parse_sections("0"), ConfigError);
  CHECK_THROWS_AS((void)parse_sections("2,x"), ConfigError);
  const auto quick = run_acceptance({6, 8});
  REQUIRE(quick.size() == 2);
  CHECK(quick[0].passed);
  CHECK(quick[1].passed);
  CHECK(format_line(quick[0]).rfind("[PASS]  6", 0) == 0);
}
