#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scorekit/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using scorekit::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("scorekit_cli_" + std::to_string(std::random_device{}()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  std::string file(const std::string& name, const std::string& text = "") const {
    const auto p = path_ / name;
    if (!text.empty()) std::ofstream(p) << text;
    return p.string();
  }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("score command") {
  const auto r = invoke({"score", "--density", "normal", "--at", "2"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["phi"] == -2.0);
  CHECK(j["psi"] == -3.0);

  const auto grid = json::parse(invoke({"score", "--density", "exponential", "--grid", "1", "3", "3"}).out);
  REQUIRE(grid["points"].size() == 3);
  for (const auto& p : grid["points"]) CHECK(p["psi"].get<double>() == 1.0 - p["x"].get<double>());
}

TEST_CASE("varbound and fisher commands") {
  const auto v = json::parse(invoke({"varbound", "--density", "exponential", "--g", "x"}).out);
  CHECK(v["variance"].get<double>() == doctest::Approx(1.0));
  for (const auto& b : v["bounds"]) {
    if (b["name"] == "cacoullos") CHECK(b["value"].get<double>() == doctest::Approx(2.0));
  }

  TempDir dir;
  const auto model = dir.file("skew-normal.toml", "[base]\nfamily = \"normal\"\n[arg]\nkind = \"identity\"\n");
  const auto f = json::parse(invoke({"fisher", "--model", model}).out);
  CHECK(f["rank"] == 2);
  CHECK(f["singular"] == true);
  CHECK(f["matrix"].size() == 9);
}

TEST_CASE("exit codes and error reports") {
  const auto unknown = invoke({"score", "--density", "cauchy", "--at", "1"});
  CHECK(unknown.code == scorekit::cli::kValidationFailure);
  CHECK(json::parse(unknown.err)["error"] == "UnknownFamily");
  CHECK(unknown.out.empty());

  const auto flag = invoke({"score", "--bogus"});
  CHECK(flag.code == scorekit::cli::kValidationFailure);
  CHECK(json::parse(flag.err)["error"] == "ParseError");

  const auto domain = invoke({"score", "--density", "laplace", "--at", "0"});
  CHECK(domain.code == scorekit::cli::kValidationFailure);
  CHECK(json::parse(domain.err)["error"] == "NonDifferentiablePoint");

  const auto nocross = invoke({"mle-verify", "--density", "exponential", "--kind", "location", "--sample",
                               TempDir().file("unused.csv", "1\n")});
  CHECK(nocross.code != 0);

  const auto numerical = invoke({"varbound", "--density", "normal", "--g", "exp(x^2)"});
  CHECK(numerical.code == scorekit::cli::kNumericalFailure);
  CHECK(json::parse(numerical.err)["error"] == "NonFinite");

  CHECK(invoke({}).code == scorekit::cli::kValidationFailure);
}

TEST_CASE("config files drive commands and flags win") {
  TempDir dir;
  const auto cfg = dir.file("run.toml", "[score]\ndensity = \"logistic\"\nat = [0.5]\n");
  const auto a = json::parse(invoke({"--config", cfg}).out);
  CHECK(a["density"] == "logistic");
  CHECK(a["x"] == 0.5);
  const auto b = json::parse(invoke({"--config", cfg, "score", "--density", "normal"}).out);
  CHECK(b["density"] == "normal");
  CHECK(b["phi"] == -0.5);
}

TEST_CASE("csv output and the side-channel log") {
  TempDir dir;
  const auto csv = invoke({"--format", "csv", "score", "--density", "normal", "--grid", "-1", "1", "3"});
  REQUIRE(csv.code == 0);
  std::istringstream lines(csv.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "x,phi,psi,source");

  const auto out = dir.file("o.json");
  const auto log = dir.file("run.log");
  CHECK(invoke({"--output", out, "--log", log, "score", "--density", "normal", "--at", "1"}).code == 0);
  CHECK(json::parse(slurp(out))["phi"] == -1.0);
  CHECK(!slurp(log).empty());
}

TEST_CASE("identical runs give identical bytes") {
  const std::vector<std::vector<std::string>> runs = {
      {"stein-gof", "--density", "normal", "--draw", "laplace", "--n", "5000", "--seed", "3"},
      {"mle-verify", "--density", "logistic", "--trials", "50", "--n", "7", "--seed", "11"},
      {"fisher", "--base", "logistic", "--arg", "skew_t", "--cdf", "student", "--cdf-nu", "6"}};
  for (const auto& args : runs) {
    const auto a = invoke(args);
    const auto b = invoke(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
}

TEST_CASE("every module operation is reachable from a command") {
  std::set<std::string> covered;
  for (const auto& c : scorekit::cli::command_table()) {
    if (c.example.empty()) continue;
    const auto r = invoke(c.example);
    CAPTURE(c.name);
    CAPTURE(r.err);
    CHECK(r.code == 0);
    CHECK(json::accept(r.out));
    covered.insert(c.operations.begin(), c.operations.end());
  }
  TempDir dir;
  const auto suite = (dir.path() / "suite").string();
  REQUIRE(invoke({"reproduce", "--dir", suite}).code == 0);
  for (const auto& c : scorekit::cli::command_table()) {
    if (c.name == "reproduce") covered.insert(c.operations.begin(), c.operations.end());
  }
  for (const auto& op : scorekit::cli::module_operations()) {
    CAPTURE(op);
    CHECK(covered.count(op) == 1);
  }
}

TEST_CASE("reproduction suite passes") {
  TempDir dir;
  const auto suite = (dir.path() / "suite").string();
  REQUIRE(invoke({"reproduce", "--dir", suite}).code == 0);
  CHECK(fs::exists(fs::path(suite) / "manifest.json"));
  const auto r = invoke({"run-suite", "--dir", suite});
  CAPTURE(r.out);
  CAPTURE(r.err);
  CHECK(r.code == 0);
}

}  // TEST_SUITE
