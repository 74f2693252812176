#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("isoblock_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// runs the CLI with stdout captured to a file; returns the exit code
int run(const std::string& args, std::string* out = nullptr) {
  const fs::path capture = scratch() / "stdout.txt";
  const std::string cmd =
      std::string("\"") + ISOBLOCK_CLI + "\" " + args + " > \"" + capture.string() + "\" 2> \"" + (scratch() / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(capture);
    std::stringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("generate and estimate") {
  const fs::path data = scratch() / "data.csv";
  REQUIRE(run("generate --function F1 --sides 6 --sigma 0.5 --seed 3 --output " + data.string()) == 0);
  CHECK(lines(read(data)) == 1 + 36);

  std::string out;
  REQUIRE(run("estimate --input " + data.string() + " --x0 0.5,0.5", &out) == 0);
  CHECK(out.rfind("x_1,x_2,fitted\n", 0) == 0);
  CHECK(lines(out) == 2);

  REQUIRE(run("estimate --input " + data.string() + " --grid", &out) == 0);
  CHECK(lines(out) == 1 + 36);

  CHECK(run("estimate --input " + (scratch() / "missing.csv").string() + " --x0 0.5,0.5") == 2);
  CHECK(run("estimate --input " + data.string() + " --x0 0.5") == 2);
}

TEST_CASE("rates") {
  std::string out;
  REQUIRE(run("rates --alpha 1,inf,inf,inf --beta 1/4,1/4,1/4,1/4", &out) == 0);
  json j = json::parse(out);
  CHECK(j["kappa_star"] == 2);
  CHECK(j["rate_exponent"].get<double>() == doctest::Approx(0.375));
  CHECK(j["kappa_star_fixed_point"] == 2);

  REQUIRE(run("rates --alpha 1,inf,inf --beta 1/3,1/3,1/3", &out) == 0);
  j = json::parse(out);
  CHECK(j["unique"] == false);
  CHECK(j["kappa_star_fixed_point"].is_null());

  REQUIRE(run("rates --alpha 1,1 --beta 1/2,1/2 --derivs '{\"1,0\": 2.718281828459045, \"0,1\": 2.718281828459045}'",
              &out) == 0);
  j = json::parse(out);
  CHECK(j["K"].get<double>() == doctest::Approx(1.16582).epsilon(1e-5));

  REQUIRE(run("rates --alpha 1,3 --design random", &out) == 0);
  CHECK(json::parse(out)["kappa_star"] == 1);

  CHECK(run("rates --alpha 2,1 --beta 1/2,1/2") == 2);
  CHECK(run("rates --alpha 1,1") == 2);
  CHECK(run("rates --bogus") == 2);
}

TEST_CASE("limit samplers") {
  std::string out;
  REQUIRE(run("simulate-limit --alpha 1 --M 20 --m 16 --seed 4", &out) == 0);
  CHECK(lines(out) == 21);
  std::string again;
  REQUIRE(run("simulate-limit --alpha 1 --M 20 --m 16 --seed 4", &again) == 0);
  CHECK(out == again);
  REQUIRE(run("simulate-limit --alpha 3,3 --drift full --derivs '{\"3,0\": 6, \"0,3\": 6, \"2,1\": 2, \"1,2\": 2}' "
              "--M 3 --m 8",
              &out) == 0);
  CHECK(lines(out) == 4);
  CHECK(run("simulate-limit --alpha 1 --m 4") == 2);
  CHECK(run("simulate-limit --alpha 1 --drift full") == 2);

  REQUIRE(run("chernoff --M 10 --seed 2", &out) == 0);
  CHECK(lines(out) == 11);
  CHECK(run("chernoff --M 10 --T 1") == 2);
}

TEST_CASE("minimax") {
  std::string out;
  REQUIRE(run("minimax --profile '{\"function\": \"identity\"}' --n-list 1000,10000 --sigma 1", &out) == 0);
  const json j = json::parse(out);
  REQUIRE(j["rows"].size() == 2);
  CHECK(j["rows"][1]["n_l2_squared"].get<double>() <= 2.5);
  CHECK(run("minimax --profile '{\"function\": \"F5\"}' --n-list 1000,10000") == 3);
  CHECK(run("minimax --profile '{\"function\": \"identity\"}' --n-list 1000 --sigma 0") == 3);
  CHECK(run("minimax --profile '{\"nothing\": 1}' --n-list 1000") == 2);
}

TEST_CASE("experiment") {
  const fs::path config = scratch() / "config.json";
  std::ofstream(config) << R"({"functions": ["exp-sum", "lin-exp"], "lattice_sides": [6, 8, 10], "B": 4, "seed": 1})";
  const fs::path dir = scratch() / "run";
  REQUIRE(run("experiment --config " + config.string() + " --output-dir " + dir.string()) == 0);
  CHECK(lines(read(dir / "cdf.csv")) == 1 + 2 * 3 * 4);
  CHECK(lines(read(dir / "qq.csv")) == 1 + 3 * 4);
  CHECK(lines(read(dir / "rates.csv")) == 1 + 2 * 3);
  const json manifest = json::parse(read(dir / "manifest.json"));
  CHECK(manifest["rows"] == 24);
  CHECK(manifest["seed"] == 1);

  const std::string first = read(dir / "cdf.csv");
  REQUIRE(run("experiment --config " + config.string() + " --output-dir " + dir.string()) == 0);
  CHECK(read(dir / "cdf.csv") == first);

  std::ofstream(config) << R"({"functions": ["F2"], "lattice_sides": [15, 17, 19], "B": 2, "sigma": 0})";
  CHECK(run("experiment --config " + config.string() + " --output-dir " + dir.string()) == 3);
  std::ofstream(config) << R"({"functions": ["F2"], "lattice_sides": [2], "B": 2})";
  CHECK(run("experiment --config " + config.string() + " --output-dir " + dir.string()) == 2);
  std::ofstream(config) << "{not json";
  CHECK(run("experiment --config " + config.string() + " --output-dir " + dir.string()) == 2);
  fs::remove_all(scratch());
}
