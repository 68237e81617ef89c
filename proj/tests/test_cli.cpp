// Drives the installed CLI binary end to end (exit codes and report files).
#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(CLI_BINARY_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string run_capture(const std::string& args) {
  std::string cmd = std::string(CLI_BINARY_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  std::size_t m;
  while ((m = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, m);
  pclose(p);
  return out;
}

}  // namespace

TEST_CASE("list prints the catalog") {
  auto text = run_capture("list");
  CHECK(text.find("paraboloid") != std::string::npos);
  CHECK(text.find("q1n") != std::string::npos);
  CHECK(text.find("calabi") != std::string::npos);
  CHECK(text.find("x_1 x_2 ... x_{n+1} = 1") != std::string::npos);

  auto js = nlohmann::json::parse(run_capture("list --json"));
  REQUIRE(js.is_array());
  CHECK(js.size() == 6);
  bool saw_calabi = false;
  for (auto& row : js)
    if (row["kind"] == "calabi") {
      saw_calabi = true;
      CHECK(row["implicit"].get<std::string>().find("n2+1") != std::string::npos);
    }
  CHECK(saw_calabi);
}

TEST_CASE("invariants command") {
  SECTION("paraboloid at the origin: flat improper sphere") {
    auto js = nlohmann::json::parse(
        run_capture("invariants --chart paraboloid --n 3 --point 0,0,0 --json"));
    CHECK(js["mean_curvature"].get<double>() == 0.0);
    CHECK(js["cubic_norm"].get<double>() == 0.0);
  }
  SECTION("calabi point summary") {
    auto js = nlohmann::json::parse(run_capture(
        "invariants --chart calabi --n1 2 --n2 2 --point 0,0,0.5,0.7 --json"));
    CHECK(js["mean_curvature"].get<double>() < 0);
    auto eig = js["shape_eigenvalues"];
    REQUIRE(eig.size() == 4);
    double lo = eig[0].get<double>(), hi = eig[3].get<double>();
    CHECK(hi - lo < 1e-8);  // S = H id
    CHECK(js["residuals"]["weingarten"].get<double>() < 1e-9);
  }
  SECTION("malformed point arity exits 2") {
    CHECK(run("invariants --chart paraboloid --n 3 --point 0,0") == 2);
    CHECK(run("invariants --chart calabi --n1 2 --n2 2 --point 0,0,0.5") == 2);
  }
  SECTION("unknown chart exits 2") {
    CHECK(run("invariants --chart torus --n 3 --point 0,0,0") == 2);
  }
  SECTION("missing dimension flags exit 2") {
    CHECK(run("invariants --chart calabi --point 0,0,0,0") == 2);
  }
}

TEST_CASE("verify command") {
  SECTION("q1n passes and writes a verdict-true report") {
    std::string out = "/tmp/blaschke_cli_q1n.json";
    std::remove(out.c_str());
    int rc = run("verify --chart q1n --n 3 --seed 7 --out " + out);
    CHECK(rc == 0);
    std::ifstream in(out);
    REQUIRE(in.good());
    auto js = nlohmann::json::parse(in);
    CHECK(js["verdict"] == true);
    CHECK(js["config"]["seed"] == 7);
    std::remove(out.c_str());
  }
  SECTION("calabi passes") {
    CHECK(run("verify --chart calabi --n1 2 --n2 2 --points 5") == 0);
  }
  SECTION("insufficient jet order exits 2") {
    CHECK(run("verify --chart calabi --n1 2 --n2 2 --jet-order 3") == 2);
  }
  SECTION("unreachable tolerance exits 1") {
    CHECK(run("verify --chart q1n --n 3 --points 3 --tol-identity 1e-30") == 1);
  }
  SECTION("csv format") {
    std::string out = "/tmp/blaschke_cli_q1n.csv";
    std::remove(out.c_str());
    int rc = run("verify --chart q1n --n 3 --points 3 --format csv --out " + out);
    CHECK(rc == 0);
    std::ifstream in(out);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "point,check,residual,tolerance,pass");
    std::remove(out.c_str());
  }
}

TEST_CASE("verify config file with flag overrides") {
  std::string cfgpath = "/tmp/blaschke_cli_cfg.txt";
  {
    std::ofstream cfg(cfgpath);
    cfg << "# suite configuration\n"
        << "chart = calabi\n"
        << "n1 = 2\n"
        << "n2 = 2\n"
        << "points = 4\n"
        << "seed = 11\n";
  }
  CHECK(run("verify --config " + cfgpath) == 0);

  std::string out = "/tmp/blaschke_cli_cfg_out.json";
  std::remove(out.c_str());
  CHECK(run("verify --config " + cfgpath + " --seed 99 --out " + out) == 0);
  std::ifstream in(out);
  REQUIRE(in.good());
  auto js = nlohmann::json::parse(in);
  CHECK(js["config"]["seed"] == 99);  // flag wins over file
  CHECK(js["config"]["points"] == 4);
  std::remove(out.c_str());
  std::remove(cfgpath.c_str());

  SECTION("bad config key exits 2") {
    std::string bad = "/tmp/blaschke_cli_bad.txt";
    {
      std::ofstream cfg(bad);
      cfg << "charts = q1n\n";
    }
    CHECK(run("verify --config " + bad) == 2);
    std::remove(bad.c_str());
  }
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("verify") == 2);  // no chart anywhere
}
