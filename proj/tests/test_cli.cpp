#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bosegas/minimize.hpp"
#include "bosegas/thermo.hpp"

using namespace bosegas;
using nlohmann::json;

namespace {

struct RunResult {
  std::string out;
  int code = -1;
};

// run the installed binary through the shell, capturing stdout
RunResult run(const std::string& args) {
  std::string cmd = std::string(BOSEGAS_CLI_PATH) + " " + args;
  RunResult r;
  FILE* f = popen(cmd.c_str(), "r");
  REQUIRE(f != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
  int status = pclose(f);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string l;
  while (std::getline(is, l)) out.push_back(l);
  return out;
}

const double kBnorm = 1.0 / (4.0 * 3.14159265358979324);  // the --beta-norm value

}  // namespace

TEST_CASE("sweep emits the documented schema byte for byte") {
  RunResult r = run(
      "sweep --model ideal --d 3 --beta-norm --mu-start -1 --mu-stop 0 "
      "--points 3 2>/dev/null");
  CHECK(r.code == 0);
  const char* golden =
      "# subcommand=sweep model=ideal d=3 beta=0.079577471545947673 mu=0 "
      "alpha=0 mu_eff=0 a=0 b=0 k_max=32 tol=1e-13 threads=1 format=csv\n"
      "# grid: mu_eff from -1 to 0 in 3 points\n"
      "mu_eff,pressure,dp_dmu,condensate,regime,model,d,beta,a,b\n"
      "-1,14.854030578558772,1.7279305951802855,0,subcritical,ideal,3,"
      "0.079577471545947673,0,0\n"
      "-0.5,15.772641612796892,1.963209938765808,0,subcritical,ideal,3,"
      "0.079577471545947673,0,0\n"
      "0,16.857626049055209,2.6123753486854882,0,critical,ideal,3,"
      "0.079577471545947673,0,0\n";
  CHECK(r.out == golden);
}

TEST_CASE("csv floats round-trip to the exact library doubles") {
  RunResult r = run(
      "pressure --model cmf --d 3 --beta-norm --mu -0.5 --a 2 2>/dev/null");
  REQUIRE(r.code == 0);
  std::vector<std::string> ls = lines(r.out);
  REQUIRE(ls.size() >= 3);
  // last line is the data row; second field is the pressure
  std::string row = ls.back();
  std::size_t c1 = row.find(','), c2 = row.find(',', c1 + 1);
  REQUIRE(c1 != std::string::npos);
  double parsed = std::strtod(row.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr);

  ModelParams p;
  p.model = Model::CMF;
  p.d = 3;
  p.beta = kBnorm;
  p.mu = -0.5;
  p.a = 2;
  CHECK(parsed == pressure(p));
}

TEST_CASE("json output carries tagged extended reals and the reduced config") {
  RunResult r = run(
      "pressure --model ideal --d 3 --beta-norm --mu -0.3 --alpha -0.2 "
      "--format json 2>/dev/null");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["config"]["mu_eff"].get<double>() == -0.5);
  CHECK(j["config"]["model"] == "ideal");
  CHECK(j["points"][0]["dp_dmu"]["kind"] == "finite");

  ModelParams p;
  p.model = Model::Ideal;
  p.d = 3;
  p.beta = kBnorm;
  p.mu = -0.3;
  p.alpha = -0.2;
  CHECK(j["points"][0]["pressure"].get<double>() == pressure(p));

  // an infinite condensate serialises as a tagged object, and as "inf" in csv
  RunResult rj = run(
      "condensate --model ideal --d 2 --beta 1 --mu 0 --format json "
      "2>/dev/null");
  REQUIRE(rj.code == 0);
  CHECK(json::parse(rj.out)["condensate"]["kind"] == "inf");
  RunResult rc = run("condensate --model ideal --d 2 --beta 1 --mu 0 2>/dev/null");
  CHECK(rc.out.find(",inf,") != std::string::npos);
}

TEST_CASE("zero output: exact rows at the normalised temperature") {
  RunResult r = run(
      "zero --model ideal --d 3 --beta-norm --mu 0 --kmax 4 2>/dev/null");
  REQUIRE(r.code == 0);
  std::vector<std::string> ls = lines(r.out);
  REQUIRE(ls.size() >= 4);
  CHECK(ls[ls.size() - 5] == "k,xi");
  CHECK(ls[ls.size() - 4] == "1,1");
  CHECK(ls.back() == "4,0.03125");  // 4^{-5/2}

  RunResult rc = run(
      "zero --model cmf --d 3 --beta-norm --mu -0.5 --a 2 --kmax 2 "
      "2>/dev/null");
  REQUIRE(rc.code == 0);
  CHECK(rc.out.find(" K=") != std::string::npos);
  CHECK(rc.out.find(" scale=") != std::string::npos);
  CHECK(rc.out.find(" total=") != std::string::npos);

  RunResult rp = run(
      "zero --model pmf --d 3 --beta-norm --mu 0.5 --a 1 --kmax 2 --format "
      "json 2>/dev/null");
  REQUIRE(rp.code == 0);
  json jp = json::parse(rp.out);
  CHECK(jp["solution"]["delta_star"].get<double>() > 0);
  CHECK(jp["solution"].contains("fixed_point_form"));
  CHECK(jp["unique"].get<bool>());
}

TEST_CASE("hyl zero in the coexistence window reports every family") {
  char beta[40];
  std::snprintf(beta, sizeof beta, "%.17g", hyl_beta_star(3, 1.0));
  RunResult r = run(std::string("zero --model hyl --d 3 --beta ") + beta +
                    " --a 2 --b 1 --mu 500 --kmax 2 --format json 2>/dev/null");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK_FALSE(j["unique"].get<bool>());
  CHECK(j["families"].size() == 3);
  // solutions come sorted by objective
  double o0 = j["families"][0]["objective"].get<double>();
  double o1 = j["families"][1]["objective"].get<double>();
  CHECK(o0 <= o1);
}

TEST_CASE("sweep failure handling: markers per row, exit 2 only when total") {
  RunResult partial = run(
      "sweep --model ideal --d 3 --beta-norm --mu-start -0.2 --mu-stop 0.2 "
      "--points 3 2>/dev/null");
  CHECK(partial.code == 0);
  CHECK(partial.out.find(",error,error,error,error,") != std::string::npos);
  // the detail goes to stderr
  RunResult detail = run(
      "sweep --model ideal --d 3 --beta-norm --mu-start -0.2 --mu-stop 0.2 "
      "--points 3 2>&1 1>/dev/null");
  CHECK(detail.out.find("mu_eff=0.2") != std::string::npos);

  RunResult total = run(
      "sweep --model ideal --d 3 --beta-norm --mu-start 0.1 --mu-stop 0.2 "
      "--points 2 2>/dev/null");
  CHECK(total.code == 2);
}

TEST_CASE("exit codes: config errors 2, help 0") {
  CHECK(run("zero --model ideal --d 3 --beta-norm --mu 0.5 2>/dev/null").code ==
        2);
  CHECK(run("zero --model bogus 2>/dev/null").code == 2);
  CHECK(run("zero --no-such-flag 2>/dev/null").code == 2);
  CHECK(run("2>/dev/null").code == 2);  // a subcommand is required
  CHECK(run("--help 2>/dev/null").code == 0);
  CHECK(run("verify --only nothing-matches-this 2>/dev/null").code == 2);
  CHECK(run("sweep --model ideal --mu-start 0 --mu-stop -1 --points 5 "
            "2>/dev/null").code == 2);
}

TEST_CASE("simulate: fixed seed reruns byte-identical, z-scores attached") {
  const std::string args =
      "simulate --model pmf --d 3 --beta 1 --mu -0.35 --a 0.8 --volume 50 "
      "--kmax 6 --samples 20000 --burn-in 5000 --seed 5 --threads 2 "
      "--verify-zero 2>/dev/null";
  RunResult a = run(args);
  RunResult b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("k,mean,std_error,zero,z_score") != std::string::npos);
  CHECK(a.out.find("seed=5") != std::string::npos);

  // and a different seed moves the numbers
  RunResult c = run(
      "simulate --model pmf --d 3 --beta 1 --mu -0.35 --a 0.8 --volume 50 "
      "--kmax 6 --samples 20000 --burn-in 5000 --seed 6 --threads 2 "
      "--verify-zero 2>/dev/null");
  CHECK(c.out != a.out);
}

TEST_CASE("free-energy grid and the half-open alpha axis") {
  RunResult r = run(
      "free-energy --model ideal --d 3 --beta-norm --rho 0 --rho-stop 1 "
      "--points 3 2>/dev/null");
  REQUIRE(r.code == 0);
  std::vector<std::string> ls = lines(r.out);
  CHECK(ls[1] == "rho,free_energy,maximizing_alpha,saturated,model,d,beta,a,b");
  CHECK(ls[2].find(",-inf,") != std::string::npos);  // rho = 0
  REQUIRE(ls.size() == 5);
}

TEST_CASE("--out writes the file and keeps stdout quiet") {
  const char* path = "/tmp/bosegas_cli_out_test.csv";
  std::remove(path);
  RunResult r = run(std::string("pressure --model ideal --d 3 --beta-norm "
                                "--mu -1 --out ") +
                    path + " 2>/dev/null");
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str().find("mu_eff,pressure,dp_dmu,condensate,regime,model,d,beta,"
                      "a,b") != std::string::npos);
  std::remove(path);
}

TEST_CASE("hyl sweep serialises the non-smooth point as undefined") {
  char beta[40];
  std::snprintf(beta, sizeof beta, "%.17g", 1.5 * hyl_beta_star(3, 1.0));
  RunResult r = run(std::string("sweep --model hyl --d 3 --beta ") + beta +
                    " --a 2 --b 1 --mu-start 190 --mu-stop 230 --points 9 "
                    "--threads 2 2>/dev/null");
  REQUIRE(r.code == 0);
  CHECK(r.out.find(",undefined,") != std::string::npos);
  CHECK(r.out.find(",nonsmooth,") != std::string::npos);
}
