#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "stdfm/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using stdfm::cli::run;

namespace {

struct Call {
  int code;
  std::string out;
  std::string err;
};

Call call(std::vector<std::string> args) {
  args.insert(args.begin(), "stdfm");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "stdfm_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path simulated(const std::string& name, std::vector<std::string> extra) {
  const auto path = scratch() / name;
  std::vector<std::string> args = {"simulate", "--out", path.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  const auto c = call(args);
  REQUIRE(c.code == 0);
  return path;
}

}  // namespace

TEST_CASE("k grid parsing") {
  CHECK(stdfm::cli::parse_k_grid("60,90,120") == std::vector<int>{60, 90, 120});
  CHECK(stdfm::cli::parse_k_grid("40:160:40") == std::vector<int>{40, 80, 120, 160});
  CHECK_THROWS_AS(stdfm::cli::parse_k_grid("40:10:5"), stdfm::DataError);
  CHECK_THROWS_AS(stdfm::cli::parse_k_grid("a,b"), stdfm::DataError);
  CHECK(stdfm::cli::parse_list("0.5, 1e-3") == std::vector<double>{0.5, 1e-3});
}

TEST_CASE("usage errors") {
  CHECK(call({}).code == stdfm::cli::kUsage);
  CHECK(call({"frobnicate"}).code == stdfm::cli::kUsage);
  CHECK(call({"estimate"}).code == stdfm::cli::kUsage);
}

TEST_CASE("data errors are machine readable") {
  const auto c = call({"estimate", "--data", (scratch() / "missing.csv").string(), "--k", "10"});
  CHECK(c.code == stdfm::cli::kDataError);
  const auto j = json::parse(c.err.substr(0, c.err.find('\n')));
  CHECK(j["error"] == "data");
  CHECK(j["exit_code"] == 2);

  const auto bad = scratch() / "bad.csv";
  std::ofstream(bad) << "a,b\n1,2\n3,x\n";
  CHECK(call({"estimate", "--data", bad.string(), "--k", "1"}).code == stdfm::cli::kDataError);

  const auto data = simulated("small.csv", {"--theta", "0.5", "--n", "50", "--seed", "1"});
  CHECK(call({"estimate", "--data", data.string(), "--k", "50"}).code == stdfm::cli::kDataError);
  CHECK(call({"estimate", "--data", data.string(), "--k", "10", "--g", "x3"}).code ==
        stdfm::cli::kDataError);
}

TEST_CASE("simulate and estimate round trip") {
  const auto data = simulated("logistic.csv", {"--model", "logistic", "--theta", "0.5", "--n", "2000",
                                               "--seed", "3"});
  const auto c = call({"estimate", "--data", data.string(), "--k-grid", "100,200", "--restarts", "2"});
  REQUIRE(c.code == 0);
  const auto j = json::parse(c.out);
  REQUIRE(j["results"].size() == 2);
  for (const auto& r : j["results"]) {
    CHECK(r["theta"][0].get<double>() == doctest::Approx(0.5).epsilon(0.3));
    CHECK(r.contains("std_errors"));
    CHECK(r["optimizer"]["converged"] == true);
  }
  CHECK(j["config"]["data"]["n"] == 2000);

  const auto again = call({"estimate", "--data", data.string(), "--k-grid", "100,200", "--restarts", "2"});
  CHECK(again.out == c.out);
}

TEST_CASE("output files are byte-identical across runs") {
  const auto a = simulated("alog_a.csv", {"--model", "alog", "--theta", "0.5,0.6,0.3", "--n", "300",
                                          "--seed", "8"});
  const auto b = simulated("alog_b.csv", {"--model", "alog", "--theta", "0.5,0.6,0.3", "--n", "300",
                                          "--seed", "8"});
  CHECK(slurp(a) == slurp(b));
  const auto oa = scratch() / "fit_a.json", ob = scratch() / "fit_b.json";
  REQUIRE(call({"estimate", "--data", a.string(), "--model", "alog", "--k", "40", "--no-se", "--out",
                oa.string()})
              .code == 0);
  REQUIRE(call({"estimate", "--data", a.string(), "--model", "alog", "--k", "40", "--no-se", "--out",
                ob.string()})
              .code == 0);
  CHECK(slurp(oa) == slurp(ob));
}

TEST_CASE("test-submodel") {
  const auto data = simulated("alog_test.csv", {"--model", "alog", "--theta", "0.5,0.7,0", "--n",
                                                "2000", "--seed", "5"});
  const auto c = call({"test-submodel", "--data", data.string(), "--k", "150", "--null", "eta2=0"});
  REQUIRE(c.code == 0);
  const auto j = json::parse(c.out);
  const auto& r = j["results"][0];
  CHECK(r["dof"] == 1);
  CHECK(r["statistic"].get<double>() >= 0.0);
  CHECK(r.contains("reject"));
  CHECK(j["config"]["critical_value"].get<double>() == doctest::Approx(3.8415).epsilon(1e-4));
  CHECK(call({"test-submodel", "--data", data.string(), "--k", "150", "--null", "bogus=1"}).code ==
        stdfm::cli::kDataError);
}

TEST_CASE("stdf-eval") {
  const auto data = simulated("eval.csv", {"--theta", "0.5", "--n", "400", "--seed", "2"});
  const auto c = call({"stdf-eval", "--data", data.string(), "--k", "40", "--at", "1,0", "--at", "0.5,0.5",
                       "--model", "logistic", "--theta", "0.5"});
  REQUIRE(c.code == 0);
  std::istringstream in(c.out);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "x1,x2,l_hat,l_model");
  std::getline(in, row);
  CHECK(row.rfind("1,0,1,1", 0) == 0);
  CHECK(call({"stdf-eval", "--data", data.string(), "--k", "40", "--at", "1,2,3"}).code ==
        stdfm::cli::kDataError);
}

TEST_CASE("simulate factor loadings") {
  const auto c = call({"simulate", "--model", "factor:2", "--loadings", "0.3,0.7;0.6,0.4;1,0", "--n", "5",
                       "--seed", "1"});
  REQUIRE(c.code == 0);
  std::istringstream in(c.out);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 6);
  CHECK(call({"simulate", "--model", "factor:2", "--loadings", "0,0;0,0", "--n", "5"}).code ==
        stdfm::cli::kDataError);
}

TEST_CASE("study subcommand") {
  const auto cfg = scratch() / "study.json";
  std::ofstream(cfg) << R"({"model": "logistic", "d": 2, "theta0": [0.5], "n": 300, "reps": 2,
                            "k_grid": [30], "seed": 2, "restarts": 1, "phi_points": 1024})";
  const auto a = call({"study", "--config", cfg.string(), "--workers", "1"});
  const auto b = call({"study", "--config", cfg.string(), "--workers", "2"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("table,k,component,metric,value", 0) == 0);
}
