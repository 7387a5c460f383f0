#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "catxl/cli.hpp"
#include "catxl/json_io.hpp"
#include "oracle.hpp"

using namespace catxl;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

// Two years: a loss of 5, then a loss of 10, on a unit grid.
void fig1_store(const std::string& path) {
  const EventLossTable t(2, {"P"}, {{0, 0, 5.0}, {1, 0, 10.0}});
  CumulativeLossStore::build(t, {oracle::integer_grid(20)}).save(path);
}

}  // namespace

TEST_CASE("help and version", "[cli]") {
  const auto h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("estimate-qbb") != std::string::npos);
  const auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(CATXL_VERSION) != std::string::npos);
}

TEST_CASE("usage errors exit with 2", "[cli]") {
  CHECK(run({}).code == 2);
  CHECK(run({"solve"}).code == 2);
  CHECK(run({"solve", "--groups", "2", "--bogus"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"solve", "--groups", "2", "--method", "guess"}).code == 2);
  CHECK(run({"evaluate", "--contract", "/nonexistent.json", "--store", "/nonexistent.bin"}).code == 2);
}

TEST_CASE("the binary reports exit codes", "[cli]") {
  const std::string cmd = std::string(CATXL_CLI_PATH) + " solve > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 2);
  const int ok = std::system((std::string(CATXL_CLI_PATH) + " --help > /dev/null").c_str());
  CHECK(WEXITSTATUS(ok) == 0);
}

TEST_CASE("pipeline output is byte identical across runs", "[cli]") {
  TempDir d("catxl_cli_pipeline");
  std::string first;
  for (int pass = 0; pass < 2; ++pass) {
    const auto tag = std::to_string(pass);
    REQUIRE(run({"--quiet", "generate", "--groups", "3", "--years", "200", "--events-per-year", "8",
                 "--seed", "7", "--out", d / ("events" + tag + ".csv")})
                .code == 0);
    REQUIRE(run({"--quiet", "preprocess", "--in", d / ("events" + tag + ".csv"), "--grid", "40",
                 "--out", d / ("store" + tag + ".bin")})
                .code == 0);
    const auto s = run({"--quiet", "solve", "--store", d / ("store" + tag + ".bin"), "--bits", "2",
                        "--seed", "7", "--out", d / ("result" + tag + ".json")});
    REQUIRE((s.code == 0 || s.code == 1));
    const auto text = slurp(d / ("result" + tag + ".json"));
    REQUIRE_FALSE(text.empty());
    if (pass == 0) {
      first = text;
    } else {
      CHECK(text == first);
    }
  }
  CHECK(slurp(d / "events0.csv") == slurp(d / "events1.csv"));
  CHECK(slurp(d / "store0.bin") == slurp(d / "store1.bin"));
  const auto j = Json::parse(first);
  CHECK(j.contains("feasible"));
}

TEST_CASE("evaluate reproduces the hand example", "[cli]") {
  TempDir d("catxl_cli_evaluate");
  fig1_store(d / "store.bin");
  write(d / "contract.json",
        R"({"layers": [{"attachment": 3, "limit": 5}, {"attachment": 8, "limit": 8}]})");
  write(d / "pricing.json", R"({"rho": 0})");
  const auto r = run({"evaluate", "--contract", d / "contract.json", "--store", d / "store.bin",
                      "--pricing", d / "pricing.json", "--out", d / "report.json"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  // Net loss is 3 in both years; premiums are 3.5 + 1.
  CHECK(j["report"]["avg_net_profit"].get<double>() == Catch::Approx(-7.5));
  CHECK(j["report"]["tvar"].get<double>() == Catch::Approx(3.0));
  CHECK(j["baseline"]["avg_net_profit"].get<double>() == Catch::Approx(-7.5));
  CHECK(slurp(d / "report.json") == r.out);

  write(d / "empty.json", "{}");
  const auto e = run({"evaluate", "--contract", d / "empty.json", "--store", d / "store.bin"});
  REQUIRE(e.code == 0);
  const auto ej = Json::parse(e.out);
  CHECK(ej["report"] == ej["baseline"]);
}

TEST_CASE("infeasible reports exit with 1", "[cli]") {
  TempDir d("catxl_cli_infeasible");
  fig1_store(d / "store.bin");
  write(d / "contract.json", "{}");
  write(d / "constraints.json", R"([{"kind": "tvar", "beta": 0.5, "threshold": 1}])");
  const auto r = run({"evaluate", "--contract", d / "contract.json", "--store", d / "store.bin",
                      "--constraints", d / "constraints.json"});
  CHECK(r.code == 1);
  CHECK_FALSE(Json::parse(r.out)["report"]["feasible"].get<bool>());
}

TEST_CASE("curve pricing needs a pricing file", "[cli]") {
  TempDir d("catxl_cli_curve");
  fig1_store(d / "store.bin");
  write(d / "contract.json", "{}");
  const auto r = run({"evaluate", "--contract", d / "contract.json", "--store", d / "store.bin",
                      "--pricing-mode", "curve"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--pricing") != std::string::npos);
}

TEST_CASE("crossover estimate", "[cli]") {
  const auto r = run({"estimate-qbb", "--events", "394067"});
  CHECK(r.code == 1);
  const auto j = Json::parse(r.out);
  CHECK(j["verdict"] == "infeasible");
  CHECK(j["max_ops_per_oracle"].get<int>() == 231);
  const auto ok = run({"estimate-qbb", "--events", "0"});
  CHECK(ok.code == 0);
  CHECK(Json::parse(ok.out)["verdict"] == "feasible");
  CHECK(run({"estimate-qbb", "--toffoli-rate", "0"}).code == 2);
}

TEST_CASE("config files supply missing flags", "[cli]") {
  TempDir d("catxl_cli_config");
  write(d / "cfg.json", R"({"events": 394067, "toffoli_rate": 1e5, "quiet": true})");
  const auto r = run({"estimate-qbb", "--config", d / "cfg.json"});
  CHECK(r.code == 1);
  CHECK(Json::parse(r.out)["events"] == 394067);
  // Command line flags win over the file.
  const auto o = run({"estimate-qbb", "--events", "3", "--config", d / "cfg.json"});
  CHECK(o.code == 0);

  write(d / "list.json", R"({"b": [1, 2]})");
  const auto args = cli::expand_config({"census", "--config", d / "list.json"});
  CHECK(args == std::vector<std::string>{"census", "--b", "1,2"});
  write(d / "bad.json", "[1, 2]");
  CHECK(run({"estimate-qbb", "--config", d / "bad.json"}).code == 2);
}

TEST_CASE("optimize writes its traces and best contracts", "[cli]") {
  TempDir d("catxl_cli_optimize");
  REQUIRE(run({"--quiet", "generate", "--groups", "2", "--years", "100", "--events-per-year", "5",
               "--out", d / "ev.bin"})
              .code == 0);
  REQUIRE(run({"--quiet", "preprocess", "--in", d / "ev.bin", "--grid", "16", "--out",
               d / "store.bin"})
              .code == 0);
  std::string best;
  for (const auto& threads : {"1", "2"}) {
    const auto dir = d / (std::string("out") + threads);
    const auto r = run({"--quiet", "--threads", threads, "optimize", "--store", d / "store.bin",
                        "--steps", "300", "--restarts", "3", "--seed", "5", "--out-dir", dir});
    REQUIRE((r.code == 0 || r.code == 1));
    const auto trace = slurp(fs::path(dir) / "trace.csv");
    CHECK(trace.rfind("step,objective,temperature,move,accepted,chain,best\n", 0) == 0);
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 1 + 900);
    CHECK(slurp(fs::path(dir) / "space.csv").rfind("chain,step,tvar,profit,feasible", 0) == 0);
    const auto b = slurp(fs::path(dir) / "best.json");
    CHECK(Json::parse(b).contains("best"));
    if (best.empty()) {
      best = b;
    } else {
      CHECK(b == best);
    }
  }
}

TEST_CASE("census writes a deterministic table", "[cli]") {
  TempDir d("catxl_cli_census");
  const auto r = run({"--quiet", "census", "--b", "1", "--n-max", "3", "--instances", "2",
                      "--years", "100", "--events-per-year", "5", "--out", d / "census.csv"});
  REQUIRE(r.code == 0);
  const auto csv = slurp(d / "census.csv");
  CHECK(csv.rfind("n,b,instance,seed,nodes_visited,cascade_nodes,reduction_factor,feasible\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4);
  const auto again = run({"--quiet", "--threads", "2", "census", "--b", "1", "--n-max", "3",
                          "--instances", "2", "--years", "100", "--events-per-year", "5", "--out",
                          d / "census2.csv"});
  REQUIRE(again.code == 0);
  CHECK(slurp(d / "census2.csv") == csv);
}
