#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cqq/cli.hpp"
#include "cqq/errors.hpp"
#include "cqq/rng.hpp"
#include "cqq/source.hpp"
#include "cqq/source_io.hpp"

#include <json.hpp>

using namespace cqq;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempSource {
  std::string path = "cli_test_source.json";
  TempSource() {
    Rng rng(123, "cli-source");
    std::vector<CqqState> members;
    for (int s = 0; s < 2; ++s) {
      std::vector<DensityMatrix> outs;
      for (int x = 0; x < 2; ++x) {
        CMatrix g(4, 4);
        for (auto& v : g.a) v = cplx(rng.gaussian(), rng.gaussian());
        CMatrix rho = g * adjoint(g);
        rho = (1.0 / trace(rho).real()) * rho;
        outs.push_back(DensityMatrix{std::move(rho), {2, 2}});
      }
      members.push_back(CqqState::make(ClassicalDistribution{rng.dirichlet(2)},
                                       CqChannel::make(std::move(outs))));
    }
    save_source_file(CompoundSource::make(std::move(members)), path);
  }
  ~TempSource() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("parse_and_validate") {
  TempSource src;
  {
    const auto cfg = parse_and_validate(
        {"rate", "--source", src.path, "--z", "3", "--zprime", "2",
         "--restarts", "64", "--seed", "7"});
    CHECK(cfg.subcommand == "rate");
    CHECK(cfg.z == 3);
    CHECK(cfg.zprime == 2);
    CHECK(cfg.restarts == 64);
    CHECK(cfg.seed == 7);
  }
  {
    const auto cfg = parse_and_validate({"simulate", "--source", src.path,
                                         "--n", "8", "--delta", "0.2",
                                         "--seed", "42"});
    CHECK(cfg.subcommand == "simulate");
    CHECK(cfg.n == 8);
    CHECK(cfg.delta == doctest::Approx(0.2));
    CHECK(cfg.seed == 42);
  }
  CHECK_THROWS_WITH_AS(
      parse_and_validate({"rate", "--source", src.path, "--z", "0"}),
      doctest::Contains("--z"), ValidationError);
  CHECK_THROWS_AS(parse_and_validate({"rate", "--source", "missing.json"}),
                  ValidationError);
  CHECK_THROWS_AS(parse_and_validate({"frobnicate"}), ValidationError);
  CHECK_THROWS_AS(
      parse_and_validate({"chernov", "--m-list", "16,x"}), ValidationError);
}

TEST_CASE("counterexample subcommand emits the expected csv") {
  RunConfig cfg;
  cfg.subcommand = "counterexample";
  cfg.grid = 5;
  cfg.n = 2;
  cfg.format = "csv";
  cfg.out_path = "cli_test_cx.csv";
  CHECK(run(cfg) == 0);
  const std::string text = slurp(cfg.out_path);
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "p,error,security_index,branch");
  int rows = 0;
  while (std::getline(ss, line)) {
    ++rows;
    CHECK(line.find(",0,") != std::string::npos);  // error column is zero
  }
  CHECK(rows == 5);
  std::remove(cfg.out_path.c_str());
}

TEST_CASE("regularity subcommand produces a nondecreasing modulus") {
  TempSource src;
  RunConfig cfg;
  cfg.subcommand = "regularity";
  cfg.source_path = src.path;
  cfg.delta_grid = "0.05:0.5:10";
  cfg.format = "csv";
  cfg.out_path = "cli_test_reg.csv";
  CHECK(run(cfg) == 0);
  std::stringstream ss(slurp(cfg.out_path));
  std::string line;
  std::getline(ss, line);
  CHECK(line == "delta,modulus");
  double prev = -1.0;
  int rows = 0;
  while (std::getline(ss, line)) {
    ++rows;
    const auto comma = line.find(',');
    const double modulus = std::stod(line.substr(comma + 1));
    CHECK(modulus >= prev);
    prev = modulus;
  }
  CHECK(rows == 10);
  std::remove(cfg.out_path.c_str());
}

TEST_CASE("chernov subcommand writes one row per codebook size") {
  RunConfig cfg;
  cfg.subcommand = "chernov";
  cfg.n = 4;
  cfg.m_list = {16, 64, 256};
  cfg.eps = 0.5;
  cfg.trials = 50;
  cfg.format = "csv";
  cfg.out_path = "cli_test_chernov.csv";
  CHECK(run(cfg) == 0);
  std::stringstream ss(slurp(cfg.out_path));
  std::string line;
  int rows = -1;  // header
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 3);
  std::remove(cfg.out_path.c_str());
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  TempSource src;
  RunConfig cfg;
  cfg.subcommand = "simulate";
  cfg.source_path = src.path;
  cfg.n = 4;
  cfg.delta = 0.4;
  cfg.eta = 0.6;
  cfg.seed = 42;
  cfg.format = "json";
  cfg.out_path = "cli_test_sim_a.json";
  CHECK(run(cfg) == 0);
  cfg.out_path = "cli_test_sim_b.json";
  CHECK(run(cfg) == 0);
  CHECK(slurp("cli_test_sim_a.json") == slurp("cli_test_sim_b.json"));
  CHECK(!slurp("cli_test_sim_a.json").empty());
  std::remove("cli_test_sim_a.json");
  std::remove("cli_test_sim_b.json");
}

TEST_CASE("validate subcommand reports the first violation") {
  TempSource src;
  {
    RunConfig cfg;
    cfg.subcommand = "validate";
    cfg.source_path = src.path;
    cfg.out_path = "cli_test_validate.txt";
    CHECK(run(cfg) == 0);
    CHECK(slurp(cfg.out_path) == "ok\n");
    std::remove(cfg.out_path.c_str());
  }
  {
    // Corrupt the file: break a probability vector.
    auto j = source_to_json(load_source_file(src.path));
    j["states"][0]["p"] = {0.5, 0.6};
    std::ofstream out("cli_test_bad.json");
    out << j.dump();
    out.close();
    RunConfig cfg;
    cfg.subcommand = "validate";
    cfg.source_path = "cli_test_bad.json";
    CHECK(run(cfg) == 1);
    std::remove("cli_test_bad.json");
  }
}

TEST_CASE("json outputs parse back and carry their documented keys") {
  TempSource src;
  auto parse_out = [](const std::string& path) {
    return nlohmann::json::parse(slurp(path));
  };
  {
    RunConfig cfg;
    cfg.subcommand = "simulate";
    cfg.source_path = src.path;
    cfg.n = 4;
    cfg.delta = 0.4;
    cfg.eta = 0.6;
    cfg.out_path = "cli_rt_sim.json";
    REQUIRE(run(cfg) == 0);
    const auto j = parse_out(cfg.out_path);
    CHECK(j.contains("members"));
    CHECK(j.contains("worst_case"));
    CHECK(j.contains("log_m"));
    std::remove(cfg.out_path.c_str());
  }
  {
    RunConfig cfg;
    cfg.subcommand = "counterexample";
    cfg.grid = 3;
    cfg.n = 1;
    cfg.out_path = "cli_rt_cx.json";
    REQUIRE(run(cfg) == 0);
    const auto j = parse_out(cfg.out_path);
    CHECK(j.at("members").size() == 3);
    std::remove(cfg.out_path.c_str());
  }
  {
    RunConfig cfg;
    cfg.subcommand = "regularity";
    cfg.source_path = src.path;
    cfg.delta_grid = "0.1:0.5:4";
    cfg.out_path = "cli_rt_reg.json";
    REQUIRE(run(cfg) == 0);
    CHECK(parse_out(cfg.out_path).at("rows").size() == 4);
    std::remove(cfg.out_path.c_str());
  }
  {
    RunConfig cfg;
    cfg.subcommand = "chernov";
    cfg.n = 4;
    cfg.m_list = {8, 16};
    cfg.trials = 20;
    cfg.out_path = "cli_rt_ch.json";
    REQUIRE(run(cfg) == 0);
    const auto j = parse_out(cfg.out_path);
    CHECK(j.at("rows").size() == 2);
    CHECK(j.contains("non_increasing"));
    std::remove(cfg.out_path.c_str());
  }
}

TEST_CASE("resource caps exit with code 2") {
  TempSource src;
  RunConfig cfg;
  cfg.subcommand = "simulate";
  cfg.source_path = src.path;
  cfg.n = 30;  // 2^30 words blows the state budget
  cfg.delta = 0.4;
  cfg.eta = 0.6;
  CHECK(run(cfg) == 2);
}

TEST_CASE("rate subcommand round-trips through json") {
  TempSource src;
  RunConfig cfg;
  cfg.subcommand = "rate";
  cfg.source_path = src.path;
  cfg.restarts = 2;
  cfg.seed = 1;
  cfg.threads = 1;
  cfg.out_path = "cli_test_rate.json";
  CHECK(run(cfg) == 0);
  const std::string text = slurp(cfg.out_path);
  CHECK(text.find("\"value\"") != std::string::npos);
  CHECK(text.find("\"best_preprocessing\"") != std::string::npos);
  std::remove(cfg.out_path.c_str());

  // Two-letter extension path: the k = 2 value never undercuts k = 1.
  cfg.k = 2;
  cfg.out_path = "cli_test_rate2.json";
  CHECK(run(cfg) == 0);
  const auto j1 = nlohmann::json::parse(text);
  const auto j2 = nlohmann::json::parse(slurp(cfg.out_path));
  CHECK(j2.at("k") == 2);
  CHECK(j2.at("value").get<double>() >= j1.at("value").get<double>() - 1e-9);
  std::remove(cfg.out_path.c_str());
}
