#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cqq {

struct RunConfig {
  std::string subcommand;
  std::string source_path;
  std::string out_path;       // empty writes to stdout
  std::string format = "json";  // json | csv

  int n = 4;
  int k = 1;
  int z = 0;  // 0 picks the source alphabet size
  int zprime = 2;
  double delta = 0.2;
  double eta = 0.2;
  double cover_delta = 0.1;
  double alpha = 0.1;
  double eps = 0.5;
  double mean = 0.5;
  int restarts = 64;
  int trials = 200;
  int grid = 5;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = available parallelism (CQQ_THREADS overrides)
  std::vector<std::size_t> m_list = {16, 64, 256};
  std::string delta_grid = "0.05:0.5:10";
  bool blind = false;
  bool classical = false;
};

// Throws ValidationError naming the first invalid flag. A --help request
// prints the grammar and returns a config with empty subcommand.
RunConfig parse_and_validate(const std::vector<std::string>& args);

// Dispatches to the owning module and writes results atomically.
// Returns 0 on success, 1 on validation errors, 2 on resource-cap aborts.
int run(const RunConfig& config);

// Convenience wrapper: parse + run with CLI error reporting to stderr.
int cli_main(int argc, char** argv);

}  // namespace cqq
