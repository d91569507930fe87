#include "cqq/cli.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cqq/counterexample.hpp"
#include "cqq/errors.hpp"
#include "cqq/protocol.hpp"
#include "cqq/rates.hpp"
#include "cqq/regularity.hpp"
#include "cqq/source_io.hpp"

namespace cqq {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_atomic(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::cout << payload;
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << payload;
  }
  std::filesystem::rename(tmp, path);
}

std::vector<double> parse_linspace(const std::string& text) {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  std::stringstream ss(text);
  char c1 = 0, c2 = 0;
  if (!(ss >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' ||
      count < 1 || hi < lo)
    throw ValidationError("delta-grid must be start:end:count");
  std::vector<double> out;
  for (int i = 0; i < count; ++i)
    out.push_back(count == 1 ? lo
                             : lo + (hi - lo) * double(i) / double(count - 1));
  return out;
}

json gamma_to_json(const MarkovPreprocessing& g) {
  auto matrix = [](const StochasticMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows; ++r) {
      json row = json::array();
      for (int c = 0; c < m.cols; ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  return json{{"p_u_given_y", matrix(g.p_u_given_y)},
              {"p_t_given_u", matrix(g.p_t_given_u)}};
}

int thread_count(const RunConfig& cfg) {
  if (const char* env = std::getenv("CQQ_THREADS")) {
    int v = 0;
    const auto res = std::from_chars(env, env + std::string(env).size(), v);
    if (res.ec == std::errc{} && v >= 1) return v;
  }
  if (cfg.threads >= 1) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int run_rate(const RunConfig& cfg) {
  const CompoundSource source = load_source_file(cfg.source_path);
  OptimizerOptions opts;
  opts.restarts = cfg.restarts;
  opts.seed = cfg.seed;
  opts.threads = thread_count(cfg);
  // Extensions want room for product chains, hence the squared default.
  const int z = cfg.z > 0 ? cfg.z
                          : (cfg.k == 2 ? source.alphabet() * source.alphabet()
                                        : source.alphabet());
  const RateResult rate = cfg.k == 1
                              ? optimize_k1(source, z, cfg.zprime, opts)
                              : multi_letter_rate(source, cfg.k, z, cfg.zprime,
                                                  opts);
  if (cfg.format == "csv") {
    std::string out = "group,value\n";
    for (std::size_t g = 0; g < rate.per_group.size(); ++g)
      out += std::to_string(g) + "," + fmt(rate.per_group[g].value) + "\n";
    write_atomic(cfg.out_path, out);
    return 0;
  }
  json per_group = json::array();
  for (const auto& g : rate.per_group) {
    json trace = json::array();
    for (const auto& t : g.trace)
      trace.push_back(json{{"start", t.start},
                           {"sweeps", t.sweeps},
                           {"value", t.value}});
    per_group.push_back(json{{"p", g.p.probs},
                             {"value", g.value},
                             {"best_preprocessing", gamma_to_json(g.best)},
                             {"evaluations", g.evaluations},
                             {"trace", std::move(trace)}});
  }
  const json out{{"value", rate.value},
                 {"converged", rate.converged},
                 {"k", cfg.k},
                 {"z", z},
                 {"zprime", cfg.zprime},
                 {"seed", cfg.seed},
                 {"per_group", std::move(per_group)}};
  write_atomic(cfg.out_path, out.dump(2) + "\n");
  return 0;
}

int run_regularity(const RunConfig& cfg) {
  const CompoundSource source = load_source_file(cfg.source_path);
  const auto rows = regularity_modulus(source, parse_linspace(cfg.delta_grid));
  if (cfg.format == "json") {
    json jr = json::array();
    for (const auto& r : rows)
      jr.push_back(json{{"delta", r.delta}, {"modulus", r.modulus}});
    write_atomic(cfg.out_path, json{{"rows", std::move(jr)}}.dump(2) + "\n");
    return 0;
  }
  std::string out = "delta,modulus\n";
  for (const auto& r : rows)
    out += fmt(r.delta) + "," + fmt(r.modulus) + "\n";
  write_atomic(cfg.out_path, out);
  return 0;
}

int run_simulate(const RunConfig& cfg) {
  const CompoundSource source = load_source_file(cfg.source_path);
  const BinningResult built =
      random_binning_protocol(source, cfg.n, cfg.delta, cfg.eta, cfg.seed);
  const ProtocolReport report = evaluate_on_source(built.protocol, source);
  if (cfg.format == "csv") {
    std::string out = "member,error_prob,security_index\n";
    for (std::size_t i = 0; i < report.members.size(); ++i)
      out += std::to_string(i) + "," + fmt(report.members[i].error_prob) +
             "," + fmt(report.members[i].security_index) + "\n";
    write_atomic(cfg.out_path, out);
    return 0;
  }
  json members = json::array();
  for (std::size_t i = 0; i < report.members.size(); ++i)
    members.push_back(json{{"member", i},
                           {"error_prob", report.members[i].error_prob},
                           {"security_index", report.members[i].security_index},
                           {"key_marginal", report.members[i].key_marginal}});
  json retained = json::array();
  for (std::size_t i = 0; i < built.params.retained.size(); ++i)
    retained.push_back(json{{"counts", built.params.retained[i].counts},
                            {"l", built.params.l_lambda[i]},
                            {"s", built.params.s_lambda[i]}});
  const json out{{"n", cfg.n},
                 {"delta", cfg.delta},
                 {"eta", cfg.eta},
                 {"seed", cfg.seed},
                 {"m", built.params.m},
                 {"log_m", built.protocol.log_m()},
                 {"rate", built.params.rate},
                 {"worst_case", report.worst_case},
                 {"retained_types", std::move(retained)},
                 {"construction_log", built.params.log},
                 {"members", std::move(members)}};
  write_atomic(cfg.out_path, out.dump(2) + "\n");
  return 0;
}

int run_counterexample(const RunConfig& cfg) {
  const auto grid = default_counterexample_grid(cfg.grid);
  const CounterexampleSource cx = build_counterexample(grid);
  std::string csv = "p,error,security_index,branch\n";
  json members = json::array();
  if (cfg.blind) {
    const Protocol blind = pi_branch_protocol(cx, cfg.n);
    const GapReport rep = no_smi_gap_demo(cx, blind, cfg.n);
    for (const auto& row : rep.rows) {
      csv += fmt(row.p.probs[0]) + "," + fmt(row.error_prob) + "," +
             fmt(row.security_index) + ",pi-blind\n";
      members.push_back(json{{"p", row.p.probs},
                             {"error", row.error_prob},
                             {"security_index", row.security_index},
                             {"chain_bound", row.chain_bound},
                             {"branch", "pi-blind"}});
    }
  } else {
    const SmiCapacityResult res = smi_capacity_protocol(cx, cfg.n);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const char* branch = static_cast<int>(i) == cx.pi_index ? "pi" : "other";
      csv += fmt(grid[i].probs[0]) + "," +
             fmt(res.report.members[i].error_prob) + "," +
             fmt(res.report.members[i].security_index) + "," + branch + "\n";
      members.push_back(json{{"p", grid[i].probs},
                             {"error", res.report.members[i].error_prob},
                             {"security_index",
                              res.report.members[i].security_index},
                             {"branch", branch}});
    }
  }
  if (cfg.format == "csv") {
    write_atomic(cfg.out_path, csv);
  } else {
    write_atomic(cfg.out_path,
                 json{{"n", cfg.n}, {"members", std::move(members)}}.dump(2) +
                     "\n");
  }
  return 0;
}

int run_chernov(const RunConfig& cfg) {
  if (cfg.classical) {
    const auto rep = classical_chernov_experiment(cfg.n, cfg.delta, cfg.mean,
                                                  cfg.trials, cfg.seed);
    if (cfg.format == "csv") {
      write_atomic(cfg.out_path, "empirical,bound,holds\n" +
                                     fmt(rep.empirical) + "," + fmt(rep.bound) +
                                     "," + (rep.holds ? "1" : "0") + "\n");
    } else {
      write_atomic(cfg.out_path, json{{"empirical", rep.empirical},
                                      {"bound", rep.bound},
                                      {"holds", rep.holds}}
                                         .dump(2) +
                                     "\n");
    }
    return 0;
  }
  // Default matrix experiment: qubit channel V(x) = |x><x| on the balanced
  // type of length n.
  std::vector<DensityMatrix> outs = {pure_basis_state(2, 0),
                                     pure_basis_state(2, 1)};
  const CqChannel channel = CqChannel::make(std::move(outs));
  TypeClass lambda{{cfg.n - cfg.n / 2, cfg.n / 2}, cfg.n};
  const auto rep = matrix_chernov_experiment(channel, lambda, cfg.n, cfg.m_list,
                                             cfg.eps, cfg.delta, cfg.trials,
                                             cfg.seed, thread_count(cfg));
  if (cfg.format == "csv") {
    std::string out = "m,empirical,bound\n";
    for (const auto& row : rep.rows)
      out += std::to_string(row.m) + "," + fmt(row.empirical) + "," +
             fmt(row.bound) + "\n";
    write_atomic(cfg.out_path, out);
    return 0;
  }
  json rows = json::array();
  for (const auto& row : rep.rows)
    rows.push_back(json{{"m", row.m},
                        {"empirical", row.empirical},
                        {"bound", row.bound}});
  write_atomic(cfg.out_path, json{{"rows", std::move(rows)},
                                  {"non_increasing", rep.non_increasing}}
                                     .dump(2) +
                                 "\n");
  return 0;
}

int run_validate(const RunConfig& cfg) {
  load_source_file(cfg.source_path);
  write_atomic(cfg.out_path, "ok\n");
  return 0;
}

}  // namespace

RunConfig parse_and_validate(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"compound cqq secret-key toolkit"};
  app.require_subcommand(1);

  std::string m_list_text = "16,64,256";

  auto add_common = [&](CLI::App* sub, bool needs_source) {
    if (needs_source)
      sub->add_option("--source", cfg.source_path, "source JSON file")
          ->required()
          ->check(CLI::ExistingFile);
    sub->add_option("--out", cfg.out_path, "output path (default stdout)");
    sub->add_option("--format", cfg.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", cfg.seed, "global 64-bit seed");
    sub->add_option("--threads", cfg.threads, "worker count (0 = auto)")
        ->check(CLI::NonNegativeNumber);
  };

  auto* rate = app.add_subcommand("rate", "optimize the single-letter rate");
  add_common(rate, true);
  rate->add_option("--z", cfg.z, "|U| (default: source alphabet)")
      ->check(CLI::PositiveNumber);
  rate->add_option("--zprime", cfg.zprime, "|T|")->check(CLI::PositiveNumber);
  rate->add_option("--restarts", cfg.restarts, "random restarts")
      ->check(CLI::PositiveNumber);
  rate->add_option("--k", cfg.k, "letters per block (1 or 2)")
      ->check(CLI::Range(1, 2));

  auto* reg = app.add_subcommand("regularity", "regularity modulus scan");
  add_common(reg, true);
  reg->add_option("--delta-grid", cfg.delta_grid, "start:end:count");

  auto* sim = app.add_subcommand("simulate", "random-binning protocol run");
  add_common(sim, true);
  sim->add_option("--n", cfg.n, "blocklength")->check(CLI::PositiveNumber);
  sim->add_option("--delta", cfg.delta, "rate slack")
      ->check(CLI::PositiveNumber);
  sim->add_option("--eta", cfg.eta, "type retention radius")
      ->check(CLI::PositiveNumber);

  auto* cx = app.add_subcommand("counterexample", "marginal-knowledge gap demo");
  add_common(cx, false);
  cx->add_option("--grid", cfg.grid, "grid size (includes the balanced point)")
      ->check(CLI::Range(2, 64));
  cx->add_option("--n", cfg.n, "blocklength")->check(CLI::Range(1, 6));
  cx->add_flag("--blind", cfg.blind, "run the balanced branch blindly");

  auto* ch = app.add_subcommand("chernov", "concentration experiments");
  add_common(ch, false);
  ch->add_option("--n", cfg.n, "blocklength")->check(CLI::PositiveNumber);
  ch->add_option("--m-list", m_list_text, "comma-separated codebook sizes");
  ch->add_option("--eps", cfg.eps, "deviation threshold")
      ->check(CLI::PositiveNumber);
  ch->add_option("--delta", cfg.delta, "exponent slack")
      ->check(CLI::NonNegativeNumber);
  ch->add_option("--trials", cfg.trials, "Monte Carlo trials")
      ->check(CLI::PositiveNumber);
  ch->add_flag("--classical", cfg.classical, "scalar Chernov experiment");
  ch->add_option("--mean", cfg.mean, "mean for the classical experiment")
      ->check(CLI::Range(0.0, 1.0));

  auto* val = app.add_subcommand("validate", "check a source file");
  add_common(val, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help() << std::flush;
    return RunConfig{};
  } catch (const CLI::ParseError& e) {
    throw ValidationError(e.what());
  }

  cfg.subcommand = app.get_subcommands().front()->get_name();

  cfg.m_list.clear();
  std::stringstream ss(m_list_text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    int v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || v < 1)
      throw ValidationError("m-list entries must be positive integers");
    cfg.m_list.push_back(static_cast<std::size_t>(v));
  }
  if (cfg.m_list.empty()) throw ValidationError("m-list must be nonempty");
  parse_linspace(cfg.delta_grid);  // validates the format
  return cfg;
}

int run(const RunConfig& cfg) {
  try {
    if (cfg.subcommand == "rate") return run_rate(cfg);
    if (cfg.subcommand == "regularity") return run_regularity(cfg);
    if (cfg.subcommand == "simulate") return run_simulate(cfg);
    if (cfg.subcommand == "counterexample") return run_counterexample(cfg);
    if (cfg.subcommand == "chernov") return run_chernov(cfg);
    if (cfg.subcommand == "validate") return run_validate(cfg);
    throw ValidationError("unknown subcommand: " + cfg.subcommand);
  } catch (const ResourceError& e) {
    std::cerr << "resource cap: " << e.what() << std::endl;
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << std::endl;
    return 1;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig cfg;
  try {
    cfg = parse_and_validate(args);
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << std::endl;
    return 1;
  }
  if (cfg.subcommand.empty()) return 0;  // help was printed
  return run(cfg);
}

}  // namespace cqq
