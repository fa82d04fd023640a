#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "softcache/config.hpp"
#include "softcache/csv.hpp"
#include "softcache/errors.hpp"
#include "softcache/ingest.hpp"
#include "softcache/parallel.hpp"
#include "softcache/placement.hpp"
#include "softcache/simkit.hpp"
#include "softcache/verify.hpp"

// Command-line front end.
//
//   softcache solve  --config <file> --out <dir>
//   softcache sweep  --config <file> --out <csv>
//   softcache ingest --contents <csv> --relations <csv> --out <dir>
//   softcache verify --scale small|full
//
// Exit codes: 0 success, 1 verification/operational failure, 2 usage or
// configuration error. All randomness flows from config-declared seeds.

namespace softcache::cli {

namespace detail8 {

inline std::optional<std::size_t> crash_after_rows() {
  if (const char* env = std::getenv("SOFTCACHE_TEST_CRASH_AFTER")) {
    try {
      return static_cast<std::size_t>(std::stoull(env));
    } catch (const std::exception&) {
      throw ConfigError("SOFTCACHE_TEST_CRASH_AFTER must be an integer");
    }
  }
  return std::nullopt;
}

inline int cmd_solve(const std::string& config_path, const std::string& out_dir,
                     std::optional<std::uint64_t> network_seed,
                     std::optional<std::uint64_t> utility_seed, bool verbose,
                     std::ostream& out, std::ostream& err) {
  auto cfg = config::load_scenario(config_path);
  if (cfg.scheme.empty())
    throw ConfigError("solve needs a 'scheme' entry in the config");
  if (network_seed) cfg.network_seed = *network_seed;
  if (utility_seed) cfg.utility_seed = *utility_seed;

  const auto cat = simkit::build_catalog(cfg);
  const auto cov = simkit::build_network(cfg, cfg.num_cells, cfg.network_seed);
  const auto ut = simkit::build_utility(cfg, cat, cfg.mean_degree, cfg.acceptance,
                                        cfg.utility_seed);
  if (verbose)
    err << "seeds: network=" << cfg.network_seed << " utility=" << cfg.utility_seed
        << "\n";
  auto run =
      simkit::run_scheme(cfg.scheme, cat, cov, ut, cfg.capacity, cfg.budget_bytes);

  std::filesystem::create_directories(out_dir);
  const auto placement_path =
      (std::filesystem::path(out_dir) / "placement.csv").string();
  {
    std::ofstream pf(placement_path, std::ios::trunc);
    if (!pf) throw ConfigError("cannot write '" + placement_path + "'");
    objective::write_placement_csv(pf, run.result.placement);
  }
  out << "scheme " << cfg.scheme << "\n";
  out << "objective " << csv::format_double(run.result.objective) << "\n";
  out << "items " << run.result.placement.items().size() << "\n";
  out << "wall_ms " << csv::format_double(run.result.wall_ms) << "\n";
  out << "placement " << placement_path << "\n";
  return 0;
}

inline int cmd_sweep(const std::string& config_path, const std::string& out_csv,
                     bool verbose, std::ostream& out, std::ostream& err) {
  const auto cfg = config::load_scenario(config_path);
  const auto crash_after = crash_after_rows();

  const auto parent = std::filesystem::path(out_csv).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream file(out_csv, std::ios::trunc);
  if (!file) throw ConfigError("cannot write '" + out_csv + "'");

  CsvWriter writer(file);
  writer.row(simkit::sweep_csv_header());
  file.flush();

  std::size_t written = 0;
  const auto rows = simkit::run_sweep(cfg, [&](const simkit::SweepRow& row) {
    writer.row(simkit::sweep_row_fields(row));
    file.flush();
    ++written;
    if (!row.error.empty())
      err << "row " << row.axis << "=" << csv::format_double(row.value) << " "
          << row.scheme << " seed=" << row.seed << " failed: " << row.error << "\n";
    else if (verbose)
      err << "row " << row.axis << "=" << csv::format_double(row.value) << " "
          << row.scheme << " seed=" << row.seed << " objective="
          << csv::format_double(row.objective) << "\n";
    // Test hook: simulate a hard crash after N complete rows to prove the
    // file is always a valid prefix.
    if (crash_after && written >= *crash_after) std::_Exit(37);
  });

  out << "rows " << rows.size() << "\n";
  out << "out " << out_csv << "\n";
  return 0;
}

inline int cmd_ingest(const std::string& contents, const std::string& relations,
                      const std::string& out_dir, std::ostream& out) {
  auto result = catalog::ingest_catalog(contents, relations);
  const auto paths = catalog::write_catalog_bundle(out_dir, result.catalog,
                                                   result.utility);
  out << "contents " << paths.first << "\n";
  out << "relations " << paths.second << "\n";
  out << "num_contents " << result.catalog.num_contents() << "\n";
  out << "num_relations " << result.utility.num_relations() << "\n";
  out << "mean_related_degree "
      << csv::format_double(catalog::mean_related_degree(result.utility)) << "\n";
  return 0;
}

inline int cmd_verify(const std::string& scale, const std::string& mutate,
                      std::ostream& out) {
  verify::MutationFlags flags;
  if (mutate == "tie_break")
    flags.corrupt_tie_break = true;
  else if (!mutate.empty())
    throw ConfigError("unknown mutation '" + mutate + "' (try: tie_break)");
  const auto checks = verify::run_verification(scale == "full", flags);
  bool all = true;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    all = all && c.passed;
  }
  out << (all ? "verification passed" : "verification FAILED") << " ("
      << checks.size() << " checks)\n";
  return all ? 0 : 1;
}

}  // namespace detail8

/// Entry point shared by the binary and the tests. Returns the process exit
/// code; writes to the given streams.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"soft-cache-hit placement toolkit"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: machine cores)");
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log per-row seeds and progress");

  std::string config_path, out_path;
  auto* solve = app.add_subcommand("solve", "solve one scenario, one scheme");
  solve->add_option("--config", config_path, "scenario config (JSON)")->required();
  solve->add_option("--out", out_path, "output directory")->required();
  std::optional<std::uint64_t> net_seed, util_seed;
  solve->add_option("--network-seed", net_seed, "override network seed");
  solve->add_option("--utility-seed", util_seed, "override relation-model seed");

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep to CSV");
  sweep->add_option("--config", config_path, "scenario config (JSON)")->required();
  sweep->add_option("--out", out_path, "output CSV path")->required();

  std::string contents_path, relations_path;
  auto* ingest = app.add_subcommand("ingest", "validate and normalize a dataset");
  ingest->add_option("--contents", contents_path, "contents CSV")->required();
  ingest->add_option("--relations", relations_path, "relations CSV")->required();
  ingest->add_option("--out", out_path, "output bundle directory")->required();

  std::string scale = "small", mutate;
  auto* verify_cmd = app.add_subcommand("verify", "run the verification suites");
  verify_cmd->add_option("--scale", scale, "small|full")
      ->check(CLI::IsMember({"small", "full"}));
  verify_cmd->add_option("--mutate", mutate,
                         "deliberately corrupt a rule to prove the suite catches it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (threads) parallel::thread_override().store(threads);

  try {
    if (solve->parsed())
      return detail8::cmd_solve(config_path, out_path, net_seed, util_seed, verbose,
                                out, err);
    if (sweep->parsed()) return detail8::cmd_sweep(config_path, out_path, verbose, out, err);
    if (ingest->parsed())
      return detail8::cmd_ingest(contents_path, relations_path, out_path, out);
    if (verify_cmd->parsed()) return detail8::cmd_verify(scale, mutate, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // no subcommand (unreachable: require_subcommand)
}

}  // namespace softcache::cli

namespace softcache {
using cli::run_cli;
}  // namespace softcache
