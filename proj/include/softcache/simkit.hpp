#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "softcache/catalog.hpp"
#include "softcache/errors.hpp"
#include "softcache/ingest.hpp"
#include "softcache/network.hpp"
#include "softcache/objective.hpp"
#include "softcache/oracle.hpp"
#include "softcache/parallel.hpp"
#include "softcache/rng.hpp"
#include "softcache/solvers.hpp"

// Synthetic scenario generators (relation graphs, Zipf demand, geometric
// coverage) and the sweep harness that runs placement schemes over a
// parameter axis, producing one CSV row per (value, scheme, repetition).

namespace softcache::simkit {

/// Popularity-proportional relation graph: each content k takes each other
/// content n as related independently with probability
/// min(1, mean_degree * p_n / sum_{m != k} p_m), so the expected out-degree
/// is mean_degree and inclusion stays proportional to popularity. Edge
/// structure depends only on (popularity, mean_degree, seed) — never on the
/// acceptance level — so sweeping `acceptance` with a fixed seed rescales a
/// fixed graph. With `fixed_degree`, each content instead samples exactly
/// round(mean_degree) distinct related contents popularity-weighted.
inline catalog::UtilityModel gen_related_by_popularity(
    const std::vector<double>& popularity, double mean_degree, double acceptance,
    std::uint64_t seed, bool fixed_degree = false) {
  const std::size_t K = popularity.size();
  if (K < 2) throw ContractError("need at least two contents to relate");
  if (!(mean_degree > 0.0) || mean_degree >= static_cast<double>(K))
    throw ContractError("mean degree must be in (0, K)");
  if (!(acceptance >= 0.0) || !(acceptance <= 1.0))
    throw ValidationError("acceptance level must be in [0, 1]");
  double total = 0.0;
  for (double p : popularity) {
    if (!(p >= 0.0)) throw ValidationError("popularities must be non-negative");
    total += p;
  }
  if (!(total > 0.0)) throw ValidationError("popularities must not all be zero");

  auto model = catalog::UtilityModel::average(K, catalog::UtilityMode::Acceptance);
  Rng rng(seed);
  if (fixed_degree) {
    const auto degree = static_cast<std::size_t>(std::llround(mean_degree));
    if (degree >= K) throw ContractError("rounded mean degree must be below K");
    std::size_t positive = 0;
    for (double p : popularity)
      if (p > 0.0) ++positive;
    DiscreteSampler sampler(popularity);
    std::vector<char> picked(K, 0);
    std::vector<ContentId> chosen;
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t available = positive - (popularity[k] > 0.0 ? 1 : 0);
      if (available < degree)
        throw ValidationError("not enough positive-popularity contents to sample from");
      chosen.clear();
      while (chosen.size() < degree) {
        const auto n = static_cast<ContentId>(sampler.sample(rng));
        if (n == k || picked[n]) continue;
        picked[n] = 1;
        chosen.push_back(n);
      }
      for (ContentId n : chosen) {
        picked[n] = 0;
        model.add_relation(static_cast<ContentId>(k), n, acceptance);
      }
    }
    return model;
  }
  for (std::size_t k = 0; k < K; ++k) {
    const double denom = total - popularity[k];
    if (!(denom > 0.0)) continue;
    for (std::size_t n = 0; n < K; ++n) {
      if (n == k) continue;
      const double prob = std::min(1.0, mean_degree * popularity[n] / denom);
      if (bernoulli(rng, prob))
        model.add_relation(static_cast<ContentId>(k), static_cast<ContentId>(n),
                           acceptance);
    }
  }
  return model;
}

/// Uniform relation graph: every content gets exactly round(mean_degree)
/// distinct related contents chosen uniformly at random (excluding itself).
inline catalog::UtilityModel gen_related_uniform(std::size_t num_contents,
                                                 double mean_degree, double acceptance,
                                                 std::uint64_t seed) {
  const std::size_t K = num_contents;
  if (K < 2) throw ContractError("need at least two contents to relate");
  if (!(mean_degree > 0.0)) throw ContractError("mean degree must be positive");
  if (!(acceptance >= 0.0) || !(acceptance <= 1.0))
    throw ValidationError("acceptance level must be in [0, 1]");
  const auto degree = static_cast<std::size_t>(std::llround(mean_degree));
  if (degree >= K)
    throw ValidationError("mean degree of " + std::to_string(mean_degree) +
                          " needs more than the " + std::to_string(K) +
                          " contents available");
  auto model = catalog::UtilityModel::average(K, catalog::UtilityMode::Acceptance);
  Rng rng(seed);
  std::vector<ContentId> pool(K - 1);
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t t = 0;
    for (std::size_t n = 0; n < K; ++n)
      if (n != k) pool[t++] = static_cast<ContentId>(n);
    // Partial Fisher-Yates: the first `degree` slots become the sample.
    for (std::size_t d = 0; d < degree; ++d) {
      const auto pick = d + static_cast<std::size_t>(uniform_index(rng, pool.size() - d));
      std::swap(pool[d], pool[pick]);
      model.add_relation(static_cast<ContentId>(k), pool[d], acceptance);
    }
  }
  return model;
}

/// Zipf demand shared by all users: p_k proportional to (k+1)^(-exponent).
inline catalog::Catalog gen_zipf_demand(std::size_t num_contents, double exponent,
                                        std::size_t num_users) {
  if (num_contents == 0) throw ContractError("catalog must not be empty");
  if (!(exponent >= 0.0)) throw ContractError("Zipf exponent must be non-negative");
  std::vector<double> p(num_contents);
  for (std::size_t k = 0; k < num_contents; ++k)
    p[k] = std::pow(static_cast<double>(k + 1), -exponent);
  return catalog::Catalog::shared_demand(p, {}, num_users);
}

// ---------------------------------------------------------------------------
// Scenario configuration.

enum class CatalogSource { Synthetic, Ingested };
enum class UtilitySource { RelatedByPopularity, UniformRandom, Identity, Ingested };
enum class NetworkSource { Geometric, Ingested };

struct ScenarioConfig {
  // Catalog.
  CatalogSource catalog_source = CatalogSource::Synthetic;
  std::size_t num_contents = 0;
  double zipf_exponent = 0.8;
  std::string contents_path;

  // Relation model.
  UtilitySource utility_source = UtilitySource::Identity;
  double mean_degree = 0.0;
  double acceptance = 1.0;
  bool fixed_degree = false;
  std::uint64_t utility_seed = 1;
  std::string relations_path;

  // Coverage.
  NetworkSource network_source = NetworkSource::Geometric;
  std::size_t num_cells = 0;
  std::size_t num_users = 0;
  double area_side = 0.0;
  double range = 0.0;
  std::uint64_t network_seed = 1;
  std::string coverage_path;

  // Budgets.
  std::size_t capacity = 0;
  double budget_bytes = 0.0;  // 0 = item-count capacities apply

  // What to run.
  std::vector<std::string> schemes;  // sweep
  std::string scheme;                // solve
  std::string sweep_axis;            // capacity | num_cells | mean_degree | acceptance
  std::vector<double> sweep_values;
  std::size_t repetitions = 1;

  // Request simulation.
  std::uint64_t num_requests = 20000;
  std::uint64_t request_seed = 1;
};

inline const std::vector<std::string>& known_schemes() {
  static const std::vector<std::string> names = {"Single", "SingleSCH", "Femto",
                                                 "FemtoSCH"};
  return names;
}

inline const std::vector<std::string>& known_axes() {
  static const std::vector<std::string> names = {"capacity", "num_cells",
                                                 "mean_degree", "acceptance"};
  return names;
}

// ---------------------------------------------------------------------------
// Scenario building blocks (pure functions of config + explicit seeds).

inline catalog::Catalog build_catalog(const ScenarioConfig& cfg) {
  if (cfg.catalog_source == CatalogSource::Ingested) {
    if (cfg.contents_path.empty())
      throw ConfigError("an ingested catalog needs catalog.contents");
    // Relations are ingested separately by build_utility.
    auto result = catalog::ingest_catalog(cfg.contents_path, "");
    return result.catalog.with_users(cfg.num_users == 0 ? 1 : cfg.num_users);
  }
  if (cfg.num_contents == 0)
    throw ConfigError("a synthetic catalog needs catalog.num_contents");
  return gen_zipf_demand(cfg.num_contents, cfg.zipf_exponent,
                         cfg.num_users == 0 ? 1 : cfg.num_users);
}

inline catalog::UtilityModel build_utility(const ScenarioConfig& cfg,
                                           const catalog::Catalog& cat,
                                           double mean_degree, double acceptance,
                                           std::uint64_t seed) {
  switch (cfg.utility_source) {
    case UtilitySource::Identity:
      return catalog::UtilityModel::identity(cat.num_contents());
    case UtilitySource::RelatedByPopularity: {
      std::vector<double> p(cat.num_contents());
      for (std::size_t k = 0; k < p.size(); ++k)
        p[k] = cat.demand(0, static_cast<ContentId>(k));
      return gen_related_by_popularity(p, mean_degree, acceptance, seed,
                                       cfg.fixed_degree);
    }
    case UtilitySource::UniformRandom:
      return gen_related_uniform(cat.num_contents(), mean_degree, acceptance, seed);
    case UtilitySource::Ingested: {
      if (cfg.contents_path.empty() || cfg.relations_path.empty())
        throw ConfigError("an ingested relation model needs catalog.contents and utility.relations");
      auto result = catalog::ingest_catalog(cfg.contents_path, cfg.relations_path);
      // The acceptance knob rescales every ingested relation uniformly.
      return acceptance == 1.0 ? std::move(result.utility)
                               : result.utility.scaled(acceptance);
    }
  }
  throw ConfigError("unknown relation-model source");
}

inline network::CoverageModel build_network(const ScenarioConfig& cfg,
                                            std::size_t num_cells,
                                            std::uint64_t seed) {
  if (cfg.network_source == NetworkSource::Ingested) {
    if (cfg.coverage_path.empty())
      throw ConfigError("an ingested network needs network.coverage");
    return network::read_coverage_csv(cfg.coverage_path, cfg.num_users, num_cells);
  }
  return network::generate_geometric(num_cells, cfg.num_users, cfg.area_side,
                                     cfg.range, seed);
}

/// One scheme solved on one scenario: the solver result plus the coverage
/// and relation model the objective was evaluated against (the single-cache
/// schemes reduce coverage; the no-SCH schemes use the identity model), so
/// callers can simulate requests under the exact same semantics.
struct SchemeRun {
  SchemeRun(solvers::SolverResult r, network::CoverageModel c, catalog::UtilityModel u)
      : result(std::move(r)), coverage(std::move(c)), utility(std::move(u)) {}
  solvers::SolverResult result;
  network::CoverageModel coverage;
  catalog::UtilityModel utility;
};

inline SchemeRun run_scheme(const std::string& scheme, const catalog::Catalog& cat,
                            const network::CoverageModel& cov,
                            const catalog::UtilityModel& ut, std::size_t capacity,
                            double budget_bytes = 0.0) {
  const bool knapsack = budget_bytes > 0.0 || !cat.uniform_sizes();
  if (scheme == "Single") {
    auto cov1 = network::to_single_cache(cov);
    auto identity = catalog::UtilityModel::identity(cat.num_contents());
    auto r = solvers::popularity_baseline(cat, cov1, capacity);
    return SchemeRun(std::move(r), std::move(cov1), std::move(identity));
  }
  if (scheme == "SingleSCH") {
    auto cov1 = network::to_single_cache(cov);
    if (knapsack) {
      if (!(budget_bytes > 0.0))
        throw ConfigError("varying content sizes need an explicit budget_bytes");
      auto r = solvers::fast_greedy_knapsack(cat, cov1, ut, budget_bytes);
      return SchemeRun(std::move(r), std::move(cov1), ut);
    }
    auto r = solvers::greedy_single(cat, cov1, ut, capacity);
    return SchemeRun(std::move(r), std::move(cov1), ut);
  }
  if (scheme == "Femto") {
    auto identity = catalog::UtilityModel::identity(cat.num_contents());
    auto r = solvers::greedy_femto(cat, cov, identity, capacity);
    return SchemeRun(std::move(r), cov, std::move(identity));
  }
  if (scheme == "FemtoSCH") {
    auto r = solvers::greedy_femto(cat, cov, ut, capacity);
    return SchemeRun(std::move(r), cov, ut);
  }
  throw ConfigError("unknown scheme '" + scheme + "'");
}

// ---------------------------------------------------------------------------
// The sweep harness.

struct SweepRow {
  std::string axis;
  double value = 0.0;
  std::string scheme;
  std::uint64_t seed = 0;  // the network seed used for this repetition
  double objective = std::numeric_limits<double>::quiet_NaN();
  double sim_hit_ratio = std::numeric_limits<double>::quiet_NaN();
  double sim_stderr = std::numeric_limits<double>::quiet_NaN();
  double solve_ms = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success
};

inline const std::vector<std::string>& sweep_csv_header() {
  static const std::vector<std::string> h = {
      "axis",      "value",         "scheme",     "seed",
      "objective", "sim_hit_ratio", "sim_stderr", "solve_ms"};
  return h;
}

namespace detail5 {

inline void require_integer_at_least(double v, double lo, const std::string& axis) {
  if (!(v >= lo) || v != std::floor(v))
    throw ConfigError("sweep value " + csv::format_double(v) + " is invalid for axis " +
                      axis);
}

inline void validate_sweep(const ScenarioConfig& cfg) {
  const auto& axes = known_axes();
  if (std::find(axes.begin(), axes.end(), cfg.sweep_axis) == axes.end())
    throw ConfigError("sweep.axis must be one of capacity, num_cells, mean_degree, acceptance");
  if (cfg.sweep_values.empty()) throw ConfigError("sweep.values must not be empty");
  if (cfg.repetitions < 1) throw ConfigError("sweep.repetitions must be at least 1");
  if (cfg.schemes.empty()) throw ConfigError("schemes must not be empty");
  const auto& known = known_schemes();
  for (const auto& s : cfg.schemes)
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw ConfigError("unknown scheme '" + s + "'");
  for (double v : cfg.sweep_values) {
    if (cfg.sweep_axis == "capacity") {
      require_integer_at_least(v, 1.0, cfg.sweep_axis);
    } else if (cfg.sweep_axis == "num_cells") {
      require_integer_at_least(v, 1.0, cfg.sweep_axis);
    } else if (cfg.sweep_axis == "mean_degree") {
      if (!(v > 0.0)) throw ConfigError("mean_degree values must be positive");
      if (cfg.utility_source == UtilitySource::Identity ||
          cfg.utility_source == UtilitySource::Ingested)
        throw ConfigError("sweeping mean_degree needs a generated relation model");
    } else if (cfg.sweep_axis == "acceptance") {
      if (!(v >= 0.0) || !(v <= 1.0))
        throw ConfigError("acceptance values must be in [0, 1]");
    }
  }
}

}  // namespace detail5

/// Runs every (sweep value, scheme, repetition) job, in parallel, and returns
/// the rows ordered by (value index, scheme index, repetition). `on_row`, if
/// given, is called for each row in that exact order as soon as it and all
/// its predecessors are complete, so a consumer that streams rows to a file
/// always holds a valid prefix of the final table. A solver refusal or any
/// other per-row failure is recorded in the row's `error` field (numeric
/// columns become NaN) and the sweep continues.
inline std::vector<SweepRow> run_sweep(
    const ScenarioConfig& cfg,
    const std::function<void(const SweepRow&)>& on_row = {}) {
  detail5::validate_sweep(cfg);
  const std::size_t V = cfg.sweep_values.size();
  const std::size_t S = cfg.schemes.size();
  const std::size_t R = cfg.repetitions;
  const std::size_t total = V * S * R;

  std::vector<std::unique_ptr<SweepRow>> done(total);
  std::mutex flush_mutex;
  std::size_t next_flush = 0;

  parallel::for_each_chunk(total, [&](std::size_t index) {
    const std::size_t rep = index % R;
    const std::size_t si = (index / R) % S;
    const std::size_t vi = index / (R * S);
    const double value = cfg.sweep_values[vi];

    auto row = std::make_unique<SweepRow>();
    row->axis = cfg.sweep_axis;
    row->value = value;
    row->scheme = cfg.schemes[si];
    const std::uint64_t net_seed = derive_seed(cfg.network_seed, "net", rep);
    const std::uint64_t util_seed = derive_seed(cfg.utility_seed, "util", rep);
    const std::uint64_t req_seed = derive_seed(cfg.request_seed, "req", rep);
    row->seed = net_seed;

    std::size_t capacity = cfg.capacity;
    std::size_t num_cells = cfg.num_cells;
    double mean_degree = cfg.mean_degree;
    double acceptance = cfg.acceptance;
    if (cfg.sweep_axis == "capacity") capacity = static_cast<std::size_t>(value);
    if (cfg.sweep_axis == "num_cells") num_cells = static_cast<std::size_t>(value);
    if (cfg.sweep_axis == "mean_degree") mean_degree = value;
    if (cfg.sweep_axis == "acceptance") acceptance = value;

    try {
      const auto cat = build_catalog(cfg);
      const auto cov = build_network(cfg, num_cells, net_seed);
      const auto ut = build_utility(cfg, cat, mean_degree, acceptance, util_seed);
      auto run = run_scheme(row->scheme, cat, cov, ut, capacity, cfg.budget_bytes);
      row->objective = run.result.objective;
      row->solve_ms = run.result.wall_ms;
      const auto sim = oracle::simulate_requests(cat, run.coverage, run.utility,
                                                 run.result.placement,
                                                 cfg.num_requests, req_seed);
      row->sim_hit_ratio = sim.hit_ratio;
      row->sim_stderr = sim.std_error;
    } catch (const Error& e) {
      row->error = e.what();
    }

    std::lock_guard<std::mutex> lock(flush_mutex);
    done[index] = std::move(row);
    while (next_flush < total && done[next_flush]) {
      if (on_row) on_row(*done[next_flush]);
      ++next_flush;
    }
  });

  std::vector<SweepRow> rows;
  rows.reserve(total);
  for (auto& r : done) rows.push_back(std::move(*r));
  return rows;
}

inline std::vector<std::string> sweep_row_fields(const SweepRow& row) {
  return {row.axis,
          csv::format_double(row.value),
          row.scheme,
          std::to_string(row.seed),
          csv::format_double(row.objective),
          csv::format_double(row.sim_hit_ratio),
          csv::format_double(row.sim_stderr),
          csv::format_double(row.solve_ms)};
}

}  // namespace softcache::simkit

namespace softcache {
using simkit::build_catalog;
using simkit::build_network;
using simkit::build_utility;
using simkit::CatalogSource;
using simkit::gen_related_by_popularity;
using simkit::gen_related_uniform;
using simkit::gen_zipf_demand;
using simkit::NetworkSource;
using simkit::run_scheme;
using simkit::run_sweep;
using simkit::ScenarioConfig;
using simkit::SchemeRun;
using simkit::SweepRow;
using simkit::UtilitySource;
}  // namespace softcache
