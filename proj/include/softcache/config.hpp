#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"
#include "softcache/errors.hpp"
#include "softcache/simkit.hpp"

// JSON scenario configuration. Parsing is fail-closed: any key the schema
// does not know is an error, so a typo can never silently fall back to a
// default. Relative file paths inside a config resolve against the config
// file's own directory.

namespace softcache::config {

namespace detail6 {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

inline const json& need_object(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  return obj;
}

inline std::string get_string(const json& obj, const char* key, const std::string& where,
                              const std::string& fallback = {}) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError(where + "." + key + " must be a string");
  return obj[key].get<std::string>();
}

inline double get_number(const json& obj, const char* key, const std::string& where,
                         double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(where + "." + key + " must be a number");
  return obj[key].get<double>();
}

inline std::uint64_t get_uint(const json& obj, const char* key, const std::string& where,
                              std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer() && !obj[key].is_number_unsigned())
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  if (obj[key].is_number_integer() && obj[key].get<std::int64_t>() < 0)
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  return obj[key].get<std::uint64_t>();
}

inline bool get_bool(const json& obj, const char* key, const std::string& where,
                     bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  return obj[key].get<bool>();
}

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
  if (p.empty()) return p;
  std::filesystem::path fp(p);
  if (fp.is_relative()) fp = base / fp;
  return fp.string();
}

}  // namespace detail6

/// Parses a scenario from already-loaded JSON. `base_dir` anchors relative
/// file paths; `where` names the source in error messages.
inline simkit::ScenarioConfig parse_scenario(const nlohmann::json& root,
                                             const std::filesystem::path& base_dir,
                                             const std::string& where = "config") {
  using detail6::get_bool;
  using detail6::get_number;
  using detail6::get_string;
  using detail6::get_uint;
  using detail6::need_object;
  using detail6::reject_unknown;

  need_object(root, where);
  reject_unknown(root,
                 {"catalog", "utility", "network", "capacity", "budget_bytes",
                  "scheme", "schemes", "sweep", "requests"},
                 where);
  simkit::ScenarioConfig cfg;

  if (!root.contains("catalog")) throw ConfigError(where + ": missing 'catalog'");
  {
    const auto& c = need_object(root["catalog"], where + ".catalog");
    reject_unknown(c, {"source", "num_contents", "zipf_exponent", "contents"},
                   where + ".catalog");
    const std::string src = get_string(c, "source", where + ".catalog", "synthetic");
    if (src == "synthetic") {
      cfg.catalog_source = simkit::CatalogSource::Synthetic;
    } else if (src == "ingested") {
      cfg.catalog_source = simkit::CatalogSource::Ingested;
    } else {
      throw ConfigError(where + ".catalog.source must be 'synthetic' or 'ingested'");
    }
    cfg.num_contents = static_cast<std::size_t>(
        get_uint(c, "num_contents", where + ".catalog", 0));
    cfg.zipf_exponent = get_number(c, "zipf_exponent", where + ".catalog", 0.8);
    cfg.contents_path = detail6::resolve_path(
        get_string(c, "contents", where + ".catalog"), base_dir);
  }

  if (root.contains("utility")) {
    const auto& u = need_object(root["utility"], where + ".utility");
    reject_unknown(u,
                   {"source", "mean_degree", "acceptance", "fixed_degree", "seed",
                    "relations"},
                   where + ".utility");
    const std::string src = get_string(u, "source", where + ".utility", "identity");
    if (src == "identity") {
      cfg.utility_source = simkit::UtilitySource::Identity;
    } else if (src == "related_by_popularity") {
      cfg.utility_source = simkit::UtilitySource::RelatedByPopularity;
    } else if (src == "uniform_random") {
      cfg.utility_source = simkit::UtilitySource::UniformRandom;
    } else if (src == "ingested") {
      cfg.utility_source = simkit::UtilitySource::Ingested;
    } else {
      throw ConfigError(where +
                        ".utility.source must be one of identity, "
                        "related_by_popularity, uniform_random, ingested");
    }
    cfg.mean_degree = get_number(u, "mean_degree", where + ".utility", 0.0);
    cfg.acceptance = get_number(u, "acceptance", where + ".utility", 1.0);
    cfg.fixed_degree = get_bool(u, "fixed_degree", where + ".utility", false);
    cfg.utility_seed = get_uint(u, "seed", where + ".utility", 1);
    cfg.relations_path = detail6::resolve_path(
        get_string(u, "relations", where + ".utility"), base_dir);
  }

  if (!root.contains("network")) throw ConfigError(where + ": missing 'network'");
  {
    const auto& n = need_object(root["network"], where + ".network");
    reject_unknown(
        n, {"source", "num_cells", "num_users", "area_side", "range", "seed", "coverage"},
        where + ".network");
    const std::string src = get_string(n, "source", where + ".network", "geometric");
    if (src == "geometric") {
      cfg.network_source = simkit::NetworkSource::Geometric;
    } else if (src == "ingested") {
      cfg.network_source = simkit::NetworkSource::Ingested;
    } else {
      throw ConfigError(where + ".network.source must be 'geometric' or 'ingested'");
    }
    cfg.num_cells =
        static_cast<std::size_t>(get_uint(n, "num_cells", where + ".network", 0));
    cfg.num_users =
        static_cast<std::size_t>(get_uint(n, "num_users", where + ".network", 0));
    cfg.area_side = get_number(n, "area_side", where + ".network", 0.0);
    cfg.range = get_number(n, "range", where + ".network", 0.0);
    cfg.network_seed = get_uint(n, "seed", where + ".network", 1);
    cfg.coverage_path = detail6::resolve_path(
        get_string(n, "coverage", where + ".network"), base_dir);
  }

  cfg.capacity = static_cast<std::size_t>(get_uint(root, "capacity", where, 0));
  cfg.budget_bytes = get_number(root, "budget_bytes", where, 0.0);
  cfg.scheme = get_string(root, "scheme", where);

  if (root.contains("schemes")) {
    if (!root["schemes"].is_array())
      throw ConfigError(where + ".schemes must be an array of strings");
    for (const auto& s : root["schemes"]) {
      if (!s.is_string()) throw ConfigError(where + ".schemes must be an array of strings");
      cfg.schemes.push_back(s.get<std::string>());
    }
  }

  if (root.contains("sweep")) {
    const auto& s = need_object(root["sweep"], where + ".sweep");
    reject_unknown(s, {"axis", "values", "repetitions"}, where + ".sweep");
    cfg.sweep_axis = get_string(s, "axis", where + ".sweep");
    if (!s.contains("values") || !s["values"].is_array())
      throw ConfigError(where + ".sweep.values must be an array of numbers");
    for (const auto& v : s["values"]) {
      if (!v.is_number())
        throw ConfigError(where + ".sweep.values must be an array of numbers");
      cfg.sweep_values.push_back(v.get<double>());
    }
    cfg.repetitions =
        static_cast<std::size_t>(get_uint(s, "repetitions", where + ".sweep", 1));
  }

  if (root.contains("requests")) {
    const auto& r = need_object(root["requests"], where + ".requests");
    reject_unknown(r, {"count", "seed"}, where + ".requests");
    cfg.num_requests = get_uint(r, "count", where + ".requests", 20000);
    cfg.request_seed = get_uint(r, "seed", where + ".requests", 1);
  }

  return cfg;
}

/// Loads and parses a scenario config file.
inline simkit::ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(root, std::filesystem::path(path).parent_path(), path);
}

}  // namespace softcache::config

namespace softcache {
using config::load_scenario;
using config::parse_scenario;
}  // namespace softcache
