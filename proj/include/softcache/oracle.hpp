#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "softcache/catalog.hpp"
#include "softcache/errors.hpp"
#include "softcache/network.hpp"
#include "softcache/objective.hpp"
#include "softcache/parallel.hpp"
#include "softcache/placement.hpp"
#include "softcache/rng.hpp"
#include "softcache/types.hpp"

// Brute-force exact optimizers and Monte-Carlo request simulation — the
// ground truth the approximation solvers are checked against on small
// instances.

namespace softcache::oracle {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

struct OracleResult {
  static constexpr std::size_t kArgmaxCap = 64;
  double optimum = 0.0;
  /// Placements achieving the optimum among those enumerated (list capped).
  std::vector<objective::Placement> argmax;
  /// Number of candidate placements evaluated.
  std::uint64_t enumerated = 0;
};

namespace detail4 {

/// C(n, k) computed in floating point — only used to decide cap refusal.
inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t t = 1; t <= k; ++t) r = r * static_cast<double>(n - k + t) / static_cast<double>(t);
  return r;
}

[[noreturn]] inline void refuse_cap(double count, std::uint64_t cap) {
  throw Refused("enumeration of about " + std::to_string(count) +
                " placements exceeds the cap of " + std::to_string(cap));
}

/// Per-cell contribution of one cell's stored set to the single-cache hit
/// objective: sum over the cell's users of q/N times the accept probability.
/// Used only to rank subsets within a cell; the reported optimum is always a
/// full objective-module evaluation of the assembled placement.
class CellEvaluator {
 public:
  CellEvaluator(const catalog::Catalog& cat, const network::CoverageModel& cov,
                const catalog::UtilityModel& ut, CellId cell)
      : cat_(cat), cov_(cov), ut_(ut), cell_(cell), r_(cat.num_contents(), 1.0) {}

  double value(const std::vector<ContentId>& subset) {
    const double inv_n = 1.0 / static_cast<double>(cov_.num_users());
    double total = 0.0;
    for (UserId i : cov_.users_of_cell(cell_)) {
      touched_.clear();
      for (ContentId n : subset) {
        touch(n);
        r_[n] *= 1.0 - ut_.diagonal();
        for (const auto& e : ut_.in_edges(i, n)) {
          touch(e.other);
          r_[e.other] *= 1.0 - e.value;
        }
      }
      double accept = 0.0;
      for (ContentId k : touched_) {
        accept += cat_.demand(objective::detail2::demand_row(cat_, i), k) * (1.0 - r_[k]);
        r_[k] = 1.0;
      }
      total += cov_.q(i, cell_) * inv_n * accept;
    }
    return total;
  }

 private:
  void touch(ContentId k) {
    if (r_[k] == 1.0 && !seen(k)) touched_.push_back(k);
  }
  bool seen(ContentId k) const {
    return std::find(touched_.begin(), touched_.end(), k) != touched_.end();
  }

  const catalog::Catalog& cat_;
  const network::CoverageModel& cov_;
  const catalog::UtilityModel& ut_;
  CellId cell_;
  std::vector<double> r_;
  std::vector<ContentId> touched_;
};

/// Lexicographic successor of a k-combination drawn from {0, .., n-1};
/// returns false once the last combination has been visited.
inline bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  if (k == 0) return false;
  std::size_t t = k;
  while (t > 0) {
    --t;
    if (idx[t] + (k - t) < n) {
      ++idx[t];
      for (std::size_t s = t + 1; s < k; ++s) idx[s] = idx[s - 1] + 1;
      return true;
    }
  }
  return false;
}

struct CellBest {
  double value = 0.0;
  std::vector<std::vector<ContentId>> sets;  // tied best subsets, capped
  std::uint64_t evaluated = 0;
};

inline void consider_subset(CellBest& best, double v, const std::vector<ContentId>& set) {
  ++best.evaluated;
  if (v > best.value) {
    best.value = v;
    best.sets.assign(1, set);
  } else if (v == best.value && best.sets.size() < OracleResult::kArgmaxCap) {
    best.sets.push_back(set);
  }
}

/// Best exact-size subset for one cell (ties kept up to the cap).
inline CellBest best_subset_cardinality(const catalog::Catalog& cat,
                                        const network::CoverageModel& cov,
                                        const catalog::UtilityModel& ut, CellId cell,
                                        std::size_t size) {
  CellBest best;
  best.sets.assign(1, {});  // the empty set, value 0
  if (size == 0) {
    best.evaluated = 1;
    return best;
  }
  best.sets.clear();
  CellEvaluator eval(cat, cov, ut, cell);
  std::vector<std::size_t> idx(size);
  for (std::size_t t = 0; t < size; ++t) idx[t] = t;
  std::vector<ContentId> set(size);
  do {
    for (std::size_t t = 0; t < size; ++t) set[t] = static_cast<ContentId>(idx[t]);
    consider_subset(best, eval.value(set), set);
  } while (next_combination(idx, cat.num_contents()));
  return best;
}

/// Best byte-feasible subset (any size) for one cell.
inline CellBest best_subset_knapsack(const catalog::Catalog& cat,
                                     const network::CoverageModel& cov,
                                     const catalog::UtilityModel& ut, CellId cell,
                                     double budget_bytes) {
  CellBest best;  // the all-exclude leaf inserts the empty set first
  CellEvaluator eval(cat, cov, ut, cell);
  std::vector<ContentId> set;
  const std::size_t K = cat.num_contents();
  auto recurse = [&](auto&& self, std::size_t k, double remaining) -> void {
    if (k == K) {
      consider_subset(best, set.empty() ? 0.0 : eval.value(set), set);
      return;
    }
    self(self, k + 1, remaining);
    const double s = cat.size_of(static_cast<ContentId>(k));
    if (s <= remaining) {
      set.push_back(static_cast<ContentId>(k));
      self(self, k + 1, remaining - s);
      set.pop_back();
    }
  };
  recurse(recurse, 0, budget_bytes);
  return best;
}

/// Number of byte-feasible subsets of contents k.., given remaining budget;
/// saturates at `cap + 1` so callers can refuse early.
inline std::uint64_t count_knapsack(const catalog::Catalog& cat, std::size_t k,
                                    double remaining, std::uint64_t cap) {
  if (k == cat.num_contents()) return 1;
  std::uint64_t total = count_knapsack(cat, k + 1, remaining, cap);
  if (total > cap) return total;
  const double s = cat.size_of(static_cast<ContentId>(k));
  if (s <= remaining) total += count_knapsack(cat, k + 1, remaining - s, cap);
  return std::min<std::uint64_t>(total, cap + 1);
}

/// Assemble per-cell winners into full placements, re-evaluating the first
/// one through the objective module for the reported optimum.
inline OracleResult assemble_single(const catalog::Catalog& cat,
                                    const network::CoverageModel& cov,
                                    const catalog::UtilityModel& ut,
                                    const std::vector<CellBest>& best) {
  OracleResult out;
  const std::size_t M = cov.num_cells();
  // Cartesian product of per-cell tie lists, capped.
  std::vector<std::size_t> pick(M, 0);
  for (;;) {
    objective::Placement p(M);
    for (std::size_t j = 0; j < M; ++j)
      for (ContentId k : best[j].sets[pick[j]]) p.add(k, static_cast<CellId>(j));
    out.argmax.push_back(std::move(p));
    if (out.argmax.size() >= OracleResult::kArgmaxCap) break;
    std::size_t j = 0;
    while (j < M && pick[j] + 1 == best[j].sets.size()) pick[j++] = 0;
    if (j == M) break;
    ++pick[j];
  }
  for (const auto& b : best) out.enumerated += b.evaluated;
  out.optimum = objective::hit_ratio_single(cat, cov, ut, out.argmax.front());
  return out;
}

}  // namespace detail4

/// Exact optimum for the single-cache regime with an item capacity per cell.
/// Enumerates, per cell, every subset of exactly min(C, K) contents (the
/// objective is monotone, so smaller sets never beat a full one).
inline OracleResult exhaustive_single(const catalog::Catalog& cat,
                                      const network::CoverageModel& cov,
                                      const catalog::UtilityModel& ut,
                                      std::size_t capacity,
                                      std::uint64_t cap = kDefaultEnumerationCap) {
  if (!cov.single_cache_valid())
    throw ContractError(
        "coverage is not in the single-cache regime (rows must sum to 0 or 1)");
  if (capacity < 1) throw ContractError("capacity must be at least 1");
  const std::size_t K = cat.num_contents();
  const std::size_t size = std::min(capacity, K);
  double predicted = 0.0;
  for (std::size_t j = 0; j < cov.num_cells(); ++j)
    if (!cov.users_of_cell(static_cast<CellId>(j)).empty())
      predicted += detail4::binomial(K, size);
  if (predicted > static_cast<double>(cap)) detail4::refuse_cap(predicted, cap);

  std::vector<detail4::CellBest> best(cov.num_cells());
  for (std::size_t j = 0; j < cov.num_cells(); ++j) {
    const auto cell = static_cast<CellId>(j);
    if (cov.users_of_cell(cell).empty()) {
      best[j].sets.assign(1, {});
      continue;
    }
    best[j] = detail4::best_subset_cardinality(cat, cov, ut, cell, size);
  }
  return detail4::assemble_single(cat, cov, ut, best);
}

/// Exact optimum for the single-cache regime under a per-cell byte budget.
/// Enumerates every byte-feasible subset per cell.
inline OracleResult exhaustive_single_knapsack(const catalog::Catalog& cat,
                                               const network::CoverageModel& cov,
                                               const catalog::UtilityModel& ut,
                                               double budget_bytes,
                                               std::uint64_t cap = kDefaultEnumerationCap) {
  if (!cov.single_cache_valid())
    throw ContractError(
        "coverage is not in the single-cache regime (rows must sum to 0 or 1)");
  if (!(budget_bytes > 0.0)) throw ContractError("byte budget must be positive");
  double predicted = 0.0;
  for (std::size_t j = 0; j < cov.num_cells(); ++j)
    if (!cov.users_of_cell(static_cast<CellId>(j)).empty())
      predicted += static_cast<double>(detail4::count_knapsack(cat, 0, budget_bytes, cap));
  if (predicted > static_cast<double>(cap)) detail4::refuse_cap(predicted, cap);

  std::vector<detail4::CellBest> best(cov.num_cells());
  for (std::size_t j = 0; j < cov.num_cells(); ++j) {
    const auto cell = static_cast<CellId>(j);
    if (cov.users_of_cell(cell).empty()) {
      best[j].sets.assign(1, {});
      continue;
    }
    best[j] = detail4::best_subset_knapsack(cat, cov, ut, cell, budget_bytes);
  }
  return detail4::assemble_single(cat, cov, ut, best);
}

/// Exact optimum over the product of per-cell exact-size subsets, for
/// overlapping coverage. Evaluates through the mode-dispatching objective, so
/// it serves both the hit-ratio and the satisfaction problem.
inline OracleResult exhaustive_femto(const catalog::Catalog& cat,
                                     const network::CoverageModel& cov,
                                     const catalog::UtilityModel& ut,
                                     const std::vector<std::size_t>& capacities,
                                     std::uint64_t cap = kDefaultEnumerationCap) {
  if (capacities.size() != cov.num_cells())
    throw ContractError("capacity list must have one entry per cell");
  const std::size_t K = cat.num_contents();
  const std::size_t M = cov.num_cells();
  std::vector<std::size_t> sizes(M);
  double predicted = 1.0;
  for (std::size_t j = 0; j < M; ++j) {
    if (capacities[j] < 1) throw ContractError("cell capacities must be at least 1");
    sizes[j] = std::min(capacities[j], K);
    predicted *= detail4::binomial(K, sizes[j]);
    if (predicted > static_cast<double>(cap)) detail4::refuse_cap(predicted, cap);
  }

  // The odometer: one exact-size combination per cell.
  std::vector<std::vector<std::size_t>> idx(M);
  for (std::size_t j = 0; j < M; ++j) {
    idx[j].resize(sizes[j]);
    for (std::size_t t = 0; t < sizes[j]; ++t) idx[j][t] = t;
  }
  OracleResult out;
  for (;;) {
    objective::Placement p(M);
    for (std::size_t j = 0; j < M; ++j)
      for (std::size_t t : idx[j]) p.add(static_cast<ContentId>(t), static_cast<CellId>(j));
    const double v = objective::evaluate_placement(cat, cov, ut, p);
    ++out.enumerated;
    if (out.argmax.empty() || v > out.optimum) {
      out.optimum = v;
      out.argmax.clear();
      out.argmax.push_back(std::move(p));
    } else if (v == out.optimum && out.argmax.size() < OracleResult::kArgmaxCap) {
      out.argmax.push_back(std::move(p));
    }
    std::size_t j = 0;
    while (j < M && !detail4::next_combination(idx[j], K)) {
      for (std::size_t t = 0; t < sizes[j]; ++t) idx[j][t] = t;
      ++j;
    }
    if (j == M) break;
  }
  return out;
}

/// Monte-Carlo estimate of the hit ratio for a fixed placement.
struct SimResult {
  double hit_ratio = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t requests = 0;
};

/// Draws requests (uniform user, content from that user's demand row) and,
/// for every stored (content, cell) pair, one independent accept/reach coin
/// with probability u * q — the unique per-item sampling whose hit
/// probability matches the product-form objective exactly, for fractional
/// coverage too. Chunked by a fixed size and seeded per chunk, so results
/// are identical for any thread count.
inline SimResult simulate_requests(const catalog::Catalog& cat,
                                   const network::CoverageModel& cov,
                                   const catalog::UtilityModel& ut,
                                   const objective::Placement& placement,
                                   std::uint64_t num_requests, std::uint64_t seed) {
  if (ut.mode() != catalog::UtilityMode::Acceptance)
    throw ModeError("request simulation needs an acceptance-mode relation model");
  if (num_requests == 0) throw ContractError("num_requests must be positive");
  const std::size_t N = cov.num_users();
  if (cat.num_users() != 1 && cat.num_users() != N)
    throw ContractError("catalog and coverage disagree on the number of users");

  // Per-user demand samplers (a single shared one when demand is shared).
  std::vector<DiscreteSampler> samplers;
  const bool shared = cat.num_users() == 1;
  const std::size_t K = cat.num_contents();
  {
    std::vector<double> row(K);
    const std::size_t rows = shared ? 1 : N;
    samplers.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t k = 0; k < K; ++k)
        row[k] = cat.demand(static_cast<UserId>(shared ? 0 : i), static_cast<ContentId>(k));
      samplers.emplace_back(row);
    }
  }

  constexpr std::uint64_t kChunk = 16384;
  const std::uint64_t num_chunks = (num_requests + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> chunk_hits(num_chunks, 0);
  const auto& items = placement.items();

  parallel::for_each_chunk(num_chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, "sim", c));
    const std::uint64_t lo = static_cast<std::uint64_t>(c) * kChunk;
    const std::uint64_t hi = std::min(num_requests, lo + kChunk);
    std::uint64_t hits = 0;
    for (std::uint64_t t = lo; t < hi; ++t) {
      const auto i = static_cast<UserId>(uniform_index(rng, N));
      const auto k = static_cast<ContentId>(samplers[shared ? 0 : i].sample(rng));
      for (const auto& [n, j] : items) {
        const double p = ut.utility(i, k, n) * cov.q(i, j);
        if (p > 0.0 && bernoulli(rng, p)) {
          ++hits;
          break;
        }
      }
    }
    chunk_hits[c] = hits;
  });

  SimResult out;
  out.requests = num_requests;
  for (std::uint64_t h : chunk_hits) out.hits += h;
  out.hit_ratio = static_cast<double>(out.hits) / static_cast<double>(num_requests);
  out.std_error = std::sqrt(out.hit_ratio * (1.0 - out.hit_ratio) /
                            static_cast<double>(num_requests));
  return out;
}

}  // namespace softcache::oracle

namespace softcache {
using oracle::exhaustive_femto;
using oracle::exhaustive_single;
using oracle::exhaustive_single_knapsack;
using oracle::OracleResult;
using oracle::simulate_requests;
using oracle::SimResult;
}  // namespace softcache
