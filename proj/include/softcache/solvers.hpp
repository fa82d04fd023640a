#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "softcache/catalog.hpp"
#include "softcache/errors.hpp"
#include "softcache/network.hpp"
#include "softcache/objective.hpp"
#include "softcache/placement.hpp"
#include "softcache/types.hpp"

// Placement solvers. All greedy variants use lazy gain re-evaluation (stale
// gains are upper bounds because the objectives have diminishing returns) and
// are guaranteed to pick the exact same items as a naive full rescan, given
// the shared tie-break rule: highest gain, then lowest content id, then
// lowest cell index. Greedy runs stop early once the best remaining gain is
// zero — under-filled caches are feasible and storing useless content only
// muddies the step traces.

namespace softcache::solvers {

struct SolveStep {
  ContentId content;
  CellId cell;
  double gain;
};

struct SolverResult {
  explicit SolverResult(std::size_t num_cells) : placement(num_cells) {}
  objective::Placement placement;
  double objective = 0.0;
  std::vector<SolveStep> trace;
  double wall_ms = 0.0;
};

namespace detail3 {

class WallTimer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

struct Cand {
  double key;  // gain, or gain/weight for the density rule
  double gain;
  ContentId content;
  CellId cell;
  std::uint64_t stamp;
};

// Max-heap order: highest key first; ties to lowest (content, cell).
struct CandWorse {
  bool operator()(const Cand& a, const Cand& b) const {
    if (a.key != b.key) return a.key < b.key;
    if (a.content != b.content) return a.content > b.content;
    return a.cell > b.cell;
  }
};

/// Lazy greedy under the state's capacity limits. `weight(k)` divides the
/// selection key (1 for plain greedy, content size for the density rule).
/// Items that no longer fit are dropped for good: budgets only shrink.
template <class State, class WeightFn>
void lazy_greedy(State& st, const std::vector<std::pair<ContentId, CellId>>& candidates,
                 WeightFn weight, std::vector<SolveStep>& trace) {
  std::priority_queue<Cand, std::vector<Cand>, CandWorse> heap;
  for (const auto& [k, j] : candidates) {
    if (!st.can_fit(k, j)) continue;
    const double g = st.marginal_gain(k, j);
    heap.push({g / weight(k), g, k, j, 0});
  }
  std::uint64_t step = 0;
  while (!heap.empty()) {
    Cand c = heap.top();
    heap.pop();
    if (!st.can_fit(c.content, c.cell)) continue;
    if (c.stamp == step) {
      if (c.gain <= 0.0) break;
      st.commit(c.content, c.cell);
      trace.push_back({c.content, c.cell, c.gain});
      ++step;
    } else {
      c.gain = st.marginal_gain(c.content, c.cell);
      c.key = c.gain / weight(c.content);
      c.stamp = step;
      heap.push(c);
    }
  }
}

/// Reference implementation: full rescan every step, same tie-break rule.
/// `corrupt_ties` flips the tie-break to highest (content, cell) — kept so
/// the verification suite can prove its differential check has teeth.
template <class State>
void naive_greedy(State& st, std::vector<std::pair<ContentId, CellId>> alive,
                  std::vector<SolveStep>& trace, bool corrupt_ties = false) {
  while (!alive.empty()) {
    std::size_t best_idx = alive.size();
    double best_gain = 0.0;
    for (std::size_t t = 0; t < alive.size();) {
      const auto [k, j] = alive[t];
      if (!st.can_fit(k, j)) {
        alive[t] = alive.back();
        alive.pop_back();
        continue;
      }
      const double g = st.marginal_gain(k, j);
      bool better = false;
      if (best_idx == alive.size() || g > best_gain) {
        better = true;
      } else if (g == best_gain) {
        const auto [bk, bj] = alive[best_idx];
        const bool lower = k < bk || (k == bk && j < bj);
        better = corrupt_ties ? !lower : lower;
      }
      if (better) {
        best_idx = t;
        best_gain = g;
      }
      ++t;
    }
    if (best_idx == alive.size() || best_gain <= 0.0) break;
    const auto [k, j] = alive[best_idx];
    st.commit(k, j);
    trace.push_back({k, j, best_gain});
    alive[best_idx] = alive.back();
    alive.pop_back();
  }
}

inline std::vector<std::pair<ContentId, CellId>> cell_candidates(std::size_t K,
                                                                 CellId j) {
  std::vector<std::pair<ContentId, CellId>> c;
  c.reserve(K);
  for (std::size_t k = 0; k < K; ++k) c.emplace_back(static_cast<ContentId>(k), j);
  return c;
}

inline std::vector<std::pair<ContentId, CellId>> all_candidates(std::size_t K,
                                                                std::size_t M) {
  std::vector<std::pair<ContentId, CellId>> c;
  c.reserve(K * M);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < M; ++j)
      c.emplace_back(static_cast<ContentId>(k), static_cast<CellId>(j));
  return c;
}

inline void require_single_cache(const network::CoverageModel& cov) {
  if (!cov.single_cache_valid())
    throw ContractError(
        "coverage is not in the single-cache regime (rows must sum to 0 or 1)");
}

inline void merge_run(SolverResult& into, const objective::Placement& p, double obj,
                      const std::vector<SolveStep>& trace) {
  for (const auto& [k, j] : p.items()) into.placement.add(k, j);
  into.objective += obj;
  into.trace.insert(into.trace.end(), trace.begin(), trace.end());
}

}  // namespace detail3

/// Greedy placement for the single-cache regime with an item-count capacity
/// per cell. Cells are filled independently: in this regime the objective is
/// a sum of per-cell terms, so per-cell greedy is the greedy algorithm.
inline SolverResult greedy_single(const catalog::Catalog& cat,
                                  const network::CoverageModel& cov,
                                  const catalog::UtilityModel& ut,
                                  std::size_t capacity) {
  detail3::WallTimer timer;
  detail3::require_single_cache(cov);
  if (capacity < 1) throw ContractError("capacity must be at least 1");
  SolverResult result(cov.num_cells());
  for (std::size_t j = 0; j < cov.num_cells(); ++j) {
    const auto cell = static_cast<CellId>(j);
    if (cov.users_of_cell(cell).empty()) continue;
    auto st = objective::SchrState::single_cell(
        cat, cov, ut, cell, objective::CellCaps::items(cov.num_cells(), capacity));
    std::vector<SolveStep> trace;
    detail3::lazy_greedy(st, detail3::cell_candidates(cat.num_contents(), cell),
                         [](ContentId) { return 1.0; }, trace);
    detail3::merge_run(result, st.placement(), st.objective(), trace);
  }
  result.wall_ms = timer.ms();
  return result;
}

/// One density- or unit-rule greedy run for a single cell under a byte
/// budget; returns the state's objective.
namespace detail3 {
template <class StateFactory>
double knapsack_run(StateFactory make_state, const catalog::Catalog& cat, CellId cell,
                    bool density, const std::vector<ContentId>& candidates,
                    objective::Placement* out, std::vector<SolveStep>* trace_out) {
  auto st = make_state();
  std::vector<std::pair<ContentId, CellId>> cands;
  cands.reserve(candidates.size());
  for (ContentId k : candidates) cands.emplace_back(k, cell);
  std::vector<SolveStep> trace;
  if (density)
    lazy_greedy(st, cands, [&](ContentId k) { return cat.size_of(k); }, trace);
  else
    lazy_greedy(st, cands, [](ContentId) { return 1.0; }, trace);
  if (out)
    for (const auto& [k, j] : st.placement().items()) out->add(k, j);
  if (trace_out) *trace_out = std::move(trace);
  return st.objective();
}
}  // namespace detail3

/// Knapsack-constrained greedy for the single-cache regime: runs the
/// density rule (gain per byte, skipping items that no longer fit) and the
/// plain-gain rule, and keeps whichever placement scores higher per cell.
inline SolverResult fast_greedy_knapsack(const catalog::Catalog& cat,
                                         const network::CoverageModel& cov,
                                         const catalog::UtilityModel& ut,
                                         double budget_bytes) {
  detail3::WallTimer timer;
  detail3::require_single_cache(cov);
  if (!(budget_bytes > 0.0)) throw ContractError("byte budget must be positive");
  SolverResult result(cov.num_cells());
  std::vector<ContentId> all(cat.num_contents());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<ContentId>(k);
  for (std::size_t j = 0; j < cov.num_cells(); ++j) {
    const auto cell = static_cast<CellId>(j);
    if (cov.users_of_cell(cell).empty()) continue;
    auto make_state = [&] {
      return objective::SchrState::single_cell(
          cat, cov, ut, cell,
          objective::CellCaps::bytes(cov.num_cells(), budget_bytes));
    };
    objective::Placement dense_p(cov.num_cells()), unit_p(cov.num_cells());
    std::vector<SolveStep> dense_t, unit_t;
    const double dense_v =
        detail3::knapsack_run(make_state, cat, cell, true, all, &dense_p, &dense_t);
    const double unit_v =
        detail3::knapsack_run(make_state, cat, cell, false, all, &unit_p, &unit_t);
    if (dense_v >= unit_v)
      detail3::merge_run(result, dense_p, dense_v, dense_t);
    else
      detail3::merge_run(result, unit_p, unit_v, unit_t);
  }
  result.wall_ms = timer.ms();
  return result;
}

/// Partial-enumeration knapsack: evaluates every feasible subset of fewer
/// than three items, completes every feasible three-item seed with the
/// density rule, and also includes both from-scratch greedy runs, returning
/// the best candidate found. Cost grows as K^5, so catalogs above
/// `content_limit` are refused.
inline SolverResult partial_enum_knapsack(const catalog::Catalog& cat,
                                          const network::CoverageModel& cov,
                                          const catalog::UtilityModel& ut,
                                          double budget_bytes,
                                          std::size_t content_limit = 60) {
  detail3::WallTimer timer;
  detail3::require_single_cache(cov);
  if (!(budget_bytes > 0.0)) throw ContractError("byte budget must be positive");
  const std::size_t K = cat.num_contents();
  if (K > content_limit)
    throw Refused("catalog of " + std::to_string(K) +
                  " contents exceeds the partial-enumeration limit of " +
                  std::to_string(content_limit) + "; use fast_greedy_knapsack");
  SolverResult result(cov.num_cells());
  std::vector<ContentId> all(K);
  for (std::size_t k = 0; k < K; ++k) all[k] = static_cast<ContentId>(k);

  for (std::size_t j = 0; j < cov.num_cells(); ++j) {
    const auto cell = static_cast<CellId>(j);
    if (cov.users_of_cell(cell).empty()) continue;
    const auto caps = objective::CellCaps::bytes(cov.num_cells(), budget_bytes);
    auto make_state = [&] {
      return objective::SchrState::single_cell(cat, cov, ut, cell, caps);
    };
    double best_v = 0.0;  // the empty placement
    objective::Placement best_p(cov.num_cells());
    auto consider = [&](const objective::Placement& p, double v) {
      if (v > best_v) {
        best_v = v;
        best_p = p;
      }
    };

    auto fits = [&](const std::vector<ContentId>& set) {
      double used = 0.0;
      for (ContentId k : set) used += cat.size_of(k);
      return used <= budget_bytes;
    };
    auto evaluate_set = [&](const std::vector<ContentId>& set) {
      auto st = make_state();
      for (ContentId k : set) st.commit(k, cell);
      consider(st.placement(), st.objective());
    };

    // All feasible subsets with fewer than three items.
    for (std::size_t a = 0; a < K; ++a) {
      if (!fits({all[a]})) continue;
      evaluate_set({all[a]});
      for (std::size_t b = a + 1; b < K; ++b)
        if (fits({all[a], all[b]})) evaluate_set({all[a], all[b]});
    }
    // Every feasible three-item seed, completed greedily by gain per byte.
    std::vector<ContentId> rest;
    for (std::size_t a = 0; a < K; ++a)
      for (std::size_t b = a + 1; b < K; ++b)
        for (std::size_t c = b + 1; c < K; ++c) {
          if (!fits({all[a], all[b], all[c]})) continue;
          auto st = make_state();
          st.commit(all[a], cell);
          st.commit(all[b], cell);
          st.commit(all[c], cell);
          rest.clear();
          for (std::size_t t = 0; t < K; ++t)
            if (t != a && t != b && t != c) rest.push_back(all[t]);
          std::vector<std::pair<ContentId, CellId>> cands;
          for (ContentId k : rest) cands.emplace_back(k, cell);
          std::vector<SolveStep> trace;
          detail3::lazy_greedy(st, cands,
                               [&](ContentId k) { return cat.size_of(k); }, trace);
          consider(st.placement(), st.objective());
        }
    // Both from-scratch greedy runs, so this solver never scores below
    // fast_greedy_knapsack on any instance.
    {
      objective::Placement p(cov.num_cells());
      const double v = detail3::knapsack_run(make_state, cat, cell, true, all, &p, nullptr);
      consider(p, v);
    }
    {
      objective::Placement p(cov.num_cells());
      const double v = detail3::knapsack_run(make_state, cat, cell, false, all, &p, nullptr);
      consider(p, v);
    }

    for (const auto& [k, jj] : best_p.items()) {
      result.placement.add(k, jj);
      result.trace.push_back({k, jj, 0.0});
    }
    result.objective += best_v;
  }
  result.wall_ms = timer.ms();
  return result;
}

/// Greedy placement over all (content, cell) pairs with overlapping coverage
/// and per-cell item capacities.
inline SolverResult greedy_femto(const catalog::Catalog& cat,
                                 const network::CoverageModel& cov,
                                 const catalog::UtilityModel& ut,
                                 const std::vector<std::size_t>& capacities) {
  detail3::WallTimer timer;
  if (capacities.size() != cov.num_cells())
    throw ContractError("capacity list must have one entry per cell");
  for (std::size_t c : capacities)
    if (c < 1) throw ContractError("cell capacities must be at least 1");
  objective::CellCaps caps;
  caps.max_items = capacities;
  objective::SchrState st(cat, cov, ut, caps);
  SolverResult result(cov.num_cells());
  detail3::lazy_greedy(st, detail3::all_candidates(cat.num_contents(), cov.num_cells()),
                       [](ContentId) { return 1.0; }, result.trace);
  for (const auto& [k, j] : st.placement().items()) result.placement.add(k, j);
  result.objective = st.objective();
  result.wall_ms = timer.ms();
  return result;
}

inline SolverResult greedy_femto(const catalog::Catalog& cat,
                                 const network::CoverageModel& cov,
                                 const catalog::UtilityModel& ut, std::size_t per_cell) {
  return greedy_femto(cat, cov, ut,
                      std::vector<std::size_t>(cov.num_cells(), per_cell));
}

/// Same skeleton driven by the satisfaction objective (expected value of the
/// best stored option). Requires a satisfaction-mode relation model.
inline SolverResult greedy_femto_satisfaction(const catalog::Catalog& cat,
                                              const network::CoverageModel& cov,
                                              const catalog::UtilityModel& ut,
                                              const std::vector<std::size_t>& capacities) {
  detail3::WallTimer timer;
  if (capacities.size() != cov.num_cells())
    throw ContractError("capacity list must have one entry per cell");
  for (std::size_t c : capacities)
    if (c < 1) throw ContractError("cell capacities must be at least 1");
  objective::CellCaps caps;
  caps.max_items = capacities;
  objective::SchUsState st(cat, cov, ut, caps);
  SolverResult result(cov.num_cells());
  detail3::lazy_greedy(st, detail3::all_candidates(cat.num_contents(), cov.num_cells()),
                       [](ContentId) { return 1.0; }, result.trace);
  for (const auto& [k, j] : st.placement().items()) result.placement.add(k, j);
  result.objective = st.objective();
  result.wall_ms = timer.ms();
  return result;
}

inline SolverResult greedy_femto_satisfaction(const catalog::Catalog& cat,
                                              const network::CoverageModel& cov,
                                              const catalog::UtilityModel& ut,
                                              std::size_t per_cell) {
  return greedy_femto_satisfaction(
      cat, cov, ut, std::vector<std::size_t>(cov.num_cells(), per_cell));
}

/// Reference full-rescan greedy over (content, cell) pairs; used by the
/// verification suite to cross-check the lazy implementation, including with
/// a deliberately corrupted tie-break.
inline SolverResult greedy_femto_naive(const catalog::Catalog& cat,
                                       const network::CoverageModel& cov,
                                       const catalog::UtilityModel& ut,
                                       const std::vector<std::size_t>& capacities,
                                       bool corrupt_ties = false) {
  detail3::WallTimer timer;
  objective::CellCaps caps;
  caps.max_items = capacities;
  objective::SchrState st(cat, cov, ut, caps);
  SolverResult result(cov.num_cells());
  detail3::naive_greedy(st, detail3::all_candidates(cat.num_contents(), cov.num_cells()),
                        result.trace, corrupt_ties);
  for (const auto& [k, j] : st.placement().items()) result.placement.add(k, j);
  result.objective = st.objective();
  result.wall_ms = timer.ms();
  return result;
}

/// Baseline: each cell independently stores the most popular contents among
/// its covered users (coverage-weighted demand; ties to the lowest id;
/// zero-demand contents are not stored). The reported objective is the
/// classical exact-hit ratio, i.e. the hit-ratio objective under an
/// identity-only relation model.
inline SolverResult popularity_baseline(const catalog::Catalog& cat,
                                        const network::CoverageModel& cov,
                                        const std::vector<std::size_t>& capacities) {
  detail3::WallTimer timer;
  if (capacities.size() != cov.num_cells())
    throw ContractError("capacity list must have one entry per cell");
  const std::size_t K = cat.num_contents();
  const auto identity = catalog::UtilityModel::identity(K);
  objective::CellCaps caps;
  caps.max_items = capacities;
  objective::SchrState st(cat, cov, identity, caps);
  SolverResult result(cov.num_cells());
  std::vector<std::pair<double, ContentId>> ranked(K);
  for (std::size_t j = 0; j < cov.num_cells(); ++j) {
    const auto cell = static_cast<CellId>(j);
    for (std::size_t k = 0; k < K; ++k) ranked[k] = {0.0, static_cast<ContentId>(k)};
    for (UserId i : cov.users_of_cell(cell)) {
      const double q = cov.q(i, cell);
      for (std::size_t k = 0; k < K; ++k)
        ranked[k].first +=
            q * cat.demand(objective::detail2::demand_row(cat, i), static_cast<ContentId>(k));
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (std::size_t t = 0; t < std::min<std::size_t>(capacities[j], K); ++t) {
      if (!(ranked[t].first > 0.0)) break;
      const double gain = st.marginal_gain(ranked[t].second, cell);
      st.commit(ranked[t].second, cell);
      result.trace.push_back({ranked[t].second, cell, gain});
    }
  }
  for (const auto& [k, j] : st.placement().items()) result.placement.add(k, j);
  result.objective = st.objective();
  result.wall_ms = timer.ms();
  return result;
}

inline SolverResult popularity_baseline(const catalog::Catalog& cat,
                                        const network::CoverageModel& cov,
                                        std::size_t per_cell) {
  return popularity_baseline(cat, cov,
                             std::vector<std::size_t>(cov.num_cells(), per_cell));
}

}  // namespace softcache::solvers

namespace softcache {
using solvers::fast_greedy_knapsack;
using solvers::greedy_femto;
using solvers::greedy_femto_naive;
using solvers::greedy_femto_satisfaction;
using solvers::greedy_single;
using solvers::partial_enum_knapsack;
using solvers::popularity_baseline;
using solvers::SolveStep;
using solvers::SolverResult;
}  // namespace softcache
