#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "softcache/softcache.hpp"

using namespace softcache;
using catalog::Catalog;
using catalog::UtilityMode;
using catalog::UtilityModel;
using network::CoverageModel;
using objective::CellCaps;
using objective::Placement;

namespace {

CoverageModel all_in_one_cell(std::size_t users) {
  CoverageModel cov(users, 1);
  for (std::size_t i = 0; i < users; ++i)
    cov.set_q(static_cast<UserId>(i), 0, 1.0);
  return cov;
}

std::vector<ContentId> sorted_cell(const Placement& p, CellId j) {
  auto v = p.cell(j);
  std::sort(v.begin(), v.end());
  return v;
}

struct RandomInstance {
  Catalog cat;
  CoverageModel cov;
  UtilityModel ut;
};

RandomInstance random_overlapping(Rng& rng, std::size_t K, std::size_t N,
                                  std::size_t M) {
  std::vector<double> pop(K);
  for (auto& p : pop) p = uniform_real(rng, 0.1, 1.0);
  CoverageModel cov(N, M);
  for (std::size_t i = 0; i < N; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < M; ++j)
      if (bernoulli(rng, 0.6)) {
        cov.set_q(static_cast<UserId>(i), static_cast<CellId>(j), 1.0);
        any = true;
      }
    if (!any)
      cov.set_q(static_cast<UserId>(i),
                static_cast<CellId>(uniform_index(rng, M)), 1.0);
  }
  auto ut = UtilityModel::average(K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < K; ++n)
      if (n != k && bernoulli(rng, 0.3))
        ut.add_relation(static_cast<ContentId>(k), static_cast<ContentId>(n),
                        uniform_real(rng, 0.05, 1.0));
  return {Catalog::shared_demand(std::move(pop), {}, N), std::move(cov),
          std::move(ut)};
}

}  // namespace

TEST_CASE("greedy with identity relations caches the most popular contents",
          "[solvers]") {
  const auto cat = Catalog::shared_demand({0.4, 0.3, 0.2, 0.1});
  const auto cov = all_in_one_cell(1);
  const auto ut = UtilityModel::identity(4);
  const auto r = solvers::greedy_single(cat, cov, ut, 2);
  REQUIRE(sorted_cell(r.placement, 0) == std::vector<ContentId>{0, 1});
  REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(0.7, 1e-12));
  REQUIRE(r.trace.size() == 2);
  REQUIRE(r.trace[0].content == 0);
  REQUIRE(r.trace[1].content == 1);
}

TEST_CASE("relations can make one content cover most of the demand", "[solvers]") {
  // Content 0 also serves requests for 1 and 2, so it beats everything.
  const auto cat = Catalog::shared_demand({0.4, 0.3, 0.2, 0.1});
  const auto cov = all_in_one_cell(1);
  auto ut = UtilityModel::average(4);
  ut.add_relation(1, 0, 1.0);
  ut.add_relation(2, 0, 1.0);
  const auto r = solvers::greedy_single(cat, cov, ut, 1);
  REQUIRE(r.placement.items() ==
          std::vector<std::pair<ContentId, CellId>>{{0, 0}});
  REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(0.9, 1e-12));
}

TEST_CASE("solver results are internally consistent", "[solvers]") {
  Rng rng(31);
  for (int t = 0; t < 30; ++t) {
    auto inst = random_overlapping(rng, 3 + uniform_index(rng, 8),
                                   1 + uniform_index(rng, 5),
                                   1 + uniform_index(rng, 3));
    const std::size_t C = 1 + uniform_index(rng, 3);
    const auto r = solvers::greedy_femto(inst.cat, inst.cov, inst.ut, C);

    // Reported objective equals a from-scratch evaluation.
    const double direct =
        objective::hit_ratio_femto(inst.cat, inst.cov, inst.ut, r.placement);
    REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(direct, 1e-9));

    // One trace step per stored item, gains non-increasing and summing to the
    // objective, and a replay through a fresh state reproduces each gain.
    REQUIRE(r.trace.size() == r.placement.items().size());
    double sum = 0.0;
    for (std::size_t s = 0; s < r.trace.size(); ++s) {
      sum += r.trace[s].gain;
      if (s)
        REQUIRE(r.trace[s].gain <= r.trace[s - 1].gain + 1e-12);
    }
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(r.objective, 1e-9));
    objective::SchrState replay(inst.cat, inst.cov, inst.ut);
    for (const auto& step : r.trace) {
      // The quoted gain is the marginal gain in exactly this state.
      REQUIRE(replay.marginal_gain(step.content, step.cell) == step.gain);
      const double before = replay.objective();
      replay.commit(step.content, step.cell);
      REQUIRE_THAT(replay.objective() - before,
                   Catch::Matchers::WithinAbs(step.gain, 1e-12));
    }
    REQUIRE(r.wall_ms >= 0.0);
  }
}

TEST_CASE("budgeted greedy equals item-count greedy when sizes are equal",
          "[solvers]") {
  Rng rng(47);
  for (int t = 0; t < 20; ++t) {
    const std::size_t K = 3 + uniform_index(rng, 8);
    const std::size_t N = 1 + uniform_index(rng, 4);
    auto inst = random_overlapping(rng, K, N, 1);
    auto cat = inst.cat.with_sizes(std::vector<double>(K, 2.0));
    const std::size_t C = 1 + uniform_index(rng, 3);
    const double budget = 2.0 * static_cast<double>(C) + 1.0;  // floor = C items
    const auto budgeted = solvers::fast_greedy_knapsack(cat, inst.cov, inst.ut, budget);
    const auto counted = solvers::greedy_single(cat, inst.cov, inst.ut, C);
    REQUIRE(sorted_cell(budgeted.placement, 0) == sorted_cell(counted.placement, 0));
    REQUIRE_THAT(budgeted.objective,
                 Catch::Matchers::WithinAbs(counted.objective, 1e-12));
  }
}

TEST_CASE("budgeted greedy keeps the better of its two rules", "[solvers]") {
  // One big high-value content vs. two small ones that together beat the
  // density ordering: the value rule wins here and must be returned.
  const auto cat =
      Catalog::shared_demand({0.6, 0.3, 0.29, 0.0}, {10.0, 1.0, 9.0, 30.0});
  const auto cov = all_in_one_cell(1);
  const auto ut = UtilityModel::identity(4);
  const auto r = solvers::fast_greedy_knapsack(cat, cov, ut, 10.0);
  REQUIRE(r.placement.items() ==
          std::vector<std::pair<ContentId, CellId>>{{0, 0}});
  const double total = 0.6 + 0.3 + 0.29;
  REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(0.6 / total, 1e-12));

  // Flip the weights so the density ordering wins instead.
  const auto cat2 =
      Catalog::shared_demand({0.5, 0.45, 0.448, 0.0}, {10.0, 1.0, 9.0, 30.0});
  const auto r2 = solvers::fast_greedy_knapsack(cat2, cov, ut, 10.0);
  REQUIRE(sorted_cell(r2.placement, 0) == std::vector<ContentId>{1, 2});
}

TEST_CASE("a budget below every size yields an empty placement", "[solvers]") {
  const auto cat = Catalog::shared_demand({0.6, 0.4}, {5.0, 7.0});
  const auto cov = all_in_one_cell(2);
  const auto ut = UtilityModel::identity(2);
  const auto r = solvers::fast_greedy_knapsack(cat, cov, ut, 3.0);
  REQUIRE(r.placement.empty());
  REQUIRE(r.objective == 0.0);
  const auto p = solvers::partial_enum_knapsack(cat, cov, ut, 3.0);
  REQUIRE(p.placement.empty());
  REQUIRE(p.objective == 0.0);
}

TEST_CASE("partial enumeration is exact on tiny instances", "[solvers]") {
  Rng rng(59);
  for (int t = 0; t < 25; ++t) {
    std::vector<double> pop(3), sizes(3);
    for (auto& p : pop) p = uniform_real(rng, 0.1, 1.0);
    for (auto& s : sizes) s = 1.0 + static_cast<double>(uniform_index(rng, 3));
    const auto cat = Catalog::shared_demand(pop, sizes);
    const auto cov = all_in_one_cell(1);
    auto ut = UtilityModel::average(3);
    if (bernoulli(rng, 0.7)) ut.add_relation(1, 0, uniform_real(rng, 0.1, 1.0));
    if (bernoulli(rng, 0.7)) ut.add_relation(2, 1, uniform_real(rng, 0.1, 1.0));
    const double budget = sizes[0] + sizes[1] + sizes[2];  // everything fits
    const auto part = solvers::partial_enum_knapsack(cat, cov, ut, budget);
    const auto opt = oracle::exhaustive_single_knapsack(cat, cov, ut, budget);
    REQUIRE_THAT(part.objective, Catch::Matchers::WithinAbs(opt.optimum, 1e-12));
  }
}

TEST_CASE("partial enumeration never scores below the two-run greedy",
          "[solvers]") {
  Rng rng(61);
  for (int t = 0; t < 50; ++t) {
    const std::size_t K = 2 + uniform_index(rng, 7);
    std::vector<double> pop(K), sizes(K);
    for (auto& p : pop) p = uniform_real(rng, 0.1, 1.0);
    for (auto& s : sizes) s = 1.0 + static_cast<double>(uniform_index(rng, 4));
    const auto cat = Catalog::shared_demand(pop, sizes);
    const auto cov = all_in_one_cell(1 + uniform_index(rng, 3));
    auto ut = UtilityModel::average(K);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t n = 0; n < K; ++n)
        if (n != k && bernoulli(rng, 0.3))
          ut.add_relation(static_cast<ContentId>(k), static_cast<ContentId>(n),
                          uniform_real(rng, 0.05, 1.0));
    double total = 0.0;
    for (double s : sizes) total += s;
    const double budget = uniform_real(rng, 1.0, 0.8 * total);
    const auto fast = solvers::fast_greedy_knapsack(cat, cov, ut, budget);
    const auto part = solvers::partial_enum_knapsack(cat, cov, ut, budget);
    REQUIRE(part.objective >= fast.objective - 1e-12);
  }
}

TEST_CASE("partial enumeration refuses catalogs beyond its content limit",
          "[solvers]") {
  const auto cat = Catalog::shared_demand({1, 1, 1, 1, 1, 1});
  const auto cov = all_in_one_cell(1);
  const auto ut = UtilityModel::identity(6);
  REQUIRE_THROWS_AS(solvers::partial_enum_knapsack(cat, cov, ut, 3.0, 5), Refused);
  REQUIRE_THROWS_WITH(
      solvers::partial_enum_knapsack(cat, cov, ut, 3.0, 5),
      Catch::Matchers::ContainsSubstring("fast_greedy_knapsack"));
}

TEST_CASE("multi-cell greedy on one cell matches the single-cache greedy",
          "[solvers]") {
  Rng rng(67);
  for (int t = 0; t < 30; ++t) {
    auto inst = random_overlapping(rng, 3 + uniform_index(rng, 8),
                                   1 + uniform_index(rng, 4), 1);
    const std::size_t C = 1 + uniform_index(rng, 3);
    const auto femto = solvers::greedy_femto(inst.cat, inst.cov, inst.ut, C);
    const auto single = solvers::greedy_single(inst.cat, inst.cov, inst.ut, C);
    REQUIRE(femto.placement.items() == single.placement.items());
    REQUIRE_THAT(femto.objective,
                 Catch::Matchers::WithinAbs(single.objective, 1e-12));
  }
}

TEST_CASE("disjoint user populations decompose into independent cells",
          "[solvers]") {
  Rng rng(71);
  for (int t = 0; t < 15; ++t) {
    const std::size_t K = 4 + uniform_index(rng, 6);
    std::vector<double> pop(K);
    for (auto& p : pop) p = uniform_real(rng, 0.1, 1.0);
    const auto cat = Catalog::shared_demand(std::move(pop), {}, 4);
    CoverageModel cov(4, 2);
    cov.set_q(0, 0, 1.0);
    cov.set_q(1, 0, 1.0);
    cov.set_q(2, 1, 1.0);
    cov.set_q(3, 1, 1.0);
    auto ut = UtilityModel::average(K);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t n = 0; n < K; ++n)
        if (n != k && bernoulli(rng, 0.3))
          ut.add_relation(static_cast<ContentId>(k), static_cast<ContentId>(n),
                          uniform_real(rng, 0.05, 1.0));
    const std::size_t C = 1 + uniform_index(rng, 2);
    const auto femto = solvers::greedy_femto(cat, cov, ut, C);
    const auto single = solvers::greedy_single(cat, cov, ut, C);
    REQUIRE(sorted_cell(femto.placement, 0) == sorted_cell(single.placement, 0));
    REQUIRE(sorted_cell(femto.placement, 1) == sorted_cell(single.placement, 1));
    REQUIRE_THAT(femto.objective,
                 Catch::Matchers::WithinAbs(single.objective, 1e-12));
  }
}

TEST_CASE("satisfaction greedy picks the candidate with the best expected value",
          "[solvers]") {
  Rng rng(73);
  for (int t = 0; t < 20; ++t) {
    const std::size_t K = 3 + uniform_index(rng, 6);
    std::vector<double> pop(K);
    for (auto& p : pop) p = uniform_real(rng, 0.1, 1.0);
    const auto cat = Catalog::shared_demand(pop, {});
    const auto cov = all_in_one_cell(1);
    auto ut = UtilityModel::average(K, UtilityMode::Satisfaction, 1.0);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t n = 0; n < K; ++n)
        if (n != k && bernoulli(rng, 0.4))
          ut.add_relation(static_cast<ContentId>(k), static_cast<ContentId>(n),
                          uniform_real(rng, 0.05, 1.0));
    const auto r = solvers::greedy_femto_satisfaction(cat, cov, ut, 1);
    REQUIRE(r.placement.items().size() == 1);

    // Hand-computed best single stored content: argmax_n sum_k p_k u(k, n).
    double best_value = -1.0;
    ContentId best_content = 0;
    for (std::size_t n = 0; n < K; ++n) {
      double v = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        v += cat.demand(0, static_cast<ContentId>(k)) *
             ut.utility(0, static_cast<ContentId>(k), static_cast<ContentId>(n));
      if (v > best_value + 1e-15) {
        best_value = v;
        best_content = static_cast<ContentId>(n);
      }
    }
    REQUIRE(r.placement.items().front().first == best_content);
    REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(best_value, 1e-12));
  }
}

TEST_CASE("satisfaction greedy without relations serves each population's taste",
          "[solvers]") {
  const auto cat = catalog::Catalog::per_user_demand(
      3, 2, {0.7, 0.2, 0.1, 0.1, 0.2, 0.7});
  CoverageModel cov(2, 2);
  cov.set_q(0, 0, 1.0);
  cov.set_q(1, 1, 1.0);
  const auto ut = UtilityModel::identity(3, UtilityMode::Satisfaction, 2.0);
  const auto r = solvers::greedy_femto_satisfaction(cat, cov, ut, 1);
  REQUIRE(r.placement.cell(0) == std::vector<ContentId>{0});
  REQUIRE(r.placement.cell(1) == std::vector<ContentId>{2});
  REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(1.4, 1e-12));
}

TEST_CASE("popularity baseline caches the globally most popular contents",
          "[solvers]") {
  const auto cat = Catalog::shared_demand({0.1, 0.4, 0.2, 0.3}, {}, 3);
  const auto cov = all_in_one_cell(3);
  const auto r = solvers::popularity_baseline(cat, cov, 2);
  REQUIRE(sorted_cell(r.placement, 0) == std::vector<ContentId>{1, 3});
  REQUIRE_THAT(r.objective, Catch::Matchers::WithinAbs(0.7, 1e-12));
}

TEST_CASE("baseline ranks by coverage-weighted demand per cell", "[solvers]") {
  // Cell 1 serves two users who both want content 2 most.
  const auto cat = catalog::Catalog::per_user_demand(
      3, 3, {0.8, 0.1, 0.1, 0.1, 0.1, 0.8, 0.2, 0.1, 0.7});
  CoverageModel cov(3, 2);
  cov.set_q(0, 0, 1.0);
  cov.set_q(1, 1, 1.0);
  cov.set_q(2, 1, 1.0);
  const auto r = solvers::popularity_baseline(cat, cov, 1);
  REQUIRE(r.placement.cell(0) == std::vector<ContentId>{0});
  REQUIRE(r.placement.cell(1) == std::vector<ContentId>{2});
}

TEST_CASE("greedy never scores below the popularity baseline", "[solvers]") {
  Rng rng(79);
  for (int t = 0; t < 100; ++t) {
    auto inst = random_overlapping(rng, 3 + uniform_index(rng, 10),
                                   1 + uniform_index(rng, 5),
                                   1 + uniform_index(rng, 3));
    const std::size_t C = 1 + uniform_index(rng, 3);
    const auto greedy = solvers::greedy_femto(inst.cat, inst.cov, inst.ut, C);
    const auto base = solvers::popularity_baseline(inst.cat, inst.cov, C);
    REQUIRE(greedy.objective >= base.objective - 1e-12);
  }
}

TEST_CASE("lazy greedy matches the full-rescan reference", "[solvers]") {
  const auto honest = verify::check_lazy_vs_reference(60, 17, false);
  INFO(honest.detail);
  REQUIRE(honest.passed);
}

TEST_CASE("the differential test detects a corrupted tie-break", "[solvers]") {
  const auto probe = verify::check_lazy_vs_reference(60, 17, true);
  INFO(probe.detail);
  REQUIRE(probe.passed);  // passes exactly when a mismatch IS found
  REQUIRE_THAT(probe.detail, Catch::Matchers::ContainsSubstring("instance"));
}

TEST_CASE("solver contract violations raise typed errors", "[solvers]") {
  const auto cat = Catalog::shared_demand({0.6, 0.4});
  const auto ut = UtilityModel::identity(2);
  const auto sat = UtilityModel::identity(2, UtilityMode::Satisfaction, 1.0);
  const auto cov = all_in_one_cell(1);

  REQUIRE_THROWS_AS(solvers::greedy_single(cat, cov, ut, 0), ContractError);
  REQUIRE_THROWS_AS(solvers::fast_greedy_knapsack(cat, cov, ut, 0.0), ContractError);
  REQUIRE_THROWS_AS(solvers::greedy_femto(cat, cov, ut, std::vector<std::size_t>{}),
                    ContractError);
  REQUIRE_THROWS_AS(
      solvers::greedy_femto(cat, cov, ut, std::vector<std::size_t>{0}),
      ContractError);
  REQUIRE_THROWS_AS(solvers::greedy_femto(cat, cov, sat, 1), ModeError);
  REQUIRE_THROWS_AS(solvers::greedy_femto_satisfaction(cat, cov, ut, 1), ModeError);

  // Overlapping coverage is not a single-cache instance.
  CoverageModel multi(1, 2);
  multi.set_q(0, 0, 1.0);
  multi.set_q(0, 1, 1.0);
  REQUIRE_THROWS_AS(solvers::greedy_single(cat, multi, ut, 1), ContractError);
}

TEST_CASE("cells without covered users stay empty", "[solvers]") {
  const auto cat = Catalog::shared_demand({0.6, 0.4});
  CoverageModel cov(1, 3);
  cov.set_q(0, 1, 1.0);
  const auto r = solvers::greedy_single(cat, cov, UtilityModel::identity(2), 2);
  REQUIRE(r.placement.cell(0).empty());
  REQUIRE(r.placement.cell(2).empty());
  REQUIRE(r.placement.cell(1).size() == 2);
}
