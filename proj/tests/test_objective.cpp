#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "softcache/softcache.hpp"

using namespace softcache;
using catalog::Catalog;
using catalog::DiscreteDistribution;
using catalog::UtilityMode;
using catalog::UtilityModel;
using network::CoverageModel;
using objective::CellCaps;
using objective::MaxOption;
using objective::Placement;
using objective::SchrState;
using objective::SchUsState;

namespace {

CoverageModel one_user_one_cell() {
  CoverageModel cov(1, 1);
  cov.set_q(0, 0, 1.0);
  return cov;
}

}  // namespace

TEST_CASE("empty placement scores zero", "[objective]") {
  const auto cat = Catalog::shared_demand({6.0, 3.0, 1.0});
  const auto cov = one_user_one_cell();
  const auto ut = UtilityModel::identity(3);
  REQUIRE(objective::hit_ratio_single(cat, cov, ut, Placement(1)) == 0.0);
  REQUIRE(objective::hit_ratio_femto(cat, cov, ut, Placement(1)) == 0.0);
  const auto sat = UtilityModel::identity(3, UtilityMode::Satisfaction, 2.0);
  REQUIRE(objective::satisfaction(cat, cov, sat, Placement(1)) == 0.0);
}

TEST_CASE("identity relations reduce the hit ratio to cached popularity",
          "[objective]") {
  const auto cat = Catalog::shared_demand({6.0, 3.0, 1.0});
  const auto cov = one_user_one_cell();
  const auto ut = UtilityModel::identity(3);
  Placement p(1);
  p.add(0, 0);
  REQUIRE(objective::hit_ratio_single(cat, cov, ut, p) == 0.6);
  p.add(1, 0);
  REQUIRE_THAT(objective::hit_ratio_single(cat, cov, ut, p),
               Catch::Matchers::WithinAbs(0.9, 1e-15));
}

TEST_CASE("related contents add their acceptance-weighted demand", "[objective]") {
  // Storing content 0 serves its own requests, half of content 1's and all
  // of content 2's: 0.5 + 0.3*0.5 + 0.2*1 = 0.85.
  const auto cat = Catalog::shared_demand({0.5, 0.3, 0.2});
  const auto cov = one_user_one_cell();
  auto ut = UtilityModel::average(3);
  ut.add_relation(1, 0, 0.5);
  ut.add_relation(2, 0, 1.0);
  Placement p(1);
  p.add(0, 0);
  const double value = objective::hit_ratio_single(cat, cov, ut, p);
  REQUIRE_THAT(value, Catch::Matchers::WithinAbs(0.85, 1e-15));

  // Monte-Carlo agreement: simulate a million requests.
  const auto sim = oracle::simulate_requests(cat, cov, ut, p, 1000000, 77);
  REQUIRE_THAT(sim.hit_ratio,
               Catch::Matchers::WithinAbs(value, 3.0 * sim.std_error));
}

TEST_CASE("overlapping identical cells do not double count", "[objective]") {
  const auto cat = Catalog::shared_demand({1.0, 0.0});
  CoverageModel cov(1, 2);
  cov.set_q(0, 0, 1.0);
  cov.set_q(0, 1, 1.0);
  const auto ut = UtilityModel::identity(2);
  Placement p(2);
  p.add(0, 0);
  p.add(0, 1);
  REQUIRE_THAT(objective::hit_ratio_femto(cat, cov, ut, p),
               Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("single-cache objective is linear in fractional coverage",
          "[objective]") {
  // A user splitting time 80/20 between two cells gets exactly the
  // time-weighted sum in the single-cache regime, but the overlapping-cell
  // product form treats the copies as independent options.
  const auto cat = Catalog::shared_demand({1.0, 0.0});
  CoverageModel cov(1, 2);
  cov.set_q(0, 0, 0.8);
  cov.set_q(0, 1, 0.2);
  const auto ut = UtilityModel::identity(2);
  Placement first(2);
  first.add(0, 0);
  REQUIRE_THAT(objective::hit_ratio_single(cat, cov, ut, first),
               Catch::Matchers::WithinAbs(0.8, 1e-12));
  Placement both(2);
  both.add(0, 0);
  both.add(0, 1);
  REQUIRE_THAT(objective::hit_ratio_single(cat, cov, ut, both),
               Catch::Matchers::WithinAbs(1.0, 1e-9));
  REQUIRE_THAT(objective::hit_ratio_femto(cat, cov, ut, both),
               Catch::Matchers::WithinAbs(1.0 - 0.2 * 0.8, 1e-12));
}

TEST_CASE("the two hit-ratio forms agree on single-association coverage",
          "[objective]") {
  Rng rng(2024);
  for (int t = 0; t < 50; ++t) {
    const std::size_t K = 2 + uniform_index(rng, 6);
    const std::size_t N = 1 + uniform_index(rng, 4);
    const std::size_t M = 1 + uniform_index(rng, 3);
    std::vector<double> pop(K);
    for (auto& p : pop) p = uniform_real(rng, 0.1, 1.0);
    const auto cat = Catalog::shared_demand(std::move(pop), {}, N);
    CoverageModel cov(N, M);
    for (std::size_t i = 0; i < N; ++i)
      cov.set_q(static_cast<UserId>(i),
                static_cast<CellId>(uniform_index(rng, M)), 1.0);
    auto ut = UtilityModel::average(K);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t n = 0; n < K; ++n)
        if (n != k && bernoulli(rng, 0.3))
          ut.add_relation(static_cast<ContentId>(k), static_cast<ContentId>(n),
                          uniform_real(rng, 0.05, 1.0));
    Placement p(M);
    for (std::size_t j = 0; j < M; ++j)
      for (std::size_t c = 0; c < 2; ++c) {
        const auto k = static_cast<ContentId>(uniform_index(rng, K));
        if (!p.contains(k, static_cast<CellId>(j))) p.add(k, static_cast<CellId>(j));
      }
    const double a = objective::hit_ratio_single(cat, cov, ut, p);
    const double b = objective::hit_ratio_femto(cat, cov, ut, p);
    REQUIRE_THAT(a, Catch::Matchers::WithinAbs(b, 1e-12));
  }
}

TEST_CASE("satisfaction counts the single best stored option", "[objective]") {
  // Caching the requested content itself yields its full satisfaction value.
  const auto cat = Catalog::shared_demand({1.0, 0.0});
  const auto cov = one_user_one_cell();
  const auto ut = UtilityModel::identity(2, UtilityMode::Satisfaction, 5.0);
  Placement p(1);
  p.add(0, 0);
  REQUIRE(objective::satisfaction(cat, cov, ut, p) == 5.0);

  // The best option wins; values never add up.
  auto rel = UtilityModel::average(3, UtilityMode::Satisfaction, 1.0);
  rel.add_relation(0, 1, 0.4);
  rel.add_relation(0, 2, 0.8);
  const auto cat3 = Catalog::shared_demand({1.0, 0.0, 0.0});
  Placement q(1);
  q.add(1, 0);
  q.add(2, 0);
  REQUIRE(objective::satisfaction(cat3, cov, rel, q) == 0.8);
}

TEST_CASE("expected maximum of point masses is the plain maximum", "[objective]") {
  const std::vector<MaxOption> opts = {{1.0, nullptr, 0.4}, {1.0, nullptr, 0.8}};
  REQUIRE(objective::expected_max(opts) == 0.8);
  REQUIRE(objective::expected_max({}) == 0.0);
  // Coverage scales shrink an option's value deterministically.
  const std::vector<MaxOption> scaled = {{0.5, nullptr, 0.8}, {1.0, nullptr, 0.3}};
  REQUIRE(objective::expected_max(scaled) == 0.4);
}

TEST_CASE("expected maximum of independent draws", "[objective]") {
  const DiscreteDistribution a({0.3, 0.9}, {0.5, 0.5});
  const DiscreteDistribution b({0.5}, {1.0});
  const std::vector<MaxOption> opts = {{1.0, &a, 0.0}, {1.0, &b, 0.0}};
  // max is 0.5 when a draws 0.3, else 0.9.
  REQUIRE_THAT(objective::expected_max(opts),
               Catch::Matchers::WithinAbs(0.7, 1e-15));

  // Same scenario through the full objective: requests for content 0 are
  // served by stored contents 1 and 2 with those value distributions.
  const auto cat = Catalog::shared_demand({1.0, 0.0, 0.0});
  const auto cov = one_user_one_cell();
  auto ut = UtilityModel::distributional(3, UtilityMode::Satisfaction, 1.0);
  ut.add_relation(0, 1, a);
  ut.add_relation(0, 2, b);
  Placement p(1);
  p.add(1, 0);
  p.add(2, 0);
  REQUIRE_THAT(objective::satisfaction(cat, cov, ut, p),
               Catch::Matchers::WithinAbs(0.7, 1e-15));
}

TEST_CASE("incremental gain on the empty state is the full first-step value",
          "[objective]") {
  const auto cat = Catalog::shared_demand({0.5, 0.3, 0.2});
  const auto cov = one_user_one_cell();
  auto ut = UtilityModel::average(3);
  ut.add_relation(1, 0, 0.5);
  ut.add_relation(2, 0, 1.0);
  SchrState st(cat, cov, ut, CellCaps::items(1, 3));
  REQUIRE_THAT(st.marginal_gain(0, 0), Catch::Matchers::WithinAbs(0.85, 1e-15));

  // Fractional coverage scales every term.
  CoverageModel half(1, 1);
  half.set_q(0, 0, 0.5);
  SchrState st2(cat, half, ut, CellCaps::items(1, 3));
  REQUIRE_THAT(st2.marginal_gain(0, 0),
               Catch::Matchers::WithinAbs(0.5 * 0.85, 1e-15));
}

TEST_CASE("fully served requests yield zero further gain", "[objective]") {
  const auto cat = Catalog::shared_demand({0.6, 0.4});
  const auto cov = one_user_one_cell();
  auto ut = UtilityModel::average(2);
  ut.add_relation(0, 1, 1.0);
  ut.add_relation(1, 0, 1.0);
  SchrState st(cat, cov, ut, CellCaps::items(1, 2));
  st.commit(0, 0);
  REQUIRE_THAT(st.objective(), Catch::Matchers::WithinAbs(1.0, 1e-15));
  REQUIRE(st.marginal_gain(1, 0) == 0.0);
}

TEST_CASE("state objective tracks full recomputation through random commits",
          "[objective]") {
  Rng rng(555);
  for (int t = 0; t < 40; ++t) {
    const std::size_t K = 2 + uniform_index(rng, 6);
    const std::size_t N = 1 + uniform_index(rng, 3);
    const std::size_t M = 1 + uniform_index(rng, 3);
    std::vector<double> pop(K);
    for (auto& p : pop) p = uniform_real(rng, 0.1, 1.0);
    const auto cat = Catalog::shared_demand(std::move(pop), {}, N);
    CoverageModel cov(N, M);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < M; ++j)
        if (bernoulli(rng, 0.7))
          cov.set_q(static_cast<UserId>(i), static_cast<CellId>(j),
                    uniform_real(rng, 0.2, 1.0));
    auto ut = UtilityModel::average(K);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t n = 0; n < K; ++n)
        if (n != k && bernoulli(rng, 0.4))
          ut.add_relation(static_cast<ContentId>(k), static_cast<ContentId>(n),
                          uniform_real(rng, 0.05, 1.0));
    SchrState st(cat, cov, ut, CellCaps::items(M, 2));
    for (int step = 0; step < 6; ++step) {
      const auto k = static_cast<ContentId>(uniform_index(rng, K));
      const auto j = static_cast<CellId>(uniform_index(rng, M));
      if (st.stored(k, j) || !st.can_fit(k, j)) continue;
      const double gain = st.marginal_gain(k, j);
      const double before = st.objective();
      st.commit(k, j);
      REQUIRE_THAT(st.objective() - before,
                   Catch::Matchers::WithinAbs(gain, 1e-12));
      const double direct =
          objective::hit_ratio_femto(cat, cov, ut, st.placement());
      REQUIRE_THAT(st.objective(), Catch::Matchers::WithinAbs(direct, 1e-9));
    }
  }
}

TEST_CASE("committing the same set in any order gives the same objective",
          "[objective]") {
  const auto cat = Catalog::shared_demand({0.4, 0.3, 0.2, 0.1});
  CoverageModel cov(2, 2);
  cov.set_q(0, 0, 1.0);
  cov.set_q(0, 1, 0.5);
  cov.set_q(1, 1, 0.75);
  auto ut = UtilityModel::average(4);
  ut.add_relation(1, 0, 0.5);
  ut.add_relation(2, 0, 0.9);
  ut.add_relation(3, 2, 0.7);
  const std::vector<std::pair<ContentId, CellId>> items = {
      {0, 0}, {2, 1}, {1, 0}, {3, 1}};
  std::vector<std::size_t> order = {0, 1, 2, 3};
  std::vector<double> values;
  do {
    SchrState st(cat, cov, ut);
    for (std::size_t idx : order) st.commit(items[idx].first, items[idx].second);
    values.push_back(st.objective());
  } while (std::next_permutation(order.begin(), order.end()));
  for (double v : values)
    REQUIRE_THAT(v, Catch::Matchers::WithinAbs(values.front(), 1e-12));
}

TEST_CASE("satisfaction state: gains, domination, and commit deltas",
          "[objective]") {
  const auto cat = Catalog::shared_demand({0.7, 0.3});
  CoverageModel cov(1, 2);
  cov.set_q(0, 0, 1.0);
  cov.set_q(0, 1, 0.5);
  auto ut = UtilityModel::average(2, UtilityMode::Satisfaction, 1.0);
  ut.add_relation(0, 1, 0.6);

  SchUsState st(cat, cov, ut, CellCaps::items(2, 2));
  // Empty state: storing content 1 in the full-coverage cell offers its own
  // requests 1.0 and requests for 0 the related value 0.6.
  REQUIRE_THAT(st.marginal_gain(1, 0),
               Catch::Matchers::WithinAbs(0.3 * 1.0 + 0.7 * 0.6, 1e-15));
  const double quoted = st.marginal_gain(1, 0);
  st.commit(1, 0);
  REQUIRE_THAT(st.objective(), Catch::Matchers::WithinAbs(quoted, 1e-15));
  // A strictly worse copy (same content, half coverage) is fully dominated.
  REQUIRE(st.marginal_gain(1, 1) == 0.0);
  // Upgrading request 0 to its own content adds only the difference.
  REQUIRE_THAT(st.marginal_gain(0, 0),
               Catch::Matchers::WithinAbs(0.7 * (1.0 - 0.6), 1e-15));
  const double before = st.objective();
  st.commit(0, 0);
  REQUIRE_THAT(st.objective() - before,
               Catch::Matchers::WithinAbs(0.7 * 0.4, 1e-15));
  REQUIRE_THAT(st.objective(),
               Catch::Matchers::WithinAbs(
                   objective::satisfaction(cat, cov, ut, st.placement()), 1e-12));
}

TEST_CASE("satisfaction state matches recomputation on random instances",
          "[objective]") {
  Rng rng(777);
  for (int t = 0; t < 40; ++t) {
    const std::size_t K = 2 + uniform_index(rng, 5);
    const std::size_t N = 1 + uniform_index(rng, 3);
    const std::size_t M = 1 + uniform_index(rng, 2);
    std::vector<double> pop(K);
    for (auto& p : pop) p = uniform_real(rng, 0.1, 1.0);
    const auto cat = Catalog::shared_demand(std::move(pop), {}, N);
    CoverageModel cov(N, M);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < M; ++j)
        if (bernoulli(rng, 0.7))
          cov.set_q(static_cast<UserId>(i), static_cast<CellId>(j),
                    uniform_real(rng, 0.2, 1.0));
    const bool dist_variant = (t % 2) == 0;
    auto avg = UtilityModel::average(K, UtilityMode::Satisfaction, 1.0);
    auto dst = UtilityModel::distributional(K, UtilityMode::Satisfaction, 1.0);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t n = 0; n < K; ++n) {
        if (n == k || !bernoulli(rng, 0.4)) continue;
        if (dist_variant) {
          const double lo = uniform_real(rng, 0.05, 0.5);
          const double hi = uniform_real(rng, 0.5, 1.0);
          dst.add_relation(static_cast<ContentId>(k), static_cast<ContentId>(n),
                           DiscreteDistribution({lo, hi}, {0.5, 0.5}));
        } else {
          avg.add_relation(static_cast<ContentId>(k), static_cast<ContentId>(n),
                           uniform_real(rng, 0.05, 1.0));
        }
      }
    const auto& ut = dist_variant ? dst : avg;
    SchUsState st(cat, cov, ut, CellCaps::items(M, 2));
    for (int step = 0; step < 5; ++step) {
      const auto k = static_cast<ContentId>(uniform_index(rng, K));
      const auto j = static_cast<CellId>(uniform_index(rng, M));
      if (st.stored(k, j) || !st.can_fit(k, j)) continue;
      const double gain = st.marginal_gain(k, j);
      const double before = st.objective();
      st.commit(k, j);
      REQUIRE_THAT(st.objective() - before,
                   Catch::Matchers::WithinAbs(gain, 1e-12));
      const double direct = objective::satisfaction(cat, cov, ut, st.placement());
      REQUIRE_THAT(st.objective(), Catch::Matchers::WithinAbs(direct, 1e-9));
    }
  }
}

TEST_CASE("evaluate_placement dispatches on the relation-model mode",
          "[objective]") {
  const auto cat = Catalog::shared_demand({0.6, 0.4});
  const auto cov = one_user_one_cell();
  Placement p(1);
  p.add(0, 0);
  const auto acc = UtilityModel::identity(2);
  REQUIRE(objective::evaluate_placement(cat, cov, acc, p) ==
          objective::hit_ratio_femto(cat, cov, acc, p));
  const auto sat = UtilityModel::identity(2, UtilityMode::Satisfaction, 3.0);
  REQUIRE(objective::evaluate_placement(cat, cov, sat, p) ==
          objective::satisfaction(cat, cov, sat, p));
}

TEST_CASE("objective contract violations raise typed errors", "[objective]") {
  const auto cat = Catalog::shared_demand({0.6, 0.4});
  const auto cov = one_user_one_cell();
  const auto acc = UtilityModel::identity(2);
  const auto sat = UtilityModel::identity(2, UtilityMode::Satisfaction, 1.0);

  // Mode mismatches.
  REQUIRE_THROWS_AS(objective::hit_ratio_femto(cat, cov, sat, Placement(1)),
                    ModeError);
  REQUIRE_THROWS_AS(objective::satisfaction(cat, cov, acc, Placement(1)), ModeError);

  // Placement shape mismatch.
  REQUIRE_THROWS_AS(objective::hit_ratio_femto(cat, cov, acc, Placement(2)),
                    ValidationError);

  // Catalog/coverage user mismatch.
  const auto cat3 = Catalog::shared_demand({0.6, 0.4}, {}, 3);
  REQUIRE_THROWS_AS(objective::hit_ratio_femto(cat3, cov, acc, Placement(1)),
                    ValidationError);

  // Multi-cell fractional rows break the single-cache regime.
  CoverageModel multi(1, 2);
  multi.set_q(0, 0, 0.5);
  multi.set_q(0, 1, 0.4);
  REQUIRE_THROWS_AS(objective::hit_ratio_single(cat, multi, acc, Placement(2)),
                    ContractError);

  // Double-store and over-capacity commits are contract errors.
  SchrState st(cat, cov, acc, CellCaps::items(1, 1));
  st.commit(0, 0);
  REQUIRE_THROWS_AS(st.marginal_gain(0, 0), ContractError);
  REQUIRE_FALSE(st.can_fit(1, 0));
  REQUIRE_THROWS_AS(st.commit(1, 0), ContractError);
}

TEST_CASE("states respect byte capacities", "[objective]") {
  const auto cat = Catalog::shared_demand({0.5, 0.3, 0.2}, {2.0, 3.0, 5.0});
  const auto cov = one_user_one_cell();
  const auto ut = UtilityModel::identity(3);
  SchrState st(cat, cov, ut, CellCaps::bytes(1, 5.0));
  REQUIRE(st.can_fit(0, 0));
  st.commit(0, 0);          // 2 of 5 bytes used
  REQUIRE(st.can_fit(1, 0));  // 2 + 3 = 5 fits exactly
  REQUIRE_FALSE(st.can_fit(2, 0));
  st.commit(1, 0);
  REQUIRE_FALSE(st.can_fit(2, 0));
}
