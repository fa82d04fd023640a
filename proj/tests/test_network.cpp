#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "softcache/softcache.hpp"

using namespace softcache;
using network::CoverageModel;
using network::Point;

TEST_CASE("coverage model stores and validates probabilities", "[network]") {
  CoverageModel m(2, 3);
  m.set_q(0, 1, 0.5);
  m.set_q(1, 2, 1.0);
  REQUIRE(m.q(0, 1) == 0.5);
  REQUIRE(m.q(0, 0) == 0.0);
  REQUIRE_THROWS_AS(m.set_q(0, 1, 1.5), ValidationError);
  REQUIRE_THROWS_AS(m.set_q(0, 1, -0.1), ValidationError);
  REQUIRE_THROWS_AS(m.set_q(2, 0, 0.5), IndexError);
  REQUIRE_THROWS_AS(m.q(0, 3), IndexError);
  REQUIRE_THROWS_AS(CoverageModel(0, 3), ValidationError);

  // Sparse indexes, ascending, rebuilt after mutation.
  REQUIRE(m.cells_of_user(0) ==
          std::vector<std::pair<CellId, double>>{{1, 0.5}});
  REQUIRE(m.users_of_cell(2) == std::vector<UserId>{1});
  m.set_q(0, 0, 0.25);
  REQUIRE(m.cells_of_user(0) ==
          std::vector<std::pair<CellId, double>>{{0, 0.25}, {1, 0.5}});
}

TEST_CASE("single user and cell in a small area are always connected",
          "[network]") {
  // The square has diagonal sqrt(2) < range, so coverage is guaranteed
  // regardless of the draw.
  for (std::uint64_t seed : {1ull, 7ull, 12345ull}) {
    const auto m = generate_geometric(1, 1, 1.0, 2.0, seed);
    REQUIRE(m.q(0, 0) == 1.0);
  }
}

TEST_CASE("geometric coverage is binary, in range, and seed-deterministic",
          "[network]") {
  const auto a = generate_geometric(5, 20, 1000.0, 300.0, 42);
  const auto b = generate_geometric(5, 20, 1000.0, 300.0, 42);
  const auto c = generate_geometric(5, 20, 1000.0, 300.0, 43);
  REQUIRE(a.has_positions());
  bool any_difference = false;
  for (UserId i = 0; i < 20; ++i)
    for (CellId j = 0; j < 5; ++j) {
      const double q = a.q(i, j);
      REQUIRE((q == 0.0 || q == 1.0));
      REQUIRE(q == b.q(i, j));
      if (q != c.q(i, j)) any_difference = true;
      // q(i,j) = 1 exactly when the user sits within range of the cell.
      const double d = network::distance(a.user_positions()[i], a.cell_positions()[j]);
      REQUIRE((q == 1.0) == (d <= 300.0));
    }
  REQUIRE(any_difference);
  REQUIRE_THROWS_AS(generate_geometric(0, 5, 10.0, 1.0, 1), ContractError);
  REQUIRE_THROWS_AS(generate_geometric(5, 0, 10.0, 1.0, 1), ContractError);
  REQUIRE_THROWS_AS(generate_geometric(5, 5, 0.0, 1.0, 1), ContractError);
  REQUIRE_THROWS_AS(generate_geometric(5, 5, 10.0, 0.0, 1), ContractError);
}

TEST_CASE("default-scale geometric scenario covers a few cells per user",
          "[network]") {
  // 20 cells of radius 200 in a 1000x1000 area: each user should typically
  // reach a couple of cells; the long-run mean lands between 2 and 4.
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed)
    total += generate_geometric(20, 50, 1000.0, 200.0, seed).mean_cells_per_user();
  const double mean = total / 100.0;
  REQUIRE(mean >= 2.0);
  REQUIRE(mean <= 4.0);
}

TEST_CASE("single-cache reduction picks the nearest covering cell", "[network]") {
  // User 0 covered by cells 1 and 2; cell 1 is nearer.
  CoverageModel m(2, 3);
  m.set_q(0, 1, 1.0);
  m.set_q(0, 2, 1.0);
  m.set_q(1, 2, 1.0);
  m.set_positions({Point{0.0, 0.0}, Point{10.0, 0.0}},
                  {Point{5.0, 5.0}, Point{1.0, 0.0}, Point{3.0, 0.0}});
  std::vector<UserId> uncovered;
  const auto s = to_single_cache(m, &uncovered);
  REQUIRE(uncovered.empty());
  REQUIRE(s.q(0, 1) == 1.0);
  REQUIRE(s.q(0, 2) == 0.0);
  REQUIRE(s.q(1, 2) == 1.0);
  REQUIRE(s.single_cache_valid());
}

TEST_CASE("single-cache reduction without positions keeps the strongest cell",
          "[network]") {
  CoverageModel m(3, 6);
  m.set_q(0, 2, 0.5);
  m.set_q(0, 5, 0.9);
  m.set_q(1, 2, 0.4);  // equal strengths: lowest cell index wins
  m.set_q(1, 5, 0.4);
  const auto s = to_single_cache(m);
  REQUIRE(s.q(0, 5) == 1.0);
  REQUIRE(s.q(0, 2) == 0.0);
  REQUIRE(s.q(1, 2) == 1.0);
  REQUIRE(s.q(1, 5) == 0.0);

  // Row sums collapse to exactly one cell (or zero for uncovered users).
  for (UserId i = 0; i < 3; ++i) {
    double row = 0.0;
    for (CellId j = 0; j < 6; ++j) row += s.q(i, j);
    REQUIRE((row == 0.0 || row == 1.0));
  }
}

TEST_CASE("single-cache reduction is idempotent and reports uncovered users",
          "[network]") {
  CoverageModel m(3, 2);
  m.set_q(0, 0, 0.7);
  m.set_q(0, 1, 0.7);
  // User 1 uncovered.
  m.set_q(2, 1, 0.2);
  std::vector<UserId> uncovered;
  const auto once = to_single_cache(m, &uncovered);
  REQUIRE(uncovered == std::vector<UserId>{1});
  const auto twice = to_single_cache(once);
  for (UserId i = 0; i < 3; ++i)
    for (CellId j = 0; j < 2; ++j) REQUIRE(once.q(i, j) == twice.q(i, j));
  REQUIRE(once.q(1, 0) == 0.0);
  REQUIRE(once.q(1, 1) == 0.0);
}

TEST_CASE("geometric association picks the nearest covering cell end to end",
          "[network]") {
  const auto m = generate_geometric(6, 25, 500.0, 220.0, 99);
  const auto s = to_single_cache(m);
  for (UserId i = 0; i < 25; ++i) {
    const auto& covered = m.cells_of_user(i);
    if (covered.empty()) continue;
    CellId nearest = covered.front().first;
    double best = network::distance(m.user_positions()[i], m.cell_positions()[nearest]);
    for (const auto& [j, q] : covered) {
      const double d = network::distance(m.user_positions()[i], m.cell_positions()[j]);
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    REQUIRE(s.q(i, nearest) == 1.0);
  }
}

TEST_CASE("coverage CSV round-trips exactly", "[network]") {
  CoverageModel m(3, 2);
  m.set_q(0, 0, 1.0 / 3.0);
  m.set_q(1, 1, 0.1);
  m.set_q(2, 0, 1.0);
  std::ostringstream out;
  write_coverage_csv(out, m);

  testutil::TempDir dir;
  testutil::spit(dir.file("cov.csv"), out.str());
  const auto back = read_coverage_csv(dir.file("cov.csv"), 3, 2);
  for (UserId i = 0; i < 3; ++i)
    for (CellId j = 0; j < 2; ++j) REQUIRE(back.q(i, j) == m.q(i, j));

  // Dimensions inferred from the data when not given.
  const auto inferred = read_coverage_csv(dir.file("cov.csv"));
  REQUIRE(inferred.num_users() == 3);
  REQUIRE(inferred.num_cells() == 2);
}

TEST_CASE("coverage CSV rejects malformed input", "[network]") {
  testutil::TempDir dir;
  const auto path = dir.file("cov.csv");
  testutil::spit(path, "user,cell,probability\n0,0,1\n");
  REQUIRE_THROWS_AS(read_coverage_csv(path), ParseError);
  testutil::spit(path, "user,cell,q\n0,0\n");
  REQUIRE_THROWS_AS(read_coverage_csv(path), ParseError);
  testutil::spit(path, "user,cell,q\n0,0,2.0\n");
  REQUIRE_THROWS_AS(read_coverage_csv(path), ValidationError);
  testutil::spit(path, "user,cell,q\n-1,0,1.0\n");
  REQUIRE_THROWS_AS(read_coverage_csv(path), ValidationError);
  testutil::spit(path, "user,cell,q\n5,0,1.0\n");
  REQUIRE_THROWS_AS(read_coverage_csv(path, 2, 2), ValidationError);
  testutil::spit(path, "user,cell,q\n");
  REQUIRE_THROWS_AS(read_coverage_csv(path), ValidationError);
  REQUIRE_THROWS_AS(read_coverage_csv(dir.file("absent.csv")), ConfigError);
}

TEST_CASE("capacity annotations validate and survive the reduction", "[network]") {
  CoverageModel m(2, 2);
  m.set_q(0, 0, 1.0);
  m.set_q(1, 1, 1.0);
  REQUIRE_FALSE(m.has_capacities());
  REQUIRE_THROWS_AS(m.set_capacities({1.0}), ValidationError);
  REQUIRE_THROWS_AS(m.set_capacities({1.0, 0.0}), ValidationError);
  m.set_capacities({2.0, 3.0});
  REQUIRE(m.capacities() == std::vector<double>{2.0, 3.0});
  const auto s = to_single_cache(m);
  REQUIRE(s.has_capacities());
  REQUIRE(s.capacities() == std::vector<double>{2.0, 3.0});
}
