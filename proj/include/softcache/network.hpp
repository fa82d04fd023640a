#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "softcache/csv.hpp"
#include "softcache/errors.hpp"
#include "softcache/rng.hpp"
#include "softcache/types.hpp"

// Coverage model between users and small-cell caches: q(i,j) is the
// probability that user i can be served by cell j (1/0 for a geometric
// snapshot, fractional for mobility-style time shares). Includes the random
// geometric scenario generator and the reduction to the single-cache regime
// where every user is associated with exactly one cell.

namespace softcache::network {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

class CoverageModel {
 public:
  CoverageModel(std::size_t num_users, std::size_t num_cells)
      : num_users_(num_users), num_cells_(num_cells),
        q_(num_users * num_cells, 0.0) {
    if (num_users == 0 || num_cells == 0)
      throw ValidationError("coverage model needs at least one user and one cell");
  }

  std::size_t num_users() const { return num_users_; }
  std::size_t num_cells() const { return num_cells_; }

  void set_q(UserId i, CellId j, double q) {
    detail::check_index(static_cast<long>(i), static_cast<long>(num_users_), "user");
    detail::check_index(static_cast<long>(j), static_cast<long>(num_cells_), "cell");
    if (!(q >= 0.0 && q <= 1.0))
      throw ValidationError("coverage probability " + std::to_string(q) +
                            " outside [0,1]");
    q_[i * num_cells_ + j] = q;
    index_dirty_ = true;
  }

  double q(UserId i, CellId j) const {
    detail::check_index(static_cast<long>(i), static_cast<long>(num_users_), "user");
    detail::check_index(static_cast<long>(j), static_cast<long>(num_cells_), "cell");
    return q_[i * num_cells_ + j];
  }

  void set_positions(std::vector<Point> users, std::vector<Point> cells) {
    if (users.size() != num_users_ || cells.size() != num_cells_)
      throw ValidationError("position lists must match user and cell counts");
    user_pos_ = std::move(users);
    cell_pos_ = std::move(cells);
  }
  bool has_positions() const { return !user_pos_.empty(); }
  const std::vector<Point>& user_positions() const { return user_pos_; }
  const std::vector<Point>& cell_positions() const { return cell_pos_; }

  void set_uniform_capacity(double c) { set_capacities(std::vector<double>(num_cells_, c)); }
  void set_capacities(std::vector<double> caps) {
    if (caps.size() != num_cells_)
      throw ValidationError("capacity list must have one entry per cell");
    for (double c : caps)
      if (!(c > 0.0)) throw ValidationError("cell capacities must be positive");
    capacities_ = std::move(caps);
  }
  bool has_capacities() const { return !capacities_.empty(); }
  const std::vector<double>& capacities() const { return capacities_; }

  /// True when every user's coverage row sums to 1 (associated with exactly
  /// one cell's worth of service) or to 0 (uncovered — permitted; such users
  /// simply contribute nothing to any objective).
  bool single_cache_valid() const {
    for (std::size_t i = 0; i < num_users_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < num_cells_; ++j) row += q_[i * num_cells_ + j];
      if (row != 0.0 && std::abs(row - 1.0) > 1e-9) return false;
    }
    return true;
  }

  /// Users with q(i,j) > 0, ascending. Index is rebuilt lazily after
  /// mutations; touch it once before sharing the model across threads.
  const std::vector<UserId>& users_of_cell(CellId j) const {
    detail::check_index(static_cast<long>(j), static_cast<long>(num_cells_), "cell");
    refresh_index();
    return users_of_cell_[j];
  }

  /// (cell, q) pairs with q > 0 for one user, cell-ascending.
  const std::vector<std::pair<CellId, double>>& cells_of_user(UserId i) const {
    detail::check_index(static_cast<long>(i), static_cast<long>(num_users_), "user");
    refresh_index();
    return cells_of_user_[i];
  }

  double mean_cells_per_user() const {
    std::size_t covered = 0;
    for (double v : q_)
      if (v > 0.0) ++covered;
    return static_cast<double>(covered) / static_cast<double>(num_users_);
  }

 private:
  void refresh_index() const {
    if (!index_dirty_ && !users_of_cell_.empty()) return;
    users_of_cell_.assign(num_cells_, {});
    cells_of_user_.assign(num_users_, {});
    for (std::size_t i = 0; i < num_users_; ++i)
      for (std::size_t j = 0; j < num_cells_; ++j) {
        const double v = q_[i * num_cells_ + j];
        if (v > 0.0) {
          users_of_cell_[j].push_back(static_cast<UserId>(i));
          cells_of_user_[i].emplace_back(static_cast<CellId>(j), v);
        }
      }
    index_dirty_ = false;
  }

  std::size_t num_users_;
  std::size_t num_cells_;
  std::vector<double> q_;  // row-major [i*M + j]
  std::vector<Point> user_pos_;
  std::vector<Point> cell_pos_;
  std::vector<double> capacities_;
  mutable bool index_dirty_ = true;
  mutable std::vector<std::vector<UserId>> users_of_cell_;
  mutable std::vector<std::vector<std::pair<CellId, double>>> cells_of_user_;
};

/// Random geometric snapshot: cells then users drawn uniformly in a square of
/// side `area_side` meters; q(i,j) = 1 iff user i is within `range` meters of
/// cell j. Deterministic given the seed (cell positions are drawn first).
inline CoverageModel generate_geometric(std::size_t num_cells, std::size_t num_users,
                                        double area_side, double range,
                                        std::uint64_t seed) {
  if (num_cells == 0 || num_users == 0 || !(area_side > 0.0) || !(range > 0.0))
    throw ContractError("geometric scenario needs positive cell/user counts, area and range");
  Rng rng(seed);
  std::vector<Point> cells(num_cells), users(num_users);
  for (auto& c : cells) {
    c.x = uniform01(rng) * area_side;
    c.y = uniform01(rng) * area_side;
  }
  for (auto& u : users) {
    u.x = uniform01(rng) * area_side;
    u.y = uniform01(rng) * area_side;
  }
  CoverageModel m(num_users, num_cells);
  for (std::size_t i = 0; i < num_users; ++i)
    for (std::size_t j = 0; j < num_cells; ++j)
      if (distance(users[i], cells[j]) <= range)
        m.set_q(static_cast<UserId>(i), static_cast<CellId>(j), 1.0);
  m.set_positions(std::move(users), std::move(cells));
  return m;
}

/// Associates every covered user with exactly one cell (q = 1 there, 0
/// elsewhere): the nearest covering cell when positions are available,
/// otherwise the covering cell with the largest q; ties to the lowest cell
/// index. Uncovered users keep an all-zero row and are reported via
/// `uncovered` when given (they contribute nothing downstream).
inline CoverageModel to_single_cache(const CoverageModel& model,
                                     std::vector<UserId>* uncovered = nullptr) {
  CoverageModel out(model.num_users(), model.num_cells());
  if (model.has_positions())
    out.set_positions(model.user_positions(), model.cell_positions());
  if (model.has_capacities()) out.set_capacities(model.capacities());
  for (std::size_t i = 0; i < model.num_users(); ++i) {
    const auto& cells = model.cells_of_user(static_cast<UserId>(i));
    if (cells.empty()) {
      if (uncovered) uncovered->push_back(static_cast<UserId>(i));
      continue;
    }
    CellId best = cells.front().first;
    if (model.has_positions()) {
      double best_d = distance(model.user_positions()[i],
                               model.cell_positions()[best]);
      for (const auto& [j, q] : cells) {
        const double d = distance(model.user_positions()[i], model.cell_positions()[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
    } else {
      double best_q = cells.front().second;
      for (const auto& [j, q] : cells)
        if (q > best_q) {
          best_q = q;
          best = j;
        }
    }
    out.set_q(static_cast<UserId>(i), best, 1.0);
  }
  return out;
}

inline const std::vector<std::string>& coverage_csv_header() {
  static const std::vector<std::string> h{"user", "cell", "q"};
  return h;
}

/// Reads a `user,cell,q` CSV. User/cell counts are taken as 1 + the largest
/// index mentioned unless given explicitly.
inline CoverageModel read_coverage_csv(const std::string& path,
                                       std::size_t num_users = 0,
                                       std::size_t num_cells = 0) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  CsvReader reader(in, coverage_csv_header(), path);
  struct Row {
    long user, cell;
    double q;
  };
  std::vector<Row> rows;
  long max_user = -1, max_cell = -1;
  std::vector<std::string> f;
  while (reader.next(f)) {
    Row r{parse_int(f[0], reader.line()), parse_int(f[1], reader.line()),
          parse_double(f[2], reader.line())};
    if (r.user < 0 || r.cell < 0)
      throw ValidationError(path + ": negative index (line " +
                            std::to_string(reader.line()) + ")");
    max_user = std::max(max_user, r.user);
    max_cell = std::max(max_cell, r.cell);
    rows.push_back(r);
  }
  if (num_users == 0) num_users = static_cast<std::size_t>(max_user + 1);
  if (num_cells == 0) num_cells = static_cast<std::size_t>(max_cell + 1);
  if (rows.empty() || num_users == 0 || num_cells == 0)
    throw ValidationError(path + ": no coverage entries");
  CoverageModel m(num_users, num_cells);
  for (const Row& r : rows) {
    if (r.user >= static_cast<long>(num_users) || r.cell >= static_cast<long>(num_cells))
      throw ValidationError(path + ": index beyond declared user/cell counts");
    m.set_q(static_cast<UserId>(r.user), static_cast<CellId>(r.cell), r.q);
  }
  return m;
}

inline void write_coverage_csv(std::ostream& out, const CoverageModel& model) {
  CsvWriter w(out);
  w.row(coverage_csv_header());
  for (std::size_t i = 0; i < model.num_users(); ++i)
    for (const auto& [j, q] : model.cells_of_user(static_cast<UserId>(i)))
      w.row({std::to_string(i), std::to_string(j), format_double(q)});
}

}  // namespace softcache::network

namespace softcache {
using network::CoverageModel;
using network::generate_geometric;
using network::Point;
using network::read_coverage_csv;
using network::to_single_cache;
using network::write_coverage_csv;
}  // namespace softcache
