#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "softcache/catalog.hpp"
#include "softcache/csv.hpp"
#include "softcache/errors.hpp"
#include "softcache/types.hpp"

// Which content is stored in which cell cache. Duplicates are rejected;
// capacity limits are enforced by the evaluation/solver layers, which know
// whether a budget is an item count or a byte total.

namespace softcache::objective {

class Placement {
 public:
  explicit Placement(std::size_t num_cells) : num_cells_(num_cells), cells_(num_cells) {
    if (num_cells == 0) throw ValidationError("placement needs at least one cell");
  }

  std::size_t num_cells() const { return num_cells_; }
  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }

  bool contains(ContentId k, CellId j) const {
    detail::check_index(static_cast<long>(j), static_cast<long>(num_cells_), "cell");
    const auto& c = cells_[j];
    return std::binary_search(c.begin(), c.end(), k);
  }

  void add(ContentId k, CellId j) {
    detail::check_index(static_cast<long>(j), static_cast<long>(num_cells_), "cell");
    auto& c = cells_[j];
    auto it = std::lower_bound(c.begin(), c.end(), k);
    if (it != c.end() && *it == k)
      throw ContractError("content " + std::to_string(k) + " already stored in cell " +
                          std::to_string(j));
    c.insert(it, k);
    order_.emplace_back(k, j);
  }

  /// Stored (content, cell) pairs in insertion order.
  const std::vector<std::pair<ContentId, CellId>>& items() const { return order_; }

  /// Contents of one cell, ascending.
  const std::vector<ContentId>& cell(CellId j) const {
    detail::check_index(static_cast<long>(j), static_cast<long>(num_cells_), "cell");
    return cells_[j];
  }

  std::size_t count(CellId j) const { return cell(j).size(); }

  double used_bytes(const catalog::Catalog& cat, CellId j) const {
    double total = 0.0;
    for (ContentId k : cell(j)) total += cat.size_of(k);
    return total;
  }

 private:
  std::size_t num_cells_;
  std::vector<std::vector<ContentId>> cells_;
  std::vector<std::pair<ContentId, CellId>> order_;
};

inline const std::vector<std::string>& placement_csv_header() {
  static const std::vector<std::string> h{"content", "cell"};
  return h;
}

inline void write_placement_csv(std::ostream& out, const Placement& p) {
  CsvWriter w(out);
  w.row(placement_csv_header());
  for (const auto& [k, j] : p.items())
    w.row({std::to_string(k), std::to_string(j)});
}

inline Placement read_placement_csv(const std::string& path, std::size_t num_cells,
                                    std::size_t num_contents) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  CsvReader reader(in, placement_csv_header(), path);
  Placement p(num_cells);
  std::vector<std::string> f;
  while (reader.next(f)) {
    const long k = parse_int(f[0], reader.line());
    const long j = parse_int(f[1], reader.line());
    if (k < 0 || k >= static_cast<long>(num_contents))
      throw ValidationError(path + ": unknown content id " + f[0] + " (line " +
                            std::to_string(reader.line()) + ")");
    if (j < 0 || j >= static_cast<long>(num_cells))
      throw ValidationError(path + ": unknown cell index " + f[1] + " (line " +
                            std::to_string(reader.line()) + ")");
    p.add(static_cast<ContentId>(k), static_cast<CellId>(j));
  }
  return p;
}

}  // namespace softcache::objective

namespace softcache {
using objective::Placement;
using objective::read_placement_csv;
using objective::write_placement_csv;
}  // namespace softcache
