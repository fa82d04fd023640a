#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "softcache/catalog.hpp"
#include "softcache/errors.hpp"
#include "softcache/network.hpp"
#include "softcache/placement.hpp"
#include "softcache/types.hpp"

// Objective functions over placements, averaged over users so every value
// lands in [0,1] (hit-ratio objectives) or [0, u_max] (satisfaction):
//
//   hit_ratio_single  per-cell expected hit ratio in the single-cache regime:
//                     sum_j q(i,j) * (1 - prod_{n in cell j} (1 - u(i,k,n))),
//                     linear in the coverage weights.
//   hit_ratio_femto   product form across all stored (content, cell) pairs:
//                     1 - prod_{(n,j) stored} (1 - u(i,k,n) * q(i,j)).
//   satisfaction      expected value of the single best stored option:
//                     max over stored (n,j) of u(i,k,n) * q(i,j); with value
//                     distributions, the exact expected maximum of
//                     independent per-content draws (a content stored in
//                     several cells is one draw, scaled by its best cell).
//
// The *State classes maintain per-(user, content) residuals so greedy solvers
// get marginal gains in O(affected pairs) instead of full re-evaluations.

namespace softcache::objective {

/// Per-cell capacity limits for incremental states and solvers. Empty vector
/// means unconstrained; both kinds may be active at once.
struct CellCaps {
  std::vector<std::size_t> max_items;
  std::vector<double> max_bytes;

  static CellCaps items(std::size_t num_cells, std::size_t per_cell) {
    CellCaps c;
    c.max_items.assign(num_cells, per_cell);
    return c;
  }
  static CellCaps bytes(std::size_t num_cells, double per_cell) {
    CellCaps c;
    c.max_bytes.assign(num_cells, per_cell);
    return c;
  }
};

namespace detail2 {

inline void check_shapes(const catalog::Catalog& cat, const network::CoverageModel& cov,
                         const catalog::UtilityModel& ut) {
  if (cat.num_users() != cov.num_users() && cat.num_users() != 1)
    throw ValidationError("catalog has " + std::to_string(cat.num_users()) +
                          " users but coverage has " + std::to_string(cov.num_users()) +
                          " (a one-user catalog is shared across all users)");
  if (ut.num_contents() != cat.num_contents())
    throw ValidationError("relation model covers " + std::to_string(ut.num_contents()) +
                          " contents but catalog has " +
                          std::to_string(cat.num_contents()));
  if (ut.user_specific() && ut.num_users() != cov.num_users())
    throw ValidationError("per-user relation model covers " +
                          std::to_string(ut.num_users()) + " users, expected " +
                          std::to_string(cov.num_users()));
}

/// A one-user catalog acts as a shared demand row for every coverage user.
inline std::size_t demand_row(const catalog::Catalog& cat, std::size_t user) {
  return cat.num_users() == 1 ? 0 : user;
}

inline void check_placement(const network::CoverageModel& cov, const Placement& p) {
  if (p.num_cells() != cov.num_cells())
    throw ValidationError("placement spans " + std::to_string(p.num_cells()) +
                          " cells but coverage has " + std::to_string(cov.num_cells()));
  if (cov.has_capacities())
    for (std::size_t j = 0; j < cov.num_cells(); ++j)
      if (static_cast<double>(p.count(static_cast<CellId>(j))) > cov.capacities()[j])
        throw ContractError("cell " + std::to_string(j) + " stores " +
                            std::to_string(p.count(static_cast<CellId>(j))) +
                            " items, over its capacity");
}

inline void require_acceptance(const catalog::UtilityModel& ut, const char* what) {
  if (ut.mode() != catalog::UtilityMode::Acceptance)
    throw ModeError(std::string(what) + " needs an acceptance-mode relation model");
}
inline void require_satisfaction(const catalog::UtilityModel& ut, const char* what) {
  if (ut.mode() != catalog::UtilityMode::Satisfaction)
    throw ModeError(std::string(what) + " needs a satisfaction-mode relation model");
}

}  // namespace detail2

/// Expected hit ratio in the single-cache regime (every user is served by at
/// most one cell's worth of coverage; rows must sum to 0 or 1).
inline double hit_ratio_single(const catalog::Catalog& cat,
                               const network::CoverageModel& cov,
                               const catalog::UtilityModel& ut, const Placement& p) {
  detail2::check_shapes(cat, cov, ut);
  detail2::check_placement(cov, p);
  detail2::require_acceptance(ut, "the hit-ratio objective");
  if (!cov.single_cache_valid())
    throw ContractError("coverage is not in the single-cache regime (rows must sum to 0 or 1)");
  const std::size_t K = cat.num_contents();
  const std::size_t N = cov.num_users();
  const double diag = ut.diagonal();
  std::vector<double> r(K, 1.0);
  std::vector<ContentId> touched;
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (const auto& [j, q] : cov.cells_of_user(static_cast<UserId>(i))) {
      touched.clear();
      for (ContentId n : p.cell(j)) {
        detail::check_index(n, static_cast<long>(K), "content");
        if (r[n] == 1.0) touched.push_back(n);
        r[n] *= 1.0 - diag;
        for (const auto& e : ut.in_edges(i, n)) {
          if (r[e.other] == 1.0) touched.push_back(e.other);
          r[e.other] *= 1.0 - e.value;
        }
      }
      double cell_value = 0.0;
      for (ContentId k : touched)
        cell_value += cat.demand(detail2::demand_row(cat, i), k) * (1.0 - r[k]);
      for (ContentId k : touched) r[k] = 1.0;
      total += q * cell_value;
    }
  }
  return total / static_cast<double>(N);
}

/// Expected hit ratio with overlapping cells: a request is missed only if
/// every stored (content, cell) option fails independently.
inline double hit_ratio_femto(const catalog::Catalog& cat,
                              const network::CoverageModel& cov,
                              const catalog::UtilityModel& ut, const Placement& p) {
  detail2::check_shapes(cat, cov, ut);
  detail2::check_placement(cov, p);
  detail2::require_acceptance(ut, "the hit-ratio objective");
  const std::size_t K = cat.num_contents();
  const std::size_t N = cov.num_users();
  const double diag = ut.diagonal();
  std::vector<double> r(K, 1.0);
  std::vector<ContentId> touched;
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    touched.clear();
    for (const auto& [j, q] : cov.cells_of_user(static_cast<UserId>(i))) {
      for (ContentId n : p.cell(j)) {
        detail::check_index(n, static_cast<long>(K), "content");
        if (r[n] == 1.0) touched.push_back(n);
        r[n] *= 1.0 - diag * q;
        for (const auto& e : ut.in_edges(i, n)) {
          if (r[e.other] == 1.0) touched.push_back(e.other);
          r[e.other] *= 1.0 - e.value * q;
        }
      }
    }
    for (ContentId k : touched)
      total += cat.demand(detail2::demand_row(cat, i), k) * (1.0 - r[k]);
    for (ContentId k : touched) r[k] = 1.0;
  }
  return total / static_cast<double>(N);
}

/// Exact expected maximum of independent discrete draws. Each option is a
/// value distribution scaled by a coverage factor; `diag_scale > 0` adds a
/// deterministic option of value `diag_value * diag_scale` (the stored
/// requested content itself). Exact for point masses: the result is then the
/// plain maximum, with no accumulated rounding.
struct MaxOption {
  double scale;
  const catalog::DiscreteDistribution* dist;  // nullptr = point mass at `point`
  double point;
};

inline double expected_max(const std::vector<MaxOption>& options) {
  if (options.empty()) return 0.0;
  std::vector<double> grid;
  for (const auto& o : options) {
    if (o.dist == nullptr)
      grid.push_back(o.point * o.scale);
    else
      for (double v : o.dist->support) grid.push_back(v * o.scale);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double value = 0.0;
  double prev_cdf = 0.0;
  for (double x : grid) {
    double cdf = 1.0;
    for (const auto& o : options) {
      if (o.dist == nullptr) {
        if (o.point * o.scale > x) cdf = 0.0;
      } else {
        double f = 0.0;
        for (std::size_t t = 0; t < o.dist->support.size(); ++t)
          if (o.dist->support[t] * o.scale <= x) f += o.dist->prob[t];
        cdf *= f;
      }
      if (cdf == 0.0) break;
    }
    value += x * (cdf - prev_cdf);
    prev_cdf = cdf;
  }
  return value;
}

/// Expected satisfaction: each request is served by the single best stored
/// option. Requires a satisfaction-mode relation model.
inline double satisfaction(const catalog::Catalog& cat, const network::CoverageModel& cov,
                           const catalog::UtilityModel& ut, const Placement& p) {
  detail2::check_shapes(cat, cov, ut);
  detail2::check_placement(cov, p);
  detail2::require_satisfaction(ut, "the satisfaction objective");
  const std::size_t K = cat.num_contents();
  const std::size_t N = cov.num_users();
  const double diag = ut.diagonal();
  const bool dist_variant = ut.variant() == catalog::UtilityVariant::Distributional;

  std::vector<double> qmax(K, 0.0);
  std::vector<ContentId> stored;     // contents stored in >= 1 covered cell
  std::vector<double> best(K, 0.0);  // scalar path
  std::vector<char> seen(K, 0);
  std::vector<ContentId> affected;
  std::vector<MaxOption> options;

  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    stored.clear();
    affected.clear();
    for (const auto& [j, q] : cov.cells_of_user(static_cast<UserId>(i))) {
      for (ContentId n : p.cell(j)) {
        detail::check_index(n, static_cast<long>(K), "content");
        if (qmax[n] == 0.0) stored.push_back(n);
        qmax[n] = std::max(qmax[n], q);
      }
    }
    if (dist_variant) {
      // Requests k whose option set is non-empty: the stored contents
      // themselves plus everything related to one.
      for (ContentId n : stored) {
        if (!seen[n]) {
          seen[n] = 1;
          affected.push_back(n);
        }
        for (const auto& e : ut.in_edges(i, n))
          if (!seen[e.other]) {
            seen[e.other] = 1;
            affected.push_back(e.other);
          }
      }
      for (ContentId k : affected) {
        options.clear();
        if (qmax[k] > 0.0) options.push_back({qmax[k], nullptr, diag});
        for (const auto& e : ut.out_edges(i, k))
          if (qmax[e.other] > 0.0)
            options.push_back({qmax[e.other], &ut.distribution_at(e.dist), 0.0});
        total += cat.demand(detail2::demand_row(cat, i), k) * expected_max(options);
        seen[k] = 0;
      }
    } else {
      for (ContentId n : stored) {
        if (!seen[n]) {
          seen[n] = 1;
          affected.push_back(n);
        }
        best[n] = std::max(best[n], diag * qmax[n]);
        for (const auto& e : ut.in_edges(i, n)) {
          if (!seen[e.other]) {
            seen[e.other] = 1;
            affected.push_back(e.other);
          }
          best[e.other] = std::max(best[e.other], e.value * qmax[n]);
        }
      }
      for (ContentId k : affected) {
        total += cat.demand(detail2::demand_row(cat, i), k) * best[k];
        best[k] = 0.0;
        seen[k] = 0;
      }
    }
    for (ContentId n : stored) qmax[n] = 0.0;
  }
  return total / static_cast<double>(N);
}

/// Dispatches on the relation model's mode: hit ratio for acceptance models,
/// satisfaction for satisfaction models.
inline double evaluate_placement(const catalog::Catalog& cat,
                                 const network::CoverageModel& cov,
                                 const catalog::UtilityModel& ut, const Placement& p) {
  return ut.mode() == catalog::UtilityMode::Satisfaction
             ? satisfaction(cat, cov, ut, p)
             : hit_ratio_femto(cat, cov, ut, p);
}

/// Incremental hit-ratio state. Holds, per (user, content), the probability
/// that no stored option serves the request yet; committing a (content, cell)
/// pair multiplies the affected residuals and adds exactly the value returned
/// by marginal_gain. Two forms:
///   - the default multi-cell product form, and
///   - a single-cell view (factory `single_cell`) evaluating one cell's
///     contribution to the per-cell linear objective, with the cell's
///     coverage weights folded into the per-user demand weights.
class SchrState {
 public:
  SchrState(const catalog::Catalog& cat, const network::CoverageModel& cov,
            const catalog::UtilityModel& ut, CellCaps caps = {})
      : SchrState(cat, cov, ut, std::move(caps), false, 0) {}

  static SchrState single_cell(const catalog::Catalog& cat,
                               const network::CoverageModel& cov,
                               const catalog::UtilityModel& ut, CellId cell,
                               CellCaps caps = {}) {
    return SchrState(cat, cov, ut, std::move(caps), true, cell);
  }

  double objective() const { return obj_; }
  const Placement& placement() const { return placement_; }
  std::size_t num_contents() const { return K_; }
  std::size_t num_cells() const { return placement_.num_cells(); }

  bool stored(ContentId l, CellId m) const { return placement_.contains(l, m); }

  bool can_fit(ContentId l, CellId m) const {
    detail::check_index(l, static_cast<long>(K_), "content");
    detail::check_index(m, static_cast<long>(placement_.num_cells()), "cell");
    if (!caps_.max_items.empty() && placement_.count(m) + 1 > caps_.max_items[m])
      return false;
    if (!caps_.max_bytes.empty() &&
        placement_.used_bytes(*cat_, m) + cat_->size_of(l) > caps_.max_bytes[m])
      return false;
    return true;
  }

  double marginal_gain(ContentId l, CellId m) const {
    check_candidate(l, m);
    const double diag = ut_->diagonal();
    double gain = 0.0;
    for (UserId i : users_of(m)) {
      const double qs = edge_scale(i, m);
      const std::size_t row = static_cast<std::size_t>(i) * K_;
      gain += w_[row + l] * diag * qs * r_[row + l];
      for (const auto& e : ut_->in_edges(i, l))
        gain += w_[row + e.other] * e.value * qs * r_[row + e.other];
    }
    return gain;
  }

  void commit(ContentId l, CellId m) {
    check_candidate(l, m);
    if (!can_fit(l, m))
      throw ContractError("cell " + std::to_string(m) + " cannot fit content " +
                          std::to_string(l) + " within its capacity");
    const double diag = ut_->diagonal();
    double delta = 0.0;
    for (UserId i : users_of(m)) {
      const double qs = edge_scale(i, m);
      const std::size_t row = static_cast<std::size_t>(i) * K_;
      delta += w_[row + l] * diag * qs * r_[row + l];
      r_[row + l] *= 1.0 - diag * qs;
      for (const auto& e : ut_->in_edges(i, l)) {
        delta += w_[row + e.other] * e.value * qs * r_[row + e.other];
        r_[row + e.other] *= 1.0 - e.value * qs;
      }
    }
    obj_ += delta;
    placement_.add(l, m);
  }

  /// Residual miss probability for one (user, content) pair.
  double residual(UserId i, ContentId k) const {
    detail::check_index(i, static_cast<long>(N_), "user");
    detail::check_index(k, static_cast<long>(K_), "content");
    return r_[static_cast<std::size_t>(i) * K_ + k];
  }

 private:
  SchrState(const catalog::Catalog& cat, const network::CoverageModel& cov,
            const catalog::UtilityModel& ut, CellCaps caps, bool single, CellId cell)
      : cat_(&cat), cov_(&cov), ut_(&ut), caps_(std::move(caps)),
        single_mode_(single), cell_(cell), K_(cat.num_contents()),
        N_(cov.num_users()), placement_(cov.num_cells()) {
    detail2::check_shapes(cat, cov, ut);
    detail2::require_acceptance(ut, "the hit-ratio objective");
    if (single)
      detail::check_index(cell, static_cast<long>(cov.num_cells()), "cell");
    if (!caps_.max_items.empty() && caps_.max_items.size() != cov.num_cells())
      throw ValidationError("item capacity list must have one entry per cell");
    if (!caps_.max_bytes.empty() && caps_.max_bytes.size() != cov.num_cells())
      throw ValidationError("byte capacity list must have one entry per cell");
    w_.resize(N_ * K_);
    r_.assign(N_ * K_, 1.0);
    const double n = static_cast<double>(N_);
    for (std::size_t i = 0; i < N_; ++i) {
      const double scale =
          single_mode_ ? cov.q(static_cast<UserId>(i), cell_) / n : 1.0 / n;
      for (std::size_t k = 0; k < K_; ++k)
        w_[i * K_ + k] =
            cat.demand(detail2::demand_row(cat, i), static_cast<ContentId>(k)) * scale;
    }
  }

  void check_candidate(ContentId l, CellId m) const {
    detail::check_index(l, static_cast<long>(K_), "content");
    detail::check_index(m, static_cast<long>(placement_.num_cells()), "cell");
    if (single_mode_ && m != cell_)
      throw ContractError("this state evaluates cell " + std::to_string(cell_) +
                          " only");
    if (placement_.contains(l, m))
      throw ContractError("content " + std::to_string(l) + " already stored in cell " +
                          std::to_string(m));
  }

  const std::vector<UserId>& users_of(CellId m) const {
    return cov_->users_of_cell(single_mode_ ? cell_ : m);
  }
  double edge_scale(UserId i, CellId m) const {
    return single_mode_ ? 1.0 : cov_->q(i, m);
  }

  const catalog::Catalog* cat_;
  const network::CoverageModel* cov_;
  const catalog::UtilityModel* ut_;
  CellCaps caps_;
  bool single_mode_;
  CellId cell_;
  std::size_t K_;
  std::size_t N_;
  std::vector<double> w_;  // per-(user, content) demand weight
  std::vector<double> r_;  // per-(user, content) residual miss probability
  Placement placement_;
  double obj_ = 0.0;
};

/// Incremental satisfaction state. Scalar relation variants keep the running
/// best stored option per (user, content); the distributional variant keeps
/// the full option set (content -> best coverage scale) and recomputes the
/// exact expected maximum for affected pairs only.
class SchUsState {
 public:
  SchUsState(const catalog::Catalog& cat, const network::CoverageModel& cov,
             const catalog::UtilityModel& ut, CellCaps caps = {})
      : cat_(&cat), cov_(&cov), ut_(&ut), caps_(std::move(caps)),
        K_(cat.num_contents()), N_(cov.num_users()), placement_(cov.num_cells()) {
    detail2::check_shapes(cat, cov, ut);
    detail2::require_satisfaction(ut, "the satisfaction objective");
    if (!caps_.max_items.empty() && caps_.max_items.size() != cov.num_cells())
      throw ValidationError("item capacity list must have one entry per cell");
    if (!caps_.max_bytes.empty() && caps_.max_bytes.size() != cov.num_cells())
      throw ValidationError("byte capacity list must have one entry per cell");
    distributional_ = ut.variant() == catalog::UtilityVariant::Distributional;
    w_.resize(N_ * K_);
    const double n = static_cast<double>(N_);
    for (std::size_t i = 0; i < N_; ++i)
      for (std::size_t k = 0; k < K_; ++k)
        w_[i * K_ + k] =
            cat.demand(detail2::demand_row(cat, i), static_cast<ContentId>(k)) / n;
    if (distributional_) {
      opts_.resize(N_ * K_);
      v_.assign(N_ * K_, 0.0);
    } else {
      b_.assign(N_ * K_, 0.0);
    }
  }

  double objective() const { return obj_; }
  const Placement& placement() const { return placement_; }
  std::size_t num_contents() const { return K_; }
  std::size_t num_cells() const { return placement_.num_cells(); }
  bool stored(ContentId l, CellId m) const { return placement_.contains(l, m); }

  bool can_fit(ContentId l, CellId m) const {
    detail::check_index(l, static_cast<long>(K_), "content");
    detail::check_index(m, static_cast<long>(placement_.num_cells()), "cell");
    if (!caps_.max_items.empty() && placement_.count(m) + 1 > caps_.max_items[m])
      return false;
    if (!caps_.max_bytes.empty() &&
        placement_.used_bytes(*cat_, m) + cat_->size_of(l) > caps_.max_bytes[m])
      return false;
    return true;
  }

  double marginal_gain(ContentId l, CellId m) const {
    check_candidate(l, m);
    double gain = 0.0;
    for (UserId i : cov_->users_of_cell(m)) {
      const double q = cov_->q(i, m);
      if (distributional_)
        gain += gain_distributional(i, l, q);
      else
        gain += gain_scalar(i, l, q);
    }
    return gain;
  }

  void commit(ContentId l, CellId m) {
    check_candidate(l, m);
    if (!can_fit(l, m))
      throw ContractError("cell " + std::to_string(m) + " cannot fit content " +
                          std::to_string(l) + " within its capacity");
    double delta = 0.0;
    for (UserId i : cov_->users_of_cell(m)) {
      const double q = cov_->q(i, m);
      if (distributional_)
        delta += commit_distributional(i, l, q);
      else
        delta += commit_scalar(i, l, q);
    }
    obj_ += delta;
    placement_.add(l, m);
  }

 private:
  struct Opt {
    ContentId n;
    double qmax;
    std::int32_t dist;  // -1: the diagonal (stored requested content itself)
  };

  void check_candidate(ContentId l, CellId m) const {
    detail::check_index(l, static_cast<long>(K_), "content");
    detail::check_index(m, static_cast<long>(placement_.num_cells()), "cell");
    if (placement_.contains(l, m))
      throw ContractError("content " + std::to_string(l) + " already stored in cell " +
                          std::to_string(m));
  }

  double gain_scalar(UserId i, ContentId l, double q) const {
    const std::size_t row = static_cast<std::size_t>(i) * K_;
    const double diag = ut_->diagonal();
    double gain = 0.0;
    const double dl = diag * q - b_[row + l];
    if (dl > 0.0) gain += w_[row + l] * dl;
    for (const auto& e : ut_->in_edges(i, l)) {
      const double d = e.value * q - b_[row + e.other];
      if (d > 0.0) gain += w_[row + e.other] * d;
    }
    return gain;
  }

  double commit_scalar(UserId i, ContentId l, double q) {
    const std::size_t row = static_cast<std::size_t>(i) * K_;
    const double diag = ut_->diagonal();
    double delta = 0.0;
    const double dl = diag * q - b_[row + l];
    if (dl > 0.0) {
      delta += w_[row + l] * dl;
      b_[row + l] = diag * q;
    }
    for (const auto& e : ut_->in_edges(i, l)) {
      const double d = e.value * q - b_[row + e.other];
      if (d > 0.0) {
        delta += w_[row + e.other] * d;
        b_[row + e.other] = e.value * q;
      }
    }
    return delta;
  }

  // Expected maximum for pair (i,k) with the option for content l overridden
  // to coverage scale q_override (merge of a prospective add).
  double emax_with(const std::vector<Opt>& opts, ContentId k, ContentId l,
                   double q_override) const {
    options_buf_.clear();
    bool replaced = false;
    for (const Opt& o : opts) {
      double scale = o.qmax;
      if (o.n == l) {
        replaced = true;
        scale = std::max(scale, q_override);
      }
      if (o.dist < 0)
        options_buf_.push_back({scale, nullptr, ut_->diagonal()});
      else
        options_buf_.push_back({scale, &ut_->distribution_at(o.dist), 0.0});
    }
    if (!replaced && q_override > 0.0) {
      if (l == k)
        options_buf_.push_back({q_override, nullptr, ut_->diagonal()});
      else {
        const auto* f = ut_->distribution(k, l);
        if (f) options_buf_.push_back({q_override, f, 0.0});
      }
    }
    return expected_max(options_buf_);
  }

  double gain_distributional(UserId i, ContentId l, double q) const {
    const std::size_t row = static_cast<std::size_t>(i) * K_;
    double gain = 0.0;
    // Request for l itself gains via the diagonal; requests related to l via
    // its distribution.
    gain += w_[row + l] * (emax_with(opts_[row + l], l, l, q) - value_at(row + l));
    for (const auto& e : ut_->in_edges(i, l))
      gain += w_[row + e.other] *
              (emax_with(opts_[row + e.other], e.other, l, q) - value_at(row + e.other));
    return gain;
  }

  double commit_distributional(UserId i, ContentId l, double q) {
    const std::size_t row = static_cast<std::size_t>(i) * K_;
    double delta = 0.0;
    delta += w_[row + l] * update_pair(row, l, l, q);
    for (const auto& e : ut_->in_edges(i, l))
      delta += w_[row + e.other] * update_pair(row, e.other, l, q);
    return delta;
  }

  double update_pair(std::size_t row, ContentId k, ContentId l, double q) {
    auto& opts = opts_[row + k];
    const double newv = emax_with(opts, k, l, q);
    const double oldv = value_at(row + k);
    // Merge the option into the stored set.
    bool merged = false;
    for (Opt& o : opts)
      if (o.n == l) {
        o.qmax = std::max(o.qmax, q);
        merged = true;
        break;
      }
    if (!merged) {
      if (l == k)
        opts.push_back({l, q, -1});
      else {
        const auto* f = ut_->distribution(k, l);
        if (f) {
          // Locate the pool index so future evaluations reuse it.
          for (const auto& e : ut_->out_edges(0, k))
            if (e.other == l) {
              opts.push_back({l, q, e.dist});
              break;
            }
        }
      }
    }
    set_value(row + k, newv);
    return newv - oldv;
  }

  double value_at(std::size_t idx) const { return v_[idx]; }
  void set_value(std::size_t idx, double v) { v_[idx] = v; }

  const catalog::Catalog* cat_;
  const network::CoverageModel* cov_;
  const catalog::UtilityModel* ut_;
  CellCaps caps_;
  std::size_t K_;
  std::size_t N_;
  bool distributional_ = false;
  std::vector<double> w_;
  std::vector<double> b_;                 // scalar path: best stored option value
  std::vector<std::vector<Opt>> opts_;  // distributional path: stored options
  std::vector<double> v_;               // distributional path: cached E[max]
  mutable std::vector<MaxOption> options_buf_;
  Placement placement_;
  double obj_ = 0.0;
};

}  // namespace softcache::objective

namespace softcache {
using objective::CellCaps;
using objective::evaluate_placement;
using objective::expected_max;
using objective::hit_ratio_femto;
using objective::hit_ratio_single;
using objective::MaxOption;
using objective::satisfaction;
using objective::SchrState;
using objective::SchUsState;
}  // namespace softcache
