#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "softcache/errors.hpp"
#include "softcache/types.hpp"

// Content catalog (sizes + per-user request probabilities) and the relation
// model: how willing a user is to accept content n when they asked for k.
// Relations come in three variants — per-user values, per-pair discrete
// value distributions, or per-pair averages — and two modes:
//   Acceptance:   values are probabilities in [0,1]; a content always
//                 "accepts" itself (diagonal fixed at 1).
//   Satisfaction: values are scores in [0, u_max]; diagonal fixed at u_max.
// Diagonal entries are virtual: computed, never stored, so they cannot be
// overridden. Absent pairs evaluate to 0, and zero-valued relations are
// equivalent to absent ones (they are not stored).

namespace softcache::catalog {

class Catalog {
 public:
  /// One demand row shared by every user. `popularity` holds nonnegative raw
  /// scores (e.g. view counts) that are normalized into probabilities; the
  /// raw values are kept so serialization can round-trip exactly.
  static Catalog shared_demand(std::vector<double> popularity,
                               std::vector<double> sizes = {},
                               std::size_t num_users = 1) {
    Catalog c;
    c.init_sizes(popularity.size(), std::move(sizes));
    if (num_users == 0) throw ValidationError("catalog needs at least one user");
    c.num_users_ = num_users;
    c.shared_ = true;
    double total = 0.0;
    for (std::size_t k = 0; k < popularity.size(); ++k) {
      if (!(popularity[k] >= 0.0))
        throw ValidationError("popularity of content " + std::to_string(k) +
                              " must be nonnegative");
      total += popularity[k];
    }
    if (!(total > 0.0)) throw ValidationError("total popularity must be positive");
    c.raw_popularity_ = std::move(popularity);
    c.demand_.resize(c.num_contents_);
    for (std::size_t k = 0; k < c.num_contents_; ++k)
      c.demand_[k] = c.raw_popularity_[k] / total;
    return c;
  }

  /// Per-user demand rows, row-major `rows[i*K + k]`; each row must already
  /// be a probability vector (sums to 1 within 1e-9).
  static Catalog per_user_demand(std::size_t num_contents, std::size_t num_users,
                                 std::vector<double> rows,
                                 std::vector<double> sizes = {}) {
    Catalog c;
    c.init_sizes(num_contents, std::move(sizes));
    if (num_users == 0) throw ValidationError("catalog needs at least one user");
    if (rows.size() != num_contents * num_users)
      throw ValidationError("demand matrix has " + std::to_string(rows.size()) +
                            " entries, expected " +
                            std::to_string(num_contents * num_users));
    for (std::size_t i = 0; i < num_users; ++i) {
      double row_sum = 0.0;
      for (std::size_t k = 0; k < num_contents; ++k) {
        const double p = rows[i * num_contents + k];
        if (!(p >= 0.0))
          throw ValidationError("demand of user " + std::to_string(i) +
                                " for content " + std::to_string(k) +
                                " must be nonnegative");
        row_sum += p;
      }
      if (std::abs(row_sum - 1.0) > 1e-9)
        throw ValidationError("demand row of user " + std::to_string(i) +
                              " sums to " + std::to_string(row_sum) +
                              ", expected 1");
    }
    c.num_users_ = num_users;
    c.shared_ = false;
    c.demand_ = std::move(rows);
    return c;
  }

  std::size_t num_contents() const { return num_contents_; }
  std::size_t num_users() const { return num_users_; }
  bool shared_demand_rows() const { return shared_; }

  double demand(std::size_t user, ContentId k) const {
    detail::check_index(static_cast<long>(user), static_cast<long>(num_users_), "user");
    detail::check_index(static_cast<long>(k), static_cast<long>(num_contents_), "content");
    return shared_ ? demand_[k] : demand_[user * num_contents_ + k];
  }

  const std::vector<double>& sizes() const { return sizes_; }
  double size_of(ContentId k) const {
    detail::check_index(static_cast<long>(k), static_cast<long>(num_contents_), "content");
    return sizes_[k];
  }
  bool uniform_sizes() const {
    for (double s : sizes_)
      if (s != sizes_[0]) return false;
    return true;
  }

  /// Raw (un-normalized) popularity as ingested; empty for per-user catalogs.
  const std::vector<double>& raw_popularity() const { return raw_popularity_; }

  /// Shared demand row (probabilities); only valid for shared-demand catalogs.
  const std::vector<double>& shared_row() const {
    if (!shared_) throw ContractError("catalog does not use a shared demand row");
    return demand_;
  }

  /// Same catalog, rebound to a different user count (shared demand only).
  Catalog with_users(std::size_t num_users) const {
    if (!shared_)
      throw ContractError("cannot rebind user count of a per-user catalog");
    if (num_users == 0) throw ValidationError("catalog needs at least one user");
    Catalog c = *this;
    c.num_users_ = num_users;
    return c;
  }

  /// Same catalog with different content sizes.
  Catalog with_sizes(std::vector<double> sizes) const {
    Catalog c = *this;
    c.sizes_.clear();
    c.init_sizes_only(std::move(sizes));
    return c;
  }

 private:
  Catalog() = default;

  void init_sizes(std::size_t num_contents, std::vector<double> sizes) {
    if (num_contents == 0) throw ValidationError("catalog must not be empty");
    num_contents_ = num_contents;
    init_sizes_only(std::move(sizes));
  }
  void init_sizes_only(std::vector<double> sizes) {
    if (sizes.empty()) sizes.assign(num_contents_, 1.0);
    if (sizes.size() != num_contents_)
      throw ValidationError("size list has " + std::to_string(sizes.size()) +
                            " entries, expected " + std::to_string(num_contents_));
    for (std::size_t k = 0; k < sizes.size(); ++k)
      if (!(sizes[k] > 0.0))
        throw ValidationError("size of content " + std::to_string(k) +
                              " must be positive");
    sizes_ = std::move(sizes);
  }

  std::size_t num_contents_ = 0;
  std::size_t num_users_ = 1;
  bool shared_ = true;
  std::vector<double> demand_;          // K entries (shared) or N*K row-major
  std::vector<double> raw_popularity_;  // shared only
  std::vector<double> sizes_;
};

/// Discrete value distribution with explicit support points. Canonicalized on
/// construction: sorted ascending, equal points merged, zero-probability
/// points dropped; probabilities must sum to 1 within 1e-9.
struct DiscreteDistribution {
  std::vector<double> support;
  std::vector<double> prob;

  DiscreteDistribution(std::vector<double> values, std::vector<double> probs) {
    if (values.size() != probs.size() || values.empty())
      throw ValidationError("distribution needs matching, non-empty support/probability lists");
    std::vector<std::pair<double, double>> pts(values.size());
    double total = 0.0;
    for (std::size_t t = 0; t < values.size(); ++t) {
      if (!(values[t] >= 0.0))
        throw ValidationError("distribution support points must be nonnegative");
      if (!(probs[t] >= 0.0))
        throw ValidationError("distribution probabilities must be nonnegative");
      pts[t] = {values[t], probs[t]};
      total += probs[t];
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ValidationError("distribution probabilities sum to " +
                            std::to_string(total) + ", expected 1");
    std::sort(pts.begin(), pts.end());
    for (const auto& [v, p] : pts) {
      if (p == 0.0) continue;
      if (!support.empty() && support.back() == v)
        prob.back() += p;
      else {
        support.push_back(v);
        prob.push_back(p);
      }
    }
    if (support.empty())
      throw ValidationError("distribution has no support point with positive probability");
  }

  static DiscreteDistribution point_mass(double v) {
    return DiscreteDistribution({v}, {1.0});
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t t = 0; t < support.size(); ++t) m += support[t] * prob[t];
    return m;
  }

  double max_support() const { return support.back(); }
};

enum class UtilityVariant { Average, Distributional, PerUser };
enum class UtilityMode { Acceptance, Satisfaction };

class UtilityModel {
 public:
  /// Sparse relation edge: for out-edges `other` is the candidate content n,
  /// for in-edges it is the requesting content k. `value` is the (expected)
  /// utility; `dist` indexes the distribution pool, -1 for scalar variants.
  struct Edge {
    ContentId other;
    double value;
    std::int32_t dist;
  };

  static UtilityModel average(std::size_t num_contents,
                              UtilityMode mode = UtilityMode::Acceptance,
                              double u_max = 1.0) {
    return UtilityModel(UtilityVariant::Average, mode, u_max, num_contents, 0);
  }
  static UtilityModel distributional(std::size_t num_contents,
                                     UtilityMode mode = UtilityMode::Acceptance,
                                     double u_max = 1.0) {
    return UtilityModel(UtilityVariant::Distributional, mode, u_max, num_contents, 0);
  }
  static UtilityModel per_user(std::size_t num_contents, std::size_t num_users,
                               UtilityMode mode = UtilityMode::Acceptance,
                               double u_max = 1.0) {
    if (num_users == 0) throw ValidationError("per-user relation model needs users");
    return UtilityModel(UtilityVariant::PerUser, mode, u_max, num_contents, num_users);
  }
  /// Identity-only model: no relations, only the implicit diagonal.
  static UtilityModel identity(std::size_t num_contents,
                               UtilityMode mode = UtilityMode::Acceptance,
                               double u_max = 1.0) {
    return average(num_contents, mode, u_max);
  }

  UtilityVariant variant() const { return variant_; }
  UtilityMode mode() const { return mode_; }
  double u_max() const { return u_max_; }
  /// Implicit self-utility: 1 in Acceptance mode, u_max in Satisfaction mode.
  double diagonal() const { return mode_ == UtilityMode::Acceptance ? 1.0 : u_max_; }
  DiscreteDistribution diagonal_distribution() const {
    return DiscreteDistribution::point_mass(diagonal());
  }
  std::size_t num_contents() const { return num_contents_; }
  std::size_t num_users() const { return num_users_; }

  /// Average / Distributional variants (shared across users).
  void add_relation(ContentId requested, ContentId candidate, double value) {
    if (variant_ == UtilityVariant::PerUser)
      throw ContractError("per-user relation model requires a user index");
    check_pair(requested, candidate);
    check_value(value);
    if (value == 0.0) return;
    std::int32_t dist = -1;
    if (variant_ == UtilityVariant::Distributional) {
      dist = static_cast<std::int32_t>(dists_.size());
      dists_.push_back(DiscreteDistribution::point_mass(value));
    }
    insert(out_[requested], candidate, value, dist, requested, candidate);
    insert(in_[candidate], requested, value, dist, requested, candidate);
  }

  void add_relation(ContentId requested, ContentId candidate, DiscreteDistribution f) {
    if (variant_ != UtilityVariant::Distributional)
      throw ContractError("value distributions require the distributional variant");
    check_pair(requested, candidate);
    if (!(f.max_support() <= u_max_ + 0.0))
      throw ValidationError("distribution support exceeds the maximum utility " +
                            std::to_string(u_max_));
    const double m = f.mean();
    if (m == 0.0) return;  // all probability mass at value 0: inert
    const auto dist = static_cast<std::int32_t>(dists_.size());
    dists_.push_back(std::move(f));
    insert(out_[requested], candidate, m, dist, requested, candidate);
    insert(in_[candidate], requested, m, dist, requested, candidate);
  }

  void add_relation(std::size_t user, ContentId requested, ContentId candidate,
                    double value) {
    if (variant_ != UtilityVariant::PerUser)
      throw ContractError("user-specific relations require the per-user variant");
    detail::check_index(static_cast<long>(user), static_cast<long>(num_users_), "user");
    check_pair(requested, candidate);
    check_value(value);
    if (value == 0.0) return;
    auto& out = user_out_[user * num_contents_ + requested];
    auto& in = user_in_[user * num_contents_ + candidate];
    insert(out, candidate, value, -1, requested, candidate);
    insert(in, requested, value, -1, requested, candidate);
  }

  /// Expected utility of candidate n for a request (user, k). The diagonal is
  /// implicit; absent pairs return 0. The user index is only consulted by the
  /// per-user variant (the other variants are user-agnostic).
  double utility(std::size_t user, ContentId requested, ContentId candidate) const {
    detail::check_index(static_cast<long>(requested), static_cast<long>(num_contents_),
                        "content");
    detail::check_index(static_cast<long>(candidate), static_cast<long>(num_contents_),
                        "content");
    if (requested == candidate) return diagonal();
    const Edge* e = find(out_edges(user, requested), candidate);
    return e ? e->value : 0.0;
  }

  /// Value distribution of a stored pair; nullptr when absent. Distributional
  /// variant only; the implicit diagonal is available via diagonal_distribution().
  const DiscreteDistribution* distribution(ContentId requested, ContentId candidate) const {
    if (variant_ != UtilityVariant::Distributional)
      throw ContractError("distribution lookup requires the distributional variant");
    detail::check_index(static_cast<long>(requested), static_cast<long>(num_contents_),
                        "content");
    detail::check_index(static_cast<long>(candidate), static_cast<long>(num_contents_),
                        "content");
    if (requested == candidate) return nullptr;
    const Edge* e = find(out_[requested], candidate);
    return e ? &dists_[e->dist] : nullptr;
  }

  const DiscreteDistribution& distribution_at(std::int32_t idx) const {
    return dists_[static_cast<std::size_t>(idx)];
  }

  /// Off-diagonal relations of requested content k (candidates n, ascending).
  const std::vector<Edge>& out_edges(std::size_t user, ContentId k) const {
    detail::check_index(static_cast<long>(k), static_cast<long>(num_contents_), "content");
    if (variant_ == UtilityVariant::PerUser) {
      detail::check_index(static_cast<long>(user), static_cast<long>(num_users_), "user");
      return user_out_[user * num_contents_ + k];
    }
    return out_[k];
  }

  /// Requesting contents k that relate to candidate n (ascending).
  const std::vector<Edge>& in_edges(std::size_t user, ContentId n) const {
    detail::check_index(static_cast<long>(n), static_cast<long>(num_contents_), "content");
    if (variant_ == UtilityVariant::PerUser) {
      detail::check_index(static_cast<long>(user), static_cast<long>(num_users_), "user");
      return user_in_[user * num_contents_ + n];
    }
    return in_[n];
  }

  bool user_specific() const { return variant_ == UtilityVariant::PerUser; }

  std::size_t num_relations() const {
    std::size_t e = 0;
    for (const auto& v : out_) e += v.size();
    for (const auto& v : user_out_) e += v.size();
    return e;
  }

  /// Mean number of positive off-diagonal relations per content.
  double mean_related_degree() const {
    if (variant_ != UtilityVariant::Average)
      throw ContractError("mean related degree is defined for the averaged variant");
    std::size_t e = 0;
    for (const auto& v : out_) e += v.size();
    return static_cast<double>(e) / static_cast<double>(num_contents_);
  }

  /// Copy with every relation value multiplied by `factor` (distribution
  /// supports are scaled likewise). factor = 0 yields an identity-only model.
  UtilityModel scaled(double factor) const {
    if (!(factor >= 0.0)) throw ValidationError("scale factor must be nonnegative");
    UtilityModel m(variant_, mode_, u_max_, num_contents_, num_users_);
    if (factor == 0.0) return m;
    auto scale_into = [&](const std::vector<Edge>& src, auto&& add) {
      for (const Edge& e : src) add(e);
    };
    if (variant_ == UtilityVariant::PerUser) {
      for (std::size_t i = 0; i < num_users_; ++i)
        for (ContentId k = 0; k < num_contents_; ++k)
          scale_into(user_out_[i * num_contents_ + k], [&](const Edge& e) {
            m.add_relation(i, k, e.other, clamp_value(e.value * factor));
          });
    } else if (variant_ == UtilityVariant::Distributional) {
      for (ContentId k = 0; k < num_contents_; ++k)
        scale_into(out_[k], [&](const Edge& e) {
          const DiscreteDistribution& f = dists_[e.dist];
          std::vector<double> support(f.support);
          for (double& v : support) v = clamp_value(v * factor);
          m.add_relation(k, e.other, DiscreteDistribution(support, f.prob));
        });
    } else {
      for (ContentId k = 0; k < num_contents_; ++k)
        scale_into(out_[k], [&](const Edge& e) {
          m.add_relation(k, e.other, clamp_value(e.value * factor));
        });
    }
    return m;
  }

 private:
  UtilityModel(UtilityVariant variant, UtilityMode mode, double u_max,
               std::size_t num_contents, std::size_t num_users)
      : variant_(variant), mode_(mode), u_max_(u_max), num_contents_(num_contents),
        num_users_(num_users) {
    if (num_contents == 0) throw ValidationError("relation model must not be empty");
    if (mode_ == UtilityMode::Acceptance) {
      if (u_max_ != 1.0)
        throw ValidationError("acceptance mode fixes the maximum utility at 1");
    } else if (!(u_max_ > 0.0)) {
      throw ValidationError("maximum utility must be positive");
    }
    if (variant_ == UtilityVariant::PerUser) {
      user_out_.resize(num_users_ * num_contents_);
      user_in_.resize(num_users_ * num_contents_);
    } else {
      out_.resize(num_contents_);
      in_.resize(num_contents_);
    }
  }

  void check_pair(ContentId k, ContentId n) const {
    detail::check_index(static_cast<long>(k), static_cast<long>(num_contents_), "content");
    detail::check_index(static_cast<long>(n), static_cast<long>(num_contents_), "content");
    if (k == n)
      throw ValidationError("self relation (" + std::to_string(k) +
                            ") rejected: the diagonal is implicit");
  }
  void check_value(double v) const {
    if (!(v >= 0.0) || !(v <= u_max_))
      throw ValidationError("relation value " + std::to_string(v) +
                            " outside [0, " + std::to_string(u_max_) + "]");
  }
  // Keeps scaled values inside the valid range when factor*value rounds a
  // hair above u_max.
  double clamp_value(double v) const { return v > u_max_ ? u_max_ : v; }

  static const Edge* find(const std::vector<Edge>& edges, ContentId other) {
    auto it = std::lower_bound(edges.begin(), edges.end(), other,
                               [](const Edge& e, ContentId o) { return e.other < o; });
    return (it != edges.end() && it->other == other) ? &*it : nullptr;
  }

  static void insert(std::vector<Edge>& edges, ContentId other, double value,
                     std::int32_t dist, ContentId k, ContentId n) {
    auto it = std::lower_bound(edges.begin(), edges.end(), other,
                               [](const Edge& e, ContentId o) { return e.other < o; });
    if (it != edges.end() && it->other == other)
      throw ValidationError("duplicate relation (" + std::to_string(k) + "," +
                            std::to_string(n) + ")");
    edges.insert(it, Edge{other, value, dist});
  }

  UtilityVariant variant_;
  UtilityMode mode_;
  double u_max_;
  std::size_t num_contents_;
  std::size_t num_users_;
  std::vector<std::vector<Edge>> out_;       // shared variants: k -> candidates
  std::vector<std::vector<Edge>> in_;        // shared variants: n -> requesters
  std::vector<std::vector<Edge>> user_out_;  // per-user: [i*K + k]
  std::vector<std::vector<Edge>> user_in_;   // per-user: [i*K + n]
  std::vector<DiscreteDistribution> dists_;
};

}  // namespace softcache::catalog

namespace softcache {
using catalog::Catalog;
using catalog::DiscreteDistribution;
using catalog::UtilityMode;
using catalog::UtilityModel;
using catalog::UtilityVariant;
}  // namespace softcache
