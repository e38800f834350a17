#ifndef LOWRANKBP_COMBINAT_EXTREMAL_HPP
#define LOWRANKBP_COMBINAT_EXTREMAL_HPP

#include "lowrankbp/combinat/set_family.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

namespace lowrankbp::combinat {

/// C(n, r) exactly; 0 outside 0 <= r <= n. Throws TooLarge past 2^63.
inline std::int64_t binomial(std::int64_t n, std::int64_t r) {
  if (r < 0 || n < 0 || r > n) return 0;
  r = std::min(r, n - r);
  __int128 acc = 1;
  for (std::int64_t j = 1; j <= r; ++j) {
    acc = acc * (n - r + j) / j;
    if (acc > static_cast<__int128>(INT64_MAX)) throw Error(ErrorKind::TooLarge, "binomial overflows 64 bits");
  }
  return static_cast<std::int64_t>(acc);
}

struct FamilyBounds {
  std::int64_t exact_max_fi = 0;
  int best_i = 0;  ///< argmax, 0 when every F_i is empty
  double closed_form = 0.0;
};

/// Prefix length of F_i, clipped to [d].
inline int fi_prefix(int d, int k, int i) { return std::min(i * k - 1, d); }

/// |F_i| for F_i = {S : |S ∩ [ik-1]| >= t + i}, maximised over i in [s - t], and (e k s / d)^(t+1) C(d, s).
inline FamilyBounds conjectured_family_bounds(int d, int s, int k, int t) {
  if (d < 1 || s < 1 || s > d || k < 1 || t < 0 || t > s) {
    throw Error(ErrorKind::InvalidArgument, "need 1 <= s <= d, k >= 1, 0 <= t <= s");
  }
  FamilyBounds out;
  for (int i = 1; i <= s - t; ++i) {
    const int m = fi_prefix(d, k, i);
    std::int64_t size = 0;
    for (int j = t + i; j <= std::min(s, m); ++j) size += binomial(m, j) * binomial(d - m, s - j);
    if (size > out.exact_max_fi) {
      out.exact_max_fi = size;
      out.best_i = i;
    }
  }
  out.closed_form = std::pow(std::numbers::e * k * s / d, t + 1) * static_cast<double>(binomial(d, s));
  return out;
}

/// Members of F_i in lexicographic order.
inline SetFamily fi_family(int d, int s, int k, int t, int i) {
  if (i < 1 || i > s - t) throw Error(ErrorKind::InvalidArgument, "F_i needs 1 <= i <= s - t");
  if (d > 30) throw Error(ErrorKind::TooLarge, "F_i enumeration is limited to d <= 30");
  const int m = fi_prefix(d, k, i);
  SetFamily family(d, s);
  std::vector<int> comb(s);
  for (int j = 0; j < s; ++j) comb[j] = j + 1;
  while (true) {
    int inside = 0;
    for (int e : comb) inside += e <= m;
    if (inside >= t + i) family.add(IndexSet(d, comb), true);
    int j = s - 1;
    while (j >= 0 && comb[j] == d - s + j + 1) --j;
    if (j < 0) break;
    ++comb[j];
    for (int l = j + 1; l < s; ++l) comb[l] = comb[l - 1] + 1;
  }
  return family;
}

namespace detail {

using Mask = std::uint32_t;

inline Mask to_mask(const IndexSet& set) {
  Mask m = 0;
  for (int e : set) m |= Mask{1} << (e - 1);
  return m;
}

/// Hall's condition for a perfect r-matching of the given sets (repeats allowed).
inline bool hall_matchable(const std::vector<Mask>& sets, int r) {
  const std::size_t n = sets.size();
  for (std::uint32_t sub = 1; sub < (1u << n); ++sub) {
    Mask uni = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (sub & (1u << j)) uni |= sets[j];
    }
    if (std::popcount(uni) < r * std::popcount(sub)) return false;
  }
  return true;
}

}  // namespace detail

/// Whether the k sets in a forbidden configuration must be distinct members or may repeat one.
enum class Multiplicity { Distinct, WithRepetition };

struct ExtremalResult {
  std::int64_t size = 0;
  SetFamily witness;
  bool completed = true;  ///< false when the node budget or deadline ran out; size is then a lower bound
  long nodes = 0;
};

struct ExtremalOptions {
  Multiplicity multiplicity = Multiplicity::WithRepetition;
  long node_budget = 50'000'000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Largest family of s-subsets of [d] with no k members that perfectly (s - t)-match.
/// Branch and bound over candidates in lexicographic order, seeded with the best F_i.
/// The lexicographically first set is forced in: all s-sets are equivalent under relabelling.
inline ExtremalResult max_family_no_matchable(int d, int s, int k, int t, const ExtremalOptions& opts = {}) {
  if (d < 1 || s < 1 || s > d || k < 1 || t < 0 || t >= s) {
    throw Error(ErrorKind::InvalidArgument, "need 1 <= s <= d, k >= 1, 0 <= t < s");
  }
  const std::int64_t total = binomial(d, s);
  if (d > 8 || total > 80) throw Error(ErrorKind::TooLarge, "exhaustive search needs d <= 8 and C(d,s) <= 80");
  const int r = s - t;
  const bool repeats = opts.multiplicity == Multiplicity::WithRepetition;

  std::vector<IndexSet> universe_sets;
  {
    std::vector<int> comb(s);
    for (int j = 0; j < s; ++j) comb[j] = j + 1;
    while (true) {
      universe_sets.emplace_back(d, comb);
      int j = s - 1;
      while (j >= 0 && comb[j] == d - s + j + 1) --j;
      if (j < 0) break;
      ++comb[j];
      for (int l = j + 1; l < s; ++l) comb[l] = comb[l - 1] + 1;
    }
  }
  std::vector<detail::Mask> masks;
  for (const auto& set : universe_sets) masks.push_back(detail::to_mask(set));

  ExtremalResult out{0, SetFamily(d, s), true, 0};
  if ((!repeats && k > total) || static_cast<long>(r) * k > d) {
    out.size = total;
    out.witness = SetFamily(d, s, universe_sets);
    return out;
  }

  // Would adding `cand` to `chosen` create k matchable members? Grows matchable collections
  // containing cand; Hall failure is inherited by supersets, so such branches are cut.
  std::vector<detail::Mask> collection;
  auto completes = [&](auto&& self, const std::vector<int>& chosen, std::size_t from) -> bool {
    if (static_cast<int>(collection.size()) == k) return true;
    for (std::size_t j = from; j < chosen.size(); ++j) {
      collection.push_back(masks[chosen[j]]);
      const bool ok = detail::hall_matchable(collection, r) && self(self, chosen, repeats ? j : j + 1);
      collection.pop_back();
      if (ok) return true;
    }
    return false;
  };
  auto conflicts = [&](const std::vector<int>& chosen, int cand) {
    std::vector<int> pool = chosen;
    if (repeats) pool.push_back(cand);
    collection.assign(1, masks[cand]);
    const bool hit = completes(completes, pool, 0);
    collection.clear();
    return hit;
  };

  const FamilyBounds seed = conjectured_family_bounds(d, s, k, t);
  std::int64_t best = 0;
  std::vector<int> best_members;
  if (seed.best_i > 0) {
    const SetFamily fi = fi_family(d, s, k, t, seed.best_i);
    best = static_cast<std::int64_t>(fi.size());
    for (const auto& m : fi.members()) {
      best_members.push_back(static_cast<int>(std::find(universe_sets.begin(), universe_sets.end(), m) -
                                              universe_sets.begin()));
    }
  }

  std::vector<int> chosen;
  auto search = [&](auto&& self, std::vector<int> candidates) -> void {
    if (++out.nodes > opts.node_budget || (opts.deadline && std::chrono::steady_clock::now() > *opts.deadline)) {
      out.completed = false;
      return;
    }
    if (static_cast<std::int64_t>(chosen.size()) > best) {
      best = static_cast<std::int64_t>(chosen.size());
      best_members = chosen;
    }
    while (!candidates.empty() && out.completed) {
      if (static_cast<std::int64_t>(chosen.size() + candidates.size()) <= best) return;
      const int v = candidates.front();
      candidates.erase(candidates.begin());
      chosen.push_back(v);
      std::vector<int> next;
      for (int c : candidates) {
        if (!conflicts(chosen, c)) next.push_back(c);
      }
      self(self, std::move(next));
      chosen.pop_back();
    }
  };

  if (!conflicts({}, 0)) {
    chosen.push_back(0);
    std::vector<int> candidates;
    for (int c = 1; c < static_cast<int>(total); ++c) {
      if (!conflicts(chosen, c)) candidates.push_back(c);
    }
    search(search, std::move(candidates));
  }

  out.size = best;
  std::vector<IndexSet> members;
  for (int idx : best_members) members.push_back(universe_sets[idx]);
  out.witness = SetFamily(d, s, std::move(members));
  return out;
}

}  // namespace lowrankbp::combinat

#endif  // LOWRANKBP_COMBINAT_EXTREMAL_HPP
