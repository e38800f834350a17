#ifndef LOWRANKBP_COMBINAT_MATCHING_HPP
#define LOWRANKBP_COMBINAT_MATCHING_HPP

#include "lowrankbp/core.hpp"

#include <limits>
#include <queue>
#include <vector>

namespace lowrankbp::combinat {

/// Maximum bipartite matching by Hopcroft-Karp. Left vertices 0..L-1, right vertices 0..R-1.
class HopcroftKarp {
 public:
  HopcroftKarp(int left, int right) : adj_(left), match_left_(left, -1), match_right_(right, -1), dist_(left) {}

  void add_edge(int l, int r) { adj_[l].push_back(r); }

  int run() {
    int size = 0;
    while (bfs()) {
      for (int l = 0; l < static_cast<int>(adj_.size()); ++l) {
        if (match_left_[l] < 0 && dfs(l)) ++size;
      }
    }
    return size;
  }

  /// Right partner of l, or -1.
  int partner(int l) const { return match_left_[l]; }

 private:
  static constexpr int kInf = std::numeric_limits<int>::max();

  bool bfs() {
    std::queue<int> frontier;
    bool reachable_free = false;
    for (int l = 0; l < static_cast<int>(adj_.size()); ++l) {
      dist_[l] = match_left_[l] < 0 ? 0 : kInf;
      if (dist_[l] == 0) frontier.push(l);
    }
    while (!frontier.empty()) {
      const int l = frontier.front();
      frontier.pop();
      for (int r : adj_[l]) {
        const int next = match_right_[r];
        if (next < 0) {
          reachable_free = true;
        } else if (dist_[next] == kInf) {
          dist_[next] = dist_[l] + 1;
          frontier.push(next);
        }
      }
    }
    return reachable_free;
  }

  bool dfs(int l) {
    for (int r : adj_[l]) {
      const int next = match_right_[r];
      if (next < 0 || (dist_[next] == dist_[l] + 1 && dfs(next))) {
        match_left_[l] = r;
        match_right_[r] = l;
        return true;
      }
    }
    dist_[l] = kInf;
    return false;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> match_left_;
  std::vector<int> match_right_;
  std::vector<int> dist_;
};

struct MatchingResult {
  bool perfect = false;
  std::vector<IndexSet> witness;  ///< pairwise disjoint T_i ⊆ S_i with |T_i| = s, when perfect
};

/// Whether pairwise disjoint s-subsets T_i ⊆ S_i exist. Each set is copied s times on the left
/// of a bipartite graph against the ground elements; a perfect s-matching is a matching of size n s.
inline MatchingResult has_perfect_matching(const std::vector<IndexSet>& sets, int s) {
  if (s < 0) throw Error(ErrorKind::InvalidArgument, "matching size must be non-negative");
  const long left = static_cast<long>(sets.size()) * s;
  if (left > 10000) throw Error(ErrorKind::TooLarge, "n s exceeds 10^4");
  int universe = 0;
  for (const auto& set : sets) universe = std::max(universe, set.universe());

  MatchingResult out;
  for (const auto& set : sets) {
    if (static_cast<int>(set.size()) < s) return out;
  }
  HopcroftKarp hk(static_cast<int>(left), universe);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (int c = 0; c < s; ++c) {
      for (int e : sets[i]) hk.add_edge(static_cast<int>(i) * s + c, e - 1);
    }
  }
  if (hk.run() != left) return out;
  out.perfect = true;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    std::vector<int> chosen;
    for (int c = 0; c < s; ++c) chosen.push_back(hk.partner(static_cast<int>(i) * s + c) + 1);
    out.witness.emplace_back(sets[i].universe(), std::move(chosen));
  }
  return out;
}

}  // namespace lowrankbp::combinat

#endif  // LOWRANKBP_COMBINAT_MATCHING_HPP
