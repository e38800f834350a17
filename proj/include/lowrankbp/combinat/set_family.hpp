#ifndef LOWRANKBP_COMBINAT_SET_FAMILY_HPP
#define LOWRANKBP_COMBINAT_SET_FAMILY_HPP

#include "lowrankbp/core.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lowrankbp::combinat {

/// Duplicate-free family of s-subsets of [d].
class SetFamily {
 public:
  SetFamily(int universe, int set_size) : universe_(universe), set_size_(set_size) {
    if (universe < 0 || set_size < 0 || set_size > universe) {
      throw Error(ErrorKind::InvalidArgument, "set family needs 0 <= s <= d");
    }
  }

  SetFamily(int universe, int set_size, std::vector<IndexSet> members) : SetFamily(universe, set_size) {
    for (auto& m : members) add(std::move(m));
  }

  /// `known_distinct` skips the linear duplicate scan for callers that guarantee distinctness.
  void add(IndexSet set, bool known_distinct = false) {
    if (set.universe() != universe_ || static_cast<int>(set.size()) != set_size_) {
      throw Error(ErrorKind::InvalidArgument, "member has the wrong universe or size");
    }
    if (!known_distinct && std::find(members_.begin(), members_.end(), set) != members_.end()) {
      throw Error(ErrorKind::InvalidArgument, "duplicate member");
    }
    members_.push_back(std::move(set));
  }

  int universe() const noexcept { return universe_; }
  int set_size() const noexcept { return set_size_; }
  std::size_t size() const noexcept { return members_.size(); }
  const std::vector<IndexSet>& members() const noexcept { return members_; }
  const IndexSet& operator[](std::size_t i) const { return members_[i]; }

 private:
  int universe_;
  int set_size_;
  std::vector<IndexSet> members_;
};

/// Header "d s count", then one member per line as space-separated 1-based indices.
inline void write_family(std::ostream& out, const SetFamily& family) {
  out << family.universe() << ' ' << family.set_size() << ' ' << family.size() << '\n';
  for (const auto& m : family.members()) {
    for (std::size_t i = 0; i < m.size(); ++i) out << (i ? " " : "") << m[i];
    out << '\n';
  }
}

inline SetFamily read_family(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw Error(ErrorKind::ParseError, "missing 'd s count' header");
  std::istringstream header(line);
  int d = 0;
  int s = 0;
  long count = 0;
  if (!(header >> d >> s >> count) || count < 0) throw Error(ErrorKind::ParseError, "bad header: " + line);
  SetFamily family(d, s);
  for (long i = 0; i < count; ++i) {
    if (!next_line()) throw Error(ErrorKind::ParseError, "fewer members than the header promises");
    std::istringstream row(line);
    std::vector<int> elems;
    int e = 0;
    while (row >> e) elems.push_back(e);
    if (!row.eof()) throw Error(ErrorKind::ParseError, "non-integer token in: " + line);
    try {
      family.add(IndexSet(d, std::move(elems)));
    } catch (const Error& err) {
      throw Error(ErrorKind::ParseError, std::string("line ") + std::to_string(i + 2) + ": " + err.what());
    }
  }
  return family;
}

}  // namespace lowrankbp::combinat

#endif  // LOWRANKBP_COMBINAT_SET_FAMILY_HPP
