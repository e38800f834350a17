#ifndef LOWRANKBP_COMBINAT_PACKING_HPP
#define LOWRANKBP_COMBINAT_PACKING_HPP

#include "lowrankbp/combinat/finite_field.hpp"
#include "lowrankbp/combinat/set_family.hpp"

#include <optional>

namespace lowrankbp::combinat {

/// Largest field order q (prime or 2^m, m <= 16) with s <= q and s q <= d.
inline std::optional<std::uint32_t> choose_field_order(int d, int s) {
  if (s < 1 || d < 1) return std::nullopt;
  const long cap = std::min<long>(d / s, 65536);
  for (long q = cap; q >= std::max(2, s); --q) {
    const auto uq = static_cast<std::uint32_t>(q);
    if ((uq & (uq - 1)) == 0 || is_prime(uq)) return uq;
  }
  return std::nullopt;
}

/// Polynomial packing: for every polynomial p of degree < delta over F_q, the set
/// {(i, p(x_i)) : i in [s]} with x_i the i-th field element, mapped into [d] by
/// (i, y) -> (i - 1) q + y + 1. Two members share at most delta - 1 points.
inline SetFamily build_packing(int d, int s, int delta, std::optional<std::uint32_t> field_order = std::nullopt) {
  if (delta < 1 || delta > s) throw Error(ErrorKind::InvalidArgument, "packing needs 1 <= delta <= s");
  const auto q = field_order ? field_order : choose_field_order(d, s);
  if (!q || *q < static_cast<std::uint32_t>(s) || static_cast<long>(*q) * s > d) {
    throw Error(ErrorKind::NoValidQ, "no field order q with s <= q and s q <= d");
  }
  const GFContext field = GFContext::of_order(*q);
  double count = 1.0;
  for (int i = 0; i < delta; ++i) count *= *q;
  if (count > 4194304.0) throw Error(ErrorKind::TooLarge, "packing would have more than 2^22 members");

  SetFamily family(d, s);
  std::vector<GFContext::Element> coeffs(delta, 0);
  std::vector<int> elems(s);
  for (long index = 0; index < static_cast<long>(count); ++index) {
    long rest = index;
    for (int c = 0; c < delta; ++c) {
      coeffs[c] = static_cast<GFContext::Element>(rest % *q);
      rest /= *q;
    }
    for (int i = 0; i < s; ++i) {
      const auto x = static_cast<GFContext::Element>(i);
      GFContext::Element y = 0;
      for (int c = delta - 1; c >= 0; --c) y = field.add(field.mul(y, x), coeffs[c]);
      elems[i] = i * static_cast<int>(*q) + static_cast<int>(y) + 1;
    }
    family.add(IndexSet(d, elems), true);  // distinct polynomials of degree < delta <= s differ somewhere
  }
  return family;
}

/// True iff every two members intersect in at most delta - 1 elements.
inline bool verify_packing(const SetFamily& family, int delta) {
  const auto& m = family.members();
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = a + 1; b < m.size(); ++b) {
      if (static_cast<int>(intersection_size(m[a], m[b])) > delta - 1) return false;
    }
  }
  return true;
}

}  // namespace lowrankbp::combinat

#endif  // LOWRANKBP_COMBINAT_PACKING_HPP
