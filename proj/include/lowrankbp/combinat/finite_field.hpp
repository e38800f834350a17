#ifndef LOWRANKBP_COMBINAT_FINITE_FIELD_HPP
#define LOWRANKBP_COMBINAT_FINITE_FIELD_HPP

#include "lowrankbp/core.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace lowrankbp::combinat {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t f = 2; f * f <= n; ++f) {
    if (n % f == 0) return false;
  }
  return true;
}

/// Irreducible polynomials over GF(2) of degree m = 1..16, bit i = coefficient of x^i.
inline constexpr std::array<std::uint32_t, 17> kIrreducible = {
    0x0,   0x3,   0x7,   0xB,    0x13,   0x25,   0x43,   0x83,   0x11D,
    0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B};

/// Arithmetic in GF(p) or GF(2^m). Elements are the integers 0..q-1: residues for GF(p),
/// coefficient bit vectors for GF(2^m).
class GFContext {
 public:
  using Element = std::uint32_t;

  static GFContext prime(std::uint32_t p) {
    if (!is_prime(p)) throw Error(ErrorKind::InvalidArgument, std::to_string(p) + " is not prime");
    if (p > 65536) throw Error(ErrorKind::TooLarge, "prime fields are limited to p <= 65536");
    return GFContext(p, 0);
  }

  static GFContext binary(int m) {
    if (m < 1 || m > 16) throw Error(ErrorKind::InvalidArgument, "GF(2^m) needs 1 <= m <= 16");
    return GFContext(1u << m, m);
  }

  /// The field with q elements, for q prime or a power of two up to 2^16.
  static GFContext of_order(std::uint32_t q) {
    if (q >= 2 && (q & (q - 1)) == 0) {
      int m = 0;
      while ((1u << m) < q) ++m;
      return binary(m);
    }
    return prime(q);
  }

  std::uint32_t order() const noexcept { return q_; }
  bool is_binary() const noexcept { return m_ > 0; }
  std::uint32_t modulus() const noexcept { return m_ > 0 ? kIrreducible[m_] : q_; }

  Element add(Element a, Element b) const { return m_ > 0 ? (a ^ b) : (a + b) % q_; }
  Element neg(Element a) const { return m_ > 0 ? a : (q_ - a) % q_; }
  Element sub(Element a, Element b) const { return add(a, neg(b)); }

  Element mul(Element a, Element b) const {
    if (m_ == 0) return static_cast<Element>((static_cast<std::uint64_t>(a) * b) % q_);
    std::uint32_t acc = 0;
    std::uint32_t x = a;
    const std::uint32_t poly = kIrreducible[m_];
    for (std::uint32_t y = b; y != 0; y >>= 1) {
      if (y & 1u) acc ^= x;
      x <<= 1;
      if (x & q_) x ^= poly;
    }
    return acc;
  }

  Element pow(Element a, std::uint64_t e) const {
    Element result = 1 % q_;
    while (e > 0) {
      if (e & 1u) result = mul(result, a);
      a = mul(a, a);
      e >>= 1;
    }
    return result;
  }

  /// a^(q-2), the multiplicative inverse.
  Element inv(Element a) const {
    if (a == 0) throw Error(ErrorKind::InvalidArgument, "zero has no inverse");
    return pow(a, q_ - 2);
  }

 private:
  GFContext(std::uint32_t q, int m) : q_(q), m_(m) {}

  std::uint32_t q_;
  int m_;  // 0 for prime fields
};

}  // namespace lowrankbp::combinat

#endif  // LOWRANKBP_COMBINAT_FINITE_FIELD_HPP
