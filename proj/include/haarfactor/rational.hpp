#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace haarfactor {

// Exact rational arithmetic for all norm, measure, and certificate values.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// 2^e as an exact rational; e may be negative.
inline Rational pow2(int e) {
  Rational r;
  if (e >= 0) {
    mpq_mul_2exp(r.get_mpq_t(), Rational(1).get_mpq_t(), static_cast<unsigned long>(e));
  } else {
    mpq_div_2exp(r.get_mpq_t(), Rational(1).get_mpq_t(), static_cast<unsigned long>(-e));
  }
  return r;
}

inline Rational pow_rational(const Rational& base, unsigned e) {
  Rational acc(1), b = base;
  while (e > 0) {
    if (e & 1u) acc *= b;
    b *= b;
    e >>= 1u;
  }
  return acc;
}

// Parses "p/q" or "p" in base 10; canonicalizes; rejects zero denominators.
inline Rational parse_rational(const std::string& text) {
  Rational r;
  if (text.empty() || mpq_set_str(r.get_mpq_t(), text.c_str(), 10) != 0) {
    throw std::invalid_argument("invalid rational literal: '" + text + "'");
  }
  if (mpz_sgn(mpq_denref(r.get_mpq_t())) == 0) {
    throw std::invalid_argument("zero denominator in rational literal: '" + text + "'");
  }
  r.canonicalize();
  return r;
}

inline std::string rational_to_string(const Rational& r) { return r.get_str(); }

inline double to_double(const Rational& r) { return r.get_d(); }

// Exact enclosure lo <= sqrt(v) <= hi with hi - lo relatively tiny.
struct RootEnclosure {
  Rational lo;
  Rational hi;
};

// Encloses sqrt(v) for v >= 0 using exact integer square roots:
// sqrt(p/q) = sqrt(p*q*4^k) / (q*2^k), with k scaled so the integer root
// carries at least `bits` significant bits.
inline RootEnclosure sqrt_enclosure(const Rational& v, unsigned bits = 80) {
  if (sgn(v) < 0) throw std::invalid_argument("sqrt_enclosure: negative input");
  if (sgn(v) == 0) return {Rational(0), Rational(0)};
  Integer p = v.get_num();
  Integer q = v.get_den();
  Integer t = p * q;
  std::size_t len = mpz_sizeinbase(t.get_mpz_t(), 2);
  unsigned long k = 0;
  if (len < 2 * bits) k = static_cast<unsigned long>((2 * bits - len + 1) / 2);
  Integer scaled;
  mpz_mul_2exp(scaled.get_mpz_t(), t.get_mpz_t(), 2 * k);
  Integer s;
  mpz_sqrt(s.get_mpz_t(), scaled.get_mpz_t());
  Integer den;
  mpz_mul_2exp(den.get_mpz_t(), q.get_mpz_t(), k);
  Rational lo(s, den), hi(s + 1, den);
  lo.canonicalize();
  hi.canonicalize();
  return {lo, hi};
}

// Largest convenient rational t with t <= 1/sqrt(v); requires v > 0.
inline Rational floor_inv_sqrt(const Rational& v, unsigned bits = 80) {
  if (sgn(v) <= 0) throw std::invalid_argument("floor_inv_sqrt: input must be positive");
  return sqrt_enclosure(Rational(1) / v, bits).lo;
}

}  // namespace haarfactor
