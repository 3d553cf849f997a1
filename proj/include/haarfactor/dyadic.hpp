#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "haarfactor/rational.hpp"

namespace haarfactor {

// Hard sanity cap on dyadic generations; working depths are far below this,
// but materialized leaf arrays at 2^n entries must never explode by accident.
inline constexpr int kMaxGeneration = 24;

// Half-open dyadic interval [k*2^-n, (k+1)*2^-n), 0 <= k < 2^n.
struct DyadicInterval {
  int n = 0;
  std::int64_t k = 0;

  friend auto operator<=>(const DyadicInterval&, const DyadicInterval&) = default;
};

// Breadth-first position: ordering([0,1)) = 0, then level by level, left to right.
std::uint64_t ordering(const DyadicInterval& iv);
DyadicInterval from_ordering(std::uint64_t pos);

DyadicInterval make_interval(int n, std::int64_t k);  // validates 0 <= k < 2^n
inline DyadicInterval unit_interval() { return {0, 0}; }

inline Rational measure(const DyadicInterval& iv) { return pow2(-iv.n); }
inline Rational left_endpoint(const DyadicInterval& iv) { return Rational(iv.k) * pow2(-iv.n); }

inline DyadicInterval left_half(const DyadicInterval& iv) { return {iv.n + 1, 2 * iv.k}; }
inline DyadicInterval right_half(const DyadicInterval& iv) { return {iv.n + 1, 2 * iv.k + 1}; }
DyadicInterval parent(const DyadicInterval& iv);  // requires n >= 1
inline bool is_left_child(const DyadicInterval& iv) { return (iv.k & 1) == 0; }

enum class IntervalRelation { equal, first_contains_second, second_contains_first, disjoint };

// a contains b (as sets, equality included).
inline bool contains(const DyadicInterval& a, const DyadicInterval& b) {
  return a.n <= b.n && (b.k >> (b.n - a.n)) == a.k;
}
IntervalRelation relation(const DyadicInterval& a, const DyadicInterval& b);
inline bool disjoint(const DyadicInterval& a, const DyadicInterval& b) {
  return relation(a, b) == IntervalRelation::disjoint;
}

// All 2^m intervals of generation m, left to right; m is checked against the
// caller's depth budget and the global cap.
std::vector<DyadicInterval> level_grid(int m, int depth_budget = kMaxGeneration);

// Number of intervals in the full tree of the given depth: 2^(depth+1) - 1.
std::uint64_t tree_size(int depth);

}  // namespace haarfactor
