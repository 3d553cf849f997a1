#include "haarfactor/dyadic.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace haarfactor {

DyadicInterval make_interval(int n, std::int64_t k) {
  if (n < 0 || n > kMaxGeneration) {
    throw std::invalid_argument("dyadic generation out of range: n = " + std::to_string(n));
  }
  if (k < 0 || k >= (std::int64_t{1} << n)) {
    throw std::invalid_argument("dyadic position out of range: n = " + std::to_string(n) +
                                ", k = " + std::to_string(k));
  }
  return {n, k};
}

std::uint64_t ordering(const DyadicInterval& iv) {
  return (std::uint64_t{1} << iv.n) - 1 + static_cast<std::uint64_t>(iv.k);
}

DyadicInterval from_ordering(std::uint64_t pos) {
  const std::uint64_t p = pos + 1;  // 1-based heap index
  const int n = std::bit_width(p) - 1;
  if (n > kMaxGeneration) {
    throw std::invalid_argument("ordering position exceeds generation cap");
  }
  return {n, static_cast<std::int64_t>(p - (std::uint64_t{1} << n))};
}

DyadicInterval parent(const DyadicInterval& iv) {
  if (iv.n == 0) throw std::invalid_argument("unit interval has no parent");
  return {iv.n - 1, iv.k >> 1};
}

IntervalRelation relation(const DyadicInterval& a, const DyadicInterval& b) {
  if (a == b) return IntervalRelation::equal;
  if (contains(a, b)) return IntervalRelation::first_contains_second;
  if (contains(b, a)) return IntervalRelation::second_contains_first;
  return IntervalRelation::disjoint;
}

std::vector<DyadicInterval> level_grid(int m, int depth_budget) {
  if (m < 0 || m > depth_budget || m > kMaxGeneration) {
    throw std::invalid_argument("level_grid: generation " + std::to_string(m) +
                                " outside depth budget");
  }
  std::vector<DyadicInterval> grid;
  grid.reserve(std::size_t{1} << m);
  for (std::int64_t k = 0; k < (std::int64_t{1} << m); ++k) grid.push_back({m, k});
  return grid;
}

std::uint64_t tree_size(int depth) {
  if (depth < 0 || depth > kMaxGeneration) throw std::invalid_argument("tree_size: bad depth");
  return (std::uint64_t{1} << (depth + 1)) - 1;
}

}  // namespace haarfactor
