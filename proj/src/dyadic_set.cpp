#include "haarfactor/dyadic_set.hpp"

#include <algorithm>

namespace haarfactor {

namespace {

// Position-first order: by left endpoint, larger interval first on ties.
// With this order any interval contained in an earlier union member follows
// its container directly enough for a single containment sweep.
bool position_less(const DyadicInterval& a, const DyadicInterval& b) {
  const int level = std::max(a.n, b.n);
  const std::int64_t la = a.k << (level - a.n);
  const std::int64_t lb = b.k << (level - b.n);
  if (la != lb) return la < lb;
  return a.n < b.n;
}

}  // namespace

DyadicSet DyadicSet::from_intervals(std::vector<DyadicInterval> parts) {
  DyadicSet out;
  if (parts.empty()) return out;
  std::sort(parts.begin(), parts.end(), position_less);
  // Containment sweep: dyadic intervals are nested or disjoint, and with
  // position-first order a contained interval never precedes its container.
  std::vector<DyadicInterval> kept;
  kept.reserve(parts.size());
  for (const DyadicInterval& iv : parts) {
    if (!kept.empty() && contains(kept.back(), iv)) continue;
    kept.push_back(iv);
  }
  // Sibling merge: a stack fold suffices because a freshly merged parent can
  // only pair up with the interval directly beneath it on the stack.
  std::vector<DyadicInterval> merged;
  merged.reserve(kept.size());
  for (const DyadicInterval& iv : kept) {
    DyadicInterval cur = iv;
    while (!merged.empty() && merged.back().n == cur.n && (cur.k & 1) == 1 &&
           merged.back().k == cur.k - 1) {
      cur = {cur.n - 1, cur.k >> 1};
      merged.pop_back();
    }
    merged.push_back(cur);
  }
  out.parts_ = std::move(merged);
  return out;
}

Rational DyadicSet::set_measure() const {
  Rational total(0);
  for (const DyadicInterval& iv : parts_) total += measure(iv);
  return total;
}

DyadicSet intersect(const DyadicSet& a, const DyadicSet& b) {
  // Members within each canonical set are disjoint, so each pair contributes
  // the smaller interval when nested and nothing otherwise.
  std::vector<DyadicInterval> pieces;
  std::size_t i = 0, j = 0;
  const auto& pa = a.parts();
  const auto& pb = b.parts();
  auto right_edge = [](const DyadicInterval& iv, int level) {
    return (iv.k + 1) << (level - iv.n);
  };
  while (i < pa.size() && j < pb.size()) {
    const DyadicInterval& x = pa[i];
    const DyadicInterval& y = pb[j];
    if (contains(x, y)) {
      pieces.push_back(y);
      ++j;
      continue;
    }
    if (contains(y, x)) {
      pieces.push_back(x);
      ++i;
      continue;
    }
    const int level = std::max(x.n, y.n);
    if (right_edge(x, level) <= (y.k << (level - y.n))) {
      ++i;
    } else {
      ++j;
    }
  }
  return DyadicSet::from_intervals(std::move(pieces));
}

bool subset_of(const DyadicSet& a, const DyadicSet& b) {
  return intersect(a, b).set_measure() == a.set_measure();
}

bool disjoint(const DyadicSet& a, const DyadicSet& b) { return intersect(a, b).empty(); }

}  // namespace haarfactor
