#pragma once

#include <vector>

#include "haarfactor/dyadic.hpp"

namespace haarfactor {

// Finite union of dyadic intervals in canonical form: the unique sorted list
// of pairwise-disjoint maximal dyadic intervals (sibling pairs merged into
// their parent, contained intervals dropped).
class DyadicSet {
 public:
  DyadicSet() = default;
  static DyadicSet from_intervals(std::vector<DyadicInterval> parts);
  static DyadicSet single(const DyadicInterval& iv) { return from_intervals({iv}); }

  const std::vector<DyadicInterval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  Rational set_measure() const;

  friend bool operator==(const DyadicSet&, const DyadicSet&) = default;
  friend bool operator<(const DyadicSet& a, const DyadicSet& b) { return a.parts_ < b.parts_; }

 private:
  std::vector<DyadicInterval> parts_;
};

DyadicSet intersect(const DyadicSet& a, const DyadicSet& b);
bool subset_of(const DyadicSet& a, const DyadicSet& b);  // a subseteq b
bool disjoint(const DyadicSet& a, const DyadicSet& b);

}  // namespace haarfactor
