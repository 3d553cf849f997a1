#pragma once

#include <string>
#include <vector>

#include "haarfactor/dyadic.hpp"

namespace haarfactor {

// One horizontal band of the figure: a labeled collection of intervals drawn
// to scale inside [0, 1).
struct FigureRow {
  std::string label;
  std::vector<DyadicInterval> intervals;
};

// Deterministic SVG: stacked interval rows on a common unit-width axis.  All
// coordinates are exact integers (unit length 2^kMaxGeneration), so equal
// inputs produce byte-identical output.
std::string render_interval_rows(const std::vector<FigureRow>& rows);

}  // namespace haarfactor
