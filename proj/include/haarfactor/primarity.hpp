#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "haarfactor/block_basis.hpp"
#include "haarfactor/dyadic.hpp"
#include "haarfactor/exec.hpp"
#include "haarfactor/factorization.hpp"
#include "haarfactor/jones.hpp"
#include "haarfactor/operator_matrix.hpp"
#include "haarfactor/rational.hpp"

namespace haarfactor {

enum class BlockColor { T_large, C_large };

const char* to_string(BlockColor color);

// Block basis split by which half of the pigeonhole identity
// <T b, b> + <(Id-T) b, b> = |b|_2^2 each block lands in.
struct ColoredBlocks {
  BlockBasis basis;
  std::map<DyadicInterval, BlockColor> colors;
  BlockColor chosen = BlockColor::T_large;  // preselected extraction color
};

// Exact rational comparisons; a tie (both pairings equal half the norm)
// is colored T_large.  `chosen` is initialized to the color carrying the
// larger total index measure, T_large on ties.
ColoredBlocks color_blocks(const OperatorMatrix& T, const BlockBasis& basis);

// Raised when no dyadic subtree of the requested depth fits inside the color
// class; carries the deepest depth that does fit.
struct SubtreeInfeasible : std::runtime_error {
  int requested;
  int achievable;
  SubtreeInfeasible(int requested_depth, int achievable_depth);
};

// Deepest selection the color class supports (0 = a single collection).
// Returns -1 when the class is empty.
int max_selection_depth(const ColoredBlocks& colored, BlockColor color);

// Measure-based subtree extraction inside colored.chosen: index I of the
// output carries a collection of block indices, all of the chosen color;
// left/right children partition the left/right halves of every member.
// The result satisfies the four compatibility conditions with constant 1.
// Throws SubtreeInfeasible when the class cannot fill the requested depth.
IntervalFamily gg_select(const ColoredBlocks& colored, int index_depth);

// Id - T on the full tree of T's depth, with a certified norm bound attached.
OperatorMatrix complement_operator(const OperatorMatrix& T);

enum class PrimaryChoice { T_side, complement_side };

const char* to_string(PrimaryChoice choice);

struct PrimaryResult {
  bool ok = false;
  Rational eta;             // requested tolerance (bound target 2 + eta)
  int index_depth = 0;      // requested selection depth
  PrimaryChoice choice = PrimaryChoice::T_side;
  // Diagnostics for the depth trade-off: deepest selection each color
  // supported under this operator's coloring.
  int t_large_depth = -1;
  int c_large_depth = -1;
  IntervalFamily selection;        // block-index collections, chosen color
  IntervalFamily composed_family;  // pooled Haar intervals after reiteration
  Rational composed_kappa;
  Rational delta_eff;  // min_I <H c_I, c_I> / |c_I|_2^2, certified >= floor used
  FactorizationResult factorization;  // diagonalization field holds the zero-floor run
  InfeasibilityReport infeasibility;  // set when ok = false
};

// Zero-floor diagonalization, coloring, subtree extraction, reiteration, and
// the factorization pipeline against H = T or Id - T; on success the product
// bound satisfies norm_product_bound <= 2 + eta.
PrimaryResult factor_primary(const OperatorMatrix& T, const Rational& eta, int index_depth,
                             const Rational& tol = pow2(-40), Exec mode = Exec::automatic);

// Dyadic intervals of depth <= depth contained in [1 - 2^-k, 1 - 2^-(k+1)),
// the k-th band of the classical direct-sum decomposition of the unit
// interval; enumeration utility only.
std::vector<DyadicInterval> band_collection(int k, int depth);

}  // namespace haarfactor
