#pragma once

#include <set>
#include <string>
#include <vector>

#include "haarfactor/block_basis.hpp"
#include "haarfactor/operator_matrix.hpp"

namespace haarfactor {

enum class Side { left, right };

// The level-m cover of the chosen halves of the parent blocks: all intervals
// of generation m inside the left (resp. right) half of some parent.  Total
// measure is half the parent union's; throws when m is too small for the
// cover to be exact.
std::vector<DyadicInterval> gamlen_gaudet_children(
    const std::vector<DyadicInterval>& parent_blocks, Side side, int m);

// The off-diagonal interaction functional X(eps) = sum_{K0 != K1 in F}
// eps_{K0} eps_{K1} <r_{K0}, h_{K1}> whose average over signs is zero;
// choose_signs fixes signs one at a time (ordering order, ties -> +1) so the
// conditional average never drops, guaranteeing X(eps) >= 0.
SignAssignment choose_signs(const OperatorMatrix& T, const std::vector<DyadicInterval>& F);
Rational interaction_functional(const OperatorMatrix& T, const std::vector<DyadicInterval>& F,
                                const SignAssignment& signs);

// Smallest candidate level m whose sign-uniform interaction majorant
// sum_{j} sum_{K in cover(m)} |<T b_j, h_K>| fits the budget.
struct FrequencySelection {
  bool ok = false;
  int m = -1;
  Rational achieved = Rational(0);  // majorant value at the selected level
  Rational best_value = Rational(0);  // minimal majorant over candidates (when !ok)
  int best_m = -1;
};
FrequencySelection select_frequency(const OperatorMatrix& T,
                                    const std::vector<HaarVector>& prior_blocks,
                                    const std::set<int>& candidate_levels,
                                    const std::vector<DyadicInterval>& parent_blocks, Side side,
                                    const Rational& budget, Exec mode = Exec::automatic);

// Subset of levels whose pairing against b is certified small: the integral
// norm of the level projection of the adjoint vector bounds the pairing sup.
// Tries admitting every level, then the largest prefix in increasing order of
// exact per-level contribution, then a round-robin pigeonhole split into
// ceil(norm_bound^2/eta^2) groups.
struct SieveSelection {
  bool ok = false;
  std::set<int> lambda;
  Rational certified_hi = Rational(0);  // upper enclosure of the certifying norm
  Rational achieved_min = Rational(0);  // best certified value seen (when !ok)
};
SieveSelection sieve_select(const OperatorMatrix& T, const HaarVector& b,
                            const std::set<int>& available_levels, const Rational& budget,
                            const Rational& eta, Exec mode = Exec::automatic);

struct StepRecord {
  DyadicInterval index;        // I with breadth-first position i
  int frequency = 0;           // m_i
  Rational predecessor_sum;    // sum_{j<i} |<T b_j, b_i>|
  Rational predecessor_budget; // eta 4^{-i} ||b_i||_2^2
  Rational diagonal_value;     // <T b_i, b_i>
  Rational diagonal_floor;     // delta ||b_i||_2^2
  bool diagonal_enforced = true;  // false when delta = 0 (floor carries no content)
  Rational future_hi;          // certified bound on the step's future pairings
  Rational future_budget;      // eta 4^{-i} ||b_i||_2^2
};

struct DiagonalizationCertificate {
  Rational eta;
  Rational delta;
  int depth = 0;        // operator depth N
  int index_depth = 0;  // indices range over the full tree of this depth
  bool feasible = false;
  std::vector<StepRecord> per_index;            // in breadth-first index order
  std::vector<std::vector<int>> lambda_sets;    // lambda_sets[i] = levels after step i
  std::string scope_note;
};

struct InfeasibilityReport {
  std::string stage;  // "select_frequency" or "sieve_select"
  std::string detail;
  DyadicInterval index;
  Rational achieved;
  Rational budget;
  int needed_depth_hint = 0;
};

struct DiagonalizationResult {
  bool ok = false;
  BlockBasis basis;
  DiagonalSigns sigma;  // diagonal sign normalization applied before building
  DiagonalizationCertificate certificate;
  InfeasibilityReport infeasibility;  // meaningful when !ok
};

// Finite-budget inductive construction: walks the index tree breadth-first,
// building one block per index at a fresh frequency, choosing signs so the
// diagonal keeps its floor, and sieving the remaining levels so future
// pairings are certified small.  delta = 0 is admitted (the diagonal floor
// then carries no content and no sign normalization is applied).
DiagonalizationResult quasi_diagonalize(const OperatorMatrix& T, const Rational& delta,
                                        const Rational& eta, int index_depth,
                                        Exec mode = Exec::automatic);

}  // namespace haarfactor
