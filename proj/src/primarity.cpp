#include "haarfactor/primarity.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>

#include "haarfactor/quasi_diag.hpp"

namespace haarfactor {
namespace {

// Feasibility tables over the base block-index tree for one color class.
//   can_root[p][d]: position p is chosen-colored and supports d more
//                   selection levels below it;
//   can_tile[p][d]: the interval at p splits into chosen-colored pieces, each
//                   supporting d more levels.
struct DepthTables {
  int base_depth = 0;
  std::vector<std::vector<char>> can_root;
  std::vector<std::vector<char>> can_tile;
};

DepthTables build_tables(const ColoredBlocks& colored, BlockColor color) {
  DepthTables t;
  const auto& index_set = colored.basis.family.index_set;
  t.base_depth = index_set.empty() ? 0 : index_set.back().n;
  const std::uint64_t span = tree_size(t.base_depth);
  const int max_d = t.base_depth + 1;
  t.can_root.assign(span, std::vector<char>(static_cast<std::size_t>(max_d) + 1, 0));
  t.can_tile = t.can_root;
  for (int d = 0; d <= max_d; ++d) {
    for (std::uint64_t p = span; p-- > 0;) {  // deepest first: children precede parents
      const DyadicInterval iv = from_ordering(p);
      const bool is_chosen = colored.colors.at(iv) == color;
      const bool inner = iv.n < t.base_depth;
      const std::uint64_t lp = inner ? ordering(left_half(iv)) : 0;
      const std::uint64_t rp = inner ? ordering(right_half(iv)) : 0;
      char root_ok;
      if (d == 0) {
        root_ok = is_chosen;
      } else {
        root_ok = is_chosen && inner && t.can_tile[lp][static_cast<std::size_t>(d) - 1] &&
                  t.can_tile[rp][static_cast<std::size_t>(d) - 1];
      }
      t.can_root[p][static_cast<std::size_t>(d)] = root_ok;
      t.can_tile[p][static_cast<std::size_t>(d)] =
          root_ok || (inner && t.can_tile[lp][static_cast<std::size_t>(d)] &&
                      t.can_tile[rp][static_cast<std::size_t>(d)]);
    }
  }
  return t;
}

// Minimal partition of `iv` into colored pieces each supporting d more
// levels; callers guarantee can_tile[iv][d].
void emit_partition(const DepthTables& t, const DyadicInterval& iv, int d,
                    std::vector<DyadicInterval>& out) {
  if (t.can_root[ordering(iv)][static_cast<std::size_t>(d)]) {
    out.push_back(iv);
    return;
  }
  emit_partition(t, left_half(iv), d, out);
  emit_partition(t, right_half(iv), d, out);
}

std::string interval_text(const DyadicInterval& iv) {
  std::ostringstream os;
  os << "[" << iv.k << "/2^" << iv.n << ", " << iv.k + 1 << "/2^" << iv.n << ")";
  return os.str();
}

}  // namespace

OperatorMatrix complement_operator(const OperatorMatrix& T) {
  OperatorMatrix H(T.depth());
  const std::uint64_t span = tree_size(T.depth());
  for (std::uint64_t p = 0; p < span; ++p) {
    const DyadicInterval iv = from_ordering(p);
    H.set_entry(iv, iv, Rational(1) - T.diagonal_entry(iv));
  }
  for (const auto& [col, column] : T.columns()) {
    for (const auto& [row, value] : column) {
      if (row != col) H.set_entry(row, col, -value);
    }
  }
  H.set_norm_bound(certified_norm_bound(H), "estimated");
  return H;
}

const char* to_string(BlockColor color) {
  return color == BlockColor::T_large ? "T_large" : "C_large";
}

const char* to_string(PrimaryChoice choice) {
  return choice == PrimaryChoice::T_side ? "T" : "Id_minus_T";
}

ColoredBlocks color_blocks(const OperatorMatrix& T, const BlockBasis& basis) {
  ColoredBlocks colored;
  colored.basis = basis;
  Rational mass_t(0), mass_c(0);
  for (const auto& index : basis.family.index_set) {
    const HaarVector& b = basis.vectors.at(index);
    const Rational pairing = inner_product(T.apply(b), b);
    // <T b, b> >= |b|^2/2, ties included; the complement pairing is the exact
    // remainder, so every block gets at least one valid color.
    const bool t_large = 2 * pairing >= basis.norms_sq.at(index);
    colored.colors.emplace(index, t_large ? BlockColor::T_large : BlockColor::C_large);
    (t_large ? mass_t : mass_c) += measure(index);
  }
  colored.chosen = mass_t >= mass_c ? BlockColor::T_large : BlockColor::C_large;
  return colored;
}

SubtreeInfeasible::SubtreeInfeasible(int requested_depth, int achievable_depth)
    : std::runtime_error("color class supports selection depth " +
                         std::to_string(achievable_depth) + ", requested " +
                         std::to_string(requested_depth)),
      requested(requested_depth),
      achievable(achievable_depth) {}

int max_selection_depth(const ColoredBlocks& colored, BlockColor color) {
  const DepthTables t = build_tables(colored, color);
  int best = -1;
  for (std::size_t p = 0; p < t.can_root.size(); ++p) {
    for (int d = t.base_depth; d > best; --d) {
      if (t.can_root[p][static_cast<std::size_t>(d)]) {
        best = d;
        break;
      }
    }
  }
  return best;
}

IntervalFamily gg_select(const ColoredBlocks& colored, int index_depth) {
  if (index_depth < 0) throw std::invalid_argument("index_depth must be nonnegative");
  const DepthTables t = build_tables(colored, colored.chosen);

  // Root: first breadth-first position that carries the whole subtree.
  std::uint64_t root_pos = t.can_root.size();
  for (std::uint64_t p = 0; p < t.can_root.size(); ++p) {
    if (index_depth <= t.base_depth &&
        t.can_root[p][static_cast<std::size_t>(index_depth)]) {
      root_pos = p;
      break;
    }
  }
  if (root_pos == t.can_root.size()) {
    throw SubtreeInfeasible(index_depth, max_selection_depth(colored, colored.chosen));
  }

  IntervalFamily family;
  const std::uint64_t span = tree_size(index_depth);
  for (std::uint64_t p = 0; p < span; ++p) family.index_set.push_back(from_ordering(p));
  family.blocks[unit_interval()] = {from_ordering(root_pos)};
  // Each member's halves are partitioned into colored pieces for the two
  // children, exactly as the cover construction splits block halves.
  for (std::uint64_t p = 0; p < span; ++p) {
    const DyadicInterval index = from_ordering(p);
    if (index.n == index_depth) break;
    const int d_child = index_depth - index.n - 1;
    std::vector<DyadicInterval> left_pool, right_pool;
    for (const DyadicInterval& member : family.blocks.at(index)) {
      emit_partition(t, left_half(member), d_child, left_pool);
      emit_partition(t, right_half(member), d_child, right_pool);
    }
    family.blocks[left_half(index)] = std::move(left_pool);
    family.blocks[right_half(index)] = std::move(right_pool);
  }
  return family;
}

PrimaryResult factor_primary(const OperatorMatrix& T, const Rational& eta, int index_depth,
                             const Rational& tol, Exec mode) {
  if (eta <= 0) throw std::invalid_argument("eta must be positive");
  if (index_depth < 0) throw std::invalid_argument("index_depth must be nonnegative");

  PrimaryResult result;
  result.eta = eta;
  result.index_depth = index_depth;
  const int depth = T.depth();

  // Deepest base index tree whose step count fits the frequency budget:
  // tree_size(d) blocks need tree_size(d) - 1 fresh positive frequencies.
  int base_depth = 0;
  while (tree_size(base_depth + 1) - 1 <= static_cast<std::uint64_t>(depth)) ++base_depth;
  if (index_depth > base_depth) {
    result.infeasibility.stage = "index_depth";
    result.infeasibility.detail =
        "requested selection depth exceeds the base index tree this operator depth supports";
    result.infeasibility.achieved = Rational(base_depth);
    result.infeasibility.budget = Rational(index_depth);
    result.infeasibility.needed_depth_hint =
        static_cast<int>(tree_size(std::min(index_depth, kMaxGeneration))) - 1;
    return result;
  }

  // Zero floor: the diagonal hypothesis is vacuous and no signs are applied;
  // the interaction budgets are tightened so both colors stay factorable.
  const Rational eta_diag = eta / 64;
  DiagonalizationResult diag = quasi_diagonalize(T, Rational(0), eta_diag, base_depth, mode);
  if (!diag.ok) {
    result.infeasibility = diag.infeasibility;
    return result;
  }

  ColoredBlocks colored = color_blocks(T, diag.basis);
  result.t_large_depth = max_selection_depth(colored, BlockColor::T_large);
  result.c_large_depth = max_selection_depth(colored, BlockColor::C_large);
  const int chosen_depth =
      colored.chosen == BlockColor::T_large ? result.t_large_depth : result.c_large_depth;
  const int other_depth =
      colored.chosen == BlockColor::T_large ? result.c_large_depth : result.t_large_depth;
  if (chosen_depth < index_depth) {
    if (other_depth >= index_depth) {
      colored.chosen = colored.chosen == BlockColor::T_large ? BlockColor::C_large
                                                             : BlockColor::T_large;
    } else {
      result.infeasibility.stage = "gg_select";
      result.infeasibility.detail =
          "neither color class supports a full subtree at the requested depth";
      result.infeasibility.achieved = Rational(std::max(chosen_depth, other_depth));
      result.infeasibility.budget = Rational(index_depth);
      // Level-alternating colorings need twice the spacing; harder patterns
      // exist, so always suggest strictly more room than this run had.
      result.infeasibility.needed_depth_hint =
          std::max(static_cast<int>(tree_size(std::min(2 * index_depth, kMaxGeneration))) - 1,
                   depth + 2);
      return result;
    }
  }
  result.choice = colored.chosen == BlockColor::T_large ? PrimaryChoice::T_side
                                                        : PrimaryChoice::complement_side;
  result.selection = gg_select(colored, index_depth);

  SelectorFamily selector{result.selection.index_set, result.selection.blocks};
  ReiterationResult reiterated = reiterate(diag.basis.family, selector, mode);
  if (!reiterated.ok) throw std::logic_error("composed family failed the compatibility check");
  result.composed_family = reiterated.composed;

  BlockBasis composed = build_block_basis(result.composed_family, diag.basis.signs);
  result.composed_kappa = composed.kappa;

  const OperatorMatrix H =
      result.choice == PrimaryChoice::T_side ? T : complement_operator(T);

  // delta_eff = min_I <H c_I, c_I>/|c_I|^2; the coloring pins each block's
  // diagonal at half its norm, so the composed diagonals sit near 1/2 with
  // slack controlled by eta_diag.  Checked before building the frame so a
  // degenerate diagonal becomes a structured report, not an exception.
  DyadicInterval worst_index = unit_interval();
  bool first = true;
  for (const auto& index : composed.family.index_set) {
    const HaarVector& c = composed.vectors.at(index);
    const Rational ratio = inner_product(H.apply(c), c) / composed.norms_sq.at(index);
    if (first || ratio < result.delta_eff) {
      result.delta_eff = ratio;
      worst_index = index;
      first = false;
    }
  }
  if (result.delta_eff <= 0) {
    result.infeasibility.stage = "composed_diagonal";
    result.infeasibility.detail =
        "a composed block lost its diagonal to cross terms at " + interval_text(worst_index);
    result.infeasibility.index = worst_index;
    result.infeasibility.achieved = result.delta_eff;
    result.infeasibility.budget = Rational(1, 2);
    result.infeasibility.needed_depth_hint = depth + 8;
    result.factorization.diagonalization = std::move(diag);
    return result;
  }
  BlockFrame frame = make_block_frame(H, composed);
  const std::size_t n = frame.blocks.size();

  // Exact pairings P_{i,j} = <H c_j, c_i>; no sieve ran for the composed
  // system, so both past and future are bounded by expanded row sums.
  std::vector<std::vector<Rational>> pair(n, std::vector<Rational>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const HaarVector image = H.apply(frame.blocks[j]);
    for (std::size_t i = 0; i < n; ++i) pair[i][j] = inner_product(image, frame.blocks[i]);
  }
  BlockMatrix m(n);
  std::vector<Rational> bounds(n);
  FactorizationResult& fact = result.factorization;
  for (std::size_t i = 0; i < n; ++i) {
    BlockErrorRecord rec;
    rec.index = frame.index_order[i];
    rec.diagonal = pair[i][i];
    rec.past_sum = Rational(0);
    for (std::size_t j = 0; j < i; ++j) rec.past_sum += abs(pair[i][j]);
    rec.future_expanded = Rational(0);
    for (std::size_t j = i + 1; j < n; ++j) rec.future_expanded += abs(pair[i][j]);
    rec.future_direct_hi = rec.future_expanded;
    rec.bound = (rec.past_sum + rec.future_expanded) / abs(pair[i][i]);
    bounds[i] = rec.bound;
    fact.block_errors.push_back(std::move(rec));
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = pair[i][j] / pair[i][i];
  }

  // Contraction over root-leaf index chains of the selection tree.
  Rational max_path_sq(0);
  const std::uint64_t leaves = std::uint64_t{1} << index_depth;
  for (std::uint64_t leaf = 0; leaf < leaves; ++leaf) {
    DyadicInterval iv{index_depth, static_cast<std::int64_t>(leaf)};
    Rational sum(0);
    for (;;) {
      sum += bounds[ordering(iv)] * bounds[ordering(iv)];
      if (iv.n == 0) break;
      iv = parent(iv);
    }
    if (sum > max_path_sq) max_path_sq = std::move(sum);
  }
  fact.contraction = max_path_sq == 0 ? Rational(0) : sqrt_enclosure(max_path_sq).hi;
  fact.eta_prime = eta_diag;
  fact.contraction_target = eta / (2 + eta);  // value that turns 2/(1-c) into 2+eta
  fact.route_check_passed = true;
  fact.diagonalization = std::move(diag);
  if (fact.contraction >= 1) {
    result.infeasibility.stage = "composed_contraction";
    result.infeasibility.detail = "composed interactions are not a strict contraction";
    result.infeasibility.achieved = fact.contraction;
    result.infeasibility.budget = Rational(1);
    result.infeasibility.needed_depth_hint = depth + 8;
    return result;
  }
  fact.norm_product_bound =
      (Rational(1) / (Rational(1) - fact.contraction)) * (Rational(1) / result.delta_eff);
  if (fact.norm_product_bound > 2 + eta) {
    result.infeasibility.stage = "norm_bound";
    result.infeasibility.detail = "certified product bound misses 2 + eta";
    result.infeasibility.achieved = fact.norm_product_bound;
    result.infeasibility.budget = 2 + eta;
    result.infeasibility.needed_depth_hint = depth + 8;
    return result;
  }

  BlockMatrix v = neumann_invert(m, fact.contraction, tol, &fact.neumann_terms);
  fact.witnesses = verify_contraction_witnesses(m, frame, fact.contraction, mode);

  AssembledFactors parts = assemble_factors(H, frame, v, DiagonalSigns{}, index_depth, mode);
  fact.R = std::move(parts.R);
  fact.S = std::move(parts.S);
  fact.S.set_norm_bound(fact.norm_product_bound, "structural");
  fact.residual = std::move(parts.residual);
  fact.ok = true;
  result.ok = true;
  return result;
}

std::vector<DyadicInterval> band_collection(int k, int depth) {
  if (k < 0) throw std::invalid_argument("band index must be nonnegative");
  if (depth > kMaxGeneration) throw std::invalid_argument("depth exceeds the generation cap");
  std::vector<DyadicInterval> out;
  // Band k is the dyadic interval [1-2^-k, 1-2^-(k+1)) at generation k+1.
  const int band_level = k + 1;
  if (band_level > depth) return out;
  const std::int64_t band_pos = (std::int64_t{1} << band_level) - 2;
  for (int n = band_level; n <= depth; ++n) {
    const std::int64_t width = std::int64_t{1} << (n - band_level);
    for (std::int64_t j = 0; j < width; ++j) out.push_back({n, band_pos * width + j});
  }
  return out;
}

}  // namespace haarfactor
