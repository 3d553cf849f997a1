#include <doctest.h>

#include <string>

#include "haarfactor/generators.hpp"
#include "haarfactor/primarity.hpp"

namespace {

using namespace haarfactor;

OperatorMatrix generate_kind(GeneratorKind kind, int depth, Rational delta = Rational(0),
                             Rational mass = Rational(0), std::uint64_t seed = 0) {
  GeneratorSpec spec;
  spec.kind = kind;
  spec.depth = depth;
  spec.delta = delta;
  spec.off_diagonal_mass = mass;
  spec.seed = seed;
  return generate(spec);
}

// Diagonal multiplier that is 1 on level m exactly when the m-th breadth-first
// index position sits at an even generation; under a diagonal operator block i
// lands at frequency i, so the block coloring alternates by index generation.
OperatorMatrix generation_parity_operator(int depth) {
  OperatorMatrix T(depth);
  for (int m = 0; m <= depth; ++m) {
    if (from_ordering(static_cast<std::uint64_t>(m)).n % 2 == 0) {
      for (const auto& iv : level_grid(m)) T.set_entry(iv, iv, Rational(1));
    }
  }
  T.set_norm_bound(Rational(1), "caller");
  return T;
}

// Diagonal multiplier supported on level 0 only: exactly one block pairs large
// against T, everything else against the complement.
OperatorMatrix root_only_operator(int depth) {
  OperatorMatrix T(depth);
  T.set_entry(unit_interval(), unit_interval(), Rational(1));
  T.set_norm_bound(Rational(1), "caller");
  return T;
}

ColoredBlocks colored_for(const OperatorMatrix& T, int index_depth) {
  const DiagonalizationResult diag = quasi_diagonalize(T, Rational(0), Rational(1), index_depth);
  REQUIRE(diag.ok);
  return color_blocks(T, diag.basis);
}

}  // namespace

TEST_CASE("coloring splits blocks by the pigeonhole identity") {
  const OperatorMatrix id = generate_kind(GeneratorKind::identity, 6);
  const ColoredBlocks all_t = colored_for(id, 2);
  CHECK(all_t.chosen == BlockColor::T_large);
  for (const auto& [iv, color] : all_t.colors) CHECK(color == BlockColor::T_large);

  const OperatorMatrix zero(6);
  const ColoredBlocks all_c = colored_for(zero, 2);
  CHECK(all_c.chosen == BlockColor::C_large);
  for (const auto& [iv, color] : all_c.colors) CHECK(color == BlockColor::C_large);

  // Exactly half: the tie is colored toward T.
  const OperatorMatrix half = generate_kind(GeneratorKind::scaled_diagonal, 6, make_rational(1, 2));
  const ColoredBlocks tie = colored_for(half, 2);
  CHECK(tie.chosen == BlockColor::T_large);
  for (const auto& [iv, color] : tie.colors) CHECK(color == BlockColor::T_large);

  CHECK(std::string(to_string(BlockColor::T_large)) == "T_large");
  CHECK(std::string(to_string(BlockColor::C_large)) == "C_large");
}

TEST_CASE("the two pairings split the block norm exactly") {
  const OperatorMatrix T =
      generate_kind(GeneratorKind::random_large_diagonal, 8, make_rational(1, 2),
                    make_rational(1, 64), 31);
  const OperatorMatrix C = complement_operator(T);
  const DiagonalizationResult diag = quasi_diagonalize(T, Rational(0), Rational(1), 1);
  REQUIRE(diag.ok);
  for (const auto& index : diag.basis.family.index_set) {
    const HaarVector& b = diag.basis.vectors.at(index);
    CHECK(inner_product(T.apply(b), b) + inner_product(C.apply(b), b) ==
          diag.basis.norms_sq.at(index));
  }
}

TEST_CASE("the complement negates off-diagonal entries and flips the diagonal") {
  OperatorMatrix T(2);
  T.set_entry({1, 0}, {1, 0}, make_rational(3, 4));
  T.set_entry({2, 1}, {1, 0}, make_rational(1, 4));
  const OperatorMatrix C = complement_operator(T);
  CHECK(C.diagonal_entry({1, 0}) == make_rational(1, 4));
  CHECK(C.entry({2, 1}, {1, 0}) == make_rational(-1, 4));
  CHECK(C.diagonal_entry(unit_interval()) == 1);  // absent diagonal becomes 1
  CHECK(C.diagonal_entry({2, 3}) == 1);
  CHECK(C.norm_bound() == certified_norm_bound(C));

  // Id - Id = 0 and Id - 0 = Id.
  const OperatorMatrix id = generate_kind(GeneratorKind::identity, 3);
  CHECK(complement_operator(id).entry_count() == 0);
  CHECK(complement_operator(OperatorMatrix(3)).columns() == id.columns());
}

TEST_CASE("generation-parity coloring yields the doubled-spacing selection") {
  const OperatorMatrix T = generation_parity_operator(8);
  const ColoredBlocks colored = colored_for(T, 2);

  // Level multipliers 1,0,0,1,1,1,1,...: the root and the four generation-two
  // indices land in the T class, the two generation-one indices in the C class.
  CHECK(colored.colors.at(unit_interval()) == BlockColor::T_large);
  CHECK(colored.colors.at({1, 0}) == BlockColor::C_large);
  CHECK(colored.colors.at({1, 1}) == BlockColor::C_large);
  for (std::int64_t k = 0; k < 4; ++k) {
    CHECK(colored.colors.at({2, k}) == BlockColor::T_large);
  }
  CHECK(colored.chosen == BlockColor::T_large);  // mass 2 vs mass 1
  CHECK(max_selection_depth(colored, BlockColor::T_large) == 1);
  CHECK(max_selection_depth(colored, BlockColor::C_large) == 0);

  // The depth-1 subtree roots at [0,1) and tiles its halves one level deeper.
  const IntervalFamily selection = gg_select(colored, 1);
  CHECK(selection.index_set ==
        std::vector<DyadicInterval>{unit_interval(), {1, 0}, {1, 1}});
  CHECK(selection.blocks.at(unit_interval()) == std::vector<DyadicInterval>{unit_interval()});
  CHECK(selection.blocks.at({1, 0}) == std::vector<DyadicInterval>{{2, 0}, {2, 1}});
  CHECK(selection.blocks.at({1, 1}) == std::vector<DyadicInterval>{{2, 2}, {2, 3}});

  const JonesReport report = check_jones(selection);
  CHECK(report.satisfied);
  CHECK(report.kappa == 1);

  // Depth 0 picks the first chosen-colored position alone.
  const IntervalFamily single = gg_select(colored, 0);
  CHECK(single.index_set == std::vector<DyadicInterval>{unit_interval()});
  CHECK(single.blocks.at(unit_interval()) == std::vector<DyadicInterval>{unit_interval()});

  CHECK_THROWS_AS(gg_select(colored, -1), std::invalid_argument);
}

TEST_CASE("an unbalanced coloring reports the deepest feasible subtree") {
  const OperatorMatrix T = root_only_operator(8);
  const ColoredBlocks colored = colored_for(T, 2);
  CHECK(colored.colors.at(unit_interval()) == BlockColor::T_large);
  CHECK(colored.chosen == BlockColor::C_large);  // mass 2 vs mass 1
  CHECK(max_selection_depth(colored, BlockColor::C_large) == 1);
  CHECK(max_selection_depth(colored, BlockColor::T_large) == 0);

  bool caught = false;
  try {
    gg_select(colored, 2);
  } catch (const SubtreeInfeasible& e) {
    caught = true;
    CHECK(e.requested == 2);
    CHECK(e.achievable == 1);
    CHECK(std::string(e.what()).find("selection depth 1") != std::string::npos);
  }
  CHECK(caught);
}

TEST_CASE("the identity is primary on its own side") {
  const OperatorMatrix id = generate_kind(GeneratorKind::identity, 6);
  const PrimaryResult result = factor_primary(id, Rational(1), 1);
  REQUIRE(result.ok);
  CHECK(result.choice == PrimaryChoice::T_side);
  CHECK(std::string(to_string(result.choice)) == "T");
  CHECK(result.t_large_depth == 2);
  CHECK(result.c_large_depth == -1);
  CHECK(result.delta_eff == 1);
  CHECK(result.composed_kappa == 1);
  CHECK(result.factorization.contraction == 0);
  CHECK(result.factorization.norm_product_bound == 1);
  CHECK(result.factorization.residual == 0);
  CHECK(result.factorization.witnesses.all_passed);
  for (std::uint64_t p = 0; p < tree_size(1); ++p) {
    HaarVector f;
    f.set_coeff(from_ordering(p), Rational(1));
    CHECK(result.factorization.S.apply(id.apply(result.factorization.R.apply(f))) == f);
  }
}

TEST_CASE("the zero operator is primary through its complement") {
  const OperatorMatrix zero(6);
  const PrimaryResult result = factor_primary(zero, Rational(1), 1);
  REQUIRE(result.ok);
  CHECK(result.choice == PrimaryChoice::complement_side);
  CHECK(std::string(to_string(result.choice)) == "Id_minus_T");
  CHECK(result.t_large_depth == -1);
  CHECK(result.c_large_depth == 2);
  CHECK(result.delta_eff == 1);
  CHECK(result.factorization.norm_product_bound == 1);
  CHECK(result.factorization.residual == 0);
  // The diagram runs through H = Id - T = Id.
  const OperatorMatrix H = complement_operator(zero);
  for (std::uint64_t p = 0; p < tree_size(1); ++p) {
    HaarVector f;
    f.set_coeff(from_ordering(p), Rational(1));
    CHECK(result.factorization.S.apply(H.apply(result.factorization.R.apply(f))) == f);
  }
}

TEST_CASE("parity operators stay primary with an exact unit bound") {
  const OperatorMatrix T = generation_parity_operator(8);
  const PrimaryResult result = factor_primary(T, Rational(1), 1);
  REQUIRE(result.ok);
  CHECK(result.choice == PrimaryChoice::T_side);
  CHECK(result.t_large_depth == 1);
  CHECK(result.c_large_depth == 0);
  CHECK(result.delta_eff == 1);  // chosen blocks sit entirely inside multiplier-1 levels
  CHECK(result.composed_kappa == 1);
  CHECK(result.factorization.contraction == 0);
  CHECK(result.factorization.norm_product_bound == 1);
  CHECK(result.factorization.residual == 0);
}

TEST_CASE("masked projections factor deterministically") {
  const OperatorMatrix mask =
      generate_kind(GeneratorKind::projection_mask, 12, Rational(0), Rational(0), 3);
  const PrimaryResult first = factor_primary(mask, Rational(1), 1);
  const PrimaryResult again = factor_primary(mask, Rational(1), 1);
  CHECK(first.ok == again.ok);
  CHECK(first.choice == again.choice);
  REQUIRE(first.ok);
  // Diagonal operator: composed blocks never interact, so the product bound is
  // exactly 1/delta_eff and the diagram closes exactly.
  CHECK(first.delta_eff == again.delta_eff);
  CHECK(first.delta_eff >= make_rational(1, 2));
  CHECK(first.factorization.contraction == 0);
  CHECK(first.factorization.norm_product_bound == Rational(1) / first.delta_eff);
  CHECK(first.factorization.norm_product_bound <= 2 + first.eta);
  CHECK(first.factorization.residual == 0);
}

TEST_CASE("primary factorization reports structural infeasibility") {
  // Requested depth beyond what the operator depth supports.
  const OperatorMatrix small = generate_kind(GeneratorKind::identity, 4);
  const PrimaryResult too_deep = factor_primary(small, Rational(1), 3);
  CHECK_FALSE(too_deep.ok);
  CHECK(too_deep.infeasibility.stage == "index_depth");
  CHECK(too_deep.infeasibility.achieved == 1);   // deepest base tree at depth 4
  CHECK(too_deep.infeasibility.budget == 3);
  CHECK(too_deep.infeasibility.needed_depth_hint == 14);

  // Both color classes too shallow for the requested selection.
  const OperatorMatrix skew = root_only_operator(8);
  const PrimaryResult unbalanced = factor_primary(skew, Rational(1), 2);
  CHECK_FALSE(unbalanced.ok);
  CHECK(unbalanced.infeasibility.stage == "gg_select");
  CHECK(unbalanced.infeasibility.achieved == 1);
  CHECK(unbalanced.infeasibility.budget == 2);
  CHECK(unbalanced.infeasibility.needed_depth_hint == 30);

  const OperatorMatrix id = generate_kind(GeneratorKind::identity, 6);
  CHECK_THROWS_AS(factor_primary(id, Rational(0), 1), std::invalid_argument);
  CHECK_THROWS_AS(factor_primary(id, Rational(1), -1), std::invalid_argument);
}

TEST_CASE("band enumeration tiles each geometric band completely") {
  // Band k holds the full subtree under [1-2^-k, 1-2^-(k+1)).
  for (int k = 0; k <= 3; ++k) {
    const auto band = band_collection(k, 6);
    CHECK(band.size() == tree_size(6 - k - 1));
    const Rational lo = Rational(1) - pow2(-k);
    const Rational hi = Rational(1) - pow2(-(k + 1));
    for (const auto& iv : band) {
      CHECK(left_endpoint(iv) >= lo);
      CHECK(left_endpoint(iv) + measure(iv) <= hi);
    }
    CHECK(DyadicSet::from_intervals(band).set_measure() == pow2(-(k + 1)));
  }
  CHECK(band_collection(0, 3) ==
        std::vector<DyadicInterval>{{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}, {3, 3}});
  CHECK(band_collection(1, 3) == std::vector<DyadicInterval>{{2, 2}, {3, 4}, {3, 5}});
  for (int k = 0; k < 3; ++k) {
    for (int j = k + 1; j <= 3; ++j) {
      CHECK(disjoint(DyadicSet::from_intervals(band_collection(k, 6)),
                     DyadicSet::from_intervals(band_collection(j, 6))));
    }
  }
  CHECK(band_collection(6, 6).empty());  // band level 7 exceeds the depth
  CHECK_THROWS_AS(band_collection(-1, 6), std::invalid_argument);
  CHECK_THROWS_AS(band_collection(0, kMaxGeneration + 1), std::invalid_argument);
}
