#include <doctest.h>

#include <random>
#include <vector>

#include "haarfactor/block_basis.hpp"
#include "haarfactor/generators.hpp"
#include "haarfactor/quasi_diag.hpp"

namespace {

using namespace haarfactor;

IntervalFamily identity_family(int depth) {
  IntervalFamily family;
  for (std::uint64_t p = 0; p < tree_size(depth); ++p) {
    const DyadicInterval iv = from_ordering(p);
    family.index_set.push_back(iv);
    family.blocks[iv] = {iv};
  }
  return family;
}

IntervalFamily kappa_two_family() {
  IntervalFamily family;
  family.index_set = {unit_interval(), {1, 0}};
  family.blocks[unit_interval()] = {{1, 0}, {1, 1}};
  family.blocks[{1, 0}] = {{2, 0}, {3, 2}, {3, 4}};
  return family;
}

BlockBasis cover_basis() {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::identity;
  spec.depth = 8;
  const DiagonalizationResult diag =
      quasi_diagonalize(generate(spec), Rational(1), Rational(1), 2);
  REQUIRE(diag.ok);
  return diag.basis;
}

HaarVector restrict_to(const HaarVector& f, const std::vector<DyadicInterval>& index_set) {
  HaarVector out;
  for (const auto& iv : index_set) {
    const Rational a = f.coeff(iv);
    if (a != 0) out.set_coeff(iv, a);
  }
  return out;
}

HaarVector random_vector(std::mt19937_64& rng, int max_depth, int terms) {
  HaarVector f;
  std::uniform_int_distribution<std::uint64_t> pos(0, tree_size(max_depth) - 1);
  std::uniform_int_distribution<int> num(-9, 9);
  for (int t = 0; t < terms; ++t) {
    f.set_coeff(from_ordering(pos(rng)), make_rational(num(rng), 4));
  }
  return f;
}

}  // namespace

TEST_CASE("building the basis materializes blocks and norms") {
  const IntervalFamily family = identity_family(2);
  const BlockBasis basis = build_block_basis(family, uniform_signs(family));
  CHECK(basis.kappa == 1);
  for (const auto& iv : family.index_set) {
    HaarVector expected;
    expected.set_coeff(iv, Rational(1));
    CHECK(basis.vectors.at(iv) == expected);
    CHECK(basis.norms_sq.at(iv) == measure(iv));
  }

  // Signed two-member block: b = h_[0,1/2) - h_[1/2,1), |b|_2^2 = 1.
  IntervalFamily pair;
  pair.index_set = {unit_interval()};
  pair.blocks[unit_interval()] = {{1, 0}, {1, 1}};
  SignAssignment signs;
  signs.signs[{1, 0}] = 1;
  signs.signs[{1, 1}] = -1;
  const BlockBasis signed_basis = build_block_basis(pair, signs);
  HaarVector expected;
  expected.set_coeff({1, 0}, Rational(1));
  expected.set_coeff({1, 1}, Rational(-1));
  CHECK(signed_basis.vectors.at(unit_interval()) == expected);
  CHECK(signed_basis.norms_sq.at(unit_interval()) == 1);
}

TEST_CASE("cover construction blocks have the index measure as squared norm") {
  const BlockBasis basis = cover_basis();
  CHECK(basis.kappa == 1);
  for (const auto& iv : basis.family.index_set) {
    CHECK(basis.norms_sq.at(iv) == measure(iv));
    CHECK(inner_product(basis.vectors.at(iv), basis.vectors.at(iv)) == measure(iv));
  }
  // Distinct blocks have disjoint Haar supports, hence vanishing pairings.
  for (const auto& a : basis.family.index_set) {
    for (const auto& b : basis.family.index_set) {
      if (a != b) CHECK(inner_product(basis.vectors.at(a), basis.vectors.at(b)) == 0);
    }
  }
}

TEST_CASE("basis construction rejects bad input") {
  IntervalFamily pair;
  pair.index_set = {unit_interval()};
  pair.blocks[unit_interval()] = {{1, 0}, {1, 1}};
  SignAssignment missing;
  missing.signs[{1, 0}] = 1;
  CHECK_THROWS_AS(build_block_basis(pair, missing), std::invalid_argument);

  IntervalFamily broken;
  broken.index_set = {{1, 0}, {1, 1}};
  broken.blocks[{1, 0}] = {unit_interval()};
  broken.blocks[{1, 1}] = {unit_interval()};
  CHECK_THROWS_AS(build_block_basis(broken, uniform_signs(broken)), std::invalid_argument);
}

TEST_CASE("embedding transplants coefficients onto blocks") {
  IntervalFamily pair;
  pair.index_set = {unit_interval()};
  pair.blocks[unit_interval()] = {{1, 0}, {1, 1}};
  const BlockBasis basis = build_block_basis(pair, uniform_signs(pair));

  HaarVector f;
  f.set_coeff(unit_interval(), Rational(1));
  HaarVector expected;
  expected.set_coeff({1, 0}, Rational(1));
  expected.set_coeff({1, 1}, Rational(1));
  CHECK(embed_B(f, basis) == expected);
  CHECK(embed_B(HaarVector(), basis) == HaarVector());

  // Coefficients outside the index set are discarded.
  f.set_coeff({3, 5}, Rational(7));
  CHECK(embed_B(f, basis) == expected);

  // On the identity basis the embedding is plain restriction.
  const IntervalFamily idf = identity_family(2);
  const BlockBasis idb = build_block_basis(idf, uniform_signs(idf));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const HaarVector g = random_vector(rng, 4, 8);
    CHECK(embed_B(g, idb) == restrict_to(g, idf.index_set));
  }
}

TEST_CASE("projection part pairs against the blocks") {
  const BlockBasis basis = cover_basis();
  for (const auto& iv : basis.family.index_set) {
    HaarVector unit;
    unit.set_coeff(iv, Rational(1));
    CHECK(project_Q(basis.vectors.at(iv), basis) == unit);  // biorthogonality
    CHECK(projection_P(basis.vectors.at(iv), basis) == basis.vectors.at(iv));
  }
  // A vector on levels the family never uses pairs to zero.
  HaarVector off;
  off.set_coeff({8, 3}, Rational(2));
  off.set_coeff({8, 100}, Rational(-1));
  CHECK(project_Q(off, basis) == HaarVector());
}

TEST_CASE("projection part inverts the embedding on the index span") {
  const BlockBasis basis = cover_basis();
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const HaarVector f = random_vector(rng, 3, 6);
    CHECK(project_Q(embed_B(f, basis), basis) ==
          restrict_to(f, basis.family.index_set));
  }
}

TEST_CASE("projection is idempotent") {
  const BlockBasis basis = cover_basis();
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const HaarVector f = random_vector(rng, 8, 12);
    const HaarVector once = projection_P(f, basis);
    CHECK(projection_P(once, basis) == once);
  }
}

TEST_CASE("norm inequalities hold exactly on sampled and extreme inputs") {
  const BlockBasis cover = cover_basis();
  const IntervalFamily two = kappa_two_family();
  const BlockBasis skewed = build_block_basis(two, uniform_signs(two));
  REQUIRE(skewed.kappa == 2);

  auto check_bounds = [](const BlockBasis& basis, const HaarVector& f) {
    const Rational f_sq = sl_inf_norm_sq(f);
    CHECK(sl_inf_norm_sq(embed_B(f, basis)) <= f_sq);
    CHECK(sl_inf_norm_sq(project_Q(f, basis)) <= basis.kappa * f_sq);
    CHECK(sl_inf_norm_sq(projection_P(f, basis)) <= basis.kappa * f_sq);
  };

  // Every +-1 pattern over the seven cover indices.
  const auto& indices = cover.family.index_set;
  for (unsigned mask = 0; mask < (1u << indices.size()); ++mask) {
    HaarVector f;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      f.set_coeff(indices[i], Rational((mask >> i) & 1 ? 1 : -1));
    }
    check_bounds(cover, f);
  }

  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 60; ++trial) {
    check_bounds(cover, random_vector(rng, 8, 10));
    check_bounds(skewed, random_vector(rng, 4, 8));
  }
}

TEST_CASE("signs never increase the embedded norm") {
  // Pointwise the squared profile ignores signs entirely, so the signed
  // embedding matches the unsigned embedding of the absolute coefficients.
  const BlockBasis plain = cover_basis();
  std::mt19937_64 rng(31);
  SignAssignment flips = plain.signs;
  for (auto& [iv, s] : flips.signs) s = (rng() & 1) ? 1 : -1;
  const BlockBasis flipped = build_block_basis(plain.family, flips);

  for (int trial = 0; trial < 20; ++trial) {
    const HaarVector f = random_vector(rng, 3, 6);
    HaarVector abs_f;
    for (const auto& [iv, a] : f.coeffs()) abs_f.set_coeff(iv, abs(a));
    const Rational signed_sq = sl_inf_norm_sq(embed_B(f, flipped));
    const Rational unsigned_sq = sl_inf_norm_sq(embed_B(abs_f, plain));
    CHECK(signed_sq <= unsigned_sq);
    CHECK(signed_sq == unsigned_sq);
  }
}
