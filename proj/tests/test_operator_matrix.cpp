#include <doctest.h>

#include <random>

#include "haarfactor/generators.hpp"
#include "haarfactor/operator_matrix.hpp"

namespace {

using namespace haarfactor;

HaarVector unit_vec(const DyadicInterval& iv) {
  HaarVector f;
  f.set_coeff(iv, Rational(1));
  return f;
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

}  // namespace

TEST_CASE("entry storage keeps the matrix sparse") {
  OperatorMatrix T(3);
  CHECK(T.entry_count() == 0);
  T.set_entry({1, 0}, {2, 3}, make_rational(1, 4));
  T.set_entry({1, 0}, {1, 0}, Rational(2));
  CHECK(T.entry_count() == 2);
  CHECK(T.entry({1, 0}, {2, 3}) == make_rational(1, 4));
  CHECK(T.diagonal_entry({1, 0}) == 2);
  CHECK(T.entry({2, 3}, {1, 0}) == 0);

  // Writing zero erases, and an emptied column disappears.
  T.set_entry({1, 0}, {2, 3}, Rational(0));
  CHECK(T.entry_count() == 1);
  CHECK(T.columns().count({2, 3}) == 0);

  CHECK_THROWS_AS(T.set_entry({4, 0}, {1, 0}, Rational(1)), std::invalid_argument);
  CHECK_THROWS_AS(T.set_entry({2, 9}, {1, 0}, Rational(1)), std::invalid_argument);
  CHECK_THROWS_AS(OperatorMatrix(-1), std::invalid_argument);
  CHECK_THROWS_AS(OperatorMatrix(kMaxGeneration + 1), std::invalid_argument);
  CHECK_THROWS_AS(T.set_norm_bound(Rational(-1), "caller"), std::invalid_argument);
}

TEST_CASE("apply acts column by column") {
  const OperatorMatrix shift = generate_kind(GeneratorKind::level_shift, 3);
  HaarVector f;
  f.set_coeff(unit_interval(), Rational(1));
  f.set_coeff({1, 1}, Rational(2));
  HaarVector expected;
  expected.set_coeff({1, 0}, Rational(1));
  expected.set_coeff({2, 2}, Rational(2));
  CHECK(shift.apply(f) == expected);
  // Leaf columns are empty, so leaves map to zero.
  CHECK(shift.apply(unit_vec({3, 5})) == HaarVector());
  CHECK(shift.apply(HaarVector()) == HaarVector());

  const OperatorMatrix id = generate_kind(GeneratorKind::identity, 4);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    const HaarVector g = random_vector(rng, 4, 7);
    CHECK(id.apply(g) == g);
  }
}

TEST_CASE("column pairing matches applying to a unit coefficient") {
  std::mt19937_64 rng(11);
  const OperatorMatrix T = generate_kind(GeneratorKind::random_large_diagonal, 5,
                                         make_rational(1, 2), make_rational(1, 8), 17);
  for (int trial = 0; trial < 20; ++trial) {
    const HaarVector b = random_vector(rng, 5, 9);
    const DyadicInterval col = from_ordering(rng() % tree_size(5));
    CHECK(T.column_pairing(col, b) == inner_product(T.apply(unit_vec(col)), b));
  }
  CHECK(T.column_pairing({5, 0}, HaarVector()) == 0);
}

TEST_CASE("column decomposition splits diagonal from remainder") {
  OperatorMatrix T = generate_kind(GeneratorKind::identity, 3);
  auto plain = decompose_column(T, {1, 1});
  CHECK(plain.alpha == 1);
  CHECK(plain.remainder == HaarVector());

  T.set_entry({3, 1}, {1, 1}, make_rational(1, 4));
  auto noisy = decompose_column(T, {1, 1});
  CHECK(noisy.alpha == 1);
  CHECK(noisy.remainder == [] {
    HaarVector r;
    r.set_coeff({3, 1}, make_rational(1, 4));
    return r;
  }());

  OperatorMatrix empty(3);
  auto absent = decompose_column(empty, {2, 0});
  CHECK(absent.alpha == 0);
  CHECK(absent.remainder == HaarVector());
  CHECK_THROWS_AS(decompose_column(T, {4, 0}), std::invalid_argument);
}

TEST_CASE("adjoint vector realizes the pairing as an inner product") {
  const OperatorMatrix id = generate_kind(GeneratorKind::identity, 4);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 12; ++trial) {
    const HaarVector b = random_vector(rng, 4, 6);
    CHECK(adjoint_vector(id, b) == b);  // identity is self-adjoint
  }
  const OperatorMatrix T = generate_kind(GeneratorKind::random_large_diagonal, 4,
                                         make_rational(1, 2), make_rational(1, 16), 9);
  for (int trial = 0; trial < 20; ++trial) {
    const HaarVector f = random_vector(rng, 4, 6);
    const HaarVector b = random_vector(rng, 4, 6);
    CHECK(inner_product(f, adjoint_vector(T, b)) == inner_product(T.apply(f), b));
  }
}

TEST_CASE("diagonal sign normalization flips whole columns") {
  OperatorMatrix T(2);
  T.set_entry(unit_interval(), unit_interval(), Rational(-1));
  T.set_entry({1, 0}, {1, 0}, make_rational(3, 4));
  T.set_entry({2, 1}, {1, 0}, make_rational(-1, 8));
  T.set_entry({1, 1}, {1, 1}, make_rational(-1, 2));
  T.set_entry({2, 3}, {1, 1}, make_rational(1, 8));
  for (const auto& iv : level_grid(2)) T.set_entry(iv, iv, Rational(1));

  const SignNormalization norm = normalize_diagonal_signs(T, make_rational(1, 2));
  CHECK(norm.sigma.flipped == std::set<DyadicInterval>{unit_interval(), {1, 1}});
  CHECK(norm.sigma.at(unit_interval()) == -1);
  CHECK(norm.sigma.at({1, 0}) == +1);
  // t'_{J,I} = t_{J,I} sigma_I: flipped columns negate every entry.
  CHECK(norm.op.diagonal_entry(unit_interval()) == 1);
  CHECK(norm.op.diagonal_entry({1, 1}) == make_rational(1, 2));
  CHECK(norm.op.entry({2, 3}, {1, 1}) == make_rational(-1, 8));
  // Untouched columns are copied as-is.
  CHECK(norm.op.entry({2, 1}, {1, 0}) == make_rational(-1, 8));
  CHECK(norm.op.diagonal_entry({1, 0}) == make_rational(3, 4));
  for (const auto& iv : level_grid(2)) CHECK(norm.op.diagonal_entry(iv) == 1);
  CHECK(norm.op.norm_bound() == T.norm_bound());

  // Already-nonnegative diagonals come back unchanged.
  const OperatorMatrix id = generate_kind(GeneratorKind::identity, 2);
  const SignNormalization idn = normalize_diagonal_signs(id, Rational(1));
  CHECK(idn.sigma.flipped.empty());
  CHECK(idn.op.columns() == id.columns());

  OperatorMatrix bad(1);
  bad.set_entry(unit_interval(), unit_interval(), Rational(1));
  bad.set_entry({1, 0}, unit_interval(), make_rational(1, 2));
  bad.set_entry(unit_interval(), {1, 0}, make_rational(1, 2));  // zero diagonal at [0,1/2)
  CHECK_THROWS_AS(normalize_diagonal_signs(bad, make_rational(1, 4)), std::invalid_argument);
  CHECK_NOTHROW(normalize_diagonal_signs(bad, Rational(0)));
  CHECK_THROWS_AS(normalize_diagonal_signs(bad, Rational(-1)), std::invalid_argument);
}

TEST_CASE("large-diagonal scan covers the whole tree") {
  const OperatorMatrix id = generate_kind(GeneratorKind::identity, 3);
  CHECK(has_large_diagonal(id, Rational(1)));
  OperatorMatrix gap = id;
  gap.set_entry({2, 1}, {2, 1}, Rational(0));
  CHECK_FALSE(has_large_diagonal(gap, make_rational(1, 2)));
  CHECK(has_large_diagonal(gap, Rational(0)));

  OperatorMatrix negative = id;
  negative.set_entry({3, 0}, {3, 0}, Rational(-1));
  CHECK(has_large_diagonal(negative, Rational(1)));  // magnitude counts
}

TEST_CASE("certified bound adds the diagonal peak and off-diagonal mass") {
  OperatorMatrix T(2);
  T.set_entry({1, 0}, {1, 0}, make_rational(1, 2));
  T.set_entry({1, 1}, {1, 1}, make_rational(-3, 4));
  T.set_entry({2, 0}, {1, 0}, make_rational(1, 4));
  T.set_entry({1, 0}, {2, 2}, make_rational(-1, 8));
  CHECK(certified_norm_bound(T) == make_rational(9, 8));
  CHECK(certified_norm_bound(OperatorMatrix(4)) == 0);
}

TEST_CASE("generators are deterministic functions of their inputs") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::random_large_diagonal;
  spec.depth = 6;
  spec.delta = make_rational(1, 2);
  spec.off_diagonal_mass = make_rational(1, 100);
  spec.seed = 7;
  const OperatorMatrix a = generate(spec);
  const OperatorMatrix b = generate(spec);
  CHECK(a.columns() == b.columns());
  CHECK(a.norm_bound() == b.norm_bound());
  CHECK(a.norm_bound_source() == "estimated");

  spec.seed = 8;
  CHECK_FALSE(generate(spec).columns() == a.columns());
}

TEST_CASE("random large diagonal honors its floor and noise budget") {
  const Rational delta = make_rational(1, 2);
  const Rational mass = make_rational(1, 100);
  const OperatorMatrix T =
      generate_kind(GeneratorKind::random_large_diagonal, 6, delta, mass, 7);
  CHECK(has_large_diagonal(T, delta));
  bool saw_negative = false;
  Rational off_mass(0);
  for (const auto& [col, rows] : T.columns()) {
    for (const auto& [row, t] : rows) {
      if (row == col) {
        CHECK(abs(t) >= delta);
        CHECK(abs(t) <= 1);
        if (t < 0) saw_negative = true;
      } else {
        off_mass += abs(t);
      }
    }
  }
  CHECK(saw_negative);
  CHECK(off_mass > 0);
  CHECK(off_mass <= mass);
  CHECK(T.norm_bound() <= Rational(1) + mass);

  // Zero noise budget leaves the operator purely diagonal.
  const OperatorMatrix pure =
      generate_kind(GeneratorKind::random_large_diagonal, 4, delta, Rational(0), 7);
  for (const auto& [col, rows] : pure.columns()) {
    CHECK(rows.size() == 1);
    CHECK(rows.count(col) == 1);
  }
}

TEST_CASE("multiplier generator is constant on each generation") {
  const Rational delta = make_rational(1, 4);
  const OperatorMatrix T =
      generate_kind(GeneratorKind::haar_multiplier, 5, delta, Rational(0), 42);
  for (int m = 0; m <= 5; ++m) {
    const Rational level_value = T.diagonal_entry(level_grid(m).front());
    CHECK(abs(level_value) >= delta);
    CHECK(abs(level_value) <= 1);
    for (const auto& iv : level_grid(m)) CHECK(T.diagonal_entry(iv) == level_value);
  }
  CHECK(T.entry_count() == tree_size(5));
}

TEST_CASE("mask generator draws a 0/1 diagonal in breadth-first order") {
  const std::uint64_t seed = 99;
  const OperatorMatrix T = generate_kind(GeneratorKind::projection_mask, 4,
                                         Rational(0), Rational(0), seed);
  for (std::uint64_t p = 0; p < tree_size(4); ++p) {
    const DyadicInterval iv = from_ordering(p);
    const Rational expected = (mix64(seed, p) & 1) ? Rational(1) : Rational(0);
    CHECK(T.diagonal_entry(iv) == expected);
  }
  for (const auto& [col, rows] : T.columns()) {
    CHECK(rows.size() == 1);
    CHECK(rows.at(col) == 1);
  }
}

TEST_CASE("shift generator maps each column to its left child") {
  const OperatorMatrix T = generate_kind(GeneratorKind::level_shift, 3);
  for (int m = 0; m < 3; ++m) {
    for (const auto& iv : level_grid(m)) {
      CHECK(T.entry(left_half(iv), iv) == 1);
      CHECK(T.columns().at(iv).size() == 1);
    }
  }
  for (const auto& leaf : level_grid(3)) CHECK(T.columns().count(leaf) == 0);
  CHECK(T.norm_bound() == 4);  // coarse stacked-rows bound, depth + 1
}

TEST_CASE("scaling generator accepts factors above one") {
  const OperatorMatrix twice =
      generate_kind(GeneratorKind::scaled_diagonal, 2, Rational(3));
  for (std::uint64_t p = 0; p < tree_size(2); ++p) {
    CHECK(twice.diagonal_entry(from_ordering(p)) == 3);
  }
  CHECK(twice.norm_bound() == 3);
  const OperatorMatrix zero =
      generate_kind(GeneratorKind::scaled_diagonal, 2, Rational(0));
  CHECK(zero.entry_count() == 0);
  CHECK(zero.norm_bound() == 0);
}

TEST_CASE("generator specs are validated before use") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::identity;
  spec.depth = -1;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.depth = kMaxGeneration + 1;
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.depth = 3;
  spec.off_diagonal_mass = Rational(-1);
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.off_diagonal_mass = Rational(0);
  spec.kind = GeneratorKind::random_large_diagonal;
  spec.delta = make_rational(3, 2);
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  spec.kind = GeneratorKind::haar_multiplier;
  spec.delta = make_rational(-1, 2);
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  // The scale factor is unconstrained above zero.
  spec.kind = GeneratorKind::scaled_diagonal;
  spec.delta = Rational(5);
  CHECK_NOTHROW(generate(spec));

  CHECK(generator_kind_from_name("haar_multiplier") == GeneratorKind::haar_multiplier);
  CHECK(generator_kind_name(GeneratorKind::level_shift) == "level_shift");
  CHECK_THROWS_AS(generator_kind_from_name("banded"), std::invalid_argument);
}

TEST_CASE("counter stream words are order-free and uniform-ish") {
  CHECK(mix64(1, 2) == mix64(1, 2));
  CHECK(mix64(1, 2) != mix64(1, 3));
  CHECK(mix64(1, 2) != mix64(2, 2));
  CHECK(unit_rational(0) == 0);
  CHECK(unit_rational(~0ULL) ==
        Rational(Integer(static_cast<unsigned long>((1ULL << 48) - 1))) / pow2(48));
  for (std::uint64_t c = 0; c < 50; ++c) {
    const Rational u = unit_rational(mix64(4, c));
    CHECK(u >= 0);
    CHECK(u < 1);
    CHECK(u * pow2(48) ==
          Rational(Integer(static_cast<unsigned long>(mix64(4, c) >> 16))));  // exact dyadic
  }
}
