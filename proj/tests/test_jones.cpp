#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "haarfactor/block_basis.hpp"
#include "haarfactor/generators.hpp"
#include "haarfactor/jones.hpp"
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

bool has_condition(const JonesReport& report, const char* condition) {
  return std::any_of(report.violations.begin(), report.violations.end(),
                     [&](const JonesViolation& v) { return v.condition == condition; });
}

// Two-index family with the larger measure-ratio equal to exactly 2:
// the inner set keeps 3/8 of its mass in [0,1/2) and 1/8 in [1/2,1).
IntervalFamily kappa_two_family() {
  IntervalFamily family;
  family.index_set = {unit_interval(), {1, 0}};
  family.blocks[unit_interval()] = {{1, 0}, {1, 1}};
  family.blocks[{1, 0}] = {{2, 0}, {3, 2}, {3, 4}};
  return family;
}

// Random family in the cover shape: every member of a collection contributes
// a nonempty piece to each child collection, so all four conditions hold by
// construction while the measure ratios vary.
IntervalFamily random_cover_family(std::mt19937_64& rng, int index_depth) {
  IntervalFamily family;
  for (std::uint64_t p = 0; p < tree_size(index_depth); ++p) {
    family.index_set.push_back(from_ordering(p));
  }
  switch (rng() % 3) {
    case 0: family.blocks[unit_interval()] = {{1, 0}}; break;
    case 1: family.blocks[unit_interval()] = {{1, 1}}; break;
    default: family.blocks[unit_interval()] = {{1, 0}, {1, 1}}; break;
  }
  for (std::uint64_t p = 1; p < tree_size(index_depth); ++p) {
    const DyadicInterval index = from_ordering(p);
    const auto& parent_members = family.blocks.at(parent(index));
    std::vector<DyadicInterval> members;
    for (const DyadicInterval& m : parent_members) {
      const DyadicInterval half = is_left_child(index) ? left_half(m) : right_half(m);
      if (index.n == index_depth) {
        // Leaves take one piece each so the interval count stays small.
        members.push_back((rng() & 1) ? left_half(half) : right_half(half));
      } else {
        switch (rng() % 3) {
          case 0: members.push_back(left_half(half)); break;
          case 1: members.push_back(right_half(half)); break;
          default:
            members.push_back(left_half(half));
            members.push_back(right_half(half));
            break;
        }
      }
    }
    family.blocks[index] = std::move(members);
  }
  return family;
}

// Selector over a depth-2 base index tree: the root pools the two
// generation-1 names; each depth-1 index pools one generation-2 name from
// each side, so every deeper union meets every root member.
SelectorFamily random_spread_selector(std::mt19937_64& rng) {
  SelectorFamily selector;
  selector.index_set = {unit_interval(), {1, 0}, {1, 1}};
  selector.members[unit_interval()] = {{1, 0}, {1, 1}};
  const bool left_first = rng() & 1;
  const bool right_first = rng() & 1;
  selector.members[{1, 0}] = {{2, left_first ? 0 : 1}, {2, right_first ? 2 : 3}};
  selector.members[{1, 1}] = {{2, left_first ? 1 : 0}, {2, right_first ? 3 : 2}};
  return selector;
}

}  // namespace

TEST_CASE("identity families satisfy the conditions with constant one") {
  for (int depth = 0; depth <= 3; ++depth) {
    const JonesReport report = check_jones(identity_family(depth));
    CHECK(report.satisfied);
    CHECK(report.kappa == 1);
    CHECK(report.violations.empty());
    CHECK(verify_nesting_consequences(identity_family(depth)));
  }
}

TEST_CASE("disjoint indices with overlapping unions break the third condition") {
  IntervalFamily family;
  family.index_set = {{1, 0}, {1, 1}};
  family.blocks[{1, 0}] = {{1, 0}};
  family.blocks[{1, 1}] = {{2, 1}};  // [1/4,1/2) overlaps the other union
  const JonesReport report = check_jones(family);
  CHECK(!report.satisfied);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations.front().condition == "J3");

  // The same shape with a shared member also trips the disjointness check.
  IntervalFamily shared;
  shared.index_set = {{1, 0}, {1, 1}};
  shared.blocks[{1, 0}] = {unit_interval()};
  shared.blocks[{1, 1}] = {unit_interval()};
  const JonesReport shared_report = check_jones(shared);
  CHECK(!shared_report.satisfied);
  CHECK(has_condition(shared_report, "J2"));
  CHECK(has_condition(shared_report, "J3"));
}

TEST_CASE("empty and overlapping collections break the second condition") {
  IntervalFamily empty;
  empty.index_set = {unit_interval()};
  empty.blocks[unit_interval()] = {};
  CHECK(has_condition(check_jones(empty), "J2"));

  IntervalFamily overlap;
  overlap.index_set = {unit_interval()};
  overlap.blocks[unit_interval()] = {{1, 0}, {2, 0}};
  const JonesReport report = check_jones(overlap);
  CHECK(!report.satisfied);
  CHECK(has_condition(report, "J2"));
}

TEST_CASE("an outer member missing the inner union breaks the fourth condition") {
  IntervalFamily family;
  family.index_set = {unit_interval(), {1, 0}};
  family.blocks[unit_interval()] = {{1, 0}, {1, 1}};
  family.blocks[{1, 0}] = {{2, 0}};  // [1/2,1) never meets it
  const JonesReport report = check_jones(family);
  CHECK(!report.satisfied);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations.front().condition == "J4");
}

TEST_CASE("general members that straddle break the nestedness condition") {
  GeneralFamily family;
  family.index_set = {unit_interval(), {1, 0}};
  family.blocks[unit_interval()] = {DyadicSet::from_intervals({{1, 0}, {2, 3}})};
  family.blocks[{1, 0}] = {DyadicSet::from_intervals({{2, 1}, {2, 2}})};
  const JonesReport report = check_jones(family);
  CHECK(!report.satisfied);
  CHECK(has_condition(report, "J1"));
}

TEST_CASE("minimal constant is the worst exact measure ratio") {
  const JonesReport report = check_jones(kappa_two_family());
  CHECK(report.satisfied);
  CHECK(report.kappa == 2);
  CHECK(verify_nesting_consequences(kappa_two_family()));
}

TEST_CASE("nesting consequences reject unsatisfying input") {
  IntervalFamily shared;
  shared.index_set = {{1, 0}, {1, 1}};
  shared.blocks[{1, 0}] = {unit_interval()};
  shared.blocks[{1, 1}] = {unit_interval()};
  CHECK_THROWS_AS(verify_nesting_consequences(shared), std::invalid_argument);
}

TEST_CASE("families validate their index bookkeeping") {
  IntervalFamily unsorted;
  unsorted.index_set = {{1, 0}, unit_interval()};
  unsorted.blocks[{1, 0}] = {{1, 0}};
  unsorted.blocks[unit_interval()] = {unit_interval()};
  CHECK_THROWS_AS(check_jones(unsorted), std::invalid_argument);

  IntervalFamily missing;
  missing.index_set = {unit_interval(), {1, 0}};
  missing.blocks[unit_interval()] = {unit_interval()};
  CHECK_THROWS_AS(check_jones(missing), std::invalid_argument);
}

TEST_CASE("reiteration over an identity base pools the selected names") {
  const IntervalFamily base = identity_family(2);
  SelectorFamily selector;
  selector.index_set = {unit_interval(), {1, 0}, {1, 1}};
  selector.members[unit_interval()] = {unit_interval()};
  selector.members[{1, 0}] = {{2, 0}};
  selector.members[{1, 1}] = {{2, 2}, {2, 3}};
  const ReiterationResult result = reiterate(base, selector);
  REQUIRE(result.ok);
  CHECK(result.base_report.kappa == 1);
  CHECK(result.selector_report.satisfied);
  CHECK(result.composed.blocks.at(unit_interval()) ==
        std::vector<DyadicInterval>{unit_interval()});
  CHECK(result.composed.blocks.at({1, 0}) == std::vector<DyadicInterval>{{2, 0}});
  CHECK(result.composed.blocks.at({1, 1}) == std::vector<DyadicInterval>{{2, 2}, {2, 3}});
  const JonesReport composed = check_jones(result.composed);
  CHECK(composed.satisfied);
  CHECK(composed.kappa == result.selector_report.kappa);
}

TEST_CASE("reiterating two cover constructions keeps constant one") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::identity;
  spec.depth = 8;  // the seven indices need seven distinct frequencies
  const OperatorMatrix T = generate(spec);
  const DiagonalizationResult diag = quasi_diagonalize(T, Rational(1), Rational(1), 2);
  REQUIRE(diag.ok);
  REQUIRE(check_jones(diag.basis.family).kappa == 1);

  SelectorFamily selector;
  selector.index_set = {unit_interval(), {1, 0}, {1, 1}};
  selector.members[unit_interval()] = {unit_interval()};
  selector.members[{1, 0}] = {{2, 0}, {2, 1}};
  selector.members[{1, 1}] = {{2, 2}, {2, 3}};
  const ReiterationResult result = reiterate(diag.basis.family, selector);
  REQUIRE(result.ok);
  CHECK(result.selector_report.kappa == 1);
  const JonesReport composed = check_jones(result.composed);
  CHECK(composed.satisfied);
  CHECK(composed.kappa == 1);
}

TEST_CASE("composed unions equal the pooled base unions") {
  std::mt19937_64 rng(41);
  const IntervalFamily base = random_cover_family(rng, 2);
  REQUIRE(check_jones(base).satisfied);
  const SelectorFamily selector = random_spread_selector(rng);
  const ReiterationResult result = reiterate(base, selector);
  REQUIRE(result.ok);
  for (const auto& index : selector.index_set) {
    DyadicSet pooled;
    std::vector<DyadicInterval> pool;
    for (const auto& name : selector.members.at(index)) {
      const DyadicSet part = base.block_set(name);
      pool.insert(pool.end(), part.parts().begin(), part.parts().end());
    }
    CHECK(result.composed.block_set(index) == DyadicSet::from_intervals(pool));
  }
}

TEST_CASE("composed constant is bounded by the product of the two constants") {
  std::mt19937_64 rng(43);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const IntervalFamily base = random_cover_family(rng, 2);
    const SelectorFamily selector = random_spread_selector(rng);
    const ReiterationResult result = reiterate(base, selector);
    REQUIRE(result.ok);
    const JonesReport composed = check_jones(result.composed);
    REQUIRE(composed.satisfied);
    CHECK(composed.kappa <= result.base_report.kappa * result.selector_report.kappa);
    if (result.base_report.kappa > 1) ++checked;
  }
  CHECK(checked > 0);  // the suite must exercise nontrivial base constants
}

TEST_CASE("reiteration reports failures instead of composing") {
  IntervalFamily broken;
  broken.index_set = {unit_interval(), {1, 0}};
  broken.blocks[unit_interval()] = {{1, 0}, {1, 1}};
  broken.blocks[{1, 0}] = {{2, 0}};
  SelectorFamily selector;
  selector.index_set = {unit_interval()};
  selector.members[unit_interval()] = {unit_interval()};
  const ReiterationResult result = reiterate(broken, selector);
  CHECK(!result.ok);
  CHECK(!result.base_report.satisfied);
  CHECK(result.composed.index_set.empty());

  SelectorFamily dangling;
  dangling.index_set = {unit_interval()};
  dangling.members[unit_interval()] = {{3, 1}};
  CHECK_THROWS_AS(reiterate(identity_family(1), dangling), std::invalid_argument);

  SelectorFamily incomplete;
  incomplete.index_set = {unit_interval(), {1, 0}};
  incomplete.members[unit_interval()] = {unit_interval()};
  CHECK_THROWS_AS(reiterate(identity_family(1), incomplete), std::invalid_argument);
}
