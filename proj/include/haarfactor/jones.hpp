#pragma once

#include <map>
#include <string>
#include <vector>

#include "haarfactor/dyadic.hpp"
#include "haarfactor/dyadic_set.hpp"
#include "haarfactor/exec.hpp"
#include "haarfactor/rational.hpp"

namespace haarfactor {

// Family of interval collections indexed by dyadic intervals: index I carries
// the collection of intervals whose union is the set B_I.
struct IntervalFamily {
  std::vector<DyadicInterval> index_set;  // sorted by ordering
  std::map<DyadicInterval, std::vector<DyadicInterval>> blocks;

  DyadicSet block_set(const DyadicInterval& index) const;
};

// Same shape with general finite unions as members (needed after reiteration,
// where the selector's members are whole sets).
struct GeneralFamily {
  std::vector<DyadicInterval> index_set;
  std::map<DyadicInterval, std::vector<DyadicSet>> blocks;

  DyadicSet block_set(const DyadicInterval& index) const;
};

struct JonesViolation {
  std::string condition;  // "J1".."J4"
  std::string detail;
};

struct JonesReport {
  bool satisfied = false;
  Rational kappa = Rational(1);  // minimal compatibility constant when satisfied
  std::vector<JonesViolation> violations;
};

// Checks the four compatibility conditions exactly and computes the minimal
// constant as a maximum of exact measure ratios.
JonesReport check_jones(const GeneralFamily& family, Exec mode = Exec::automatic);
JonesReport check_jones(const IntervalFamily& family, Exec mode = Exec::automatic);

// Redundant structural consequences of the conditions: (i) the union sets are
// nested, (ii) set inclusion mirrors index inclusion, (iii) each member of an
// inner collection sits inside a single member of the enclosing one.  Throws
// if the family does not satisfy the conditions in the first place.
bool verify_nesting_consequences(const GeneralFamily& family);
bool verify_nesting_consequences(const IntervalFamily& family);

// Selector for reiteration: index J carries the names (index intervals) of
// base-family collections whose members are pooled into the composed family.
struct SelectorFamily {
  std::vector<DyadicInterval> index_set;
  std::map<DyadicInterval, std::vector<DyadicInterval>> members;
};

struct ReiterationResult {
  bool ok = false;
  IntervalFamily composed;
  JonesReport base_report;
  JonesReport selector_report;
};

// Pools base collections through the selector; the composed constant is
// bounded by the product of the two inputs' constants.
ReiterationResult reiterate(const IntervalFamily& base, const SelectorFamily& selector,
                            Exec mode = Exec::automatic);

}  // namespace haarfactor
