#include "haarfactor/jones.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace haarfactor {
namespace {

// Endpoints on the common grid of generation kMaxGeneration; fits in 48 bits.
std::int64_t left_key(const DyadicInterval& iv) {
  return iv.k << (kMaxGeneration - iv.n);
}
std::int64_t right_key(const DyadicInterval& iv) {
  return (iv.k + 1) << (kMaxGeneration - iv.n);
}

std::string interval_text(const DyadicInterval& iv) {
  const std::int64_t den = std::int64_t{1} << iv.n;
  std::ostringstream os;
  os << "[" << iv.k << "/" << den << "," << (iv.k + 1) << "/" << den << ")";
  return os.str();
}

std::string set_text(const DyadicSet& s) {
  std::ostringstream os;
  os << "{";
  const auto& parts = s.parts();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i == 4) {
      os << ",...";
      break;
    }
    if (i) os << ",";
    os << interval_text(parts[i]);
  }
  os << "}";
  return os.str();
}

// Measure of s ∩ N for a single interval N: binary search the sorted disjoint
// parts, then walk the overlapping range.
Rational intersection_measure(const DyadicSet& s, const DyadicInterval& n) {
  const auto& parts = s.parts();
  const std::int64_t nl = left_key(n), nr = right_key(n);
  auto it = std::partition_point(parts.begin(), parts.end(), [&](const DyadicInterval& p) {
    return right_key(p) <= nl;
  });
  Rational total(0);
  for (; it != parts.end() && left_key(*it) < nr; ++it) {
    if (contains(n, *it)) {
      total += measure(*it);
    } else if (contains(*it, n)) {
      return measure(n);  // parts are disjoint: nothing else can overlap
    }
  }
  return total;
}

// Both family kinds normalized to one shape; `simple` marks the all-singleton
// case where (J1) nestedness is automatic.
struct FamilyView {
  std::vector<DyadicInterval> indices;
  std::vector<std::vector<DyadicSet>> members;
  std::vector<DyadicSet> bsets;
  std::vector<Rational> bmeasures;
  bool simple = false;
};

void validate_indices(const std::vector<DyadicInterval>& indices, std::size_t block_count) {
  for (std::size_t i = 0; i + 1 < indices.size(); ++i) {
    if (ordering(indices[i]) >= ordering(indices[i + 1])) {
      throw std::invalid_argument("family index set must be strictly sorted by ordering");
    }
  }
  if (indices.size() != block_count) {
    throw std::invalid_argument("family index set and block map must cover the same indices");
  }
}

FamilyView make_view(const IntervalFamily& f) {
  validate_indices(f.index_set, f.blocks.size());
  FamilyView v;
  v.simple = true;
  v.indices = f.index_set;
  v.members.reserve(f.index_set.size());
  v.bsets.reserve(f.index_set.size());
  for (const auto& index : f.index_set) {
    auto it = f.blocks.find(index);
    if (it == f.blocks.end()) {
      throw std::invalid_argument("family block map is missing an index");
    }
    std::vector<DyadicSet> ms;
    ms.reserve(it->second.size());
    for (const auto& iv : it->second) ms.push_back(DyadicSet::single(iv));
    v.members.push_back(std::move(ms));
    v.bsets.push_back(DyadicSet::from_intervals(it->second));
    v.bmeasures.push_back(v.bsets.back().set_measure());
  }
  return v;
}

FamilyView make_view(const GeneralFamily& f) {
  validate_indices(f.index_set, f.blocks.size());
  FamilyView v;
  v.simple = false;
  v.indices = f.index_set;
  for (const auto& index : f.index_set) {
    auto it = f.blocks.find(index);
    if (it == f.blocks.end()) {
      throw std::invalid_argument("family block map is missing an index");
    }
    v.members.push_back(it->second);
    std::vector<DyadicInterval> pool;
    for (const auto& m : it->second) {
      pool.insert(pool.end(), m.parts().begin(), m.parts().end());
    }
    v.bsets.push_back(DyadicSet::from_intervals(std::move(pool)));
    v.bmeasures.push_back(v.bsets.back().set_measure());
  }
  return v;
}

void check_j1(const FamilyView& v, std::vector<JonesViolation>& out) {
  if (v.simple) return;  // single intervals: positive measure and nested by shape
  std::vector<std::pair<std::size_t, const DyadicSet*>> all;
  for (std::size_t i = 0; i < v.indices.size(); ++i) {
    for (const auto& m : v.members[i]) {
      if (m.empty()) {
        out.push_back({"J1", "empty member in collection at " + interval_text(v.indices[i])});
      } else {
        all.emplace_back(i, &m);
      }
    }
  }
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      const DyadicSet& x = *all[a].second;
      const DyadicSet& y = *all[b].second;
      if (!subset_of(x, y) && !subset_of(y, x) && !disjoint(x, y)) {
        out.push_back({"J1", "members " + set_text(x) + " and " + set_text(y) +
                                 " neither nested nor disjoint"});
      }
    }
  }
}

// Pairwise disjointness of a list of intervals via one sweep in position
// order: any overlap shows up against the running furthest-right interval.
bool intervals_pairwise_disjoint(std::vector<DyadicInterval> list) {
  std::sort(list.begin(), list.end(), [](const DyadicInterval& a, const DyadicInterval& b) {
    const auto la = left_key(a), lb = left_key(b);
    return la != lb ? la < lb : a.n < b.n;
  });
  std::int64_t max_right = 0;
  bool first = true;
  for (const auto& iv : list) {
    if (!first && left_key(iv) < max_right) return false;
    max_right = std::max(max_right, right_key(iv));
    first = false;
  }
  return true;
}

void check_j2(const FamilyView& v, std::vector<JonesViolation>& out) {
  std::map<DyadicSet, std::size_t> owner;
  for (std::size_t i = 0; i < v.indices.size(); ++i) {
    const auto& ms = v.members[i];
    if (ms.empty()) {
      out.push_back({"J2", "collection at " + interval_text(v.indices[i]) + " is empty"});
      continue;
    }
    bool disjoint_ok = true;
    if (v.simple) {
      std::vector<DyadicInterval> list;
      list.reserve(ms.size());
      for (const auto& m : ms) list.push_back(m.parts().front());
      disjoint_ok = intervals_pairwise_disjoint(std::move(list));
    } else {
      for (std::size_t a = 0; a < ms.size() && disjoint_ok; ++a) {
        for (std::size_t b = a + 1; b < ms.size() && disjoint_ok; ++b) {
          disjoint_ok = disjoint(ms[a], ms[b]);
        }
      }
    }
    if (!disjoint_ok) {
      out.push_back(
          {"J2", "collection at " + interval_text(v.indices[i]) + " has overlapping members"});
    }
    for (const auto& m : ms) {
      auto [it, inserted] = owner.emplace(m, i);
      if (!inserted && it->second != i) {
        out.push_back({"J2", "member " + set_text(m) + " shared by collections at " +
                                 interval_text(v.indices[it->second]) + " and " +
                                 interval_text(v.indices[i])});
      }
    }
  }
}

void check_j3(const FamilyView& v, std::vector<JonesViolation>& out) {
  const std::size_t n = v.indices.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto rel = relation(v.indices[a], v.indices[b]);
      if (rel == IntervalRelation::disjoint) {
        if (b < a) continue;  // symmetric check, test each unordered pair once
        if (!disjoint(v.bsets[a], v.bsets[b])) {
          out.push_back({"J3", "indices " + interval_text(v.indices[a]) + " and " +
                                   interval_text(v.indices[b]) +
                                   " are disjoint but their union sets overlap"});
        }
      } else if (rel == IntervalRelation::second_contains_first) {
        if (!subset_of(v.bsets[a], v.bsets[b])) {
          out.push_back({"J3", "index " + interval_text(v.indices[a]) + " lies inside " +
                                   interval_text(v.indices[b]) +
                                   " but its union set is not included"});
        }
      }
    }
  }
}

struct KappaItem {
  std::size_t inner;   // position of I_0
  std::size_t outer;   // position of I, with I_0 ⊆ I
  std::size_t member;  // position of N within the collection at I
};

struct KappaPartial {
  Rational best = Rational(1);
  std::vector<std::pair<std::size_t, JonesViolation>> tagged;
};

void scan_item(const FamilyView& v, const KappaItem& item, std::size_t tag, KappaPartial& acc) {
  const DyadicSet& member = v.members[item.outer][item.member];
  Rational inter(0);
  if (member.parts().size() == 1) {
    inter = intersection_measure(v.bsets[item.inner], member.parts().front());
  } else {
    inter = intersect(v.bsets[item.inner], member).set_measure();
  }
  if (inter == 0) {
    acc.tagged.emplace_back(
        tag, JonesViolation{"J4", "member " + set_text(member) + " of the collection at " +
                                      interval_text(v.indices[item.outer]) +
                                      " misses the union set of " +
                                      interval_text(v.indices[item.inner])});
    return;
  }
  // |N ∩ B_{I0}|/|N| >= κ^{-1} |B_{I0}|/|B_I|  ⇔  κ >= (|B_{I0}|·|N|)/(|B_I|·|N∩B_{I0}|)
  Rational ratio =
      (v.bmeasures[item.inner] * member.set_measure()) / (v.bmeasures[item.outer] * inter);
  if (ratio > acc.best) acc.best = std::move(ratio);
}

void check_j4(const FamilyView& v, Exec mode, Rational& kappa,
              std::vector<JonesViolation>& out) {
  std::vector<KappaItem> items;
  for (std::size_t a = 0; a < v.indices.size(); ++a) {
    for (std::size_t b = 0; b < v.indices.size(); ++b) {
      if (a == b || relation(v.indices[a], v.indices[b]) != IntervalRelation::second_contains_first)
        continue;
      for (std::size_t m = 0; m < v.members[b].size(); ++m) items.push_back({a, b, m});
    }
  }
  KappaPartial total;
  if (use_parallel(mode, items.size())) {
#ifdef _OPENMP
#pragma omp parallel
    {
      KappaPartial local;
#pragma omp for schedule(dynamic, 64) nowait
      for (std::int64_t t = 0; t < static_cast<std::int64_t>(items.size()); ++t) {
        scan_item(v, items[static_cast<std::size_t>(t)], static_cast<std::size_t>(t), local);
      }
#pragma omp critical
      {
        if (local.best > total.best) total.best = std::move(local.best);
        total.tagged.insert(total.tagged.end(), std::make_move_iterator(local.tagged.begin()),
                            std::make_move_iterator(local.tagged.end()));
      }
    }
#endif
  } else {
    for (std::size_t t = 0; t < items.size(); ++t) scan_item(v, items[t], t, total);
  }
  std::sort(total.tagged.begin(), total.tagged.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (auto& [tag, viol] : total.tagged) out.push_back(std::move(viol));
  kappa = std::move(total.best);
}

JonesReport check_view(const FamilyView& v, Exec mode) {
  JonesReport report;
  check_j1(v, report.violations);
  check_j2(v, report.violations);
  check_j3(v, report.violations);
  check_j4(v, mode, report.kappa, report.violations);
  report.satisfied = report.violations.empty();
  return report;
}

bool consequences_hold(const FamilyView& v) {
  const std::size_t n = v.indices.size();
  // (i) the union sets form a nested collection
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!subset_of(v.bsets[a], v.bsets[b]) && !subset_of(v.bsets[b], v.bsets[a]) &&
          !disjoint(v.bsets[a], v.bsets[b])) {
        return false;
      }
    }
  }
  // (ii) set inclusion mirrors index inclusion, both directions
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const bool idx_in = contains(v.indices[b], v.indices[a]);
      const bool set_in = subset_of(v.bsets[a], v.bsets[b]);
      if (idx_in != set_in) return false;
    }
  }
  // (iii) each inner member sits inside one member of the enclosing collection
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b || relation(v.indices[a], v.indices[b]) != IntervalRelation::second_contains_first)
        continue;
      for (const auto& inner : v.members[a]) {
        bool covered = false;
        for (const auto& outer : v.members[b]) {
          if (subset_of(inner, outer)) {
            covered = true;
            break;
          }
        }
        if (!covered) return false;
      }
    }
  }
  return true;
}

}  // namespace

DyadicSet IntervalFamily::block_set(const DyadicInterval& index) const {
  auto it = blocks.find(index);
  if (it == blocks.end()) throw std::invalid_argument("no collection at the requested index");
  return DyadicSet::from_intervals(it->second);
}

DyadicSet GeneralFamily::block_set(const DyadicInterval& index) const {
  auto it = blocks.find(index);
  if (it == blocks.end()) throw std::invalid_argument("no collection at the requested index");
  std::vector<DyadicInterval> pool;
  for (const auto& m : it->second) pool.insert(pool.end(), m.parts().begin(), m.parts().end());
  return DyadicSet::from_intervals(std::move(pool));
}

JonesReport check_jones(const GeneralFamily& family, Exec mode) {
  return check_view(make_view(family), mode);
}

JonesReport check_jones(const IntervalFamily& family, Exec mode) {
  return check_view(make_view(family), mode);
}

bool verify_nesting_consequences(const GeneralFamily& family) {
  FamilyView v = make_view(family);
  if (!check_view(v, Exec::automatic).satisfied) {
    throw std::invalid_argument("nesting consequences are only defined for satisfying families");
  }
  return consequences_hold(v);
}

bool verify_nesting_consequences(const IntervalFamily& family) {
  FamilyView v = make_view(family);
  if (!check_view(v, Exec::automatic).satisfied) {
    throw std::invalid_argument("nesting consequences are only defined for satisfying families");
  }
  return consequences_hold(v);
}

ReiterationResult reiterate(const IntervalFamily& base, const SelectorFamily& selector,
                            Exec mode) {
  ReiterationResult result;
  result.base_report = check_jones(base, mode);

  GeneralFamily view;
  view.index_set = selector.index_set;
  for (const auto& index : selector.index_set) {
    auto it = selector.members.find(index);
    if (it == selector.members.end()) {
      throw std::invalid_argument("selector member map is missing an index");
    }
    std::vector<DyadicSet> ms;
    ms.reserve(it->second.size());
    for (const auto& name : it->second) {
      if (!base.blocks.count(name)) {
        throw std::invalid_argument("selector references a base index that does not exist");
      }
      ms.push_back(base.block_set(name));
    }
    view.blocks.emplace(index, std::move(ms));
  }
  result.selector_report = check_jones(view, mode);
  result.ok = result.base_report.satisfied && result.selector_report.satisfied;
  if (!result.ok) return result;

  result.composed.index_set = selector.index_set;
  for (const auto& index : selector.index_set) {
    std::vector<DyadicInterval> pooled;
    for (const auto& name : selector.members.at(index)) {
      const auto& src = base.blocks.at(name);
      pooled.insert(pooled.end(), src.begin(), src.end());
    }
    std::sort(pooled.begin(), pooled.end(),
              [](const DyadicInterval& a, const DyadicInterval& b) {
                return ordering(a) < ordering(b);
              });
    result.composed.blocks.emplace(index, std::move(pooled));
  }
  return result;
}

}  // namespace haarfactor
