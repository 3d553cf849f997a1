#include "haarfactor/quasi_diag.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "haarfactor/dyadic_set.hpp"

namespace haarfactor {
namespace {

std::int64_t left_key(const DyadicInterval& iv) {
  return iv.k << (kMaxGeneration - iv.n);
}

Rational step_budget(const Rational& eta, std::uint64_t i, const Rational& norm_sq) {
  return eta * pow_rational(Rational(1, 4), static_cast<unsigned>(i)) * norm_sq;
}

// Exact interaction majorant at level m: sum over prior images of the
// absolute coefficient mass their images place on the cover intervals.
Rational interaction_majorant(const std::vector<HaarVector>& images,
                              const std::vector<DyadicInterval>& halves, int m) {
  Rational total(0);
  for (const auto& image : images) {
    for (const auto& [iv, value] : image.coeffs()) {
      if (iv.n != m) continue;
      auto it = std::partition_point(halves.begin(), halves.end(), [&](const DyadicInterval& h) {
        return left_key(h) <= left_key(iv);
      });
      if (it == halves.begin()) continue;
      if (contains(*std::prev(it), iv)) total += abs(value) * measure(iv);
    }
  }
  return total;
}

}  // namespace

std::vector<DyadicInterval> gamlen_gaudet_children(
    const std::vector<DyadicInterval>& parent_blocks, Side side, int m) {
  if (parent_blocks.empty()) throw std::invalid_argument("parent block list is empty");
  if (m > kMaxGeneration) throw std::invalid_argument("cover level beyond the generation cap");
  Rational summed(0);
  for (const auto& p : parent_blocks) summed += measure(p);
  if (DyadicSet::from_intervals(parent_blocks).set_measure() != summed) {
    throw std::invalid_argument("parent blocks must be pairwise disjoint");
  }
  std::vector<DyadicInterval> cover;
  for (const auto& p : parent_blocks) {
    const DyadicInterval half = side == Side::left ? left_half(p) : right_half(p);
    if (m < half.n) {
      throw std::invalid_argument("cover level too small: the half cover would not be exact");
    }
    const int shift = m - half.n;
    const std::int64_t first = half.k << shift;
    const std::int64_t last = (half.k + 1) << shift;
    for (std::int64_t k = first; k < last; ++k) cover.push_back({m, k});
  }
  std::sort(cover.begin(), cover.end(),
            [](const DyadicInterval& a, const DyadicInterval& b) { return a.k < b.k; });
  return cover;
}

SignAssignment choose_signs(const OperatorMatrix& T, const std::vector<DyadicInterval>& F) {
  std::vector<DyadicInterval> order = F;
  std::sort(order.begin(), order.end(), [](const DyadicInterval& a, const DyadicInterval& b) {
    return ordering(a) < ordering(b);
  });
  std::set<DyadicInterval> fset(order.begin(), order.end());
  if (fset.size() != order.size()) {
    throw std::invalid_argument("sign choice needs distinct intervals");
  }

  SignAssignment out;
  std::map<DyadicInterval, int> fixed;
  std::map<DyadicInterval, Rational> acc;  // acc[row] = sum_s eps_s t_{row, K_s}
  for (const auto& kt : order) {
    // S_t = sum_{s<t} eps_s (<r_{K_s}, h_{K_t}> + <r_{K_t}, h_{K_s}>)
    Rational s(0);
    auto a = acc.find(kt);
    if (a != acc.end()) s += measure(kt) * a->second;
    auto col = T.columns().find(kt);
    if (col != T.columns().end()) {
      for (const auto& [row, t] : col->second) {
        auto fx = fixed.find(row);
        if (fx != fixed.end()) s += fx->second * t * measure(row);
      }
    }
    const int eps = s >= 0 ? +1 : -1;  // ties go to +1
    out.signs[kt] = eps;
    fixed.emplace(kt, eps);
    if (col != T.columns().end()) {
      for (const auto& [row, t] : col->second) {
        if (fset.count(row)) acc[row] += eps * t;
      }
    }
  }
  return out;
}

Rational interaction_functional(const OperatorMatrix& T, const std::vector<DyadicInterval>& F,
                                const SignAssignment& signs) {
  std::set<DyadicInterval> fset(F.begin(), F.end());
  Rational x(0);
  for (const auto& k0 : F) {
    auto col = T.columns().find(k0);
    if (col == T.columns().end()) continue;
    const int e0 = signs.at(k0);
    for (const auto& [k1, t] : col->second) {
      if (k1 == k0 || !fset.count(k1)) continue;
      x += Rational(e0 * signs.at(k1)) * t * measure(k1);
    }
  }
  return x;
}

FrequencySelection select_frequency(const OperatorMatrix& T,
                                    const std::vector<HaarVector>& prior_blocks,
                                    const std::set<int>& candidate_levels,
                                    const std::vector<DyadicInterval>& parent_blocks, Side side,
                                    const Rational& budget, Exec mode) {
  if (candidate_levels.empty()) throw std::invalid_argument("no candidate levels");

  std::vector<DyadicInterval> halves;
  halves.reserve(parent_blocks.size());
  int min_m = 0;
  for (const auto& p : parent_blocks) {
    halves.push_back(side == Side::left ? left_half(p) : right_half(p));
    min_m = std::max(min_m, halves.back().n);
  }
  std::sort(halves.begin(), halves.end(), [](const DyadicInterval& a, const DyadicInterval& b) {
    return left_key(a) < left_key(b);
  });

  std::vector<int> candidates;
  for (int m : candidate_levels) {
    if (m >= min_m && m <= T.depth()) candidates.push_back(m);
  }
  FrequencySelection sel;
  if (candidates.empty()) return sel;

  std::vector<HaarVector> images;
  images.reserve(prior_blocks.size());
  for (const auto& b : prior_blocks) images.push_back(T.apply(b));

  std::vector<Rational> values(candidates.size());
  const std::size_t work = candidates.size() * (images.size() + 1);
  if (use_parallel(mode, work)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(candidates.size()); ++t) {
      values[static_cast<std::size_t>(t)] =
          interaction_majorant(images, halves, candidates[static_cast<std::size_t>(t)]);
    }
#endif
  } else {
    for (std::size_t t = 0; t < candidates.size(); ++t) {
      values[t] = interaction_majorant(images, halves, candidates[t]);
    }
  }

  bool have_best = false;
  for (std::size_t t = 0; t < candidates.size(); ++t) {
    if (values[t] <= budget) {
      sel.ok = true;
      sel.m = candidates[t];
      sel.achieved = values[t];
      return sel;
    }
    if (!have_best || values[t] < sel.best_value) {
      sel.best_value = values[t];
      sel.best_m = candidates[t];
      have_best = true;
    }
  }
  return sel;
}

SieveSelection sieve_select(const OperatorMatrix& T, const HaarVector& b,
                            const std::set<int>& available_levels, const Rational& budget,
                            const Rational& eta, Exec mode) {
  if (available_levels.empty()) throw std::invalid_argument("no available levels to sieve");
  if (eta <= 0) throw std::invalid_argument("eta must be positive");

  const HaarVector c = adjoint_vector(T, b);
  // Exact per-level contribution: the certifying norm of a single level.
  std::map<int, Rational> level_mass;
  for (int m : available_levels) level_mass[m] = Rational(0);
  for (const auto& [iv, value] : c.coeffs()) {
    auto it = level_mass.find(iv.n);
    if (it != level_mass.end()) it->second += abs(value) * measure(iv);
  }

  SieveSelection out;
  Rational best;
  bool have_best = false;
  auto certify = [&](const std::set<int>& lam) {
    Rational hi = h1_enclosure(project_levels(c, lam), mode).hi;
    if (!have_best || hi < best) {
      best = hi;
      have_best = true;
    }
    return hi;
  };
  auto accept = [&](std::set<int> lam, Rational hi) {
    out.ok = true;
    out.lambda = std::move(lam);
    out.certified_hi = std::move(hi);
  };

  // Levels carrying no coefficient mass never affect the certificate.
  std::set<int> free_levels;
  std::vector<int> loaded;
  for (const auto& [m, mass] : level_mass) {
    if (mass == 0) {
      free_levels.insert(m);
    } else {
      loaded.push_back(m);
    }
  }

  // 1) admit everything
  {
    Rational hi = certify(available_levels);
    if (hi <= budget) {
      accept(available_levels, std::move(hi));
      return out;
    }
  }

  // 2) largest prefix in increasing order of exact per-level contribution
  std::sort(loaded.begin(), loaded.end(), [&](int x, int y) {
    const Rational &mx = level_mass.at(x), &my = level_mass.at(y);
    return mx != my ? mx < my : x < y;
  });
  std::vector<int> admitted;
  Rational running(0);
  for (int m : loaded) {
    if (running + level_mass.at(m) > budget) break;
    running += level_mass.at(m);
    admitted.push_back(m);
  }
  while (!admitted.empty()) {
    std::set<int> lam = free_levels;
    lam.insert(admitted.begin(), admitted.end());
    Rational hi = certify(lam);
    if (hi <= budget) {
      accept(std::move(lam), std::move(hi));
      return out;
    }
    admitted.pop_back();  // enclosure slack pushed it over; retreat one level
  }
  if (!free_levels.empty()) {
    std::set<int> lam = free_levels;
    Rational hi = certify(lam);  // exact zero: the projection is empty
    if (hi <= budget) {
      accept(std::move(lam), std::move(hi));
      return out;
    }
  }

  // 3) pigeonhole: split the loaded levels into ceil(norm_bound^2/eta^2)
  // round-robin groups and certify each group (plus the free levels).
  if (!loaded.empty()) {
    const Rational ratio = (T.norm_bound() * T.norm_bound()) / (eta * eta);
    Integer k_int;
    mpz_cdiv_q(k_int.get_mpz_t(), ratio.get_num_mpz_t(), ratio.get_den_mpz_t());
    std::size_t k = loaded.size();
    if (k_int >= 1 && k_int < static_cast<long>(loaded.size())) {
      k = static_cast<std::size_t>(k_int.get_si());
    }
    std::sort(loaded.begin(), loaded.end());
    for (std::size_t g = 0; g < k; ++g) {
      std::set<int> lam = free_levels;
      for (std::size_t t = g; t < loaded.size(); t += k) lam.insert(loaded[t]);
      Rational hi = certify(lam);
      if (hi <= budget) {
        accept(std::move(lam), std::move(hi));
        return out;
      }
    }
  }

  out.achieved_min = have_best ? best : Rational(0);
  return out;
}

DiagonalizationResult quasi_diagonalize(const OperatorMatrix& T, const Rational& delta,
                                        const Rational& eta, int index_depth, Exec mode) {
  if (eta <= 0) throw std::invalid_argument("eta must be positive");
  if (delta < 0) throw std::invalid_argument("delta must be nonnegative");
  if (index_depth < 0 || index_depth > T.depth()) {
    throw std::invalid_argument("index depth must lie within the operator depth");
  }
  if (!has_large_diagonal(T, delta)) {
    throw std::invalid_argument("operator misses the diagonal floor");
  }

  SignNormalization norm;
  if (delta > 0) {
    norm = normalize_diagonal_signs(T, delta);
  } else {
    norm.op = T;  // keep the operator untouched so complements stay comparable
  }
  const OperatorMatrix& W = norm.op;
  const int N = T.depth();
  const std::uint64_t steps = tree_size(index_depth);

  DiagonalizationResult out;
  out.sigma = norm.sigma;
  DiagonalizationCertificate& cert = out.certificate;
  cert.eta = eta;
  cert.delta = delta;
  cert.depth = N;
  cert.index_depth = index_depth;
  cert.scope_note =
      "future-pairing bounds quantify over vectors supported on the recorded level sets "
      "up to the operator depth";

  IntervalFamily family;
  SignAssignment signs;
  std::vector<HaarVector> blocks;
  std::vector<HaarVector> images;  // W b_j, cached for the predecessor sums
  std::set<int> lambda;            // levels still admissible after the last sieve
  for (int m = 0; m <= N; ++m) lambda.insert(m);
  int last_m = -1;

  auto fail = [&](std::string stage, std::string detail, const DyadicInterval& index,
                  Rational achieved, Rational budget, std::uint64_t step) {
    out.ok = false;
    cert.feasible = false;
    out.infeasibility.stage = std::move(stage);
    out.infeasibility.detail = std::move(detail);
    out.infeasibility.index = index;
    out.infeasibility.achieved = std::move(achieved);
    out.infeasibility.budget = std::move(budget);
    const std::uint64_t remaining = steps - step;
    out.infeasibility.needed_depth_hint =
        N + static_cast<int>(std::min<std::uint64_t>(remaining, 64));
  };

  for (std::uint64_t i = 0; i < steps; ++i) {
    const DyadicInterval index = from_ordering(i);
    std::vector<DyadicInterval> cover;
    int m = 0;
    if (i == 0) {
      cover = {unit_interval()};
      m = 0;
    } else {
      const DyadicInterval up = parent(index);
      const Side side = is_left_child(index) ? Side::left : Side::right;
      const std::vector<DyadicInterval>& parents = family.blocks.at(up);
      std::set<int> candidates;
      for (int level : lambda) {
        if (level > last_m) candidates.insert(level);
      }
      const Rational budget = step_budget(eta, i, measure(index));
      if (candidates.empty()) {
        fail("select_frequency", "no admissible levels remain", index, Rational(0), budget, i);
        return out;
      }
      FrequencySelection sel =
          select_frequency(W, blocks, candidates, parents, side, budget, mode);
      if (!sel.ok) {
        fail("select_frequency", "no candidate level fits the interaction budget", index,
             sel.best_value, budget, i);
        return out;
      }
      m = sel.m;
      cover = gamlen_gaudet_children(parents, side, m);
    }

    SignAssignment cover_signs = choose_signs(W, cover);
    HaarVector b;
    Rational norm_sq(0);
    for (const auto& k : cover) {
      b.set_coeff(k, Rational(cover_signs.signs.at(k)));
      norm_sq += measure(k);
      signs.signs[k] = cover_signs.signs.at(k);
    }

    const Rational budget = step_budget(eta, i, norm_sq);
    HaarVector image = W.apply(b);
    Rational predecessor_sum(0);
    for (const auto& prior_image : images) {
      predecessor_sum += abs(inner_product(prior_image, b));
    }
    const Rational diagonal = inner_product(image, b);

    std::set<int> available;
    for (int level : lambda) {
      if (level > m) available.insert(level);
    }
    Rational future_hi(0);
    if (available.empty()) {
      lambda.clear();  // vacuous tail: no later block can exist
    } else {
      SieveSelection sieve = sieve_select(W, b, available, budget, eta, mode);
      if (!sieve.ok) {
        fail("sieve_select", "no level subset certifies the future-pairing budget", index,
             sieve.achieved_min, budget, i);
        return out;
      }
      lambda = sieve.lambda;
      future_hi = sieve.certified_hi;
    }
    last_m = m;

    StepRecord record;
    record.index = index;
    record.frequency = m;
    record.predecessor_sum = predecessor_sum;
    record.predecessor_budget = budget;
    record.diagonal_value = diagonal;
    record.diagonal_floor = delta * norm_sq;
    record.diagonal_enforced = delta > 0;
    record.future_hi = future_hi;
    record.future_budget = budget;
    cert.per_index.push_back(std::move(record));
    cert.lambda_sets.emplace_back(lambda.begin(), lambda.end());

    family.index_set.push_back(index);
    family.blocks.emplace(index, std::move(cover));
    blocks.push_back(std::move(b));
    images.push_back(std::move(image));
  }

  cert.feasible = true;
  out.ok = true;
  out.basis = build_block_basis(family, signs);
  return out;
}

}  // namespace haarfactor
