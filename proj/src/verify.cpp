#include "haarfactor/verify.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "haarfactor/block_basis.hpp"
#include "haarfactor/jones.hpp"

namespace haarfactor {
namespace {

struct Checker {
  std::vector<std::string> failures;

  bool check(bool ok, const std::string& message) {
    if (!ok) failures.push_back(message);
    return ok;
  }
  VerifyOutcome outcome() && { return {failures.empty(), std::move(failures)}; }
};

std::string step_tag(std::size_t i, const DyadicInterval& iv) {
  std::ostringstream os;
  os << "step " << i << " (index [" << iv.k << "/2^" << iv.n << "))";
  return os.str();
}

OperatorMatrix right_signed(const OperatorMatrix& T, const DiagonalSigns& sigma) {
  if (sigma.flipped.empty()) return T;
  OperatorMatrix W(T.depth());
  W.set_norm_bound(T.norm_bound(), T.norm_bound_source());
  for (const auto& [col, column] : T.columns()) {
    const Rational s(sigma.at(col));
    for (const auto& [row, value] : column) W.set_entry(row, col, value * s);
  }
  return W;
}

bool same_infeasibility(const InfeasibilityReport& a, const InfeasibilityReport& b) {
  return a.stage == b.stage && a.detail == b.detail && a.index == b.index &&
         a.achieved == b.achieved && a.budget == b.budget &&
         a.needed_depth_hint == b.needed_depth_hint;
}

bool same_columns(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a.depth() == b.depth() && a.columns() == b.columns();
}

bool same_family(const IntervalFamily& a, const IntervalFamily& b) {
  return a.index_set == b.index_set && a.blocks == b.blocks;
}

void diag_replay(Checker& c, const OperatorMatrix& T, const DiagonalizationResult& stored,
                 Exec mode) {
  const DiagonalizationCertificate& cert = stored.certificate;
  c.check(cert.depth == T.depth(), "certificate depth differs from the operator depth");
  c.check(cert.feasible == stored.ok, "feasible flag disagrees with the result status");
  if (!c.check(cert.index_depth >= 0 && cert.index_depth <= cert.depth,
               "index depth lies outside the operator depth")) {
    return;
  }

  if (!stored.ok) {
    // Failures carry no inequalities; the deterministic re-run must fail the
    // same way.
    DiagonalizationResult rerun;
    try {
      rerun = quasi_diagonalize(T, cert.delta, cert.eta, cert.index_depth, mode);
    } catch (const std::exception& e) {
      c.check(false, std::string("stored parameters were rejected on re-run: ") + e.what());
      return;
    }
    if (c.check(!rerun.ok, "re-run succeeded where the stored result reports failure")) {
      c.check(same_infeasibility(rerun.infeasibility, stored.infeasibility),
              "re-run failure report differs from the stored one");
    }
    return;
  }

  if (cert.delta > 0) {
    c.check(has_large_diagonal(T, cert.delta),
            "operator does not satisfy the recorded diagonal floor");
    bool sigma_ok = true;
    for (std::uint64_t p = 0; p < tree_size(T.depth()); ++p) {
      const DyadicInterval iv = from_ordering(p);
      const bool flipped = stored.sigma.flipped.count(iv) > 0;
      if (flipped != (T.diagonal_entry(iv) < 0)) sigma_ok = false;
    }
    c.check(sigma_ok, "sign record does not flip exactly the negative diagonal entries");
  } else {
    c.check(stored.sigma.flipped.empty(), "zero-floor run must not normalize signs");
  }

  const std::uint64_t steps = tree_size(cert.index_depth);
  const IntervalFamily& family = stored.basis.family;
  if (!c.check(cert.per_index.size() == steps, "per-step record count differs") ||
      !c.check(cert.lambda_sets.size() == steps, "level set count differs") ||
      !c.check(family.index_set.size() == steps, "family index count differs")) {
    return;
  }

  const JonesReport jones = check_jones(family, mode);
  c.check(jones.satisfied, "family fails the compatibility conditions");
  c.check(jones.kappa == 1, "family constant is not exactly 1");
  c.check(stored.basis.kappa == jones.kappa, "stored constant differs from replay");

  const OperatorMatrix W = right_signed(T, stored.sigma);
  std::vector<HaarVector> images;
  for (std::uint64_t i = 0; i < steps; ++i) {
    const DyadicInterval index = from_ordering(i);
    const StepRecord& step = cert.per_index[i];
    const std::string tag = step_tag(i, index);
    if (!c.check(family.index_set[i] == index && step.index == index,
                 tag + ": index order broken")) {
      return;
    }
    const std::vector<DyadicInterval>& members = family.blocks.at(index);
    const HaarVector& b = stored.basis.vectors.at(index);
    const Rational& norm_sq = stored.basis.norms_sq.at(index);
    c.check(norm_sq == measure(index), tag + ": block norm must equal the index measure");

    const Rational budget =
        cert.eta * pow_rational(make_rational(1, 4), static_cast<unsigned>(i)) * norm_sq;
    c.check(step.predecessor_budget == budget, tag + ": predecessor budget differs");
    c.check(step.future_budget == budget, tag + ": future budget differs");

    if (i == 0) {
      c.check(step.frequency == 0, tag + ": the root block must sit at level 0");
      c.check(members == std::vector<DyadicInterval>{unit_interval()},
              tag + ": the root collection must be the unit interval");
    } else {
      const StepRecord& prev = cert.per_index[i - 1];
      c.check(step.frequency > prev.frequency, tag + ": frequencies must strictly increase");
      const auto& prev_lambda = cert.lambda_sets[i - 1];
      c.check(std::find(prev_lambda.begin(), prev_lambda.end(), step.frequency) !=
                  prev_lambda.end(),
              tag + ": frequency was not admissible after the previous sieve");
      const Side side = is_left_child(index) ? Side::left : Side::right;
      try {
        const std::vector<DyadicInterval> cover =
            gamlen_gaudet_children(family.blocks.at(parent(index)), side, step.frequency);
        c.check(members == cover, tag + ": stored collection is not the recorded cover");
      } catch (const std::exception& e) {
        c.check(false, tag + ": cover reconstruction failed: " + std::string(e.what()));
      }
    }

    Rational predecessor(0);
    for (const HaarVector& prior : images) predecessor += abs(inner_product(prior, b));
    c.check(step.predecessor_sum == predecessor, tag + ": predecessor sum differs");
    c.check(step.predecessor_sum <= step.predecessor_budget,
            tag + ": predecessor sum exceeds its budget");

    HaarVector image = W.apply(b);
    const Rational diagonal = inner_product(image, b);
    c.check(step.diagonal_value == diagonal, tag + ": diagonal pairing differs");
    c.check(step.diagonal_enforced == (cert.delta > 0), tag + ": floor enforcement flag wrong");
    c.check(step.diagonal_floor == cert.delta * norm_sq, tag + ": diagonal floor differs");
    if (step.diagonal_enforced) {
      c.check(step.diagonal_value >= step.diagonal_floor, tag + ": diagonal lost its floor");
    }

    const std::vector<int>& lambda = cert.lambda_sets[i];
    bool levels_ok = std::is_sorted(lambda.begin(), lambda.end()) &&
                     std::adjacent_find(lambda.begin(), lambda.end()) == lambda.end();
    for (int level : lambda) {
      if (level <= step.frequency || level > cert.depth) levels_ok = false;
      if (i > 0) {
        const auto& prev_lambda = cert.lambda_sets[i - 1];
        if (std::find(prev_lambda.begin(), prev_lambda.end(), level) == prev_lambda.end()) {
          levels_ok = false;
        }
      }
    }
    c.check(levels_ok, tag + ": level set is not a sorted admissible subset");

    Rational future(0);
    if (!lambda.empty()) {
      const std::set<int> levels(lambda.begin(), lambda.end());
      future = h1_enclosure(project_levels(adjoint_vector(W, b), levels), mode).hi;
    }
    c.check(step.future_hi == future, tag + ": future certificate differs");
    c.check(step.future_hi <= step.future_budget, tag + ": future bound exceeds its budget");

    images.push_back(std::move(image));
  }
}

// Replay of the block-stage numbers shared by both pipelines.  `W` pairs
// against the blocks, `H` sits in the middle of the diagram; they differ only
// when a sign normalization was folded into R.  `future_direct` supplies the
// per-step sieve bounds, or null when no direct route exists.
struct StageSpec {
  const OperatorMatrix* W = nullptr;
  const OperatorMatrix* H = nullptr;
  const BlockFrame* frame = nullptr;
  const DiagonalSigns* sigma = nullptr;
  const std::vector<Rational>* future_direct = nullptr;
  int index_depth = 0;
  Rational scale_den;    // delta or the effective composed floor
  Rational product_cap;  // (1+eta)/delta or 2+eta
  Rational target;       // expected contraction_target
  bool check_route = false;
};

void block_stage_replay(Checker& c, const StageSpec& spec, const FactorizationResult& stored,
                        Exec mode) {
  const BlockFrame& frame = *spec.frame;
  const std::size_t n = frame.blocks.size();
  if (!c.check(stored.block_errors.size() == n, "block error record count differs") ||
      !c.check(tree_size(spec.index_depth) == n, "index span does not match the block count")) {
    return;
  }

  std::vector<std::vector<Rational>> pair(n, std::vector<Rational>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const HaarVector image = spec.W->apply(frame.blocks[j]);
    for (std::size_t i = 0; i < n; ++i) pair[i][j] = inner_product(image, frame.blocks[i]);
  }

  bool route_ok = true;
  std::vector<Rational> bounds(n);
  for (std::size_t i = 0; i < n; ++i) {
    const BlockErrorRecord& rec = stored.block_errors[i];
    const std::string tag = step_tag(i, frame.index_order[i]);
    c.check(rec.index == frame.index_order[i], tag + ": record index out of order");
    if (!c.check(pair[i][i] != 0, tag + ": diagonal pairing vanishes")) return;
    c.check(rec.diagonal == pair[i][i], tag + ": diagonal pairing differs");
    Rational past(0);
    for (std::size_t j = 0; j < i; ++j) past += abs(pair[i][j]);
    c.check(rec.past_sum == past, tag + ": predecessor sum differs");
    Rational expanded(0), tail_signed(0);
    for (std::size_t j = i + 1; j < n; ++j) {
      expanded += abs(pair[i][j]);
      tail_signed += pair[i][j];
    }
    c.check(rec.future_expanded == expanded, tag + ": expanded future sum differs");
    const Rational direct = spec.future_direct ? (*spec.future_direct)[i] : expanded;
    c.check(rec.future_direct_hi == direct, tag + ": direct future bound differs");
    const Rational bound = (past + std::min(direct, expanded)) / abs(pair[i][i]);
    c.check(rec.bound == bound, tag + ": relative error bound differs");
    bounds[i] = bound;

    if (spec.check_route && i + 1 < n) {
      HaarVector tail;
      for (std::size_t j = i + 1; j < n; ++j) tail += frame.blocks[j];
      const Rational lhs = abs(tail_signed);
      const Rational cap = direct * sqrt_enclosure(sl_inf_norm_sq(tail, Exec::serial)).hi;
      if (lhs > expanded || lhs > cap) route_ok = false;
    }
  }
  if (spec.check_route) {
    c.check(stored.route_check_passed == route_ok, "tail route check outcome differs");
  }

  Rational max_path_sq(0);
  const std::uint64_t leaves = std::uint64_t{1} << spec.index_depth;
  for (std::uint64_t leaf = 0; leaf < leaves; ++leaf) {
    DyadicInterval iv{spec.index_depth, static_cast<std::int64_t>(leaf)};
    Rational sum(0);
    for (;;) {
      sum += bounds[ordering(iv)] * bounds[ordering(iv)];
      if (iv.n == 0) break;
      iv = parent(iv);
    }
    if (sum > max_path_sq) max_path_sq = std::move(sum);
  }
  const Rational contraction = max_path_sq == 0 ? Rational(0) : sqrt_enclosure(max_path_sq).hi;
  c.check(stored.contraction == contraction, "contraction differs from replay");
  c.check(stored.contraction_target == spec.target, "contraction target differs");
  if (!c.check(stored.contraction < 1, "contraction is not strict")) return;
  const Rational product =
      (Rational(1) / (Rational(1) - stored.contraction)) * (Rational(1) / spec.scale_den);
  c.check(stored.norm_product_bound == product, "norm product bound differs from replay");
  c.check(stored.norm_product_bound <= spec.product_cap,
          "norm product bound exceeds its structural cap");

  BlockMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = pair[i][j] / pair[i][i];
  }
  c.check(stored.neumann_terms >= 0, "negative truncation order");
  const BlockMatrix v = neumann_partial_sum(m, std::max(stored.neumann_terms, 0));

  try {
    const WitnessSummary w = verify_contraction_witnesses(m, frame, stored.contraction, mode);
    c.check(w.exhaustive_count == stored.witnesses.exhaustive_count &&
                w.random_count == stored.witnesses.random_count &&
                w.worst_ratio_sq == stored.witnesses.worst_ratio_sq &&
                w.all_passed == stored.witnesses.all_passed,
            "witness suite summary differs from replay");
  } catch (const std::logic_error& e) {
    c.check(false, std::string("witness replay violated the certified bound: ") + e.what());
  }

  const AssembledFactors parts =
      assemble_factors(*spec.H, frame, v, *spec.sigma, spec.index_depth, mode);
  c.check(stored.residual == parts.residual, "diagram residual differs from replay");
  if (stored.R.entry_count() > 0 || stored.S.entry_count() > 0) {
    c.check(same_columns(stored.R, parts.R), "stored R differs from reassembly");
    c.check(same_columns(stored.S, parts.S), "stored S differs from reassembly");
    c.check(stored.S.norm_bound() == stored.norm_product_bound,
            "S norm bound is not the certified product bound");
  }
}

void fact_replay(Checker& c, const OperatorMatrix& T, const FactorizationResult& stored,
                 Exec mode) {
  diag_replay(c, T, stored.diagonalization, mode);
  const DiagonalizationCertificate& cert = stored.diagonalization.certificate;
  c.check(stored.eta_prime == cert.eta,
          "pipeline budget eta' differs from the diagonalization budget");
  if (!stored.ok) {
    c.check(!stored.diagonalization.ok,
            "pipeline reports failure but its diagonalization succeeded");
    return;
  }
  if (!c.check(stored.diagonalization.ok,
               "feasible pipeline requires a feasible diagonalization") ||
      !c.check(cert.delta > 0, "identity factorization requires a positive floor") ||
      !c.check(cert.delta > 4 * stored.eta_prime, "eta' must sit strictly below delta/4")) {
    return;
  }
  // eta' = delta*eta/(4(1+eta)) inverts to eta = 4 eta'/(delta - 4 eta').
  const Rational eta = 4 * stored.eta_prime / (cert.delta - 4 * stored.eta_prime);
  c.check(choose_eta_prime(cert.delta, eta) == stored.eta_prime,
          "eta' does not come from the canonical schedule");

  const OperatorMatrix W = right_signed(T, stored.diagonalization.sigma);
  const BlockFrame frame = make_block_frame(W, stored.diagonalization.basis);
  std::vector<Rational> future_direct;
  for (const StepRecord& step : cert.per_index) future_direct.push_back(step.future_hi);

  StageSpec spec;
  spec.W = &W;
  spec.H = &T;
  spec.frame = &frame;
  spec.sigma = &stored.diagonalization.sigma;
  spec.future_direct = &future_direct;
  spec.index_depth = cert.index_depth;
  spec.scale_den = cert.delta;
  spec.product_cap = (1 + eta) / cert.delta;
  spec.target = 4 * stored.eta_prime / cert.delta;
  spec.check_route = true;
  block_stage_replay(c, spec, stored, mode);
  c.check(stored.contraction <= stored.contraction_target,
          "contraction exceeds its structural target");
}

void primary_replay(Checker& c, const OperatorMatrix& T, const PrimaryResult& stored, Exec mode) {
  if (!c.check(stored.eta > 0, "eta must be positive") ||
      !c.check(stored.index_depth >= 0, "selection depth must be nonnegative")) {
    return;
  }

  if (!stored.ok) {
    // All failure paths return before any tolerance is consumed, so the
    // re-run reproduces the stored report verbatim.
    PrimaryResult rerun;
    try {
      rerun = factor_primary(T, stored.eta, stored.index_depth, pow2(-40), mode);
    } catch (const std::exception& e) {
      c.check(false, std::string("stored parameters were rejected on re-run: ") + e.what());
      return;
    }
    if (c.check(!rerun.ok, "re-run succeeded where the stored result reports failure")) {
      c.check(same_infeasibility(rerun.infeasibility, stored.infeasibility),
              "re-run failure report differs from the stored one");
    }
    return;
  }

  const FactorizationResult& fact = stored.factorization;
  const DiagonalizationCertificate& cert = fact.diagonalization.certificate;
  if (!c.check(fact.ok && fact.diagonalization.ok,
               "feasible result must carry a feasible pipeline")) {
    return;
  }
  c.check(cert.delta == 0, "the primary path runs a zero-floor diagonalization");
  c.check(fact.eta_prime == stored.eta / 64 && cert.eta == fact.eta_prime,
          "interaction budget is not the canonical fraction of eta");

  // The base index tree is as deep as the frequency budget allows.
  int base_depth = 0;
  while (tree_size(base_depth + 1) - 1 <= static_cast<std::uint64_t>(T.depth())) ++base_depth;
  c.check(cert.index_depth == base_depth, "base tree depth differs from the canonical choice");
  c.check(stored.index_depth <= base_depth, "selection depth exceeds the base tree depth");

  diag_replay(c, T, fact.diagonalization, mode);

  ColoredBlocks colored = color_blocks(T, fact.diagonalization.basis);
  const int t_depth = max_selection_depth(colored, BlockColor::T_large);
  const int c_depth = max_selection_depth(colored, BlockColor::C_large);
  c.check(stored.t_large_depth == t_depth, "achievable depth differs from replay (first color)");
  c.check(stored.c_large_depth == c_depth, "achievable depth differs from replay (second color)");

  // Replicate the color decision: the mass-preferred color wins unless only
  // the other one reaches the requested depth.
  BlockColor chosen = colored.chosen;
  {
    const int chosen_depth = chosen == BlockColor::T_large ? t_depth : c_depth;
    const int other_depth = chosen == BlockColor::T_large ? c_depth : t_depth;
    if (chosen_depth < stored.index_depth && other_depth >= stored.index_depth) {
      chosen = chosen == BlockColor::T_large ? BlockColor::C_large : BlockColor::T_large;
    }
  }
  const PrimaryChoice expected_choice =
      chosen == BlockColor::T_large ? PrimaryChoice::T_side : PrimaryChoice::complement_side;
  c.check(stored.choice == expected_choice, "side choice differs from replay");

  colored.chosen = chosen;
  try {
    const IntervalFamily selection = gg_select(colored, stored.index_depth);
    c.check(same_family(selection, stored.selection), "selection differs from replay");
  } catch (const std::exception& e) {
    c.check(false, std::string("selection replay failed: ") + e.what());
    return;
  }
  bool colors_ok = true;
  for (const auto& [index, members] : stored.selection.blocks) {
    for (const auto& member : members) {
      const auto it = colored.colors.find(member);
      if (it == colored.colors.end() || it->second != chosen) colors_ok = false;
    }
  }
  c.check(colors_ok, "selection includes a block of the wrong color");
  const JonesReport selection_jones = check_jones(stored.selection, mode);
  c.check(selection_jones.satisfied && selection_jones.kappa == 1,
          "selection is not a constant-1 family");

  SelectorFamily selector{stored.selection.index_set, stored.selection.blocks};
  const ReiterationResult reiterated =
      reiterate(fact.diagonalization.basis.family, selector, mode);
  if (!c.check(reiterated.ok, "reiteration replay failed")) return;
  c.check(same_family(reiterated.composed, stored.composed_family),
          "composed family differs from replay");

  const BlockBasis composed =
      build_block_basis(stored.composed_family, fact.diagonalization.basis.signs);
  c.check(composed.kappa == stored.composed_kappa, "composed constant differs from replay");
  c.check(stored.composed_kappa == 1, "composed constant is not exactly 1");

  const OperatorMatrix H = stored.choice == PrimaryChoice::T_side ? T : complement_operator(T);
  Rational delta_eff(0);
  bool first = true;
  for (const auto& index : composed.family.index_set) {
    const HaarVector& block = composed.vectors.at(index);
    const Rational ratio = inner_product(H.apply(block), block) / composed.norms_sq.at(index);
    if (first || ratio < delta_eff) delta_eff = ratio;
    first = false;
  }
  c.check(stored.delta_eff == delta_eff, "effective floor differs from replay");
  if (!c.check(delta_eff > 0, "effective floor is not positive")) return;

  const BlockFrame frame = make_block_frame(H, composed);
  const DiagonalSigns no_signs;
  StageSpec spec;
  spec.W = &H;
  spec.H = &H;
  spec.frame = &frame;
  spec.sigma = &no_signs;
  spec.future_direct = nullptr;
  spec.index_depth = stored.index_depth;
  spec.scale_den = delta_eff;
  spec.product_cap = 2 + stored.eta;
  spec.target = stored.eta / (2 + stored.eta);
  spec.check_route = false;
  block_stage_replay(c, spec, fact, mode);
  c.check(fact.route_check_passed, "route flag must be vacuously true for the composed stage");
}

}  // namespace

VerifyOutcome verify_diagonalization(const OperatorMatrix& T, const DiagonalizationResult& stored,
                                     Exec mode) {
  Checker c;
  try {
    diag_replay(c, T, stored, mode);
  } catch (const std::exception& e) {
    c.check(false, std::string("replay aborted: ") + e.what());
  }
  return std::move(c).outcome();
}

VerifyOutcome verify_factorization(const OperatorMatrix& T, const FactorizationResult& stored,
                                   Exec mode) {
  Checker c;
  try {
    fact_replay(c, T, stored, mode);
  } catch (const std::exception& e) {
    c.check(false, std::string("replay aborted: ") + e.what());
  }
  return std::move(c).outcome();
}

VerifyOutcome verify_primary(const OperatorMatrix& T, const PrimaryResult& stored, Exec mode) {
  Checker c;
  try {
    primary_replay(c, T, stored, mode);
  } catch (const std::exception& e) {
    c.check(false, std::string("replay aborted: ") + e.what());
  }
  return std::move(c).outcome();
}

}  // namespace haarfactor
