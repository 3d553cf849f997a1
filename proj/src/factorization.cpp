#include "haarfactor/factorization.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "haarfactor/generators.hpp"

namespace haarfactor {
namespace {

constexpr std::uint64_t kWitnessSeed = 0xfac70ULL;

OperatorMatrix apply_right_signs(const OperatorMatrix& T, const DiagonalSigns& sigma) {
  OperatorMatrix out(T.depth());
  out.set_norm_bound(T.norm_bound(), T.norm_bound_source());
  for (const auto& [col, rows] : T.columns()) {
    const int sign = sigma.at(col);
    for (const auto& [row, t] : rows) {
      out.set_entry(row, col, sign > 0 ? t : Rational(-t));
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> root_leaf_paths(int index_depth) {
  const std::size_t first = (std::size_t{1} << index_depth) - 1;
  const std::size_t count = std::size_t{1} << index_depth;
  std::vector<std::vector<std::size_t>> paths;
  paths.reserve(count);
  for (std::size_t leaf = first; leaf < first + count; ++leaf) {
    std::vector<std::size_t> path;
    std::size_t p = leaf;
    while (true) {
      path.push_back(p);
      if (p == 0) break;
      p = (p - 1) / 2;
    }
    std::reverse(path.begin(), path.end());
    paths.push_back(std::move(path));
  }
  return paths;
}

HaarVector combine_blocks(const BlockFrame& frame, const std::vector<Rational>& coeffs) {
  HaarVector out;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0) continue;
    for (const auto& [k, eps] : frame.blocks[i].coeffs()) out.add_coeff(k, coeffs[i] * eps);
  }
  return out;
}

struct WitnessOutcome {
  bool passed = true;
  Rational worst_ratio_sq = Rational(0);
};

WitnessOutcome run_witness(const BlockMatrix& M, const BlockFrame& frame,
                           const Rational& contraction_sq, const std::vector<Rational>& a) {
  WitnessOutcome out;
  std::vector<Rational> e = M.apply(a);
  for (std::size_t i = 0; i < a.size(); ++i) e[i] -= a[i];
  const Rational g_sq = sl_inf_norm_sq(combine_blocks(frame, a), Exec::serial);
  if (g_sq == 0) return out;
  const Rational err_sq = sl_inf_norm_sq(combine_blocks(frame, e), Exec::serial);
  out.worst_ratio_sq = err_sq / g_sq;
  out.passed = err_sq <= contraction_sq * g_sq;
  return out;
}

}  // namespace

Rational choose_eta_prime(const Rational& delta, const Rational& eta) {
  if (delta <= 0 || eta <= 0) throw std::invalid_argument("delta and eta must be positive");
  Rational candidate = delta * eta / (4 * (Rational(1) + eta));
  for (int j = 0; j < 512; ++j) {
    const Rational scaled = 4 * candidate / delta;
    if (scaled < 1 && Rational(1) / (Rational(1) - scaled) <= Rational(1) + eta) {
      return candidate;
    }
    candidate /= 2;
  }
  throw std::logic_error("eta' search failed to terminate");  // unreachable: j = 0 passes
}

BlockMatrix BlockMatrix::identity(std::size_t n) {
  BlockMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = Rational(1);
  return m;
}

std::vector<Rational> BlockMatrix::apply(const std::vector<Rational>& x) const {
  if (x.size() != n_) throw std::invalid_argument("block vector size mismatch");
  std::vector<Rational> y(n_, Rational(0));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (a_[i * n_ + j] != 0 && x[j] != 0) y[i] += a_[i * n_ + j] * x[j];
    }
  }
  return y;
}

BlockMatrix operator*(const BlockMatrix& lhs, const BlockMatrix& rhs) {
  if (lhs.n_ != rhs.n_) throw std::invalid_argument("block matrix size mismatch");
  BlockMatrix out(lhs.n_);
  for (std::size_t i = 0; i < lhs.n_; ++i) {
    for (std::size_t k = 0; k < lhs.n_; ++k) {
      const Rational& l = lhs.at(i, k);
      if (l == 0) continue;
      for (std::size_t j = 0; j < lhs.n_; ++j) {
        const Rational& r = rhs.at(k, j);
        if (r != 0) out.at(i, j) += l * r;
      }
    }
  }
  return out;
}

BlockMatrix operator-(const BlockMatrix& lhs, const BlockMatrix& rhs) {
  if (lhs.n_ != rhs.n_) throw std::invalid_argument("block matrix size mismatch");
  BlockMatrix out(lhs.n_);
  for (std::size_t t = 0; t < lhs.a_.size(); ++t) out.a_[t] = lhs.a_[t] - rhs.a_[t];
  return out;
}

BlockFrame make_block_frame(const OperatorMatrix& W, const BlockBasis& basis) {
  BlockFrame frame;
  frame.index_order = basis.family.index_set;
  for (const auto& index : frame.index_order) {
    frame.blocks.push_back(basis.vectors.at(index));
    frame.norms_sq.push_back(basis.norms_sq.at(index));
    frame.diagonal.push_back(inner_product(W.apply(frame.blocks.back()), frame.blocks.back()));
  }
  return frame;
}

std::vector<Rational> apply_U(const BlockFrame& frame, const HaarVector& f) {
  std::vector<Rational> u(frame.blocks.size());
  for (std::size_t i = 0; i < frame.blocks.size(); ++i) {
    if (frame.diagonal[i] == 0) {
      throw std::invalid_argument("vanishing diagonal pairing: U is not defined");
    }
    u[i] = inner_product(f, frame.blocks[i]) / frame.diagonal[i];
  }
  return u;
}

BlockMatrix interaction_matrix(const OperatorMatrix& W, const BlockFrame& frame) {
  const std::size_t n = frame.blocks.size();
  BlockMatrix m(n);
  for (std::size_t j = 0; j < n; ++j) {
    const HaarVector image = W.apply(frame.blocks[j]);
    for (std::size_t i = 0; i < n; ++i) {
      if (frame.diagonal[i] == 0) {
        throw std::invalid_argument("vanishing diagonal pairing: U is not defined");
      }
      m.at(i, j) = inner_product(image, frame.blocks[i]) / frame.diagonal[i];
    }
  }
  return m;
}

BlockMatrix neumann_invert(const BlockMatrix& M, const Rational& contraction,
                           const Rational& tol, int* terms_out) {
  if (contraction < 0 || contraction >= 1) {
    throw std::invalid_argument("contraction must lie in [0, 1)");
  }
  if (tol <= 0) throw std::invalid_argument("tolerance must be positive");
  int terms = 0;
  if (contraction > 0) {
    Rational power = contraction;  // contraction^{terms+1}
    const Rational slack = Rational(1) - contraction;
    while (power / slack > tol) {
      power *= contraction;
      if (++terms > 100000) throw std::invalid_argument("tolerance unreachable: contraction too close to 1");
    }
  }
  if (terms_out) *terms_out = terms;
  return neumann_partial_sum(M, terms);
}

BlockMatrix neumann_partial_sum(const BlockMatrix& M, int terms) {
  if (terms < 0) throw std::invalid_argument("term count must be nonnegative");
  const BlockMatrix id = BlockMatrix::identity(M.size());
  const BlockMatrix e = id - M;
  BlockMatrix v = id;
  for (int k = 0; k < terms; ++k) {
    v = e * v;
    for (std::size_t i = 0; i < M.size(); ++i) v.at(i, i) += 1;
  }
  return v;
}

FactorizationResult factor_identity(const OperatorMatrix& T, const Rational& delta,
                                    const Rational& eta, int index_depth, const Rational& tol,
                                    Exec mode) {
  if (delta <= 0) {
    throw std::invalid_argument("positive diagonal floor required (zero floor is the primary-decomposition route)");
  }
  if (eta <= 0) throw std::invalid_argument("eta must be positive");

  FactorizationResult result;
  result.eta_prime = choose_eta_prime(delta, eta);
  result.diagonalization = quasi_diagonalize(T, delta, result.eta_prime, index_depth, mode);
  if (!result.diagonalization.ok) return result;

  const OperatorMatrix W = apply_right_signs(T, result.diagonalization.sigma);
  const BlockBasis& basis = result.diagonalization.basis;
  const DiagonalizationCertificate& cert = result.diagonalization.certificate;
  BlockFrame frame = make_block_frame(W, basis);
  const std::size_t n = frame.blocks.size();

  // Raw pairings P_{i,j} = <W b_j, b_i>; the certificate must agree with the
  // from-scratch recomputation.
  std::vector<std::vector<Rational>> pair(n, std::vector<Rational>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const HaarVector image = W.apply(frame.blocks[j]);
    for (std::size_t i = 0; i < n; ++i) pair[i][j] = inner_product(image, frame.blocks[i]);
  }
  BlockMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (pair[i][i] != cert.per_index[i].diagonal_value) {
      throw std::logic_error("certificate diagonal disagrees with recomputation");
    }
    if (pair[i][i] == 0) throw std::logic_error("vanishing diagonal pairing under positive floor");
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = pair[i][j] / pair[i][i];
  }

  result.route_check_passed = true;
  Rational max_path_sq(0);
  std::vector<Rational> bounds(n);
  for (std::size_t i = 0; i < n; ++i) {
    BlockErrorRecord rec;
    rec.index = frame.index_order[i];
    rec.diagonal = pair[i][i];
    rec.past_sum = Rational(0);
    for (std::size_t j = 0; j < i; ++j) rec.past_sum += abs(pair[i][j]);
    if (rec.past_sum != cert.per_index[i].predecessor_sum) {
      throw std::logic_error("certificate predecessor sum disagrees with recomputation");
    }
    rec.future_expanded = Rational(0);
    Rational tail_signed(0);
    for (std::size_t j = i + 1; j < n; ++j) {
      rec.future_expanded += abs(pair[i][j]);
      tail_signed += pair[i][j];
    }
    rec.future_direct_hi = cert.per_index[i].future_hi;

    // Two routes to the same future bound: the all-ones tail must respect both.
    if (i + 1 < n) {
      const Rational lhs = abs(tail_signed);
      std::vector<Rational> ones(n, Rational(0));
      for (std::size_t j = i + 1; j < n; ++j) ones[j] = Rational(1);
      const Rational tail_sq = sl_inf_norm_sq(combine_blocks(frame, ones), Exec::serial);
      const Rational direct_cap = rec.future_direct_hi * sqrt_enclosure(tail_sq).hi;
      if (lhs > rec.future_expanded || lhs > direct_cap) result.route_check_passed = false;
    }

    const Rational future = std::min(rec.future_direct_hi, rec.future_expanded);
    rec.bound = (rec.past_sum + future) / abs(pair[i][i]);
    bounds[i] = rec.bound;
    result.block_errors.push_back(std::move(rec));
  }
  for (const auto& path : root_leaf_paths(index_depth)) {
    Rational sum(0);
    for (std::size_t p : path) sum += bounds[p] * bounds[p];
    if (sum > max_path_sq) max_path_sq = std::move(sum);
  }
  result.contraction = max_path_sq == 0 ? Rational(0) : sqrt_enclosure(max_path_sq).hi;
  result.contraction_target = 4 * result.eta_prime / delta;
  if (result.contraction > result.contraction_target || result.contraction >= 1) {
    throw std::logic_error("certified contraction exceeds its structural target");
  }
  result.norm_product_bound =
      (Rational(1) / (Rational(1) - result.contraction)) * (Rational(1) / delta);

  BlockMatrix v = neumann_invert(m, result.contraction, tol, &result.neumann_terms);
  result.witnesses = verify_contraction_witnesses(m, frame, result.contraction, mode);

  AssembledFactors parts =
      assemble_factors(T, frame, v, result.diagonalization.sigma, index_depth, mode);
  result.R = std::move(parts.R);
  result.S = std::move(parts.S);
  result.S.set_norm_bound(result.norm_product_bound, "structural");
  result.residual = std::move(parts.residual);
  result.ok = true;
  return result;
}

WitnessSummary verify_contraction_witnesses(const BlockMatrix& M, const BlockFrame& frame,
                                            const Rational& contraction, Exec mode) {
  const std::size_t n = frame.blocks.size();
  const Rational contraction_sq = contraction * contraction;
  WitnessSummary summary;
  std::vector<std::vector<Rational>> witnesses;
  if (n <= 12) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      std::vector<Rational> a(n);
      for (std::size_t i = 0; i < n; ++i) a[i] = Rational((mask >> i) & 1 ? -1 : 1);
      witnesses.push_back(std::move(a));
    }
    summary.exhaustive_count = witnesses.size();
  } else {
    for (std::uint64_t s = 0; s < 256; ++s) {
      std::vector<Rational> a(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = Rational(mix64(kWitnessSeed, s * n + i) & 1 ? -1 : 1);
      }
      witnesses.push_back(std::move(a));
    }
  }
  const std::size_t random_count = n <= 12 ? 200 : 64;
  for (std::uint64_t s = 0; s < random_count; ++s) {
    std::vector<Rational> a(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = 2 * unit_rational(mix64(kWitnessSeed + 1, s * n + i)) - 1;
    }
    witnesses.push_back(std::move(a));
  }
  summary.random_count = witnesses.size() - summary.exhaustive_count;

  bool all_passed = true;
  Rational worst(0);
  if (use_parallel(mode, witnesses.size())) {
#ifdef _OPENMP
#pragma omp parallel
    {
      bool local_ok = true;
      Rational local_worst(0);
#pragma omp for schedule(dynamic, 8) nowait
      for (std::int64_t t = 0; t < static_cast<std::int64_t>(witnesses.size()); ++t) {
        WitnessOutcome o =
            run_witness(M, frame, contraction_sq, witnesses[static_cast<std::size_t>(t)]);
        local_ok = local_ok && o.passed;
        if (o.worst_ratio_sq > local_worst) local_worst = std::move(o.worst_ratio_sq);
      }
#pragma omp critical
      {
        all_passed = all_passed && local_ok;
        if (local_worst > worst) worst = std::move(local_worst);
      }
    }
#endif
  } else {
    for (const auto& a : witnesses) {
      WitnessOutcome o = run_witness(M, frame, contraction_sq, a);
      all_passed = all_passed && o.passed;
      if (o.worst_ratio_sq > worst) worst = std::move(o.worst_ratio_sq);
    }
  }
  summary.all_passed = all_passed;
  summary.worst_ratio_sq = std::move(worst);
  if (!all_passed) {
    throw std::logic_error("a contraction witness violated the certified bound");
  }
  return summary;
}

AssembledFactors assemble_factors(const OperatorMatrix& H, const BlockFrame& frame,
                                  const BlockMatrix& V, const DiagonalSigns& sigma,
                                  int index_depth, Exec mode) {
  const std::size_t n = frame.blocks.size();
  AssembledFactors parts{OperatorMatrix(H.depth()), OperatorMatrix(H.depth()), Rational(0)};
  // R h_I = sigma(eps) block embedding; S maps h_K back through V and U.
  for (std::size_t i = 0; i < n; ++i) {
    const DyadicInterval& index = frame.index_order[i];
    for (const auto& [k, eps] : frame.blocks[i].coeffs()) {
      parts.R.set_entry(k, index, eps * sigma.at(k));
      const Rational scale = eps * measure(k) / frame.diagonal[i];
      for (std::size_t t = 0; t < n; ++t) {
        if (V.at(t, i) != 0) parts.S.set_entry(frame.index_order[t], k, V.at(t, i) * scale);
      }
    }
  }
  parts.R.set_norm_bound(Rational(1), "structural");

  // Diagram check over the index span.
  const std::uint64_t span = tree_size(index_depth);
  Rational residual(0);
  if (use_parallel(mode, span)) {
#ifdef _OPENMP
#pragma omp parallel
    {
      Rational local(0);
#pragma omp for schedule(dynamic) nowait
      for (std::int64_t p = 0; p < static_cast<std::int64_t>(span); ++p) {
        HaarVector f;
        f.set_coeff(from_ordering(static_cast<std::uint64_t>(p)), Rational(1));
        HaarVector r = parts.S.apply(H.apply(parts.R.apply(f)));
        r -= f;
        Rational value = sl_inf_norm_sq(r, Exec::serial);
        if (value > local) local = std::move(value);
      }
#pragma omp critical
      if (local > residual) residual = std::move(local);
    }
#endif
  } else {
    for (std::uint64_t p = 0; p < span; ++p) {
      HaarVector f;
      f.set_coeff(from_ordering(p), Rational(1));
      HaarVector r = parts.S.apply(H.apply(parts.R.apply(f)));
      r -= f;
      Rational value = sl_inf_norm_sq(r, Exec::serial);
      if (value > residual) residual = std::move(value);
    }
  }
  parts.residual = std::move(residual);
  return parts;
}

}  // namespace haarfactor
