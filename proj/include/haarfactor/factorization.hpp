#pragma once

#include <cstddef>
#include <vector>

#include "haarfactor/quasi_diag.hpp"

namespace haarfactor {

// Largest eta' of the form delta*eta/(4(1+eta)) * 2^{-j} with 4 eta'/delta < 1
// and 1/(1 - 4 eta'/delta) <= 1 + eta; j = 0 already satisfies both.
Rational choose_eta_prime(const Rational& delta, const Rational& eta);

// Dense exact matrix on block coordinates (one coordinate per index interval).
class BlockMatrix {
 public:
  BlockMatrix() = default;
  explicit BlockMatrix(std::size_t n) : n_(n), a_(n * n, Rational(0)) {}
  static BlockMatrix identity(std::size_t n);

  std::size_t size() const { return n_; }
  Rational& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const Rational& at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  std::vector<Rational> apply(const std::vector<Rational>& x) const;
  friend BlockMatrix operator*(const BlockMatrix& lhs, const BlockMatrix& rhs);
  friend BlockMatrix operator-(const BlockMatrix& lhs, const BlockMatrix& rhs);

 private:
  std::size_t n_ = 0;
  std::vector<Rational> a_;
};

// Immutable view of a diagonalized system: blocks in breadth-first index
// order with their norms and diagonal pairings D_i = <W b_i, b_i>.
struct BlockFrame {
  std::vector<DyadicInterval> index_order;
  std::vector<HaarVector> blocks;
  std::vector<Rational> norms_sq;
  std::vector<Rational> diagonal;
};

// Throws when some diagonal pairing vanishes (impossible under a feasible
// certificate with positive floor).
BlockFrame make_block_frame(const OperatorMatrix& W, const BlockBasis& basis);

// Block coordinates of U f: u_i = <f, b_i> / D_i (norm at most 1/delta).
std::vector<Rational> apply_U(const BlockFrame& frame, const HaarVector& f);

// M = U W J in block coordinates: M_{i,j} = <W b_j, b_i> / D_i; unit diagonal.
BlockMatrix interaction_matrix(const OperatorMatrix& W, const BlockFrame& frame);

// Truncated geometric series sum_{k<=K} (Id - M)^k with K chosen a priori
// from the certified contraction: contraction^{K+1}/(1-contraction) <= tol.
BlockMatrix neumann_invert(const BlockMatrix& M, const Rational& contraction,
                           const Rational& tol, int* terms_out = nullptr);

// Horner evaluation of sum_{k<=terms} (Id - M)^k for a given term count
// (replays a stored inversion without knowing the original tolerance).
BlockMatrix neumann_partial_sum(const BlockMatrix& M, int terms);

struct BlockErrorRecord {
  DyadicInterval index;
  Rational past_sum;           // sum_{j<i} |<W b_j, b_i>|
  Rational future_direct_hi;   // H1-certified bound from the sieve
  Rational future_expanded;    // sum_{j>i} |<W b_j, b_i>|
  Rational diagonal;           // D_i
  Rational bound;              // (past + min(direct, expanded)) / D_i
};

struct WitnessSummary {
  std::size_t exhaustive_count = 0;
  std::size_t random_count = 0;
  Rational worst_ratio_sq = Rational(0);  // max sl_inf_sq(err)/sl_inf_sq(g)
  bool all_passed = false;
};

// Exhaustive ±1 block-coefficient patterns (all of them up to 12 blocks,
// sampled beyond) plus random rational patterns, each checked exactly against
// the certified contraction.  Throws on any violation: the certificate and
// the witness computation cannot disagree unless something is broken.
WitnessSummary verify_contraction_witnesses(const BlockMatrix& M, const BlockFrame& frame,
                                            const Rational& contraction,
                                            Exec mode = Exec::automatic);

struct AssembledFactors {
  OperatorMatrix R;
  OperatorMatrix S;
  Rational residual;  // max_I sl_inf_norm_sq(S H R h_I - h_I) over the index span
};

// Materializes R (sign-adjusted block embedding) and S (block pairing through
// the truncated inverse) on the Haar tree and measures the diagram residual
// against H.
AssembledFactors assemble_factors(const OperatorMatrix& H, const BlockFrame& frame,
                                  const BlockMatrix& V, const DiagonalSigns& sigma,
                                  int index_depth, Exec mode = Exec::automatic);

struct FactorizationResult {
  bool ok = false;
  OperatorMatrix R;
  OperatorMatrix S;
  Rational eta_prime;
  Rational contraction;         // certified bound on ||U W g - g|| / ||g||
  Rational contraction_target;  // 4 eta' / delta
  Rational norm_product_bound;  // (1/(1-contraction)) * (1/delta)
  Rational residual;            // max_I sl_inf_norm_sq(S T R h_I - h_I)
  int neumann_terms = 0;
  bool route_check_passed = false;  // direct H1 route vs expanded-sum route
  std::vector<BlockErrorRecord> block_errors;
  WitnessSummary witnesses;
  DiagonalizationResult diagonalization;
};

// Full pipeline: diagonalize W = T Sigma at eta' = choose_eta_prime(delta,
// eta), certify the contraction over root-leaf index chains, verify it on a
// witness suite, invert by the truncated series, and assemble R and S with
// S T R = Id up to the residual on the index span.
FactorizationResult factor_identity(const OperatorMatrix& T, const Rational& delta,
                                    const Rational& eta, int index_depth,
                                    const Rational& tol = pow2(-40),
                                    Exec mode = Exec::automatic);

}  // namespace haarfactor
