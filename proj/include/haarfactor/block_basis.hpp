#pragma once

#include <map>

#include "haarfactor/haar_vector.hpp"
#include "haarfactor/jones.hpp"

namespace haarfactor {

// Signs for every interval appearing in a family's collections.
struct SignAssignment {
  std::map<DyadicInterval, int> signs;  // values are +1 or -1

  int at(const DyadicInterval& iv) const;
};

SignAssignment uniform_signs(const IntervalFamily& family, int sign = +1);

// The signed block basis b_I = sum_{K in collection(I)} eps_K h_K, together
// with the exact squared L2 norms and the family's compatibility constant.
// Immutable after construction; safe to share across threads.
struct BlockBasis {
  IntervalFamily family;
  SignAssignment signs;
  std::map<DyadicInterval, HaarVector> vectors;
  std::map<DyadicInterval, Rational> norms_sq;  // ||b_I||_2^2 = sum of member measures
  Rational kappa = Rational(1);
};

// Materializes the basis; throws if the family fails its compatibility check
// or a block interval has no sign.
BlockBasis build_block_basis(const IntervalFamily& family, const SignAssignment& signs);

// B f = sum_I a_I b_I where a_I is f's coefficient at the index interval;
// coefficients outside the index set are discarded.
HaarVector embed_B(const HaarVector& f, const BlockBasis& basis);

// Q f = sum_I (<f, b_I> / ||b_I||_2^2) h_I.
HaarVector project_Q(const HaarVector& f, const BlockBasis& basis);

// P = B Q; a projection onto the span of the blocks.
HaarVector projection_P(const HaarVector& f, const BlockBasis& basis);

}  // namespace haarfactor
