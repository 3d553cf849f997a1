#pragma once

#include <cstdint>
#include <string>

#include "haarfactor/operator_matrix.hpp"

namespace haarfactor {

enum class GeneratorKind {
  identity,
  scaled_diagonal,        // diagonal entries all equal to `delta` (the factor)
  random_large_diagonal,  // |diagonal| in [delta, 1], sparse off-diagonal noise
  haar_multiplier,        // diagonal constant on each generation
  level_shift,            // h_I -> h_{left child of I}
  projection_mask,        // random 0/1 diagonal
};

GeneratorKind generator_kind_from_name(const std::string& name);
std::string generator_kind_name(GeneratorKind kind);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::identity;
  int depth = 0;
  Rational delta = Rational(0);              // diagonal floor / scale factor
  Rational off_diagonal_mass = Rational(0);  // total l1 budget for off-diagonal noise
  std::uint64_t seed = 0;
};

// A pure function of its GeneratorSpec (counter-based stream, exact dyadic
// rationals);
// the emitted norm_bound is a certified upper bound, recorded as "estimated"
// to distinguish it from caller-supplied bounds.
OperatorMatrix generate(const GeneratorSpec& spec);

// Counter-based pseudo-random stream: the value at (seed, counter) never
// depends on call order.
std::uint64_t mix64(std::uint64_t seed, std::uint64_t counter);
// Dyadic rational in [0, 1) with denominator 2^48.
Rational unit_rational(std::uint64_t word);

}  // namespace haarfactor
