#include "haarfactor/generators.hpp"

#include <stdexcept>

namespace haarfactor {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

void validate(const GeneratorSpec& spec) {
  if (spec.depth < 0 || spec.depth > kMaxGeneration) {
    throw std::invalid_argument("generator depth out of range");
  }
  if (spec.off_diagonal_mass < 0) {
    throw std::invalid_argument("off-diagonal mass must be nonnegative");
  }
  switch (spec.kind) {
    case GeneratorKind::random_large_diagonal:
    case GeneratorKind::haar_multiplier:
      if (spec.delta < 0 || spec.delta > 1) {
        throw std::invalid_argument("diagonal floor must lie in [0, 1]");
      }
      break;
    default:
      break;
  }
}

int sign_bit(std::uint64_t word) { return (word & 1) ? -1 : +1; }

// |value| in [floor, 1]: floor + u * (1 - floor).
Rational floored_magnitude(const Rational& floor, std::uint64_t word) {
  return floor + unit_rational(word) * (Rational(1) - floor);
}

void fill_identity(OperatorMatrix& T, const Rational& factor) {
  if (factor == 0) return;
  for (int m = 0; m <= T.depth(); ++m) {
    for (const auto& iv : level_grid(m)) T.set_entry(iv, iv, factor);
  }
}

void fill_random_large_diagonal(OperatorMatrix& T, const GeneratorSpec& spec) {
  std::uint64_t counter = 0;
  for (int m = 0; m <= spec.depth; ++m) {
    for (const auto& iv : level_grid(m)) {
      const Rational mag = floored_magnitude(spec.delta, mix64(spec.seed, counter++));
      const int sign = sign_bit(mix64(spec.seed, counter++));
      T.set_entry(iv, iv, sign * mag);
    }
  }
  if (spec.off_diagonal_mass == 0) return;
  // Up to four off-diagonal entries sharing one l1 budget; bounded number of
  // placement attempts keeps depth-0 (no valid pairs) terminating.
  const std::uint64_t positions = tree_size(spec.depth);
  const Rational slice = spec.off_diagonal_mass / 4;
  int placed = 0;
  for (int attempt = 0; attempt < 64 && placed < 4; ++attempt) {
    const std::uint64_t base = (1ULL << 32) + 4ULL * static_cast<std::uint64_t>(attempt);
    const DyadicInterval row = from_ordering(mix64(spec.seed, base) % positions);
    const DyadicInterval col = from_ordering(mix64(spec.seed, base + 1) % positions);
    if (row == col) continue;
    const Rational value = sign_bit(mix64(spec.seed, base + 2)) *
                           (slice * unit_rational(mix64(spec.seed, base + 3)));
    T.set_entry(row, col, T.entry(row, col) + value);
    ++placed;
  }
}

void fill_haar_multiplier(OperatorMatrix& T, const GeneratorSpec& spec) {
  for (int m = 0; m <= spec.depth; ++m) {
    const Rational mag = floored_magnitude(spec.delta, mix64(spec.seed, m));
    const int sign = sign_bit(mix64(spec.seed, (1ULL << 32) + m));
    const Rational value = sign * mag;
    for (const auto& iv : level_grid(m)) T.set_entry(iv, iv, value);
  }
}

void fill_level_shift(OperatorMatrix& T) {
  for (int m = 0; m < T.depth(); ++m) {
    for (const auto& iv : level_grid(m)) T.set_entry(left_half(iv), iv, Rational(1));
  }
}

void fill_projection_mask(OperatorMatrix& T, const GeneratorSpec& spec) {
  std::uint64_t counter = 0;
  for (int m = 0; m <= spec.depth; ++m) {
    for (const auto& iv : level_grid(m)) {
      if (mix64(spec.seed, counter++) & 1) T.set_entry(iv, iv, Rational(1));
    }
  }
}

}  // namespace

std::uint64_t mix64(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t x = seed + counter * kGolden + kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rational unit_rational(std::uint64_t word) {
  Rational value(Integer(word >> 16));
  return value / pow2(48);
}

GeneratorKind generator_kind_from_name(const std::string& name) {
  if (name == "identity") return GeneratorKind::identity;
  if (name == "scaled_diagonal") return GeneratorKind::scaled_diagonal;
  if (name == "random_large_diagonal") return GeneratorKind::random_large_diagonal;
  if (name == "haar_multiplier") return GeneratorKind::haar_multiplier;
  if (name == "level_shift") return GeneratorKind::level_shift;
  if (name == "projection_mask") return GeneratorKind::projection_mask;
  throw std::invalid_argument("unknown generator kind: " + name);
}

std::string generator_kind_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::identity: return "identity";
    case GeneratorKind::scaled_diagonal: return "scaled_diagonal";
    case GeneratorKind::random_large_diagonal: return "random_large_diagonal";
    case GeneratorKind::haar_multiplier: return "haar_multiplier";
    case GeneratorKind::level_shift: return "level_shift";
    case GeneratorKind::projection_mask: return "projection_mask";
  }
  throw std::invalid_argument("unknown generator kind");
}

OperatorMatrix generate(const GeneratorSpec& spec) {
  validate(spec);
  OperatorMatrix T(spec.depth);
  switch (spec.kind) {
    case GeneratorKind::identity:
      fill_identity(T, Rational(1));
      break;
    case GeneratorKind::scaled_diagonal:
      fill_identity(T, spec.delta);
      break;
    case GeneratorKind::random_large_diagonal:
      fill_random_large_diagonal(T, spec);
      break;
    case GeneratorKind::haar_multiplier:
      fill_haar_multiplier(T, spec);
      break;
    case GeneratorKind::level_shift:
      fill_level_shift(T);
      break;
    case GeneratorKind::projection_mask:
      fill_projection_mask(T, spec);
      break;
  }
  if (spec.kind == GeneratorKind::level_shift) {
    // Rows and columns each carry at most one unit entry; stacking at most
    // depth+1 of them on a leaf bounds the norm by sqrt(depth+1).
    T.set_norm_bound(Rational(spec.depth + 1), "estimated");
  } else {
    T.set_norm_bound(certified_norm_bound(T), "estimated");
  }
  return T;
}

}  // namespace haarfactor
