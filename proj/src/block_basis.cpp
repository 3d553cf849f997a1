#include "haarfactor/block_basis.hpp"

#include <stdexcept>

namespace haarfactor {

int SignAssignment::at(const DyadicInterval& iv) const {
  auto it = signs.find(iv);
  if (it == signs.end()) throw std::invalid_argument("missing sign for a block interval");
  if (it->second != 1 && it->second != -1) throw std::invalid_argument("signs must be +1 or -1");
  return it->second;
}

SignAssignment uniform_signs(const IntervalFamily& family, int sign) {
  SignAssignment out;
  for (const auto& [index, members] : family.blocks) {
    for (const auto& k : members) out.signs[k] = sign;
  }
  return out;
}

BlockBasis build_block_basis(const IntervalFamily& family, const SignAssignment& signs) {
  JonesReport report = check_jones(family);
  if (!report.satisfied) {
    throw std::invalid_argument("block basis requires a family satisfying the nesting conditions");
  }
  BlockBasis basis;
  basis.family = family;
  basis.signs = signs;
  basis.kappa = report.kappa;
  for (const auto& index : family.index_set) {
    HaarVector b;
    Rational norm_sq(0);
    for (const auto& k : family.blocks.at(index)) {
      b.set_coeff(k, Rational(signs.at(k)));
      norm_sq += measure(k);
    }
    basis.vectors.emplace(index, std::move(b));
    basis.norms_sq.emplace(index, std::move(norm_sq));
  }
  return basis;
}

HaarVector embed_B(const HaarVector& f, const BlockBasis& basis) {
  HaarVector out;
  for (const auto& [index, block] : basis.vectors) {
    const Rational a = f.coeff(index);
    if (a == 0) continue;
    for (const auto& [k, sign] : block.coeffs()) out.add_coeff(k, a * sign);
  }
  return out;
}

HaarVector project_Q(const HaarVector& f, const BlockBasis& basis) {
  HaarVector out;
  for (const auto& [index, block] : basis.vectors) {
    Rational pairing = inner_product(f, block);
    if (pairing == 0) continue;
    out.set_coeff(index, pairing / basis.norms_sq.at(index));
  }
  return out;
}

HaarVector projection_P(const HaarVector& f, const BlockBasis& basis) {
  return embed_B(project_Q(f, basis), basis);
}

}  // namespace haarfactor
