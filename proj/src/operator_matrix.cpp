#include "haarfactor/operator_matrix.hpp"

#include <stdexcept>
#include <utility>

namespace haarfactor {

OperatorMatrix::OperatorMatrix(int depth) : depth_(depth) {
  if (depth < 0 || depth > kMaxGeneration) {
    throw std::invalid_argument("operator depth out of range");
  }
}

void OperatorMatrix::set_norm_bound(Rational bound, std::string source) {
  if (bound < 0) throw std::invalid_argument("norm bound must be nonnegative");
  norm_bound_ = std::move(bound);
  norm_bound_source_ = std::move(source);
}

void OperatorMatrix::check_index(const DyadicInterval& iv) const {
  if (iv.n > depth_) throw std::invalid_argument("interval lies below the operator depth");
  make_interval(iv.n, iv.k);  // validates 0 <= k < 2^n
}

void OperatorMatrix::set_entry(const DyadicInterval& row, const DyadicInterval& col,
                               const Rational& value) {
  check_index(row);
  check_index(col);
  if (value == 0) {
    auto it = columns_.find(col);
    if (it != columns_.end()) {
      it->second.erase(row);
      if (it->second.empty()) columns_.erase(it);
    }
    return;
  }
  columns_[col][row] = value;
}

Rational OperatorMatrix::entry(const DyadicInterval& row, const DyadicInterval& col) const {
  auto it = columns_.find(col);
  if (it == columns_.end()) return Rational(0);
  auto jt = it->second.find(row);
  return jt == it->second.end() ? Rational(0) : jt->second;
}

std::size_t OperatorMatrix::entry_count() const {
  std::size_t n = 0;
  for (const auto& [col, rows] : columns_) n += rows.size();
  return n;
}

HaarVector OperatorMatrix::apply(const HaarVector& f) const {
  HaarVector out;
  for (const auto& [iv, a] : f.coeffs()) {
    auto it = columns_.find(iv);
    if (it == columns_.end()) continue;
    for (const auto& [row, t] : it->second) out.add_coeff(row, a * t);
  }
  return out;
}

Rational OperatorMatrix::column_pairing(const DyadicInterval& col, const HaarVector& b) const {
  auto it = columns_.find(col);
  if (it == columns_.end()) return Rational(0);
  Rational total(0);
  // Walk the shorter support.
  if (b.support_size() < it->second.size()) {
    for (const auto& [iv, value] : b.coeffs()) {
      auto jt = it->second.find(iv);
      if (jt != it->second.end()) total += jt->second * value * measure(iv);
    }
  } else {
    for (const auto& [row, t] : it->second) {
      const Rational value = b.coeff(row);
      if (value != 0) total += t * value * measure(row);
    }
  }
  return total;
}

ColumnDecomposition decompose_column(const OperatorMatrix& T, const DyadicInterval& I) {
  if (I.n > T.depth()) throw std::invalid_argument("column index out of depth");
  ColumnDecomposition out;
  out.alpha = Rational(0);
  auto it = T.columns().find(I);
  if (it == T.columns().end()) return out;
  for (const auto& [row, t] : it->second) {
    if (row == I) {
      out.alpha = t;
    } else {
      out.remainder.set_coeff(row, t);
    }
  }
  return out;
}

HaarVector adjoint_vector(const OperatorMatrix& T, const HaarVector& b) {
  HaarVector out;
  for (const auto& [col, rows] : T.columns()) {
    Rational pairing(0);
    for (const auto& [row, t] : rows) {
      const Rational value = b.coeff(row);
      if (value != 0) pairing += t * value * measure(row);
    }
    if (pairing != 0) out.set_coeff(col, pairing / measure(col));
  }
  return out;
}

SignNormalization normalize_diagonal_signs(const OperatorMatrix& T, const Rational& delta) {
  if (delta < 0) throw std::invalid_argument("delta must be nonnegative");
  SignNormalization out;
  out.op = OperatorMatrix(T.depth());
  out.op.set_norm_bound(T.norm_bound(), T.norm_bound_source());
  for (const auto& [col, rows] : T.columns()) {
    auto diag = rows.find(col);
    const bool negative = diag != rows.end() && diag->second < 0;
    if (delta > 0 && (diag == rows.end() || diag->second == 0)) {
      throw std::invalid_argument("zero diagonal entry contradicts the large-diagonal claim");
    }
    if (negative) out.sigma.flipped.insert(col);
    for (const auto& [row, t] : rows) out.op.set_entry(row, col, negative ? Rational(-t) : t);
  }
  return out;
}

bool has_large_diagonal(const OperatorMatrix& T, const Rational& delta) {
  for (int m = 0; m <= T.depth(); ++m) {
    for (const auto& iv : level_grid(m)) {
      if (abs(T.entry(iv, iv)) < delta) return false;
    }
  }
  return true;
}

Rational certified_norm_bound(const OperatorMatrix& T) {
  Rational max_diag(0);
  Rational off_mass(0);
  for (const auto& [col, rows] : T.columns()) {
    for (const auto& [row, t] : rows) {
      if (row == col) {
        Rational a = abs(t);
        if (a > max_diag) max_diag = std::move(a);
      } else {
        off_mass += abs(t);
      }
    }
  }
  return max_diag + off_mass;
}

}  // namespace haarfactor
