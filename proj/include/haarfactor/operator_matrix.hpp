#pragma once

#include <map>
#include <set>
#include <string>

#include "haarfactor/haar_vector.hpp"

namespace haarfactor {

// Sparse operator on the Haar coefficients of the depth-N tree, stored by
// column: T h_I = sum_J entries[I][J] h_J.  norm_bound is a certified upper
// bound on the operator norm, either supplied by a generator or estimated.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  explicit OperatorMatrix(int depth);

  int depth() const { return depth_; }
  const Rational& norm_bound() const { return norm_bound_; }
  const std::string& norm_bound_source() const { return norm_bound_source_; }
  void set_norm_bound(Rational bound, std::string source);

  // Columns keyed by input interval; each column maps output interval -> t_{J,I}.
  const std::map<DyadicInterval, std::map<DyadicInterval, Rational>>& columns() const {
    return columns_;
  }

  void set_entry(const DyadicInterval& row, const DyadicInterval& col, const Rational& value);
  Rational entry(const DyadicInterval& row, const DyadicInterval& col) const;
  Rational diagonal_entry(const DyadicInterval& iv) const { return entry(iv, iv); }
  std::size_t entry_count() const;

  HaarVector apply(const HaarVector& f) const;
  // Column I paired against b: <T h_I, b> = sum_J t_{J,I} b_J |J|.
  Rational column_pairing(const DyadicInterval& col, const HaarVector& b) const;

 private:
  void check_index(const DyadicInterval& iv) const;

  int depth_ = 0;
  Rational norm_bound_ = Rational(0);
  std::string norm_bound_source_ = "estimated";
  std::map<DyadicInterval, std::map<DyadicInterval, Rational>> columns_;
};

// alpha = t_{I,I} plus the off-diagonal remainder column as a Haar vector
// (T h_I = alpha h_I + remainder).
struct ColumnDecomposition {
  Rational alpha;
  HaarVector remainder;
};
ColumnDecomposition decompose_column(const OperatorMatrix& T, const DyadicInterval& I);

// Vector of coefficients c_I = <T h_I, b> / |I| over all columns of T; the
// bracket estimate applied to its projections certifies sieve bounds.
HaarVector adjoint_vector(const OperatorMatrix& T, const HaarVector& b);

// Signs sigma_I = sign(t_{I,I}) stored sparsely (only flips recorded).
struct DiagonalSigns {
  std::set<DyadicInterval> flipped;
  int at(const DyadicInterval& iv) const { return flipped.count(iv) ? -1 : +1; }
};

struct SignNormalization {
  OperatorMatrix op;  // columns scaled so every present diagonal entry is >= 0
  DiagonalSigns sigma;
};

// Right-composes T with the diagonal sign isometry sigma, t'_{J,I} = t_{J,I}
// sigma_I, which makes the diagonal nonnegative while preserving every norm
// tested here.  When delta > 0, a zero diagonal entry on a present column is
// an error (the large-diagonal hypothesis cannot hold).
SignNormalization normalize_diagonal_signs(const OperatorMatrix& T, const Rational& delta);

// True iff |t_{I,I}| >= delta for every I in the full depth-N tree.
bool has_large_diagonal(const OperatorMatrix& T, const Rational& delta);

// max |diagonal| + total off-diagonal l1 mass: a certified operator norm
// bound (diagonal part is a pointwise multiplier of the square function; the
// off-diagonal part is dominated by its coefficient mass).
Rational certified_norm_bound(const OperatorMatrix& T);

}  // namespace haarfactor
