#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "haarfactor/dyadic.hpp"
#include "haarfactor/exec.hpp"
#include "haarfactor/rational.hpp"

namespace haarfactor {

// Materialized leaf arrays hold 2^depth exact rationals; deeper requests are
// almost certainly mistakes.
inline constexpr int kMaxProfileDepth = 20;

// Finite formal Haar series: map from dyadic intervals to nonzero exact
// rational coefficients (L^infinity-normalized Haar functions).
class HaarVector {
 public:
  HaarVector() = default;

  const std::map<DyadicInterval, Rational>& coeffs() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }
  std::size_t support_size() const { return coeffs_.size(); }

  Rational coeff(const DyadicInterval& iv) const;
  void set_coeff(const DyadicInterval& iv, const Rational& value);  // erases zeros
  void add_coeff(const DyadicInterval& iv, const Rational& value);

  // Maximal generation in the support; 0 for the zero vector.
  int depth() const;

  HaarVector& operator+=(const HaarVector& rhs);
  HaarVector& operator-=(const HaarVector& rhs);
  HaarVector& operator*=(const Rational& scalar);
  friend HaarVector operator+(HaarVector lhs, const HaarVector& rhs) { return lhs += rhs; }
  friend HaarVector operator-(HaarVector lhs, const HaarVector& rhs) { return lhs -= rhs; }
  friend HaarVector operator*(const Rational& s, HaarVector v) { return v *= s; }
  friend bool operator==(const HaarVector&, const HaarVector&) = default;

 private:
  std::map<DyadicInterval, Rational> coeffs_;
};

// <f, g> = sum a_I b_I |I| (h_I are orthogonal with <h_I, h_I> = |I|).
Rational inner_product(const HaarVector& f, const HaarVector& g);

// Square function squared is constant on generation-`depth` leaves; entry k of
// the result is its value on [k*2^-depth, (k+1)*2^-depth).
// Requires depth >= f.depth().
std::vector<Rational> leaf_profile(const HaarVector& f, int depth, Exec mode = Exec::automatic);

// Squared SL^infinity norm: max of the leaf profile at the support depth.
Rational sl_inf_norm_sq(const HaarVector& f, Exec mode = Exec::automatic);

// Exact enclosure of the H^1 norm (integral of the square function).
struct H1Enclosure {
  Rational lo;
  Rational hi;
};
H1Enclosure h1_enclosure(const HaarVector& f, Exec mode = Exec::automatic);

// Float view of the enclosure; |true H1 - value| <= error is guaranteed.
struct H1Norm {
  double value;
  double error;
};
H1Norm h1_norm(const HaarVector& f, Exec mode = Exec::automatic);

// sum_{I in D_m} signs[k] h_I; signs has 2^m entries of +1/-1.
HaarVector rademacher_vector(int m, const std::vector<int>& signs);

// Restriction to coefficients whose generation lies in `levels`.
HaarVector project_levels(const HaarVector& f, const std::set<int>& levels);

// Bounds for sup{ <f, g> : ||f||_SLinf <= 1, depth(f) <= depth(g) }.
enum class PairingMethod { h1_bound, convex_ascent };
struct SupPairing {
  Rational value;
  bool is_upper_bound;  // true: certified upper bound; false: feasible lower bound
};
SupPairing sup_pairing_over_ball(const HaarVector& g, PairingMethod method,
                                 int max_iterations = 500);

}  // namespace haarfactor
