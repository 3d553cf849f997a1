#include "haarfactor/haar_vector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace haarfactor {

namespace {

using CoeffIndex = std::unordered_map<std::uint64_t, const Rational*>;

CoeffIndex index_coeffs(const HaarVector& f) {
  CoeffIndex idx;
  idx.reserve(f.coeffs().size() * 2 + 1);
  for (const auto& [iv, val] : f.coeffs()) idx.emplace(ordering(iv), &val);
  return idx;
}

const Rational* lookup(const CoeffIndex& idx, int n, std::int64_t k) {
  auto it = idx.find((std::uint64_t{1} << n) - 1 + static_cast<std::uint64_t>(k));
  return it == idx.end() ? nullptr : it->second;
}

// Writes the leaf profile of the subtree rooted at (n, k); acc holds the sum
// of squared coefficients strictly above the current node.
void fill_leaves(const CoeffIndex& idx, int depth, int n, std::int64_t k, Rational& acc,
                 std::vector<Rational>& out) {
  Rational sq;
  const Rational* a = lookup(idx, n, k);
  if (a) {
    sq = (*a) * (*a);
    acc += sq;
  }
  if (n == depth) {
    out[static_cast<std::size_t>(k)] = acc;
  } else {
    fill_leaves(idx, depth, n + 1, 2 * k, acc, out);
    fill_leaves(idx, depth, n + 1, 2 * k + 1, acc, out);
  }
  if (a) acc -= sq;
}

// Maximum leaf value of the subtree rooted at (n, k).
void max_leaves(const CoeffIndex& idx, int depth, int n, std::int64_t k, Rational& acc,
                Rational& best, bool& seen) {
  Rational sq;
  const Rational* a = lookup(idx, n, k);
  if (a) {
    sq = (*a) * (*a);
    acc += sq;
  }
  if (n == depth) {
    if (!seen || acc > best) {
      best = acc;
      seen = true;
    }
  } else {
    max_leaves(idx, depth, n + 1, 2 * k, acc, best, seen);
    max_leaves(idx, depth, n + 1, 2 * k + 1, acc, best, seen);
  }
  if (a) acc -= sq;
}

// Sum of squared coefficients strictly above generation `split` along the path
// to each generation-`split` node.
std::vector<Rational> prefix_sums(const CoeffIndex& idx, int split) {
  std::vector<Rational> pre(std::size_t{1} << split);
  Rational acc(0);
  auto walk = [&](auto&& self, int n, std::int64_t k) -> void {
    if (n == split) {
      pre[static_cast<std::size_t>(k)] = acc;
      return;
    }
    Rational sq;
    const Rational* a = lookup(idx, n, k);
    if (a) {
      sq = (*a) * (*a);
      acc += sq;
    }
    self(self, n + 1, 2 * k);
    self(self, n + 1, 2 * k + 1);
    if (a) acc -= sq;
  };
  walk(walk, 0, 0);
  return pre;
}

int profile_split(int depth) { return std::min(depth, 6); }

}  // namespace

Rational HaarVector::coeff(const DyadicInterval& iv) const {
  auto it = coeffs_.find(iv);
  return it == coeffs_.end() ? Rational(0) : it->second;
}

void HaarVector::set_coeff(const DyadicInterval& iv, const Rational& value) {
  if (sgn(value) == 0) {
    coeffs_.erase(iv);
  } else {
    coeffs_[iv] = value;
  }
}

void HaarVector::add_coeff(const DyadicInterval& iv, const Rational& value) {
  if (sgn(value) == 0) return;
  auto [it, inserted] = coeffs_.emplace(iv, value);
  if (!inserted) {
    it->second += value;
    if (sgn(it->second) == 0) coeffs_.erase(it);
  }
}

int HaarVector::depth() const {
  int d = 0;
  for (const auto& [iv, val] : coeffs_) d = std::max(d, iv.n);
  return d;
}

HaarVector& HaarVector::operator+=(const HaarVector& rhs) {
  for (const auto& [iv, val] : rhs.coeffs_) add_coeff(iv, val);
  return *this;
}

HaarVector& HaarVector::operator-=(const HaarVector& rhs) {
  for (const auto& [iv, val] : rhs.coeffs_) add_coeff(iv, -val);
  return *this;
}

HaarVector& HaarVector::operator*=(const Rational& scalar) {
  if (sgn(scalar) == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [iv, val] : coeffs_) val *= scalar;
  return *this;
}

Rational inner_product(const HaarVector& f, const HaarVector& g) {
  const HaarVector& small = f.support_size() <= g.support_size() ? f : g;
  const HaarVector& large = f.support_size() <= g.support_size() ? g : f;
  Rational acc(0);
  for (const auto& [iv, val] : small.coeffs()) {
    auto it = large.coeffs().find(iv);
    if (it != large.coeffs().end()) acc += val * it->second * measure(iv);
  }
  return acc;
}

std::vector<Rational> leaf_profile(const HaarVector& f, int depth, Exec mode) {
  if (depth < 0 || depth > kMaxProfileDepth) {
    throw std::invalid_argument("leaf_profile: depth outside the profile budget");
  }
  if (depth < f.depth()) {
    throw std::invalid_argument("leaf_profile: depth shallower than the vector support");
  }
  CoeffIndex idx = index_coeffs(f);
  std::vector<Rational> out(std::size_t{1} << depth);
  const int split = profile_split(depth);
  if (use_parallel(mode, out.size())) {
    std::vector<Rational> pre = prefix_sums(idx, split);
    const std::int64_t subtrees = std::int64_t{1} << split;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t j = 0; j < subtrees; ++j) {
      Rational acc = pre[static_cast<std::size_t>(j)];
      auto walk = [&](auto&& self, int n, std::int64_t k) -> void {
        Rational sq;
        const Rational* c = lookup(idx, n, k);
        if (c) {
          sq = (*c) * (*c);
          acc += sq;
        }
        if (n == depth) {
          out[static_cast<std::size_t>(k)] = acc;
        } else {
          self(self, n + 1, 2 * k);
          self(self, n + 1, 2 * k + 1);
        }
        if (c) acc -= sq;
      };
      walk(walk, split, j);
    }
  } else {
    Rational acc(0);
    fill_leaves(idx, depth, 0, 0, acc, out);
  }
  return out;
}

Rational sl_inf_norm_sq(const HaarVector& f, Exec mode) {
  if (f.empty()) return Rational(0);
  const int depth = f.depth();
  CoeffIndex idx = index_coeffs(f);
  const std::size_t leaves = std::size_t{1} << depth;
  if (use_parallel(mode, leaves)) {
    const int split = profile_split(depth);
    std::vector<Rational> pre = prefix_sums(idx, split);
    const std::int64_t subtrees = std::int64_t{1} << split;
    std::vector<Rational> bests(static_cast<std::size_t>(subtrees));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t j = 0; j < subtrees; ++j) {
      Rational acc = pre[static_cast<std::size_t>(j)];
      Rational best(0);
      bool seen = false;
      auto walk = [&](auto&& self, int n, std::int64_t k) -> void {
        Rational sq;
        const Rational* c = lookup(idx, n, k);
        if (c) {
          sq = (*c) * (*c);
          acc += sq;
        }
        if (n == depth) {
          if (!seen || acc > best) {
            best = acc;
            seen = true;
          }
        } else {
          self(self, n + 1, 2 * k);
          self(self, n + 1, 2 * k + 1);
        }
        if (c) acc -= sq;
      };
      walk(walk, split, j);
      bests[static_cast<std::size_t>(j)] = best;
    }
    Rational best = bests[0];
    for (const Rational& b : bests) best = std::max(best, b);
    return best;
  }
  Rational acc(0), best(0);
  bool seen = false;
  max_leaves(idx, depth, 0, 0, acc, best, seen);
  return best;
}

H1Enclosure h1_enclosure(const HaarVector& f, Exec mode) {
  if (f.empty()) return {Rational(0), Rational(0)};
  const int depth = f.depth();
  if (depth > kMaxProfileDepth) {
    throw std::invalid_argument("h1_enclosure: support too deep for a materialized profile");
  }
  std::vector<Rational> profile = leaf_profile(f, depth, mode);
  const Rational leaf_measure = pow2(-depth);
  Rational lo(0), hi(0);
  if (use_parallel(mode, profile.size())) {
    const std::int64_t n = static_cast<std::int64_t>(profile.size());
    Rational lo_sum(0), hi_sum(0);
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
      Rational my_lo(0), my_hi(0);
#ifdef _OPENMP
#pragma omp for schedule(static) nowait
#endif
      for (std::int64_t i = 0; i < n; ++i) {
        RootEnclosure root = sqrt_enclosure(profile[static_cast<std::size_t>(i)]);
        my_lo += root.lo;
        my_hi += root.hi;
      }
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        lo_sum += my_lo;
        hi_sum += my_hi;
      }
    }
    lo = lo_sum;
    hi = hi_sum;
  } else {
    for (const Rational& v : profile) {
      RootEnclosure root = sqrt_enclosure(v);
      lo += root.lo;
      hi += root.hi;
    }
  }
  return {lo * leaf_measure, hi * leaf_measure};
}

H1Norm h1_norm(const HaarVector& f, Exec mode) {
  H1Enclosure e = h1_enclosure(f, mode);
  const double value = to_double((e.lo + e.hi) / 2);
  double error = to_double(e.hi - e.lo) * 1.0001 + std::ldexp(std::fabs(value), -50) + 1e-300;
  return {value, error};
}

HaarVector rademacher_vector(int m, const std::vector<int>& signs) {
  if (m < 0 || m > kMaxGeneration) throw std::invalid_argument("rademacher_vector: bad level");
  if (signs.size() != (std::size_t{1} << m)) {
    throw std::invalid_argument("rademacher_vector: sign count must be 2^m");
  }
  HaarVector v;
  for (std::int64_t k = 0; k < (std::int64_t{1} << m); ++k) {
    const int s = signs[static_cast<std::size_t>(k)];
    if (s != 1 && s != -1) throw std::invalid_argument("rademacher_vector: signs must be +-1");
    v.set_coeff({m, k}, Rational(s));
  }
  return v;
}

HaarVector project_levels(const HaarVector& f, const std::set<int>& levels) {
  HaarVector out;
  for (const auto& [iv, val] : f.coeffs()) {
    if (levels.count(iv.n)) out.set_coeff(iv, val);
  }
  return out;
}

namespace {

// Feasible lower bound for sup{ <f, g> } over the SL^infinity unit ball via
// atom candidates plus a float ascent snapped back to exact arithmetic.
Rational convex_ascent_value(const HaarVector& g, int max_iterations) {
  if (g.empty()) return Rational(0);
  const int depth = g.depth();

  // Weight vector w_I = c_I |I| turns the pairing into a plain dot product.
  HaarVector w;
  for (const auto& [iv, val] : g.coeffs()) w.set_coeff(iv, val * measure(iv));

  Rational best(0);

  // Level atoms: a_I = sign(c_I) on one generation is feasible (each leaf path
  // meets a single generation-m interval), with exact value sum |c_I| |I|.
  std::map<int, Rational> level_value;
  for (const auto& [iv, val] : g.coeffs()) level_value[iv.n] += abs(val) * measure(iv);
  for (const auto& [m, val] : level_value) best = std::max(best, val);

  // Path atoms: unit-l2 mass down a single root-to-leaf path is feasible; the
  // best path value is sqrt(max_path sum w_I^2), bounded from below exactly.
  Rational path_sq = sl_inf_norm_sq(w);
  if (sgn(path_sq) > 0) best = std::max(best, sqrt_enclosure(path_sq).lo);

  // Float ascent with renormalization, evaluated exactly at the end.
  std::vector<DyadicInterval> supp;
  std::vector<double> wd;
  supp.reserve(g.support_size());
  for (const auto& [iv, val] : w.coeffs()) {
    supp.push_back(iv);
    wd.push_back(to_double(val));
  }
  std::unordered_map<std::uint64_t, std::size_t> pos;
  for (std::size_t i = 0; i < supp.size(); ++i) pos.emplace(ordering(supp[i]), i);

  std::vector<double> a(supp.size(), 0.0), best_a;
  double best_val = 0.0;
  auto norm_sq_d = [&](const std::vector<double>& x) {
    double acc = 0.0, best_leaf = 0.0;
    auto walk = [&](auto&& self, int n, std::int64_t k) -> void {
      double sq = 0.0;
      auto it = pos.find((std::uint64_t{1} << n) - 1 + static_cast<std::uint64_t>(k));
      if (it != pos.end()) {
        sq = x[it->second] * x[it->second];
        acc += sq;
      }
      if (n == depth) {
        best_leaf = std::max(best_leaf, acc);
      } else {
        self(self, n + 1, 2 * k);
        self(self, n + 1, 2 * k + 1);
      }
      acc -= sq;
    };
    walk(walk, 0, 0);
    return best_leaf;
  };
  for (int t = 1; t <= max_iterations; ++t) {
    const double step = 1.0 / static_cast<double>(t);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += step * wd[i];
    const double s = norm_sq_d(a);
    if (s > 1.0) {
      const double inv = 1.0 / std::sqrt(s);
      for (double& x : a) x *= inv;
    }
    double val = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) val += a[i] * wd[i];
    if (val > best_val) {
      best_val = val;
      best_a = a;
    }
  }
  if (!best_a.empty()) {
    HaarVector v;
    for (std::size_t i = 0; i < supp.size(); ++i) {
      Rational c;
      mpq_set_d(c.get_mpq_t(), best_a[i]);
      v.set_coeff(supp[i], c);
    }
    Rational s = sl_inf_norm_sq(v);
    if (sgn(s) > 0) {
      Rational scale = floor_inv_sqrt(s);
      Rational val = scale * inner_product(v, g);
      best = std::max(best, val);
    }
  }
  return best;
}

}  // namespace

SupPairing sup_pairing_over_ball(const HaarVector& g, PairingMethod method, int max_iterations) {
  if (method == PairingMethod::h1_bound) {
    return {h1_enclosure(g).hi, true};
  }
  if (max_iterations < 1) throw std::invalid_argument("sup_pairing_over_ball: bad iteration cap");
  return {convex_ascent_value(g, max_iterations), false};
}

}  // namespace haarfactor
