// Compares the serial reference kernels against their OpenMP twins on
// representative workloads and checks that both paths agree bit for bit.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>

#include "haarfactor/exec.hpp"
#include "haarfactor/factorization.hpp"
#include "haarfactor/generators.hpp"
#include "haarfactor/haar_vector.hpp"
#include "haarfactor/jones.hpp"
#include "haarfactor/quasi_diag.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace haarfactor;

double now_seconds() {
#ifdef _OPENMP
  return omp_get_wtime();
#else
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
#endif
}

// Best-of-`reps` wall time in milliseconds.
double time_best(int reps, const std::function<void()>& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    body();
    const double t1 = now_seconds();
    best = std::min(best, (t1 - t0) * 1e3);
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-28s %10.2f ms %10.2f ms %8.2fx   %s\n", name, serial_ms, parallel_ms,
              parallel_ms > 0 ? serial_ms / parallel_ms : 0.0, equal ? "equal" : "MISMATCH");
}

HaarVector full_tree_vector(int depth, std::uint64_t seed) {
  HaarVector f;
  std::uint64_t counter = 0;
  for (std::uint64_t p = 0; p < tree_size(depth); ++p) {
    const Rational value = unit_rational(mix64(seed, counter++)) - Rational(1, 2);
    f.set_coeff(from_ordering(p), value);
  }
  return f;
}

IntervalFamily identity_family(int depth) {
  IntervalFamily family;
  for (std::uint64_t p = 0; p < tree_size(depth); ++p) {
    const DyadicInterval iv = from_ordering(p);
    family.index_set.push_back(iv);
    family.blocks[iv] = {iv};
  }
  return family;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 3;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--reps") == 0 && i + 1 < argc) {
      reps = std::atoi(argv[++i]);
      if (reps < 1) reps = 1;
    } else {
      std::fprintf(stderr, "usage: %s [--reps N]\n", argv[0]);
      return 2;
    }
  }
  apply_thread_cap_from_env();
  std::printf("workers: %d\n", worker_count());
  std::printf("%-28s %13s %13s %9s   %s\n", "kernel", "serial", "parallel", "speedup",
              "results");

  {
    const HaarVector f = full_tree_vector(14, 7);
    std::vector<Rational> serial_out, parallel_out;
    const double ts = time_best(reps, [&] { serial_out = leaf_profile(f, 14, Exec::serial); });
    const double tp =
        time_best(reps, [&] { parallel_out = leaf_profile(f, 14, Exec::parallel); });
    report("leaf_profile depth 14", ts, tp, serial_out == parallel_out);
  }
  {
    const HaarVector f = full_tree_vector(14, 11);
    Rational serial_out, parallel_out;
    const double ts = time_best(reps, [&] { serial_out = sl_inf_norm_sq(f, Exec::serial); });
    const double tp =
        time_best(reps, [&] { parallel_out = sl_inf_norm_sq(f, Exec::parallel); });
    report("sl_inf_norm_sq depth 14", ts, tp, serial_out == parallel_out);
  }
  {
    const HaarVector f = full_tree_vector(14, 13);
    H1Enclosure serial_out, parallel_out;
    const double ts = time_best(reps, [&] { serial_out = h1_enclosure(f, Exec::serial); });
    const double tp = time_best(reps, [&] { parallel_out = h1_enclosure(f, Exec::parallel); });
    report("h1_enclosure depth 14", ts, tp,
           serial_out.lo == parallel_out.lo && serial_out.hi == parallel_out.hi);
  }
  {
    const IntervalFamily family = identity_family(9);
    JonesReport serial_out, parallel_out;
    const double ts = time_best(reps, [&] { serial_out = check_jones(family, Exec::serial); });
    const double tp =
        time_best(reps, [&] { parallel_out = check_jones(family, Exec::parallel); });
    report("check_jones 1023 indices", ts, tp,
           serial_out.satisfied == parallel_out.satisfied &&
               serial_out.kappa == parallel_out.kappa);
  }
  {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::random_large_diagonal;
    spec.depth = 12;
    spec.delta = Rational(1, 2);
    spec.off_diagonal_mass = Rational(1, 10000);
    spec.seed = 21;
    const OperatorMatrix T = generate(spec);
    DiagonalizationResult serial_out, parallel_out;
    const double ts = time_best(reps, [&] {
      serial_out = quasi_diagonalize(T, Rational(1, 2), Rational(1), 2, Exec::serial);
    });
    const double tp = time_best(reps, [&] {
      parallel_out = quasi_diagonalize(T, Rational(1, 2), Rational(1), 2, Exec::parallel);
    });
    bool equal = serial_out.ok == parallel_out.ok &&
                 serial_out.basis.family.blocks == parallel_out.basis.family.blocks &&
                 serial_out.basis.signs.signs == parallel_out.basis.signs.signs;
    report("quasi_diagonalize N=12", ts, tp, equal);
  }
  {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::random_large_diagonal;
    spec.depth = 10;
    spec.delta = Rational(1, 2);
    spec.off_diagonal_mass = Rational(1, 10000);
    spec.seed = 23;
    const OperatorMatrix T = generate(spec);
    FactorizationResult serial_out, parallel_out;
    const double ts = time_best(reps, [&] {
      serial_out = factor_identity(T, Rational(1, 2), Rational(1), 1, pow2(-40), Exec::serial);
    });
    const double tp = time_best(reps, [&] {
      parallel_out =
          factor_identity(T, Rational(1, 2), Rational(1), 1, pow2(-40), Exec::parallel);
    });
    bool equal = serial_out.ok == parallel_out.ok &&
                 serial_out.residual == parallel_out.residual &&
                 serial_out.contraction == parallel_out.contraction;
    report("factor_identity N=10", ts, tp, equal);
  }
  return 0;
}
