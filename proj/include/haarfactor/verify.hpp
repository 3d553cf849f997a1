#pragma once

#include <string>
#include <vector>

#include "haarfactor/factorization.hpp"
#include "haarfactor/operator_matrix.hpp"
#include "haarfactor/primarity.hpp"
#include "haarfactor/quasi_diag.hpp"

// Independent replay of stored certificates: every recorded value is
// recomputed from the operator and the stored combinatorial data (family,
// signs, level sets) by straight-line code, then compared exactly.  Feasible
// certificates must reproduce every inequality; infeasible ones must
// reproduce the same structured failure under a deterministic re-run.
namespace haarfactor {

struct VerifyOutcome {
  bool pass = false;
  std::vector<std::string> failures;  // empty iff pass
};

VerifyOutcome verify_diagonalization(const OperatorMatrix& T, const DiagonalizationResult& stored,
                                     Exec mode = Exec::automatic);

VerifyOutcome verify_factorization(const OperatorMatrix& T, const FactorizationResult& stored,
                                   Exec mode = Exec::automatic);

VerifyOutcome verify_primary(const OperatorMatrix& T, const PrimaryResult& stored,
                             Exec mode = Exec::automatic);

}  // namespace haarfactor
