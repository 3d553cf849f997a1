#pragma once

#include <json.hpp>

#include "haarfactor/block_basis.hpp"
#include "haarfactor/factorization.hpp"
#include "haarfactor/generators.hpp"
#include "haarfactor/haar_vector.hpp"
#include "haarfactor/jones.hpp"
#include "haarfactor/operator_matrix.hpp"
#include "haarfactor/primarity.hpp"
#include "haarfactor/quasi_diag.hpp"

// Serialization for every certificate and report.  Rationals travel as exact
// "p/q" strings; intervals as {"n", "k"}; family members keyed by the block
// index's breadth-first position.  Readers validate structurally and throw
// std::invalid_argument with a field path on malformed input.
namespace haarfactor {

using Json = nlohmann::json;

Json to_json(const Rational& value);
Rational rational_from_json(const Json& j, const char* field);

Json to_json(const DyadicInterval& iv);
DyadicInterval interval_from_json(const Json& j, const char* field);

Json to_json(const HaarVector& f);
HaarVector haar_vector_from_json(const Json& j);

Json to_json(const IntervalFamily& family);
IntervalFamily family_from_json(const Json& j);

Json to_json(const SignAssignment& signs);
SignAssignment signs_from_json(const Json& j);

Json to_json(const DiagonalSigns& sigma);
DiagonalSigns diagonal_signs_from_json(const Json& j);

Json to_json(const JonesReport& report);

Json to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const Json& j);

Json to_json(const OperatorMatrix& T);
OperatorMatrix operator_from_json(const Json& j);

Json to_json(const InfeasibilityReport& report);
InfeasibilityReport infeasibility_from_json(const Json& j);

Json to_json(const DiagonalizationCertificate& cert);
DiagonalizationCertificate certificate_from_json(const Json& j);

Json to_json(const DiagonalizationResult& result);
DiagonalizationResult diagonalization_from_json(const Json& j);

Json to_json(const WitnessSummary& summary);
WitnessSummary witness_summary_from_json(const Json& j);

Json to_json(const FactorizationResult& result, bool emit_matrices);
FactorizationResult factorization_from_json(const Json& j);

Json to_json(const PrimaryResult& result, bool emit_matrices);
PrimaryResult primary_from_json(const Json& j);

// File helpers: parse/print with a trailing newline; throw on I/O failure.
Json load_json(const std::string& path);
void save_json(const std::string& path, const Json& j);

}  // namespace haarfactor
