#include "haarfactor/json_io.hpp"

#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace haarfactor {
namespace {

[[noreturn]] void bad_field(const char* field, const std::string& why) {
  throw std::invalid_argument(std::string(field) + ": " + why);
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad_field(key, "missing field");
  return j.at(key);
}

std::int64_t int_field(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number_integer()) bad_field(key, "expected an integer");
  return v.get<std::int64_t>();
}

bool bool_field(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_boolean()) bad_field(key, "expected a boolean");
  return v.get<bool>();
}

std::string string_field(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_string()) bad_field(key, "expected a string");
  return v.get<std::string>();
}

Rational rational_field(const Json& j, const char* key) {
  return rational_from_json(require(j, key), key);
}

DyadicInterval interval_field(const Json& j, const char* key) {
  return interval_from_json(require(j, key), key);
}

}  // namespace

Json to_json(const Rational& value) { return rational_to_string(value); }

Rational rational_from_json(const Json& j, const char* field) {
  if (!j.is_string()) bad_field(field, "rationals are \"p/q\" strings");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    bad_field(field, e.what());
  }
}

Json to_json(const DyadicInterval& iv) { return Json{{"n", iv.n}, {"k", iv.k}}; }

DyadicInterval interval_from_json(const Json& j, const char* field) {
  if (!j.is_object()) bad_field(field, "intervals are {\"n\", \"k\"} objects");
  const std::int64_t n = int_field(j, "n");
  const std::int64_t k = int_field(j, "k");
  if (n < 0 || n > kMaxGeneration) bad_field(field, "generation out of range");
  if (k < 0 || k >= (std::int64_t{1} << n)) bad_field(field, "position out of range");
  return {static_cast<int>(n), k};
}

Json to_json(const HaarVector& f) {
  Json coeffs = Json::array();
  for (const auto& [iv, value] : f.coeffs()) {
    coeffs.push_back(Json{{"n", iv.n}, {"k", iv.k}, {"value", to_json(value)}});
  }
  return Json{{"coeffs", std::move(coeffs)}};
}

HaarVector haar_vector_from_json(const Json& j) {
  const Json& coeffs = require(j, "coeffs");
  if (!coeffs.is_array()) bad_field("coeffs", "expected an array");
  HaarVector f;
  for (const Json& entry : coeffs) {
    const DyadicInterval iv = interval_from_json(entry, "coeffs[]");
    if (f.coeff(iv) != 0) bad_field("coeffs[]", "duplicate interval");
    f.set_coeff(iv, rational_field(entry, "value"));
  }
  return f;
}

Json to_json(const IntervalFamily& family) {
  Json indices = Json::array();
  for (const auto& iv : family.index_set) indices.push_back(to_json(iv));
  Json blocks = Json::object();
  for (const auto& [index, members] : family.blocks) {
    Json list = Json::array();
    for (const auto& m : members) list.push_back(to_json(m));
    blocks[std::to_string(ordering(index))] = std::move(list);
  }
  return Json{{"indices", std::move(indices)}, {"blocks", std::move(blocks)}};
}

IntervalFamily family_from_json(const Json& j) {
  const Json& indices = require(j, "indices");
  const Json& blocks = require(j, "blocks");
  if (!indices.is_array()) bad_field("indices", "expected an array");
  if (!blocks.is_object()) bad_field("blocks", "expected an object");
  IntervalFamily family;
  for (const Json& entry : indices) {
    family.index_set.push_back(interval_from_json(entry, "indices[]"));
  }
  for (const auto& index : family.index_set) {
    const std::string key = std::to_string(ordering(index));
    if (!blocks.contains(key)) bad_field("blocks", "missing collection for index " + key);
    const Json& list = blocks.at(key);
    if (!list.is_array()) bad_field("blocks", "collection " + key + " is not an array");
    std::vector<DyadicInterval> members;
    for (const Json& entry : list) members.push_back(interval_from_json(entry, "blocks[]"));
    family.blocks.emplace(index, std::move(members));
  }
  if (blocks.size() != family.index_set.size()) {
    bad_field("blocks", "collections present for unknown indices");
  }
  return family;
}

Json to_json(const SignAssignment& signs) {
  Json list = Json::array();
  for (const auto& [iv, sign] : signs.signs) {
    list.push_back(Json{{"n", iv.n}, {"k", iv.k}, {"sign", sign}});
  }
  return Json{{"signs", std::move(list)}};
}

SignAssignment signs_from_json(const Json& j) {
  const Json& list = require(j, "signs");
  if (!list.is_array()) bad_field("signs", "expected an array");
  SignAssignment signs;
  for (const Json& entry : list) {
    const DyadicInterval iv = interval_from_json(entry, "signs[]");
    const std::int64_t sign = int_field(entry, "sign");
    if (sign != 1 && sign != -1) bad_field("signs[]", "sign must be +1 or -1");
    if (!signs.signs.emplace(iv, static_cast<int>(sign)).second) {
      bad_field("signs[]", "duplicate interval");
    }
  }
  return signs;
}

Json to_json(const DiagonalSigns& sigma) {
  Json flipped = Json::array();
  for (const auto& iv : sigma.flipped) flipped.push_back(to_json(iv));
  return Json{{"flipped", std::move(flipped)}};
}

DiagonalSigns diagonal_signs_from_json(const Json& j) {
  const Json& flipped = require(j, "flipped");
  if (!flipped.is_array()) bad_field("flipped", "expected an array");
  DiagonalSigns sigma;
  for (const Json& entry : flipped) {
    if (!sigma.flipped.insert(interval_from_json(entry, "flipped[]")).second) {
      bad_field("flipped[]", "duplicate interval");
    }
  }
  return sigma;
}

Json to_json(const JonesReport& report) {
  Json violations = Json::array();
  for (const auto& v : report.violations) {
    violations.push_back(Json{{"condition", v.condition}, {"detail", v.detail}});
  }
  return Json{{"satisfied", report.satisfied},
              {"kappa", to_json(report.kappa)},
              {"violations", std::move(violations)}};
}

Json to_json(const GeneratorSpec& spec) {
  return Json{{"kind", generator_kind_name(spec.kind)},
              {"depth", spec.depth},
              {"delta", to_json(spec.delta)},
              {"off_diagonal_mass", to_json(spec.off_diagonal_mass)},
              {"seed", spec.seed}};
}

GeneratorSpec generator_spec_from_json(const Json& j) {
  GeneratorSpec spec;
  spec.kind = generator_kind_from_name(string_field(j, "kind"));
  const std::int64_t depth = int_field(j, "depth");
  if (depth < 0 || depth > kMaxGeneration) bad_field("depth", "out of range");
  spec.depth = static_cast<int>(depth);
  spec.delta = rational_field(j, "delta");
  spec.off_diagonal_mass = rational_field(j, "off_diagonal_mass");
  const Json& seed = require(j, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    bad_field("seed", "expected an integer");
  }
  spec.seed = seed.get<std::uint64_t>();
  return spec;
}

Json to_json(const OperatorMatrix& T) {
  Json entries = Json::array();
  for (const auto& [col, column] : T.columns()) {
    for (const auto& [row, value] : column) {
      entries.push_back(
          Json{{"row", to_json(row)}, {"col", to_json(col)}, {"value", to_json(value)}});
    }
  }
  return Json{{"depth", T.depth()},
              {"norm_bound", to_json(T.norm_bound())},
              {"norm_bound_source", T.norm_bound_source()},
              {"entries", std::move(entries)}};
}

OperatorMatrix operator_from_json(const Json& j) {
  const std::int64_t depth = int_field(j, "depth");
  if (depth < 0 || depth > kMaxGeneration) bad_field("depth", "out of range");
  OperatorMatrix T(static_cast<int>(depth));
  const Json& entries = require(j, "entries");
  if (!entries.is_array()) bad_field("entries", "expected an array");
  for (const Json& entry : entries) {
    const DyadicInterval row = interval_field(entry, "row");
    const DyadicInterval col = interval_field(entry, "col");
    if (T.entry(row, col) != 0) bad_field("entries[]", "duplicate entry");
    T.set_entry(row, col, rational_field(entry, "value"));
  }
  T.set_norm_bound(rational_field(j, "norm_bound"), string_field(j, "norm_bound_source"));
  return T;
}

Json to_json(const InfeasibilityReport& report) {
  return Json{{"stage", report.stage},
              {"detail", report.detail},
              {"index", to_json(report.index)},
              {"achieved", to_json(report.achieved)},
              {"budget", to_json(report.budget)},
              {"needed_depth_hint", report.needed_depth_hint}};
}

InfeasibilityReport infeasibility_from_json(const Json& j) {
  InfeasibilityReport report;
  report.stage = string_field(j, "stage");
  report.detail = string_field(j, "detail");
  report.index = interval_field(j, "index");
  report.achieved = rational_field(j, "achieved");
  report.budget = rational_field(j, "budget");
  report.needed_depth_hint = static_cast<int>(int_field(j, "needed_depth_hint"));
  return report;
}

Json to_json(const DiagonalizationCertificate& cert) {
  Json steps = Json::array();
  for (const auto& step : cert.per_index) {
    steps.push_back(Json{{"index", to_json(step.index)},
                         {"frequency", step.frequency},
                         {"predecessor_sum", to_json(step.predecessor_sum)},
                         {"predecessor_budget", to_json(step.predecessor_budget)},
                         {"diagonal_value", to_json(step.diagonal_value)},
                         {"diagonal_floor", to_json(step.diagonal_floor)},
                         {"diagonal_enforced", step.diagonal_enforced},
                         {"future_hi", to_json(step.future_hi)},
                         {"future_budget", to_json(step.future_budget)}});
  }
  return Json{{"eta", to_json(cert.eta)},
              {"delta", to_json(cert.delta)},
              {"depth", cert.depth},
              {"index_depth", cert.index_depth},
              {"feasible", cert.feasible},
              {"scope_note", cert.scope_note},
              {"per_index", std::move(steps)},
              {"lambda_sets", cert.lambda_sets}};
}

DiagonalizationCertificate certificate_from_json(const Json& j) {
  DiagonalizationCertificate cert;
  cert.eta = rational_field(j, "eta");
  cert.delta = rational_field(j, "delta");
  cert.depth = static_cast<int>(int_field(j, "depth"));
  cert.index_depth = static_cast<int>(int_field(j, "index_depth"));
  cert.feasible = bool_field(j, "feasible");
  cert.scope_note = string_field(j, "scope_note");
  const Json& steps = require(j, "per_index");
  if (!steps.is_array()) bad_field("per_index", "expected an array");
  for (const Json& entry : steps) {
    StepRecord step;
    step.index = interval_field(entry, "index");
    step.frequency = static_cast<int>(int_field(entry, "frequency"));
    step.predecessor_sum = rational_field(entry, "predecessor_sum");
    step.predecessor_budget = rational_field(entry, "predecessor_budget");
    step.diagonal_value = rational_field(entry, "diagonal_value");
    step.diagonal_floor = rational_field(entry, "diagonal_floor");
    step.diagonal_enforced = bool_field(entry, "diagonal_enforced");
    step.future_hi = rational_field(entry, "future_hi");
    step.future_budget = rational_field(entry, "future_budget");
    cert.per_index.push_back(std::move(step));
  }
  const Json& lambdas = require(j, "lambda_sets");
  if (!lambdas.is_array()) bad_field("lambda_sets", "expected an array");
  for (const Json& entry : lambdas) {
    if (!entry.is_array()) bad_field("lambda_sets[]", "expected an array");
    std::vector<int> levels;
    for (const Json& v : entry) {
      if (!v.is_number_integer()) bad_field("lambda_sets[]", "expected integers");
      levels.push_back(v.get<int>());
    }
    cert.lambda_sets.push_back(std::move(levels));
  }
  return cert;
}

Json to_json(const DiagonalizationResult& result) {
  Json j{{"ok", result.ok},
         {"family", to_json(result.basis.family)},
         {"signs", to_json(result.basis.signs)},
         {"kappa", to_json(result.basis.kappa)},
         {"sigma", to_json(result.sigma)},
         {"certificate", to_json(result.certificate)}};
  if (!result.ok) j["infeasibility"] = to_json(result.infeasibility);
  return j;
}

DiagonalizationResult diagonalization_from_json(const Json& j) {
  DiagonalizationResult result;
  result.ok = bool_field(j, "ok");
  IntervalFamily family = family_from_json(require(j, "family"));
  SignAssignment signs = signs_from_json(require(j, "signs"));
  if (result.ok || !family.index_set.empty()) {
    result.basis = build_block_basis(family, signs);
    if (result.basis.kappa != rational_field(j, "kappa")) {
      bad_field("kappa", "stored constant disagrees with the rebuilt family");
    }
  }
  result.sigma = diagonal_signs_from_json(require(j, "sigma"));
  result.certificate = certificate_from_json(require(j, "certificate"));
  if (j.contains("infeasibility")) {
    result.infeasibility = infeasibility_from_json(j.at("infeasibility"));
  }
  return result;
}

Json to_json(const WitnessSummary& summary) {
  return Json{{"exhaustive_count", summary.exhaustive_count},
              {"random_count", summary.random_count},
              {"worst_ratio_sq", to_json(summary.worst_ratio_sq)},
              {"all_passed", summary.all_passed}};
}

WitnessSummary witness_summary_from_json(const Json& j) {
  WitnessSummary summary;
  summary.exhaustive_count = static_cast<std::size_t>(int_field(j, "exhaustive_count"));
  summary.random_count = static_cast<std::size_t>(int_field(j, "random_count"));
  summary.worst_ratio_sq = rational_field(j, "worst_ratio_sq");
  summary.all_passed = bool_field(j, "all_passed");
  return summary;
}

Json to_json(const FactorizationResult& result, bool emit_matrices) {
  Json block_errors = Json::array();
  for (const auto& rec : result.block_errors) {
    block_errors.push_back(Json{{"index", to_json(rec.index)},
                                {"past_sum", to_json(rec.past_sum)},
                                {"future_direct_hi", to_json(rec.future_direct_hi)},
                                {"future_expanded", to_json(rec.future_expanded)},
                                {"diagonal", to_json(rec.diagonal)},
                                {"bound", to_json(rec.bound)}});
  }
  Json j{{"ok", result.ok},
         {"eta_prime", to_json(result.eta_prime)},
         {"contraction", to_json(result.contraction)},
         {"contraction_target", to_json(result.contraction_target)},
         {"norm_product_bound", to_json(result.norm_product_bound)},
         {"residual", to_json(result.residual)},
         {"neumann_terms", result.neumann_terms},
         {"route_check_passed", result.route_check_passed},
         {"block_errors", std::move(block_errors)},
         {"witnesses", to_json(result.witnesses)},
         {"diagonalization", to_json(result.diagonalization)}};
  if (emit_matrices && result.ok) {
    j["R"] = to_json(result.R);
    j["S"] = to_json(result.S);
  }
  return j;
}

FactorizationResult factorization_from_json(const Json& j) {
  FactorizationResult result;
  result.ok = bool_field(j, "ok");
  result.eta_prime = rational_field(j, "eta_prime");
  result.contraction = rational_field(j, "contraction");
  result.contraction_target = rational_field(j, "contraction_target");
  result.norm_product_bound = rational_field(j, "norm_product_bound");
  result.residual = rational_field(j, "residual");
  result.neumann_terms = static_cast<int>(int_field(j, "neumann_terms"));
  result.route_check_passed = bool_field(j, "route_check_passed");
  const Json& block_errors = require(j, "block_errors");
  if (!block_errors.is_array()) bad_field("block_errors", "expected an array");
  for (const Json& entry : block_errors) {
    BlockErrorRecord rec;
    rec.index = interval_field(entry, "index");
    rec.past_sum = rational_field(entry, "past_sum");
    rec.future_direct_hi = rational_field(entry, "future_direct_hi");
    rec.future_expanded = rational_field(entry, "future_expanded");
    rec.diagonal = rational_field(entry, "diagonal");
    rec.bound = rational_field(entry, "bound");
    result.block_errors.push_back(std::move(rec));
  }
  result.witnesses = witness_summary_from_json(require(j, "witnesses"));
  result.diagonalization = diagonalization_from_json(require(j, "diagonalization"));
  if (j.contains("R")) result.R = operator_from_json(j.at("R"));
  if (j.contains("S")) result.S = operator_from_json(j.at("S"));
  return result;
}

Json to_json(const PrimaryResult& result, bool emit_matrices) {
  Json j{{"ok", result.ok},
         {"eta", to_json(result.eta)},
         {"index_depth", result.index_depth},
         {"choice", to_string(result.choice)},
         {"t_large_depth", result.t_large_depth},
         {"c_large_depth", result.c_large_depth},
         {"selection", to_json(result.selection)},
         {"composed_family", to_json(result.composed_family)},
         {"composed_kappa", to_json(result.composed_kappa)},
         {"delta_eff", to_json(result.delta_eff)},
         {"factorization", to_json(result.factorization, emit_matrices)}};
  if (!result.ok) j["infeasibility"] = to_json(result.infeasibility);
  return j;
}

PrimaryResult primary_from_json(const Json& j) {
  PrimaryResult result;
  result.ok = bool_field(j, "ok");
  result.eta = rational_field(j, "eta");
  result.index_depth = static_cast<int>(int_field(j, "index_depth"));
  const std::string choice = string_field(j, "choice");
  if (choice == "T") {
    result.choice = PrimaryChoice::T_side;
  } else if (choice == "Id_minus_T") {
    result.choice = PrimaryChoice::complement_side;
  } else {
    bad_field("choice", "expected \"T\" or \"Id_minus_T\"");
  }
  result.t_large_depth = static_cast<int>(int_field(j, "t_large_depth"));
  result.c_large_depth = static_cast<int>(int_field(j, "c_large_depth"));
  result.selection = family_from_json(require(j, "selection"));
  result.composed_family = family_from_json(require(j, "composed_family"));
  result.composed_kappa = rational_field(j, "composed_kappa");
  result.delta_eff = rational_field(j, "delta_eff");
  result.factorization = factorization_from_json(require(j, "factorization"));
  if (j.contains("infeasibility")) {
    result.infeasibility = infeasibility_from_json(j.at("infeasibility"));
  }
  return result;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return j;
}

void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::invalid_argument("write failed: " + path);
}

}  // namespace haarfactor
