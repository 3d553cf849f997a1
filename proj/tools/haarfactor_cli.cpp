// Command-line front end: runs the constructions, writes machine-checkable
// JSON certificates (human summary on stderr), and replays stored
// certificates.  Exit codes: 0 success, 1 verification failure, 2 input
// error, 3 infeasible within the requested depth.
#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "haarfactor/exec.hpp"
#include "haarfactor/figure.hpp"
#include "haarfactor/json_io.hpp"
#include "haarfactor/verify.hpp"

namespace hf = haarfactor;

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitInputError = 2;
constexpr int kExitInfeasible = 3;

hf::Exec exec_from_name(const std::string& name) {
  if (name == "serial") return hf::Exec::serial;
  if (name == "parallel") return hf::Exec::parallel;
  if (name == "auto") return hf::Exec::automatic;
  throw std::invalid_argument("unknown execution mode: " + name);
}

hf::Rational positive_rational(const std::string& text, const char* what) {
  const hf::Rational r = hf::parse_rational(text);
  if (r <= 0) throw std::invalid_argument(std::string(what) + " must be positive");
  return r;
}

hf::Rational nonnegative_rational(const std::string& text, const char* what) {
  const hf::Rational r = hf::parse_rational(text);
  if (r < 0) throw std::invalid_argument(std::string(what) + " must be nonnegative");
  return r;
}

void emit_json(const hf::Json& j, const std::string& output) {
  if (output.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    hf::save_json(output, j);
  }
}

void emit_text(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output);
  if (!out) throw std::invalid_argument("cannot open " + output + " for writing");
  out << text;
  if (!out) throw std::invalid_argument("write failed: " + output);
}

hf::OperatorMatrix load_operator(const std::string& file, const std::string& spec_file) {
  if (!file.empty() && !spec_file.empty()) {
    throw std::invalid_argument("give either an operator file or a generator spec, not both");
  }
  if (!file.empty()) return hf::operator_from_json(hf::load_json(file));
  if (!spec_file.empty()) return hf::generate(hf::generator_spec_from_json(hf::load_json(spec_file)));
  throw std::invalid_argument("an operator file or a generator spec is required");
}

int run_norms(const std::string& input, const std::string& output, hf::Exec mode) {
  const hf::HaarVector f = hf::haar_vector_from_json(hf::load_json(input));
  const hf::Rational sl = hf::sl_inf_norm_sq(f, mode);
  const hf::H1Enclosure h1 = hf::h1_enclosure(f, mode);
  const hf::H1Norm h1f = hf::h1_norm(f, mode);
  const int depth = f.depth();
  const std::vector<hf::Rational> profile = hf::leaf_profile(f, depth, mode);
  hf::Rational lo = profile.front(), hi = profile.front();
  for (const hf::Rational& v : profile) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  hf::Json j{{"support_size", f.support_size()},
             {"sl_inf_norm_sq", hf::to_json(sl)},
             {"sl_inf_norm_sq_approx", hf::to_double(sl)},
             {"h1", hf::Json{{"value", h1f.value}, {"error", h1f.error}}},
             {"h1_enclosure", hf::Json{{"lo", hf::to_json(h1.lo)}, {"hi", hf::to_json(h1.hi)}}},
             {"leaf_profile",
              hf::Json{{"depth", depth},
                       {"entries", profile.size()},
                       {"min", hf::to_json(lo)},
                       {"max", hf::to_json(hi)}}}};
  emit_json(j, output);
  std::cerr << "sl_inf_norm_sq = " << hf::rational_to_string(sl) << " (~" << hf::to_double(sl)
            << "), h1 = " << h1f.value << " +/- " << h1f.error << "\n";
  return kExitSuccess;
}

int run_check_jones(const std::string& input, const std::string& output, hf::Exec mode) {
  const hf::IntervalFamily family = hf::family_from_json(hf::load_json(input));
  const hf::JonesReport report = hf::check_jones(family, mode);
  emit_json(hf::to_json(report), output);
  if (report.satisfied) {
    std::cerr << "satisfied, kappa = " << hf::rational_to_string(report.kappa) << "\n";
    return kExitSuccess;
  }
  for (const auto& v : report.violations) {
    std::cerr << v.condition << ": " << v.detail << "\n";
  }
  return kExitVerifyFail;
}

int run_reiterate(const std::string& base_file, const std::string& selector_file,
                  const std::string& output, hf::Exec mode) {
  const hf::IntervalFamily base = hf::family_from_json(hf::load_json(base_file));
  hf::IntervalFamily raw = hf::family_from_json(hf::load_json(selector_file));
  hf::SelectorFamily selector{std::move(raw.index_set), std::move(raw.blocks)};
  const hf::ReiterationResult result = hf::reiterate(base, selector, mode);
  hf::Json j{{"ok", result.ok},
             {"composed", hf::to_json(result.composed)},
             {"base", hf::to_json(result.base_report)},
             {"selector", hf::to_json(result.selector_report)}};
  if (result.ok) {
    j["composed_report"] = hf::to_json(hf::check_jones(result.composed, mode));
    j["product_bound"] = hf::to_json(result.base_report.kappa * result.selector_report.kappa);
  }
  emit_json(j, output);
  if (!result.ok) {
    std::cerr << "reiteration rejected: check the base and selector reports\n";
    return kExitVerifyFail;
  }
  std::cerr << "composed family with " << result.composed.index_set.size() << " indices\n";
  return kExitSuccess;
}

int run_build_gg(int index_depth, int spacing, const std::string& output) {
  if (index_depth < 0) throw std::invalid_argument("index depth must be nonnegative");
  if (spacing < 1) throw std::invalid_argument("spacing must be at least 1");
  const std::uint64_t steps = hf::tree_size(index_depth);
  if (spacing * (steps - 1) > static_cast<std::uint64_t>(hf::kMaxGeneration)) {
    throw std::invalid_argument("frequency schedule exceeds the generation cap");
  }
  hf::IntervalFamily family;
  family.index_set.push_back(hf::unit_interval());
  family.blocks[hf::unit_interval()] = {hf::unit_interval()};
  for (std::uint64_t i = 1; i < steps; ++i) {
    const hf::DyadicInterval index = hf::from_ordering(i);
    const auto& parents = family.blocks.at(hf::parent(index));
    const hf::Side side = hf::is_left_child(index) ? hf::Side::left : hf::Side::right;
    const int m = spacing * static_cast<int>(i);
    family.blocks[index] = hf::gamlen_gaudet_children(parents, side, m);
    family.index_set.push_back(index);
  }
  emit_json(hf::to_json(family), output);
  std::cerr << "built " << family.index_set.size() << " collections, top level "
            << spacing * static_cast<int>(steps - 1) << "\n";
  return kExitSuccess;
}

int run_diagonalize(const std::string& operator_file, const std::string& spec_file,
                    const std::string& delta_text, const std::string& eta_text, int index_depth,
                    const std::string& output, hf::Exec mode) {
  const hf::OperatorMatrix T = load_operator(operator_file, spec_file);
  const hf::Rational delta = nonnegative_rational(delta_text, "delta");
  const hf::Rational eta = positive_rational(eta_text, "eta");
  const hf::DiagonalizationResult result = hf::quasi_diagonalize(T, delta, eta, index_depth, mode);
  emit_json(hf::to_json(result), output);
  if (!result.ok) {
    std::cerr << "infeasible at " << result.infeasibility.stage << ": "
              << result.infeasibility.detail << " (suggested depth "
              << result.infeasibility.needed_depth_hint << ")\n";
    return kExitInfeasible;
  }
  std::cerr << "feasible: " << result.certificate.per_index.size() << " blocks, kappa = "
            << hf::rational_to_string(result.basis.kappa) << "\n";
  return kExitSuccess;
}

int run_factor(const std::string& operator_file, const std::string& spec_file,
               const std::string& delta_text, const std::string& eta_text, int index_depth,
               const std::string& tol_text, bool emit_matrices, const std::string& output,
               hf::Exec mode) {
  const hf::OperatorMatrix T = load_operator(operator_file, spec_file);
  const hf::Rational delta = positive_rational(delta_text, "delta");
  const hf::Rational eta = positive_rational(eta_text, "eta");
  const hf::Rational tol = nonnegative_rational(tol_text, "tol");
  const hf::FactorizationResult result = hf::factor_identity(T, delta, eta, index_depth, tol, mode);
  emit_json(hf::to_json(result, emit_matrices), output);
  if (!result.ok) {
    const auto& inf = result.diagonalization.infeasibility;
    std::cerr << "infeasible at " << inf.stage << ": " << inf.detail << " (suggested depth "
              << inf.needed_depth_hint << ")\n";
    return kExitInfeasible;
  }
  std::cerr << "ok: contraction ~" << hf::to_double(result.contraction) << ", norm product <= "
            << hf::to_double(result.norm_product_bound) << ", residual ~"
            << hf::to_double(result.residual) << "\n";
  if (result.residual > tol) {
    std::cerr << "residual exceeds the tolerance\n";
    return kExitVerifyFail;
  }
  return kExitSuccess;
}

int run_primary(const std::string& operator_file, const std::string& spec_file,
                const std::string& eta_text, int index_depth, const std::string& tol_text,
                bool emit_matrices, const std::string& output, hf::Exec mode) {
  const hf::OperatorMatrix T = load_operator(operator_file, spec_file);
  const hf::Rational eta = positive_rational(eta_text, "eta");
  const hf::Rational tol = nonnegative_rational(tol_text, "tol");
  const hf::PrimaryResult result = hf::factor_primary(T, eta, index_depth, tol, mode);
  emit_json(hf::to_json(result, emit_matrices), output);
  if (!result.ok) {
    std::cerr << "infeasible at " << result.infeasibility.stage << ": "
              << result.infeasibility.detail << " (suggested depth "
              << result.infeasibility.needed_depth_hint << ")\n";
    return kExitInfeasible;
  }
  std::cerr << "ok: factors through " << hf::to_string(result.choice) << ", norm product <= "
            << hf::to_double(result.factorization.norm_product_bound) << ", residual ~"
            << hf::to_double(result.factorization.residual) << "\n";
  return kExitSuccess;
}

int run_verify(const std::string& operator_file, const std::string& certificate_file,
               const std::string& output, hf::Exec mode) {
  const hf::OperatorMatrix T = hf::operator_from_json(hf::load_json(operator_file));
  const hf::Json j = hf::load_json(certificate_file);
  hf::VerifyOutcome outcome;
  std::string kind;
  if (j.contains("choice")) {
    kind = "primary";
    outcome = hf::verify_primary(T, hf::primary_from_json(j), mode);
  } else if (j.contains("diagonalization")) {
    kind = "factorization";
    outcome = hf::verify_factorization(T, hf::factorization_from_json(j), mode);
  } else if (j.contains("certificate")) {
    kind = "diagonalization";
    outcome = hf::verify_diagonalization(T, hf::diagonalization_from_json(j), mode);
  } else {
    throw std::invalid_argument("unrecognized certificate layout");
  }
  hf::Json report{{"kind", kind}, {"pass", outcome.pass}, {"failures", outcome.failures}};
  emit_json(report, output);
  if (outcome.pass) {
    std::cerr << "PASS (" << kind << ")\n";
    return kExitSuccess;
  }
  std::cerr << "FAIL (" << kind << "): " << outcome.failures.size() << " findings\n";
  for (const auto& f : outcome.failures) std::cerr << "  - " << f << "\n";
  return kExitVerifyFail;
}

int run_generate(const std::string& spec_file, const std::string& kind, int depth,
                 const std::string& delta_text, const std::string& off_mass_text,
                 std::uint64_t seed, const std::string& output) {
  hf::GeneratorSpec spec;
  if (!spec_file.empty()) {
    spec = hf::generator_spec_from_json(hf::load_json(spec_file));
  } else {
    if (kind.empty()) throw std::invalid_argument("--kind or --spec is required");
    spec.kind = hf::generator_kind_from_name(kind);
    spec.depth = depth;
    spec.delta = nonnegative_rational(delta_text, "delta");
    spec.off_diagonal_mass = nonnegative_rational(off_mass_text, "off-diagonal mass");
    spec.seed = seed;
  }
  const hf::OperatorMatrix T = hf::generate(spec);
  emit_json(hf::to_json(T), output);
  std::cerr << "generated " << hf::generator_kind_name(spec.kind) << " at depth " << spec.depth
            << " with " << T.entry_count() << " entries\n";
  return kExitSuccess;
}

int run_figure(const std::string& family_file, int index_pos, const std::string& side_name,
               int frequency, const std::string& output) {
  const hf::IntervalFamily family = hf::family_from_json(hf::load_json(family_file));
  if (family.index_set.empty()) throw std::invalid_argument("family has no collections");
  hf::DyadicInterval index;
  if (index_pos < 0) {
    index = family.index_set.back();
  } else {
    index = hf::from_ordering(static_cast<std::uint64_t>(index_pos));
    if (!family.blocks.count(index)) {
      throw std::invalid_argument("family has no collection at position " +
                                  std::to_string(index_pos));
    }
  }
  const std::vector<hf::DyadicInterval>& parents = family.blocks.at(index);

  std::vector<hf::FigureRow> rows;
  const std::string where =
      "[" + std::to_string(index.k) + "/2^" + std::to_string(index.n) + ")";
  rows.push_back({"collection at " + where + ", " + std::to_string(parents.size()) + " intervals",
                  parents});
  if (frequency >= 0) {
    hf::Side side = hf::Side::left;
    if (side_name == "right") {
      side = hf::Side::right;
    } else if (side_name != "left") {
      throw std::invalid_argument("side must be 'left' or 'right'");
    }
    std::vector<hf::DyadicInterval> halves;
    for (const auto& p : parents) {
      halves.push_back(side == hf::Side::left ? hf::left_half(p) : hf::right_half(p));
    }
    rows.push_back({side_name + " halves", std::move(halves)});
    std::vector<hf::DyadicInterval> cover = hf::gamlen_gaudet_children(parents, side, frequency);
    rows.push_back({"level-" + std::to_string(frequency) + " cover, " +
                        std::to_string(cover.size()) + " intervals",
                    std::move(cover)});
  }
  emit_text(hf::render_interval_rows(rows), output);
  std::cerr << "figure with " << rows.size() << " rows\n";
  return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  hf::apply_thread_cap_from_env();
  CLI::App app{"Constructive factorization laboratory for operators on the Haar system"};
  app.require_subcommand(1);

  int code = kExitSuccess;
  std::string exec_name = "auto";

  // Common holders; each subcommand binds the subset it uses.
  std::string input, second_input, output, spec_file;
  std::string delta_text = "0", eta_text = "1", tol_text, kind, side_name = "left";
  int index_depth = 1, spacing = 1, depth = 0, index_pos = -1, frequency = -1;
  std::uint64_t seed = 0;
  bool emit_matrices = false;

  const auto add_exec = [&exec_name](CLI::App* sub) {
    sub->add_option("--exec", exec_name, "Execution mode: serial, parallel, or auto")
        ->default_str("auto");
  };
  const auto add_output = [&output](CLI::App* sub) {
    sub->add_option("-o,--output", output, "Write the report here instead of stdout");
  };

  CLI::App* norms = app.add_subcommand("norms", "Norms and leaf profile of a coefficient file");
  norms->add_option("vector", input, "Haar coefficient JSON file")->required();
  add_output(norms);
  add_exec(norms);
  norms->callback([&] { code = run_norms(input, output, exec_from_name(exec_name)); });

  CLI::App* jones = app.add_subcommand("check-jones", "Check the nested-collection conditions");
  jones->add_option("family", input, "Interval family JSON file")->required();
  add_output(jones);
  add_exec(jones);
  jones->callback([&] { code = run_check_jones(input, output, exec_from_name(exec_name)); });

  CLI::App* reit = app.add_subcommand("reiterate", "Compose a family with a selector family");
  reit->add_option("base", input, "Base family JSON file")->required();
  reit->add_option("selector", second_input, "Selector family JSON file (members name base indices)")
      ->required();
  add_output(reit);
  add_exec(reit);
  reit->callback(
      [&] { code = run_reiterate(input, second_input, output, exec_from_name(exec_name)); });

  CLI::App* gg = app.add_subcommand("build-gg", "Build a fresh-frequency block family");
  gg->add_option("--index-depth", index_depth, "Depth of the index tree")->required();
  gg->add_option("--spacing", spacing, "Levels skipped between consecutive frequencies");
  add_output(gg);
  gg->callback([&] { code = run_build_gg(index_depth, spacing, output); });

  CLI::App* diag = app.add_subcommand("diagonalize", "Build blocks that nearly diagonalize T");
  diag->add_option("operator", input, "Operator JSON file");
  diag->add_option("--spec", spec_file, "Generator spec JSON file (instead of an operator file)");
  diag->add_option("--delta", delta_text, "Diagonal floor (exact rational, may be 0)")->required();
  diag->add_option("--eta", eta_text, "Interaction budget (exact rational)")->required();
  diag->add_option("--index-depth", index_depth, "Depth of the block index tree")->required();
  add_output(diag);
  add_exec(diag);
  diag->callback([&] {
    code = run_diagonalize(input, spec_file, delta_text, eta_text, index_depth, output,
                           exec_from_name(exec_name));
  });

  CLI::App* factor = app.add_subcommand("factor", "Factor the identity through T");
  factor->add_option("operator", input, "Operator JSON file");
  factor->add_option("--spec", spec_file, "Generator spec JSON file (instead of an operator file)");
  factor->add_option("--delta", delta_text, "Diagonal floor (exact rational, positive)")
      ->required();
  factor->add_option("--eta", eta_text, "Target slack: norm product <= (1+eta)/delta")->required();
  factor->add_option("--index-depth", index_depth, "Depth of the block index tree")->required();
  factor->add_option("--tol", tol_text, "Residual tolerance (exact rational)")
      ->default_str("1/1099511627776");
  factor->add_flag("--emit-matrices", emit_matrices, "Include the R and S factors in the report");
  add_output(factor);
  add_exec(factor);
  factor->callback([&] {
    if (tol_text.empty()) tol_text = "1/1099511627776";
    code = run_factor(input, spec_file, delta_text, eta_text, index_depth, tol_text,
                      emit_matrices, output, exec_from_name(exec_name));
  });

  CLI::App* primary = app.add_subcommand("primary", "Factor the identity through T or Id - T");
  primary->add_option("operator", input, "Operator JSON file");
  primary->add_option("--spec", spec_file, "Generator spec JSON file (instead of an operator file)");
  primary->add_option("--eta", eta_text, "Target slack: norm product <= 2+eta")->required();
  primary->add_option("--index-depth", index_depth, "Depth of the selection tree")->required();
  primary->add_option("--tol", tol_text, "Inversion tolerance (exact rational)")
      ->default_str("1/1099511627776");
  primary->add_flag("--emit-matrices", emit_matrices, "Include the R and S factors in the report");
  add_output(primary);
  add_exec(primary);
  primary->callback([&] {
    if (tol_text.empty()) tol_text = "1/1099511627776";
    code = run_primary(input, spec_file, eta_text, index_depth, tol_text, emit_matrices, output,
                       exec_from_name(exec_name));
  });

  CLI::App* verify = app.add_subcommand("verify", "Replay a stored certificate against an operator");
  verify->add_option("operator", input, "Operator JSON file")->required();
  verify->add_option("certificate", second_input, "Certificate JSON file")->required();
  add_output(verify);
  add_exec(verify);
  verify->callback(
      [&] { code = run_verify(input, second_input, output, exec_from_name(exec_name)); });

  CLI::App* gen = app.add_subcommand("generate", "Emit a deterministic test operator");
  gen->add_option("--spec", spec_file, "Generator spec JSON file");
  gen->add_option("--kind", kind,
                  "identity, scaled_diagonal, random_large_diagonal, haar_multiplier, "
                  "level_shift, or projection_mask");
  gen->add_option("--depth", depth, "Operator depth");
  gen->add_option("--delta", delta_text, "Diagonal floor / scale (exact rational)");
  gen->add_option("--off-mass", tol_text, "Total off-diagonal coefficient budget");
  gen->add_option("--seed", seed, "Stream seed");
  add_output(gen);
  gen->callback([&] {
    if (tol_text.empty()) tol_text = "0";
    code = run_generate(spec_file, kind, depth, delta_text, tol_text, seed, output);
  });

  CLI::App* figure = app.add_subcommand("figure", "Render a block-cover construction step as SVG");
  figure->add_option("family", input, "Interval family JSON file")->required();
  figure->add_option("--index", index_pos,
                     "Breadth-first position of the parent collection (default: last)");
  figure->add_option("--side", side_name, "Half to cover: left or right");
  figure->add_option("--frequency", frequency, "Cover level (omit to draw only the collection)");
  add_output(figure);
  figure->callback([&] { code = run_figure(input, index_pos, side_name, frequency, output); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int cli_code = app.exit(e);
    return cli_code == 0 ? kExitSuccess : kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::logic_error& e) {
    std::cerr << "internal check failed: " << e.what() << "\n";
    return kExitVerifyFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return code;
}
