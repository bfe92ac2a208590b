// Command-line front end: generate instances, run detection and sweeps,
// evaluate the bound families, and replay the statistical verification
// suites.  All randomness is seeded; identical invocations produce byte-
// identical output files.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid specification or
// configuration, 3 file I/O failure, 4 detection budget exhausted,
// 5 conditioning margin not positive, 6 protocol not nested.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "subspectra/io.hpp"
#include "subspectra/synth.hpp"
#include "subspectra/verify.hpp"

namespace {

using namespace subspectra;

std::optional<std::uint64_t> env_seed() {
  const char* env = std::getenv("SUBSPECTRA_SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw InvalidSpec("SUBSPECTRA_SEED must be a nonnegative integer");
  return static_cast<std::uint64_t>(value);
}

// Empty path or "-" means stdout.
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    if (!std::cout.good()) throw IoFailure("writing to stdout failed");
    return;
  }
  write_text_file(path, content);
}

SynthInstance<double> load_instance(const std::string& model_path,
                                    const std::string& trial_path,
                                    const std::string& subspace_path,
                                    const std::string& delta_path) {
  DiscreteSpectralModel<double> model = read_model<double>(read_json_file(model_path));
  SpectralSubspace<double> subspace = read_subspace<double>(read_json_file(subspace_path));
  TrialMap<double> v = read_trial<double>(read_json_file(trial_path));
  if (v.rows() != model.dim())
    throw InvalidSpec("trial map rows must match the model dimension");
  const Index cols = v.cols();
  if (!delta_path.empty()) {
    auto deltas = read_delta<double>(read_json_file(delta_path));
    return {std::move(model), std::move(subspace), std::move(v), std::move(deltas.first),
            std::move(deltas.second)};
  }
  return {std::move(model), std::move(subspace), std::move(v),
          HermitianMatrix<double>::trusted(ComplexMatrix<double>::Zero(cols, cols)),
          HermitianMatrix<double>::trusted(ComplexMatrix<double>::Zero(cols, cols))};
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out;
}

std::string suites_as_json(const std::vector<SuiteResult>& suites, bool all_passed) {
  std::string out = "{\"suites\":[";
  for (std::size_t k = 0; k < suites.size(); ++k) {
    if (k) out += ',';
    out += "{\"name\":\"" + json_escape(suites[k].name) + '"';
    out += ",\"trials\":" + std::to_string(suites[k].trials);
    out += ",\"failures\":" + std::to_string(suites[k].failures);
    out += ",\"passed\":" + std::string(suites[k].passed() ? "true" : "false");
    out += ",\"note\":\"" + json_escape(suites[k].note) + "\"}";
  }
  out += "],\"passed\":";
  out += all_passed ? "true" : "false";
  out += "}\n";
  return out;
}

void print_suites(const std::vector<SuiteResult>& suites) {
  for (std::size_t k = 0; k < suites.size(); ++k) {
    const SuiteResult& r = suites[k];
    std::printf("[%2zu/%zu] %-62s %s (%ld trials, %ld failures)%s%s\n", k + 1, suites.size(),
                r.name.c_str(), r.passed() ? "PASS" : "FAIL", r.trials, r.failures,
                r.note.empty() ? "" : "  -- ", r.note.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subspace spectral approximation toolkit"};
  app.require_subcommand(1);

  // -- synth ----------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a seeded instance and write its files");
  std::string synth_spec_path, synth_out_dir = ".", synth_layout = "uniform";
  std::uint64_t synth_seed = 0;
  Index synth_atoms = 8, synth_subspace_dim = 1, synth_trial_dim = 1;
  std::vector<double> synth_spectrum, synth_band;
  double synth_noise = 0, synth_delta = 0;
  bool synth_retune = false;
  auto* synth_spec_opt = synth->add_option("--spec", synth_spec_path,
                                           "instance spec JSON (flags below are ignored)");
  auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--atoms", synth_atoms, "number of spectrum atoms");
  synth->add_option("--layout", synth_layout, "uniform, clustered or heavy_tail");
  synth->add_option("--spectrum", synth_spectrum, "spectrum range: LO HI")->expected(2);
  synth->add_option("--subspace-dim", synth_subspace_dim, "target dimension");
  synth->add_option("--band", synth_band, "interval target instead of a count: LO HI")
      ->expected(2);
  synth->add_option("--trial-dim", synth_trial_dim, "number of trial vectors");
  synth->add_option("--noise-scale", synth_noise, "scale of off-target trial rows");
  synth->add_option("--delta-scale", synth_delta, "scale of the A and B perturbations");
  synth->add_flag("--well-conditioned", synth_retune,
                  "halve the scales until the instance is well-conditioned");
  synth->add_option("--out", synth_out_dir, "output directory")->required();

  // -- detect ---------------------------------------------------------------
  auto* detect = app.add_subcommand("detect", "estimate the target dimension from files");
  std::string det_model, det_trial, det_subspace, det_delta, det_eps_table, det_out;
  double det_eps = 0, det_threshold = 0;
  Index det_m_start = 0, det_m_max = 0;
  detect->add_option("--model", det_model, "model JSON")->required();
  detect->add_option("--trial", det_trial, "trial map JSON")->required();
  detect->add_option("--subspace", det_subspace, "subspace JSON")->required();
  detect->add_option("--delta", det_delta, "perturbation JSON");
  auto* det_eps_opt = detect->add_option("--eps", det_eps, "constant noise bound");
  auto* det_table_opt =
      detect->add_option("--eps-table", det_eps_table, "per-M noise bound JSON");
  auto* det_thr_opt =
      detect->add_option("--threshold", det_threshold, "fixed raw threshold (no noise bound)");
  detect->add_option("--m-start", det_m_start, "initial guess dimension (default: all columns)");
  detect->add_option("--m-max", det_m_max, "guess dimension cap (default: all columns)");
  detect->add_option("--out", det_out, "output path (default: stdout)");

  // -- bounds ---------------------------------------------------------------
  auto* bounds = app.add_subcommand("bounds", "evaluate eigenvalue bracket families");
  std::string bnd_model, bnd_trial, bnd_subspace, bnd_delta, bnd_method = "all", bnd_out;
  double bnd_e_min = 0, bnd_e_max = 0;
  bounds->add_option("--model", bnd_model, "model JSON")->required();
  bounds->add_option("--trial", bnd_trial, "trial map JSON")->required();
  bounds->add_option("--subspace", bnd_subspace, "subspace JSON")->required();
  bounds->add_option("--delta", bnd_delta, "perturbation JSON");
  bounds->add_option("--method", bnd_method,
                     "master, matrix_form, band, bounded, alternative or all");
  auto* bnd_emin_opt =
      bounds->add_option("--e-min", bnd_e_min, "operator range bottom (bounded method)");
  auto* bnd_emax_opt =
      bounds->add_option("--e-max", bnd_e_max, "operator range top (bounded method)");
  bounds->add_option("--out", bnd_out, "output path (default: stdout)");

  // -- sweep ----------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "trace the noise-to-signal ratio across guesses");
  std::string swp_model, swp_trial, swp_subspace, swp_delta, swp_eps_table, swp_out;
  double swp_eps = 0;
  Index swp_target = 1, swp_lo = 0, swp_hi = 0;
  sweep->add_option("--model", swp_model, "model JSON")->required();
  sweep->add_option("--trial", swp_trial, "trial map JSON")->required();
  sweep->add_option("--subspace", swp_subspace, "subspace JSON")->required();
  sweep->add_option("--delta", swp_delta, "perturbation JSON");
  sweep->add_option("--target", swp_target, "tracked eigenvalue index m")->required();
  sweep->add_option("--m-lo", swp_lo, "first guess dimension (default: target)");
  sweep->add_option("--m-hi", swp_hi, "last guess dimension (default: all columns)");
  auto* swp_eps_opt = sweep->add_option("--eps", swp_eps, "constant noise bound");
  auto* swp_table_opt =
      sweep->add_option("--eps-table", swp_eps_table, "per-M noise bound JSON");
  sweep->add_option("--out", swp_out, "output path (default: stdout)");

  // -- verify ---------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "replay the statistical verification suites");
  double ver_scale = 1.0;
  std::uint64_t ver_seed = 0;
  std::string ver_json;
  bool ver_inject = false, ver_allow = false;
  verify->add_option("--scale", ver_scale, "trial count multiplier (default 1.0)");
  auto* ver_seed_opt = verify->add_option("--seed", ver_seed, "corpus base seed");
  verify->add_option("--json", ver_json, "also write a JSON report to this path");
  verify->add_flag("--inject-invalid-bounds", ver_inject,
                   "feed the dimension suite understated noise bounds");
  verify->add_flag("--allow-invalid-bounds", ver_allow,
                   "excuse overcounts on runs whose bound failed validation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      InstanceSpec<double> spec;
      if (*synth_spec_opt) {
        const nlohmann::json j = read_json_file(synth_spec_path);
        spec = read_instance_spec<double>(j);
        if (*synth_seed_opt)
          spec.seed = synth_seed;
        else if (!j.contains("seed"))
          spec.seed = env_seed().value_or(0);
      } else {
        spec.n_atoms = synth_atoms;
        spec.layout = parse_layout(synth_layout);
        if (!synth_spectrum.empty()) {
          spec.spectrum_lo = synth_spectrum[0];
          spec.spectrum_hi = synth_spectrum[1];
        }
        if (!synth_band.empty()) {
          spec.band = {synth_band[0], synth_band[1]};
        } else {
          spec.subspace_dim = synth_subspace_dim;
        }
        spec.trial_dim = synth_trial_dim;
        spec.noise_scale = synth_noise;
        spec.delta_scale = synth_delta;
        spec.seed = *synth_seed_opt ? synth_seed : env_seed().value_or(0);
      }
      const SynthInstance<double> inst =
          synth_retune ? gen_well_conditioned(spec) : gen_instance(spec);
      std::error_code fs_err;
      std::filesystem::create_directories(synth_out_dir, fs_err);
      if (fs_err) throw IoFailure("cannot create directory: " + synth_out_dir);
      const auto join = [&](const char* name) { return synth_out_dir + "/" + name; };
      write_text_file(join("model.json"), write_model(inst.model));
      write_text_file(join("subspace.json"), write_subspace(inst.subspace));
      write_text_file(join("trial.json"), write_trial(inst.V));
      write_text_file(join("delta.json"), write_delta(inst.dA, inst.dB));
      write_text_file(join("spec.json"), write_instance_spec(spec));
      const auto cond = check_well_conditioned(assemble(inst));
      std::printf("n=%ld M=%ld m*=%ld margin=%s\n",
                  static_cast<long>(inst.model.atoms().size()),
                  static_cast<long>(inst.V.cols()),
                  static_cast<long>(inst.subspace.dimension(inst.model)),
                  format_double(cond.margin).c_str());
      return 0;
    }

    if (*detect) {
      const SubspaceProtocol<double> protocol =
          instance_protocol(load_instance(det_model, det_trial, det_subspace, det_delta));
      const Index m_start = *detect->get_option("--m-start") ? det_m_start : protocol.max_guess;
      const Index m_max = *detect->get_option("--m-max") ? det_m_max : protocol.max_guess;
      const int sources = (*det_eps_opt ? 1 : 0) + (*det_table_opt ? 1 : 0) +
                          (*det_thr_opt ? 1 : 0);
      if (sources != 1)
        throw InvalidSpec("detect: give exactly one of --eps, --eps-table or --threshold");
      DetectionResult<double> result;
      if (*det_thr_opt) {
        result = run_protocol(protocol, m_start, m_max, det_threshold);
      } else {
        const NoiseBoundSequence<double> eps =
            *det_eps_opt ? NoiseBoundSequence<double>::constant(det_eps)
                         : read_noise_bounds<double>(read_json_file(det_eps_table));
        result = run_epsilon_protocol(protocol, m_start, m_max, eps);
      }
      emit(det_out, write_detection(result));
      for (const std::string& flag : result.flags)
        if (flag == "BudgetExhausted") return 4;
      return 0;
    }

    if (*bounds) {
      const SynthInstance<double> inst =
          load_instance(bnd_model, bnd_trial, bnd_subspace, bnd_delta);
      GEPInstance<double> gep = assemble(inst);
      const Index m = inst.subspace.dimension(inst.model);
      if (gep.trial_dimension() > m) gep = refine_instance(gep, m);
      const RealVector<double> truth = brute_force_reference(inst.model, inst.subspace);
      const bool has_min = bnd_emin_opt->count() > 0;
      const bool has_max = bnd_emax_opt->count() > 0;
      if (has_min != has_max)
        throw InvalidSpec("bounds: --e-min and --e-max must be given together");
      const bool has_range = has_min && has_max;
      std::vector<EigenvalueBounds<double>> results;
      if (bnd_method == "master") {
        results.push_back(bounds_master(gep));
      } else if (bnd_method == "matrix_form") {
        results.push_back(bounds_matrix_form(gep));
      } else if (bnd_method == "band") {
        results.push_back(bounds_band(gep));
      } else if (bnd_method == "bounded") {
        if (!has_range) throw InvalidSpec("bounds: the bounded method needs --e-min and --e-max");
        results.push_back(bounds_bounded(gep, bnd_e_min, bnd_e_max));
      } else if (bnd_method == "alternative") {
        results.push_back(bounds_alternative(gep, truth));
      } else if (bnd_method == "all") {
        results.push_back(bounds_master(gep));
        results.push_back(bounds_matrix_form(gep));
        if (inst.subspace.interval_form()) results.push_back(bounds_band(gep));
        if (has_range) results.push_back(bounds_bounded(gep, bnd_e_min, bnd_e_max));
        results.push_back(bounds_alternative(gep, truth));
      } else {
        throw InvalidSpec("bounds: unknown method \"" + bnd_method + "\"");
      }
      // Enclosure verdicts use a slack relative to the largest eigenvalue in
      // play, matching the library's own acceptance tolerance.
      const double margin = check_well_conditioned(gep).margin;
      double scale = 1.0;
      for (const double a : inst.model.atoms()) scale = std::max(scale, std::abs(a));
      for (const auto& family : results)
        for (const auto& row : family.rows) scale = std::max(scale, std::abs(row.approx));
      const double tol = 1e-9 * scale;
      emit(bnd_out, bnd_method == "all"
                        ? write_bounds_list(results, margin, &truth, tol)
                        : write_bounds(results.front(), margin, &truth, tol) + "\n");
      return 0;
    }

    if (*sweep) {
      const SubspaceProtocol<double> protocol =
          instance_protocol(load_instance(swp_model, swp_trial, swp_subspace, swp_delta));
      if ((*swp_eps_opt ? 1 : 0) + (*swp_table_opt ? 1 : 0) != 1)
        throw InvalidSpec("sweep: give exactly one of --eps or --eps-table");
      const NoiseBoundSequence<double> eps =
          *swp_eps_opt ? NoiseBoundSequence<double>::constant(swp_eps)
                       : read_noise_bounds<double>(read_json_file(swp_eps_table));
      const Index lo = *sweep->get_option("--m-lo") ? swp_lo : swp_target;
      const Index hi = *sweep->get_option("--m-hi") ? swp_hi : protocol.max_guess;
      emit(swp_out, write_sweep_csv(sweep_guess_dimension(protocol, eps, swp_target, lo, hi)));
      return 0;
    }

    if (*verify) {
      VerificationOptions opt;
      opt.scale = ver_scale;
      opt.inject_invalid_bounds = ver_inject;
      opt.allow_invalid_bounds = ver_allow;
      if (*ver_seed_opt)
        opt.base_seed = ver_seed;
      else if (const auto env = env_seed())
        opt.base_seed = *env;
      const std::vector<SuiteResult> suites = run_verification(opt);
      print_suites(suites);
      bool all = true;
      for (const SuiteResult& r : suites) all &= r.passed();
      std::printf("verification: %s\n", all ? "all suites passed" : "FAILURES PRESENT");
      if (!ver_json.empty()) write_text_file(ver_json, suites_as_json(suites, all));
      return all ? 0 : 1;
    }
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const IllConditioned& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  } catch (const NotNested& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 6;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
