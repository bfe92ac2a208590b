#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "subspectra/borel.hpp"
#include "subspectra/bounds.hpp"
#include "subspectra/model.hpp"
#include "subspectra/protocol.hpp"
#include "subspectra/rng.hpp"
#include "subspectra/synth.hpp"
#include "subspectra/types.hpp"

// Statistical verification suites.  Each suite replays one of the library's
// guarantees against brute-force oracles over a seeded corpus and reports a
// trial/failure count; a failure is a genuine counterexample to the claimed
// property (up to the stated floating-point slack), never a skipped case.
// The same suites back both the acceptance runner and `subspectra verify`.

namespace subspectra {

struct SuiteResult {
  std::string name;
  long trials = 0;
  long failures = 0;
  std::string note;  // first failure, or summary statistics on success

  bool passed() const { return trials > 0 && failures == 0; }
};

namespace verify_detail {

inline void record_failure(SuiteResult& res, const std::string& what) {
  ++res.failures;
  if (res.note.empty()) res.note = what;
}

// Corpus for the bracket suites: sizes up to 40 atoms, target dimension up
// to 6, trial dimension up to 12, spectra spanning several decades with
// |atom| well below the 1e6 cap, all three layout families.
inline InstanceSpec<double> bracket_corpus_spec(std::uint64_t seed) {
  Rng r(seed, "bracket_corpus");
  InstanceSpec<double> spec;
  spec.seed = r.bits();
  spec.subspace_dim = 1 + static_cast<Index>(r.uniform_int(0, 5));
  spec.n_atoms = spec.subspace_dim + static_cast<Index>(r.uniform_int(0, 34));
  spec.trial_dim =
      spec.subspace_dim + static_cast<Index>(r.uniform_int(0, 12 - spec.subspace_dim));
  const auto kind = r.uniform_int(0, 2);
  if (kind == 2) {
    spec.layout = SpectrumLayout::HeavyTail;
    const double cap = std::pow(10.0, r.uniform(0.0, 6.0));
    spec.spectrum_lo = -cap;
    spec.spectrum_hi = cap;
  } else {
    spec.layout = kind == 0 ? SpectrumLayout::Uniform : SpectrumLayout::Clustered;
    const double center = r.uniform(-1e5, 1e5);
    const double half = std::pow(10.0, r.uniform(-2.0, 5.5));
    spec.spectrum_lo = center - half;
    spec.spectrum_hi = center + half;
  }
  spec.noise_scale = std::pow(10.0, r.uniform(-6.0, -1.0));
  spec.delta_scale = std::pow(10.0, r.uniform(-9.0, -3.0));
  return spec;
}

// Retunes the scales until both the drawn instance and, when the trial
// dimension exceeds the target, its refinement have a safely positive
// conditioning margin.  The floor keeps the later bracket evaluations away
// from the margin -> 0 blow-up where enclosure holds trivially but tells us
// nothing about correctness.
inline SynthInstance<double> conditioned_instance(InstanceSpec<double> spec) {
  const Index m = spec.subspace_dim;
  for (int k = 0; k < 80; ++k) {
    SynthInstance<double> inst = gen_instance(spec);
    GEPInstance<double> gep = assemble(inst);
    const double floor = 1e-10 * std::max(1.0, spectral_norm(gep.B));
    bool ok = check_well_conditioned(gep).margin > floor;
    if (ok && gep.trial_dimension() > m) {
      const GEPInstance<double> refined = refine_instance(gep, m);
      ok = check_well_conditioned(refined).margin >
           1e-10 * std::max(1.0, spectral_norm(refined.B));
    }
    if (ok) return inst;
    spec.noise_scale /= 2;
    spec.delta_scale /= 2;
  }
  return gen_instance(spec);
}

// The square instance the bracket families accept: the drawn instance when
// already square, otherwise its refinement onto the target dimension.
inline GEPInstance<double> square_form(const SynthInstance<double>& inst) {
  GEPInstance<double> gep = assemble(inst);
  const Index m = inst.subspace.dimension(inst.model);
  if (gep.trial_dimension() > m) return refine_instance(gep, m);
  return gep;
}

inline bool encloses(const EigenvalueBounds<double>& b, const RealVector<double>& truth,
                     double tol) {
  for (std::size_t i = 0; i < b.rows.size(); ++i) {
    const double gap = b.rows[i].approx - truth[static_cast<Index>(i)];
    if (!(gap >= b.rows[i].lower - tol && gap <= b.rows[i].upper + tol)) return false;
  }
  return true;
}

// Noise-dominated square draw; doubles the noise until the conditioning
// margin goes nonpositive, which is reachable only for target dimension >= 2.
inline SynthInstance<double> noise_dominated_square(std::uint64_t seed) {
  Rng r(seed, "anchored_corpus");
  InstanceSpec<double> spec;
  spec.seed = r.bits();
  spec.subspace_dim = 2 + static_cast<Index>(r.uniform_int(0, 4));
  spec.n_atoms = spec.subspace_dim + 1 + static_cast<Index>(r.uniform_int(0, 8));
  spec.trial_dim = spec.subspace_dim;
  spec.spectrum_lo = -r.uniform(1.0, 10.0);
  spec.spectrum_hi = r.uniform(1.0, 10.0);
  spec.noise_scale = std::pow(10.0, r.uniform(-0.5, 1.0));
  spec.delta_scale = std::pow(10.0, r.uniform(-9.0, -6.0));
  SynthInstance<double> inst = gen_instance(spec);
  for (int k = 0; k < 60 && check_well_conditioned(assemble(inst)).margin > 0; ++k) {
    spec.noise_scale *= 2;
    inst = gen_instance(spec);
  }
  return inst;
}

inline BandSpec<double> band_corpus_spec(std::uint64_t seed) {
  Rng r(seed, "band_corpus");
  BandSpec<double> spec;
  spec.seed = r.bits();
  spec.n_inside = 1 + static_cast<Index>(r.uniform_int(0, 3));
  spec.n_below = 1 + static_cast<Index>(r.uniform_int(0, 2));
  spec.n_above = 1 + static_cast<Index>(r.uniform_int(0, 2));
  const double center = r.uniform(-5.0, 5.0);
  const double half = r.uniform(0.5, 2.0);
  spec.band_lo = center - half;
  spec.band_hi = center + half;
  spec.spread = r.uniform(1.0, 3.0);
  spec.noise_scale = std::pow(10.0, r.uniform(-4.0, -1.5));
  spec.delta_scale = std::pow(10.0, r.uniform(-8.0, -5.0));
  return spec;
}

}  // namespace verify_detail

// Bracket from the conditioning-margin family encloses the true shift
// lambda~_i - lambda_i for every index, across the full corpus.
inline SuiteResult suite_master_enclosure(long trials, std::uint64_t base_seed) {
  SuiteResult res{"master bracket encloses the true eigenvalue shifts"};
  for (long t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    const SynthInstance<double> inst =
        verify_detail::conditioned_instance(verify_detail::bracket_corpus_spec(seed));
    const GEPInstance<double> gep = verify_detail::square_form(inst);
    const EigenvalueBounds<double> b = bounds_master(gep);
    const RealVector<double> truth = brute_force_reference(inst.model, inst.subspace);
    const double tol = 1e-9 * std::max(1.0, inst.model.max_abs_atom());
    ++res.trials;
    if (!verify_detail::encloses(b, truth, tol))
      verify_detail::record_failure(res, "enclosure broken at seed " + std::to_string(seed));
  }
  return res;
}

// The matrix-moment bracket is contained in the master bracket and still
// encloses, on the same corpus.
inline SuiteResult suite_matrix_form_tightening(long trials, std::uint64_t base_seed) {
  SuiteResult res{"matrix-moment bracket tightens the master bracket"};
  for (long t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    const SynthInstance<double> inst =
        verify_detail::conditioned_instance(verify_detail::bracket_corpus_spec(seed));
    const GEPInstance<double> gep = verify_detail::square_form(inst);
    const EigenvalueBounds<double> master = bounds_master(gep);
    const EigenvalueBounds<double> tight = bounds_matrix_form(gep);
    const RealVector<double> truth = brute_force_reference(inst.model, inst.subspace);
    const double tol = 1e-9 * std::max(1.0, inst.model.max_abs_atom());
    ++res.trials;
    if (!verify_detail::encloses(tight, truth, tol)) {
      verify_detail::record_failure(res, "enclosure broken at seed " + std::to_string(seed));
      continue;
    }
    for (std::size_t i = 0; i < master.rows.size(); ++i) {
      const double scale = std::max(
          {1.0, std::abs(master.rows[i].upper), std::abs(master.rows[i].lower)});
      if (tight.rows[i].upper > master.rows[i].upper + 1e-12 * scale ||
          tight.rows[i].lower < master.rows[i].lower - 1e-12 * scale) {
        verify_detail::record_failure(res, "not contained at seed " + std::to_string(seed));
        break;
      }
    }
  }
  return res;
}

// On banded instances the band-edge bracket coincides with the master
// bracket, and the operator-range bracket contains it interval-wise while
// still enclosing.  The corpus keeps each off-band side's noise rows on one
// shared direction, the regime where the containment is a theorem.
inline SuiteResult suite_band_agreement(long trials, std::uint64_t base_seed) {
  SuiteResult res{"band bracket matches master and sits inside the range bracket"};
  for (long t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    const SynthInstance<double> inst =
        gen_band_well_behaved(verify_detail::band_corpus_spec(seed));
    const GEPInstance<double> gep = assemble(inst);
    const EigenvalueBounds<double> master = bounds_master(gep);
    const EigenvalueBounds<double> band = bounds_band(gep);
    const double e_min = *std::min_element(inst.model.atoms().begin(), inst.model.atoms().end());
    const double e_max = *std::max_element(inst.model.atoms().begin(), inst.model.atoms().end());
    const EigenvalueBounds<double> range = bounds_bounded(gep, e_min, e_max);
    const RealVector<double> truth = brute_force_reference(inst.model, inst.subspace);
    const double tol = 1e-9 * std::max(1.0, inst.model.max_abs_atom());
    ++res.trials;
    if (!band.flags.empty()) {
      verify_detail::record_failure(res, "band assumptions flagged at seed " +
                                             std::to_string(seed));
      continue;
    }
    if (!verify_detail::encloses(band, truth, tol) ||
        !verify_detail::encloses(range, truth, tol)) {
      verify_detail::record_failure(res, "enclosure broken at seed " + std::to_string(seed));
      continue;
    }
    bool fine = true;
    for (std::size_t i = 0; i < master.rows.size() && fine; ++i) {
      const double scale = std::max(
          {1.0, std::abs(master.rows[i].upper), std::abs(master.rows[i].lower)});
      if (std::abs(band.rows[i].upper - master.rows[i].upper) > 1e-12 * scale ||
          std::abs(band.rows[i].lower - master.rows[i].lower) > 1e-12 * scale) {
        verify_detail::record_failure(res,
                                      "band != master at seed " + std::to_string(seed));
        fine = false;
      }
      if (fine && (range.rows[i].upper < band.rows[i].upper - 1e-12 * scale ||
                   range.rows[i].lower > band.rows[i].lower + 1e-12 * scale)) {
        verify_detail::record_failure(res, "range bracket does not contain band bracket "
                                           "at seed " + std::to_string(seed));
        fine = false;
      }
    }
  }
  return res;
}

// The bracket anchored at the true eigenvalues needs only a positive weight
// spectrum, so it is checked on a corpus where half the instances have a
// nonpositive conditioning margin.
inline SuiteResult suite_anchored_bracket(long trials, std::uint64_t base_seed) {
  SuiteResult res{"anchored bracket holds without a conditioning margin"};
  long nonpositive_margin = 0;
  for (long t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    const bool tame = t % 2 == 0;
    const SynthInstance<double> inst =
        tame ? verify_detail::conditioned_instance(verify_detail::bracket_corpus_spec(seed))
             : verify_detail::noise_dominated_square(seed);
    const GEPInstance<double> gep = tame ? verify_detail::square_form(inst) : assemble(inst);
    const ConditioningReport<double> rep = check_well_conditioned(gep);
    if (!(rep.margin > 0)) ++nonpositive_margin;
    const RealVector<double> truth = brute_force_reference(inst.model, inst.subspace);
    const double tol = 1e-9 * std::max(1.0, inst.model.max_abs_atom());
    ++res.trials;
    if (!(rep.lambda_m_weight > 0)) {
      verify_detail::record_failure(res, "weight spectrum not positive at seed " +
                                             std::to_string(seed));
      continue;
    }
    const EigenvalueBounds<double> b = bounds_alternative(gep, truth);
    if (!verify_detail::encloses(b, truth, tol))
      verify_detail::record_failure(res, "enclosure broken at seed " + std::to_string(seed));
  }
  if (res.failures == 0) {
    if (nonpositive_margin < trials / 4)
      verify_detail::record_failure(
          res, "corpus too tame: only " + std::to_string(nonpositive_margin) +
                   " nonpositive-margin instances");
    else
      res.note = std::to_string(nonpositive_margin) + " of " + std::to_string(trials) +
                 " instances had nonpositive margin";
  }
  return res;
}

// With no noise rows and no perturbations the estimates reproduce the atoms
// to roundoff and every bracket family collapses to zero width.
inline SuiteResult suite_zero_noise_exactness(long trials, std::uint64_t base_seed) {
  SuiteResult res{"zero-noise instances are reproduced exactly"};
  for (long t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    BandSpec<double> spec = verify_detail::band_corpus_spec(seed);
    spec.noise_scale = 0;
    spec.delta_scale = 0;
    const SynthInstance<double> inst = gen_band_instance(spec);
    const GEPInstance<double> gep = assemble(inst);
    const RealVector<double> truth = brute_force_reference(inst.model, inst.subspace);
    const double scale = std::max(1.0, inst.model.max_abs_atom());
    const double e_min = *std::min_element(inst.model.atoms().begin(), inst.model.atoms().end());
    const double e_max = *std::max_element(inst.model.atoms().begin(), inst.model.atoms().end());
    const EigenvalueBounds<double> families[] = {
        bounds_master(gep), bounds_matrix_form(gep), bounds_band(gep),
        bounds_bounded(gep, e_min, e_max), bounds_alternative(gep, truth)};
    ++res.trials;
    bool fine = true;
    for (Index i = 0; i < truth.size() && fine; ++i) {
      if (std::abs(families[0].rows[static_cast<std::size_t>(i)].approx - truth[i]) >
          1e-12 * scale) {
        verify_detail::record_failure(res, "estimate drifted at seed " + std::to_string(seed));
        fine = false;
      }
    }
    for (const EigenvalueBounds<double>& b : families) {
      if (!fine) break;
      for (const BoundRow<double>& row : b.rows)
        if (std::abs(row.lower) > 1e-12 || std::abs(row.upper) > 1e-12) {
          verify_detail::record_failure(
              res, std::string("nonzero ") + method_name(b.method) + " bracket at seed " +
                       std::to_string(seed));
          fine = false;
          break;
        }
    }
  }
  return res;
}

// With a noise bound that dominates the true noise weight norm, the detected
// dimension never exceeds the target dimension, at any guess dimension.
//
// `inject_invalid_bounds` deliberately understates every table entry so the
// ground-truth check trips on each run; that turns the suite into a probe of
// the policy question "what should a verifier do with bounds it cannot
// trust".  `allow_invalid_bounds` answers it: excuse overcounts on flagged
// runs (the guarantee is only claimed for dominating bounds) and fail only
// on certified violations, which must never occur.
inline SuiteResult suite_dimension_lower_bound(long trials, std::uint64_t base_seed,
                                               bool inject_invalid_bounds = false,
                                               bool allow_invalid_bounds = false) {
  SuiteResult res{"detected dimension never exceeds the target dimension"};
  const auto family = [inject_invalid_bounds](std::uint64_t seed) {
    Rng r(seed, "dimension_corpus");
    InstanceSpec<double> spec;
    spec.seed = r.bits();
    spec.subspace_dim = 1 + static_cast<Index>(r.uniform_int(0, 4));
    spec.n_atoms = spec.subspace_dim + static_cast<Index>(r.uniform_int(0, 7));
    spec.spectrum_lo = -r.uniform(1.0, 10.0);
    spec.spectrum_hi = r.uniform(1.0, 10.0);
    spec.noise_scale = std::pow(10.0, r.uniform(-5.0, -1.0));
    spec.delta_scale = std::pow(10.0, r.uniform(-9.0, -4.0));
    SubspaceProtocol<double> protocol = gen_protocol(spec, 8, (seed & 1) != 0);
    NoiseBoundSequence<double> eps = valid_noise_bounds(protocol, 8);
    if (inject_invalid_bounds) {
      std::vector<double> cut;
      for (Index guess = 1; guess <= 8; ++guess) cut.push_back(eps.at(guess) * 1e-6);
      eps = NoiseBoundSequence<double>::table(std::move(cut));
    }
    return std::make_pair(std::move(protocol), std::move(eps));
  };
  long raw_violations = 0;
  long certified = 0;
  long invalid = 0;
  const long per_guess = std::max<long>(1, trials / 5);
  for (Index guess = 1; guess <= 5; ++guess) {
    const DimensionCheckReport report = verify_dimension_lower_bound<double>(
        family, guess, per_guess, base_seed + 100000ULL * static_cast<std::uint64_t>(guess));
    res.trials += report.runs;
    raw_violations += report.violations;
    certified += report.certified_violations;
    invalid += report.invalid_noise_bounds;
  }
  res.failures = allow_invalid_bounds ? certified : raw_violations + invalid;
  if (invalid > 0)
    res.note = std::to_string(invalid) + " runs with non-dominating bounds" +
               (allow_invalid_bounds ? " (excused by policy)" : "");
  if (certified > 0) res.note = "overcount under a dominating bound";
  return res;
}

// Signal strength above twice the noise bound forces full detection; well
// below the bound, detection must be able to miss (checked in aggregate).
inline SuiteResult suite_detection_sufficiency(long trials, std::uint64_t base_seed) {
  SuiteResult res{"strong signal forces detection, weak signal can miss"};
  long weak_misses = 0;
  for (long t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    Rng r(seed, "sufficiency_corpus");
    InstanceSpec<double> spec;
    spec.seed = r.bits();
    spec.subspace_dim = 1 + static_cast<Index>(r.uniform_int(0, 3));
    spec.trial_dim = spec.subspace_dim + static_cast<Index>(r.uniform_int(0, 2));
    spec.n_atoms = spec.subspace_dim + 1 + static_cast<Index>(r.uniform_int(0, 3));
    spec.spectrum_lo = -3;
    spec.spectrum_hi = 3;
    spec.noise_scale = std::pow(10.0, r.uniform(-4.0, -2.0));
    spec.delta_scale = std::pow(10.0, r.uniform(-8.0, -5.0));
    const SynthInstance<double> base = gen_instance(spec);
    const GEPInstance<double> gep0 = assemble(base);
    const double eps = spectral_norm(noise_weight(gep0)) * (1 + 1e-9) +
                       1e-12 * spectral_norm(gep0.B);
    const double strength0 =
        detection_condition(gep0, eps, NoiseKind::General).signal_strength;
    const Index m_star = base.subspace.dimension(base.model);
    const Index guess = gep0.trial_dimension();
    const std::vector<bool> mask = base.subspace.mask(base.model);
    const auto rescaled_run = [&](double target_strength) {
      SynthInstance<double> scaled = base;
      const double c = std::sqrt(target_strength / strength0);
      for (Index k = 0; k < scaled.V.rows(); ++k)
        if (mask[static_cast<std::size_t>(k)]) scaled.V.row(k) *= c;
      GEPInstance<double> gep = assemble(scaled);
      SubspaceProtocol<double> protocol;
      protocol.max_guess = guess;
      protocol.nested = false;
      protocol.instance = [gep](Index) { return gep; };
      return run_epsilon_protocol(protocol, guess, guess,
                                  NoiseBoundSequence<double>::constant(eps));
    };
    ++res.trials;
    if (!(strength0 > 0) || !(eps > 0)) {
      verify_detail::record_failure(res, "degenerate draw at seed " + std::to_string(seed));
      continue;
    }
    // Strong leg: strength 2% above twice the bound, detection must be exact.
    const DetectionResult<double> strong = rescaled_run(2.04 * eps);
    bool invalid_flag = false;
    for (const std::string& f : strong.flags) invalid_flag |= (f == "InvalidNoiseBound");
    if (invalid_flag || strong.detected != m_star) {
      verify_detail::record_failure(res, "strong leg missed at seed " + std::to_string(seed));
      continue;
    }
    // Weak leg: strength at half the bound; count the misses.
    if (rescaled_run(0.5 * eps).detected < m_star) ++weak_misses;
  }
  if (res.failures == 0) {
    if (weak_misses == 0)
      verify_detail::record_failure(res, "weak-signal leg never missed (vacuous check)");
    else
      res.note = std::to_string(weak_misses) + " of " + std::to_string(trials) +
                 " weak-signal runs missed, as expected";
  }
  return res;
}

// For nested protocols, each ordered weight eigenvalue can only grow as the
// guess dimension grows (interlacing of leading principal blocks).
inline SuiteResult suite_nested_monotonicity(long protocols, std::uint64_t base_seed) {
  SuiteResult res{"nested protocols have monotone weight spectra"};
  const Index max_guess = 20;
  for (long t = 0; t < protocols; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    Rng r(seed, "nested_corpus");
    InstanceSpec<double> spec;
    spec.seed = r.bits();
    spec.subspace_dim = 1 + static_cast<Index>(r.uniform_int(0, 3));
    spec.n_atoms = spec.subspace_dim + static_cast<Index>(r.uniform_int(0, 6));
    spec.spectrum_lo = -5;
    spec.spectrum_hi = 5;
    spec.noise_scale = std::pow(10.0, r.uniform(-4.0, -1.0));
    spec.delta_scale = std::pow(10.0, r.uniform(-8.0, -5.0));
    const SubspaceProtocol<double> protocol = gen_protocol(spec, max_guess, true);
    const Index tracked = std::min<Index>(6, max_guess);
    std::vector<double> last(static_cast<std::size_t>(tracked),
                            -std::numeric_limits<double>::infinity());
    ++res.trials;
    bool fine = true;
    for (Index guess = 1; guess <= max_guess && fine; ++guess) {
      const RealVector<double> values = eigh(protocol.instance(guess).B).values;
      const double tol = 1e-12 * std::max(1.0, std::abs(values[0]));
      for (Index m = 1; m <= std::min(tracked, guess); ++m) {
        double& prev = last[static_cast<std::size_t>(m - 1)];
        if (values[m - 1] < prev - tol) {
          verify_detail::record_failure(
              res, "eigenvalue dropped at seed " + std::to_string(seed) + ", M=" +
                       std::to_string(guess));
          fine = false;
          break;
        }
        prev = std::max(prev, values[m - 1]);
      }
    }
  }
  return res;
}

// Composing the trial map with any orthonormal basis never increases the
// error measure of any region.
inline SuiteResult suite_refinement_dominance(long trials, std::uint64_t base_seed) {
  SuiteResult res{"refinement never increases the error measure"};
  for (long t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    Rng r(seed, "dominance_corpus");
    InstanceSpec<double> spec;
    spec.seed = r.bits();
    spec.n_atoms = 2 + static_cast<Index>(r.uniform_int(0, 18));
    spec.subspace_dim = 1 + static_cast<Index>(r.uniform_int(
                                0, std::min<std::int64_t>(5, spec.n_atoms - 1)));
    spec.trial_dim = spec.subspace_dim + static_cast<Index>(r.uniform_int(0, 6));
    spec.spectrum_lo = -r.uniform(1.0, 20.0);
    spec.spectrum_hi = r.uniform(1.0, 20.0);
    spec.noise_scale = std::pow(10.0, r.uniform(-3.0, 0.0));
    const SynthInstance<double> inst = gen_instance(spec);
    const Index cols = inst.V.cols();
    const Index k = 1 + static_cast<Index>(r.uniform_int(0, cols - 1));
    ComplexMatrix<double> g(cols, k);
    for (Index row = 0; row < cols; ++row)
      for (Index col = 0; col < k; ++col)
        g(row, col) = static_cast<Complex<double>>(r.complex_normal());
    const ComplexMatrix<double> basis =
        Eigen::HouseholderQR<ComplexMatrix<double>>(g).householderQ() *
        ComplexMatrix<double>::Identity(cols, k);
    const double lo = std::min(spec.spectrum_lo, -1.0), hi = std::max(spec.spectrum_hi, 1.0);
    BorelSet<double> region = BorelSet<double>::all();
    switch (r.uniform_int(0, 4)) {
      case 0: region = BorelSet<double>::below(r.uniform(lo, hi), true); break;
      case 1: region = BorelSet<double>::above(r.uniform(lo, hi), false); break;
      case 2: {
        const double a = r.uniform(lo, hi), b = r.uniform(lo, hi);
        region = BorelSet<double>::interval(std::min(a, b), std::max(a, b));
        break;
      }
      case 3: {
        const double a = r.uniform(lo, 0.0), b = r.uniform(0.0, hi);
        region = BorelSet<double>::unite(BorelSet<double>::below(a, false),
                                         BorelSet<double>::above(b, true));
        break;
      }
      case 4: {
        const auto& atoms = inst.model.atoms();
        region = BorelSet<double>::point(
            atoms[static_cast<std::size_t>(r.uniform_int(
                0, static_cast<std::int64_t>(atoms.size()) - 1))]);
        break;
      }
    }
    ++res.trials;
    const DominanceCheck<double> check =
        refined_error_dominance_check(inst.model, inst.subspace, inst.V, basis, region);
    if (!check.holds)
      verify_detail::record_failure(res, "dominance broken at seed " + std::to_string(seed));
  }
  return res;
}

// Classical eigenvalue facts the main theorems lean on: the two-sided sum
// perturbation chain over all index pairs, and the max-min variational
// characterization with random-subspace witnesses.
inline SuiteResult suite_classical_inequalities(long pairs, long witnesses,
                                                std::uint64_t base_seed) {
  SuiteResult res{"sum perturbation chain and max-min witnesses hold"};
  for (long t = 0; t < pairs; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    Rng r(seed, "weyl_corpus");
    const Index dim = 1 + static_cast<Index>(r.uniform_int(0, 7));
    const double scale_a = std::pow(10.0, r.uniform(-2.0, 2.0));
    const double scale_b = std::pow(10.0, r.uniform(-2.0, 2.0));
    Rng ra(seed, "weyl_a");
    Rng rb(seed, "weyl_b");
    const HermitianMatrix<double> a = detail::random_hermitian<double>(ra, dim, scale_a);
    const HermitianMatrix<double> b = detail::random_hermitian<double>(rb, dim, scale_b);
    ++res.trials;
    bool fine = true;
    for (Index i = 1; i <= dim && fine; ++i)
      for (Index j = 1; j <= dim && fine; ++j) {
        const WeylCheck check = check_weyl_inequality(a, b, i, j);
        if (!check.left_holds || !check.right_holds) {
          verify_detail::record_failure(
              res, "chain broken at seed " + std::to_string(seed) + " (i=" +
                       std::to_string(i) + ", j=" + std::to_string(j) + ")");
          fine = false;
        }
      }
  }
  for (long t = 0; t < witnesses; ++t) {
    const std::uint64_t seed = base_seed + 500000ULL + static_cast<std::uint64_t>(t);
    Rng r(seed, "minmax_corpus");
    const Index dim = 2 + static_cast<Index>(r.uniform_int(0, 6));
    const Index n = 1 + static_cast<Index>(r.uniform_int(0, dim - 1));
    Rng rh(seed, "minmax_h");
    const HermitianMatrix<double> h =
        detail::random_hermitian<double>(rh, dim, std::pow(10.0, r.uniform(-1.0, 2.0)));
    const MinMaxWitness<double> w = courant_fischer_witness(h, n, 25, seed);
    const RealVector<double> values = eigh(h).values;
    const double tol = 1e-10 * std::max(1.0, std::abs(values[0]));
    ++res.trials;
    if (!w.holds)
      verify_detail::record_failure(res,
                                    "sampled subspace beat the optimum at seed " +
                                        std::to_string(seed));
    else if (std::abs(w.achieved - values[n - 1]) > tol)
      verify_detail::record_failure(
          res, "eigenvector subspace failed to attain the optimum at seed " +
                   std::to_string(seed));
  }
  return res;
}

// End-to-end frequency-retrieval demo: sweeping the common signal amplitude
// moves detection from total miss to full recovery, and the transition sits
// within a factor of two of the amplitude predicted by the signal-strength
// condition.
inline SuiteResult suite_filter_demo(std::uint64_t base_seed) {
  SuiteResult res{"filter demo transition matches the predicted amplitude"};
  FilterDiagSpec<double> base;
  base.frequencies = {-0.9, 0.15, 1.3};
  base.amplitudes = {1.0, 0.8, 1.25};
  base.samples = 24;
  base.time_step = 0.35;
  base.noise_floor = 1e-5;
  base.seed = base_seed;
  const Index m_star = 3;

  const SubspaceProtocol<double> unit = filter_diag_protocol(base);
  const GEPInstance<double> inst3 = unit.instance(m_star);
  const double eps = 2.0 * spectral_norm(require_truth(inst3).dB);
  const double strength1 =
      detection_condition(inst3, eps, NoiseKind::General).signal_strength;
  const double a_req = std::sqrt(2.0 * eps / strength1);

  const auto detects_all = [&](double amplitude) {
    FilterDiagSpec<double> spec = base;
    for (double& a : spec.amplitudes) a *= amplitude;
    const SubspaceProtocol<double> protocol = filter_diag_protocol(spec);
    const DetectionResult<double> det = run_epsilon_protocol(
        protocol, m_star, m_star, NoiseBoundSequence<double>::constant(eps));
    return det.detected == m_star;
  };

  ++res.trials;
  double a_lo = a_req / 8, a_hi = 8 * a_req;
  if (!(strength1 > 0) || !(eps > 0)) {
    verify_detail::record_failure(res, "degenerate demo instance");
    return res;
  }
  if (detects_all(a_lo) || !detects_all(a_hi)) {
    verify_detail::record_failure(res, "no transition inside the swept amplitude range");
    return res;
  }
  // Coarse sweep: success must be monotone in the amplitude.
  bool seen_success = false;
  for (int k = 0; k <= 24; ++k) {
    const double a = a_lo * std::pow(a_hi / a_lo, k / 24.0);
    const bool ok = detects_all(a);
    if (seen_success && !ok) {
      verify_detail::record_failure(res, "detection success is not monotone in amplitude");
      return res;
    }
    seen_success |= ok;
  }
  // Bisect the transition amplitude and place it against the prediction.
  for (int k = 0; k < 60 && a_hi / a_lo > 1 + 1e-12; ++k) {
    const double mid = std::sqrt(a_lo * a_hi);
    (detects_all(mid) ? a_hi : a_lo) = mid;
  }
  const double transition = std::sqrt(a_lo * a_hi);
  if (!(transition > a_req / 2 && transition < 2 * a_req)) {
    verify_detail::record_failure(res, "transition at " + std::to_string(transition / a_req) +
                                           " of the predicted amplitude");
    return res;
  }
  res.note = "transition at " + std::to_string(transition / a_req) +
             " of the predicted amplitude";
  return res;
}

struct VerificationOptions {
  double scale = 1.0;  // multiplies every suite's trial count
  std::uint64_t base_seed = 0x5eed;
  // Policy probe: feed the dimension suite understated noise bounds, and
  // choose whether flagged runs are excused or fail the verification.
  bool inject_invalid_bounds = false;
  bool allow_invalid_bounds = false;
};

inline std::vector<SuiteResult> run_verification(const VerificationOptions& opt = {}) {
  const auto n = [&](long base) {
    return std::max<long>(1, static_cast<long>(std::llround(static_cast<double>(base) *
                                                            opt.scale)));
  };
  std::vector<SuiteResult> out;
  out.push_back(suite_master_enclosure(n(1000), opt.base_seed + 1000000));
  out.push_back(suite_matrix_form_tightening(n(1000), opt.base_seed + 2000000));
  out.push_back(suite_band_agreement(n(500), opt.base_seed + 3000000));
  out.push_back(suite_anchored_bracket(n(1000), opt.base_seed + 4000000));
  out.push_back(suite_zero_noise_exactness(n(200), opt.base_seed + 5000000));
  out.push_back(suite_dimension_lower_bound(n(1000), opt.base_seed + 6000000,
                                            opt.inject_invalid_bounds,
                                            opt.allow_invalid_bounds));
  out.push_back(suite_detection_sufficiency(n(500), opt.base_seed + 7000000));
  out.push_back(suite_nested_monotonicity(n(100), opt.base_seed + 8000000));
  out.push_back(suite_refinement_dominance(n(500), opt.base_seed + 9000000));
  out.push_back(suite_classical_inequalities(n(500), n(200), opt.base_seed + 10000000));
  out.push_back(suite_filter_demo(opt.base_seed + 11000000));
  return out;
}

}  // namespace subspectra
