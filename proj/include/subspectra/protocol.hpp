#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subspectra/bounds.hpp"
#include "subspectra/hermitian.hpp"
#include "subspectra/model.hpp"
#include "subspectra/types.hpp"

namespace subspectra {

// A family of trial problems indexed by the guess dimension M.  `nested`
// promises that the problem at M is the leading principal block of the
// problem at any larger M (same stored trial columns), which is what the
// sweep diagnostics rely on.
template <typename Real>
struct SubspaceProtocol {
  std::function<GEPInstance<Real>(Index)> instance;
  Index max_guess = 0;
  bool nested = false;
};

// Per-guess noise bound: at(M) dominates the spectral norm of the noise
// weight of the problem at M.  Tables are 1-based in M.
template <typename Real>
struct NoiseBoundSequence {
  std::function<Real(Index)> at;

  static NoiseBoundSequence constant(Real eps) {
    return NoiseBoundSequence{[eps](Index) { return eps; }};
  }

  static NoiseBoundSequence table(std::vector<Real> eps) {
    return NoiseBoundSequence{[eps = std::move(eps)](Index guess) -> Real {
      if (guess < 1 || guess > static_cast<Index>(eps.size()))
        throw IndexOutOfRange("NoiseBoundSequence: no table entry for this guess dimension");
      return eps[static_cast<std::size_t>(guess - 1)];
    }};
  }
};

// Counts weight-matrix eigenvalues strictly above the threshold.  Strictness
// is what makes the count a certified lower bound on the target dimension
// when the threshold dominates the noise weight norm.
template <typename Real>
Index detect_dimension(const HermitianMatrix<Real>& weight, Real threshold) {
  if (!(threshold > Real(0)))
    throw NonPositiveThreshold("detect_dimension: threshold must be positive");
  const RealVector<Real> values = eigh(weight).values;
  Index count = 0;
  while (count < values.size() && values[count] > threshold) ++count;
  return count;
}

// Compression of [A, B] onto the m leading eigenvectors of B.  reduced_B is
// diagonal up to roundoff since the basis diagonalizes B; its m leading
// eigenvalues carry over exactly.
template <typename Real>
struct Refinement {
  ComplexMatrix<Real> basis;  // columns: m leading eigenvectors of B
  HermitianMatrix<Real> reduced_A;
  HermitianMatrix<Real> reduced_B;
};

template <typename Real>
Refinement<Real> refine(const GEPInstance<Real>& instance, Index m) {
  if (m < 1 || m > instance.trial_dimension())
    throw IndexOutOfRange("refine: target dimension must lie in 1..trial dimension");
  const ComplexMatrix<Real> basis = eigh(instance.B).vectors.leftCols(m);
  return {basis,
          HermitianMatrix<Real>::trusted(basis.adjoint() * instance.A.matrix() * basis),
          HermitianMatrix<Real>::trusted(basis.adjoint() * instance.B.matrix() * basis)};
}

// Refinement that also maps the ground truth through the basis, yielding a
// square instance (trial dimension == m) whose error measure is the refined
// one.  This is the hand-off point from detection to the bound families.
template <typename Real>
GEPInstance<Real> refine_instance(const GEPInstance<Real>& instance, Index m) {
  const GroundTruth<Real>& gt = require_truth(instance);
  Refinement<Real> r = refine(instance, m);
  GroundTruth<Real> reduced_truth{
      gt.model, gt.subspace, (gt.V * r.basis).eval(),
      HermitianMatrix<Real>::trusted(r.basis.adjoint() * gt.dA.matrix() * r.basis),
      HermitianMatrix<Real>::trusted(r.basis.adjoint() * gt.dB.matrix() * r.basis)};
  return {std::move(r.reduced_A), std::move(r.reduced_B), std::move(reduced_truth)};
}

template <typename Real>
struct DetectionResult {
  Index guess_dimension = 0;  // final M examined
  Index detected = 0;         // eigenvalue count above the threshold at that M
  Real threshold = 0;         // threshold in effect at the final M
  std::optional<Refinement<Real>> refinement;    // absent when detected == 0
  std::optional<GEPSolution<Real>> estimates;    // absent when detected == 0
  std::vector<std::string> flags;
};

namespace detail {

// Shared growth loop: evaluate the protocol at M, count, and grow while the
// count saturates the guess.  A saturated count at the cap is reported via
// the BudgetExhausted flag together with the final state, not an exception;
// the caller decides whether a full-rank answer is usable.
template <typename Real, typename ThresholdAt>
DetectionResult<Real> detection_loop(const SubspaceProtocol<Real>& protocol, Index m_start,
                                     Index m_max, ThresholdAt&& threshold_at,
                                     std::vector<std::string> initial_flags) {
  if (!protocol.instance) throw InvalidSpec("protocol has no generator");
  if (m_start < 1 || m_start > m_max || m_max > protocol.max_guess)
    throw IndexOutOfRange("detection: need 1 <= M_start <= M_max <= protocol.max_guess");
  DetectionResult<Real> out;
  out.flags = std::move(initial_flags);
  Index guess = m_start;
  for (;;) {
    const GEPInstance<Real> inst = protocol.instance(guess);
    if (inst.trial_dimension() != guess)
      throw DimensionMismatch("protocol produced an instance of the wrong dimension");
    const EigenDecomposition<Real> weight = eigh(inst.B);
    const Real threshold = threshold_at(inst, weight, out.flags);
    if (!(threshold > Real(0)))
      throw NonPositiveThreshold("detection: threshold must be positive");
    Index count = 0;
    while (count < guess && weight.values[count] > threshold) ++count;
    if (count == guess && guess < m_max) {
      ++guess;
      continue;
    }
    out.guess_dimension = guess;
    out.detected = count;
    out.threshold = threshold;
    if (count == guess) out.flags.push_back("BudgetExhausted");
    if (count > 0) {
      out.refinement = refine(inst, count);
      out.estimates = solve_gep(out.refinement->reduced_A, out.refinement->reduced_B);
    }
    return out;
  }
}

}  // namespace detail

// Growth loop with one fixed threshold for every guess dimension.
template <typename Real>
DetectionResult<Real> run_protocol(const SubspaceProtocol<Real>& protocol, Index m_start,
                                   Index m_max, Real threshold) {
  if (!(threshold > Real(0)))
    throw NonPositiveThreshold("run_protocol: threshold must be positive");
  return detail::detection_loop(
      protocol, m_start, m_max,
      [threshold](const GEPInstance<Real>&, const EigenDecomposition<Real>&,
                  std::vector<std::string>&) { return threshold; },
      {});
}

// Growth loop thresholded by a per-M noise bound.  The effective threshold is
// floored at 1e-14 * ||B_M|| so an exactly-zero bound (noise-free protocols)
// still separates rank from roundoff.  When ground truth is available the
// bound is checked against the actual noise weight norm; a bound that fails
// to dominate voids the lower-bound guarantee and is flagged, not thrown.
template <typename Real>
DetectionResult<Real> run_epsilon_protocol(const SubspaceProtocol<Real>& protocol,
                                           Index m_start, Index m_max,
                                           const NoiseBoundSequence<Real>& bounds) {
  if (!bounds.at) throw InvalidSpec("run_epsilon_protocol: noise bound sequence is empty");
  bool flagged_invalid = false;
  auto threshold_at = [&](const GEPInstance<Real>& inst, const EigenDecomposition<Real>& weight,
                          std::vector<std::string>& flags) {
    const Real eps = bounds.at(inst.trial_dimension());
    if (!(eps >= Real(0)))
      throw InvalidNoiseBound("run_epsilon_protocol: noise bound must be >= 0");
    if (inst.truth && !flagged_invalid) {
      const Real actual = spectral_norm(noise_weight(inst));
      if (actual > eps) {
        flags.push_back("InvalidNoiseBound");
        flagged_invalid = true;
      }
    }
    const Real norm = weight.values.cwiseAbs().maxCoeff();
    return std::max(eps, Real(1e-14) * norm);
  };
  return detail::detection_loop(protocol, m_start, m_max, threshold_at, {});
}

// Signal-strength side of the detection guarantee at one guess dimension:
// detection at threshold eps certainly recovers the full target dimension
// m* once the m*-th eigenvalue of the signal Gram exceeds `required`, which
// is eps when the noise weight is known positive semidefinite and 2 eps for
// general indefinite noise.
enum class NoiseKind { PureSubspace, General };

template <typename Real>
struct DetectionCondition {
  Real signal_strength;
  Real required;
  bool satisfied;
};

template <typename Real>
DetectionCondition<Real> detection_condition(const GEPInstance<Real>& instance, Real eps,
                                             NoiseKind kind) {
  const GroundTruth<Real>& gt = require_truth(instance);
  if (!(eps >= Real(0))) throw InvalidNoiseBound("detection_condition: eps must be >= 0");
  const Index m = gt.subspace.dimension(gt.model);
  if (m < 1) throw IndexOutOfRange("detection_condition: subspace dimension must be >= 1");
  if (m > instance.trial_dimension())
    throw SubspaceDimensionExceedsTrial("detection_condition: subspace exceeds trial dimension");
  const TrialMap<Real> signal = split(gt.model, gt.subspace, gt.V).signal;
  const HermitianMatrix<Real> gram =
      HermitianMatrix<Real>::trusted(signal.adjoint() * signal);
  DetectionCondition<Real> out;
  out.signal_strength = eigh(gram).values[m - 1];
  out.required = kind == NoiseKind::PureSubspace ? eps : Real(2) * eps;
  out.satisfied = out.signal_strength > out.required;
  return out;
}

struct DimensionCheckReport {
  long runs = 0;
  long violations = 0;            // detected dimension exceeded the true one
  long invalid_noise_bounds = 0;  // runs whose bound failed to dominate the noise
  long certified_violations = 0;  // violations under a dominating bound; the
                                  // lower-bound guarantee promises exactly zero
};

// Replays single-shot detection at guess dimension M across a seeded family
// of (protocol, noise bound) pairs and counts runs where the detected count
// exceeds the true subspace dimension.  With dominating bounds the count is
// a certified lower bound, so `violations` staying at zero is the contract.
template <typename Real, typename Family>
DimensionCheckReport verify_dimension_lower_bound(Family&& family, Index guess,
                                                  long seed_count, std::uint64_t base_seed) {
  if (seed_count < 1) throw InvalidSpec("verify_dimension_lower_bound: seed_count >= 1");
  DimensionCheckReport report;
  for (long s = 0; s < seed_count; ++s) {
    const std::pair<SubspaceProtocol<Real>, NoiseBoundSequence<Real>> made =
        family(base_seed + static_cast<std::uint64_t>(s));
    const SubspaceProtocol<Real>& protocol = made.first;
    if (guess < 1 || guess > protocol.max_guess)
      throw IndexOutOfRange("verify_dimension_lower_bound: guess outside protocol range");
    const GEPInstance<Real> inst = protocol.instance(guess);
    const Real eps = made.second.at(guess);
    const GroundTruth<Real>& gt = require_truth(inst);
    const bool invalid = spectral_norm(noise_weight(inst)) > eps;
    if (invalid) ++report.invalid_noise_bounds;
    const Real norm = spectral_norm(inst.B);
    const Real threshold = std::max(eps, Real(1e-14) * norm);
    Index detected = 0;
    const RealVector<Real> values = eigh(inst.B).values;
    while (detected < values.size() && values[detected] > threshold) ++detected;
    if (detected > gt.subspace.dimension(gt.model)) {
      ++report.violations;
      if (!invalid) ++report.certified_violations;
    }
    ++report.runs;
  }
  return report;
}

template <typename Real>
struct SweepRow {
  Index guess;        // M
  Real lambda_m;      // m-th eigenvalue of B_M (equals that of the refined weight)
  Real eps;           // noise bound at M
  Real ratio;         // eps / lambda_m, NaN when undefined
  Index detected;     // count above the floored bound at M
  bool ratio_defined;
};

template <typename Real>
struct SweepTrace {
  Index target;  // the fixed m the trace tracks
  std::vector<SweepRow<Real>> rows;
};

// Tracks lambda_m(B_M), the noise bound, and their ratio across a range of
// guess dimensions of a nested protocol.  For nested protocols lambda_m can
// only improve with M (interlacing of leading principal blocks), so the
// trace exposes the noise-to-signal trade-off that guides choosing M; the
// stopping rule itself is left to the caller.
template <typename Real>
SweepTrace<Real> sweep_guess_dimension(const SubspaceProtocol<Real>& protocol,
                                       const NoiseBoundSequence<Real>& bounds, Index target,
                                       Index guess_lo, Index guess_hi) {
  if (!protocol.nested)
    throw NotNested("sweep_guess_dimension: the protocol must be nested for the trace "
                    "to be monotone-comparable across M");
  if (!bounds.at) throw InvalidSpec("sweep_guess_dimension: noise bound sequence is empty");
  if (target < 1 || target > guess_lo || guess_lo > guess_hi || guess_hi > protocol.max_guess)
    throw IndexOutOfRange(
        "sweep_guess_dimension: need 1 <= target <= M_lo <= M_hi <= protocol.max_guess");
  SweepTrace<Real> trace;
  trace.target = target;
  for (Index guess = guess_lo; guess <= guess_hi; ++guess) {
    const GEPInstance<Real> inst = protocol.instance(guess);
    const EigenDecomposition<Real> weight = eigh(inst.B);
    SweepRow<Real> row;
    row.guess = guess;
    row.lambda_m = weight.values[target - 1];
    row.eps = bounds.at(guess);
    if (!(row.eps >= Real(0)))
      throw InvalidNoiseBound("sweep_guess_dimension: noise bound must be >= 0");
    row.ratio_defined = row.lambda_m > Real(0);
    row.ratio = row.ratio_defined ? row.eps / row.lambda_m
                                  : std::numeric_limits<Real>::quiet_NaN();
    const Real threshold =
        std::max(row.eps, Real(1e-14) * weight.values.cwiseAbs().maxCoeff());
    Index detected = 0;
    if (threshold > Real(0))
      while (detected < guess && weight.values[detected] > threshold) ++detected;
    row.detected = detected;
    trace.rows.push_back(row);
  }
  return trace;
}

template <typename Real>
struct DominanceCheck {
  Real refined;    // error measure after composing with the basis
  Real unrefined;  // error measure of the original trial map
  bool holds;
};

// Composing a trial map with an orthonormal basis can only shed noise mass:
// the refined error measure of any region is dominated by the unrefined one.
template <typename Real>
DominanceCheck<Real> refined_error_dominance_check(const DiscreteSpectralModel<Real>& model,
                                                   const SpectralSubspace<Real>& subspace,
                                                   const TrialMap<Real>& v,
                                                   const ComplexMatrix<Real>& basis,
                                                   const BorelSet<Real>& region) {
  if (basis.rows() != v.cols())
    throw DimensionMismatch("refined_error_dominance_check: basis rows must match trial columns");
  if (basis.cols() < 1 || basis.cols() > basis.rows())
    throw InvalidSpec("refined_error_dominance_check: basis must have 1..rows columns");
  const ComplexMatrix<Real> gram = basis.adjoint() * basis;
  const Real defect =
      (gram - ComplexMatrix<Real>::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (defect > Real(1e-10))
    throw NonOrthonormalBasis("refined_error_dominance_check: basis columns are not "
                              "orthonormal within 1e-10");
  DominanceCheck<Real> out;
  out.refined = error_measure(model, subspace, (v * basis).eval(), region);
  out.unrefined = error_measure(model, subspace, v, region);
  out.holds = out.refined <= out.unrefined + Real(1e-12) * std::max(Real(1), out.unrefined);
  return out;
}

}  // namespace subspectra
