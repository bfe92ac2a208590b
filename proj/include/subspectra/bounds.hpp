#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "subspectra/hermitian.hpp"
#include "subspectra/model.hpp"
#include "subspectra/types.hpp"

namespace subspectra {

// Well-conditioning splits the weight matrix's spectrum from the noise
// weight's: lambda_m(B) must exceed the top eigenvalue of N^* N + dB.  The
// gap is the denominator of every noise-subtracted eigenvalue bound, so the
// report carries all three numbers, not just the verdict.
template <typename Real>
struct ConditioningReport {
  Real lambda_m_weight = std::numeric_limits<Real>::quiet_NaN();
  Real noise_weight_top = std::numeric_limits<Real>::quiet_NaN();
  Real margin = std::numeric_limits<Real>::quiet_NaN();
  bool well_conditioned = false;
  std::vector<std::string> flags;
};

template <typename Real>
ConditioningReport<Real> check_well_conditioned(const GEPInstance<Real>& instance) {
  const GroundTruth<Real>& gt = require_truth(instance);
  const Index m = gt.subspace.dimension(gt.model);
  if (m < 1) throw IndexOutOfRange("check_well_conditioned: subspace dimension must be >= 1");
  ConditioningReport<Real> out;
  if (m > instance.trial_dimension()) {
    out.flags.push_back("SubspaceDimensionExceedsTrial");
    return out;
  }
  out.lambda_m_weight = eigh(instance.B).values[m - 1];
  out.noise_weight_top = eigh(noise_weight(instance)).values[0];
  out.margin = out.lambda_m_weight - out.noise_weight_top;
  out.well_conditioned = out.margin > Real(0);
  return out;
}

enum class BoundMethod { Master, MatrixForm, Band, Bounded, Alternative };

inline const char* method_name(BoundMethod method) {
  switch (method) {
    case BoundMethod::Master: return "master";
    case BoundMethod::MatrixForm: return "matrix_form";
    case BoundMethod::Band: return "band";
    case BoundMethod::Bounded: return "bounded";
    case BoundMethod::Alternative: return "alternative";
  }
  return "unknown";
}

// Two-sided bracket for the signed error (approximation minus true value) of
// one eigenvalue.  `approx` is the generalized eigenvalue estimate the row
// refers to, rows are ordered to match descending estimates.
template <typename Real>
struct BoundRow {
  Real approx;
  Real lower;
  Real upper;
};

template <typename Real>
struct EigenvalueBounds {
  BoundMethod method;
  Real denominator;  // conditioning margin, or lambda_m(B) for Alternative
  std::vector<BoundRow<Real>> rows;
  std::vector<std::string> flags;  // e.g. violated band assumptions
};

// Spectral norms of the noise mass strictly below / strictly above a band;
// these are the only noise statistics the bounded-operator corollary needs.
template <typename Real>
struct OffBandComponents {
  Real norm_below;
  Real norm_above;
};

template <typename Real>
OffBandComponents<Real> off_band_components(const GEPInstance<Real>& instance) {
  const GroundTruth<Real>& gt = require_truth(instance);
  if (!gt.subspace.interval_form())
    throw InvalidSpec("off_band_components: subspace must be in interval form");
  const Real lo = gt.subspace.interval_lo();
  const Real hi = gt.subspace.interval_hi();
  OffBandComponents<Real> out;
  out.norm_below = std::max(
      eigh(error_matrix(gt.model, gt.subspace, gt.V, BorelSet<Real>::below(lo))).values[0],
      Real(0));
  out.norm_above = std::max(
      eigh(error_matrix(gt.model, gt.subspace, gt.V, BorelSet<Real>::above(hi))).values[0],
      Real(0));
  return out;
}

namespace detail {

// The bound families are stated for the square problem where the trial
// dimension equals the target dimension.  With extra trial columns the top
// generalized eigenvalues can be spurious (pure noise directions produce
// eigenvalues unrelated to the subspace), so a non-square instance is
// rejected here rather than silently mis-paired; callers refine first.
template <typename Real>
struct BoundSetup {
  const GroundTruth<Real>* truth;
  Index m;
  GEPSolution<Real> solution;
  ConditioningReport<Real> conditioning;
};

// RequireMargin guards the noise-subtracted families; RequirePositiveWeight
// is the weaker demand of the alternative family, which survives margin <= 0
// as long as B itself stays positive.
enum class MarginPolicy { RequireMargin, RequirePositiveWeight };

template <typename Real>
BoundSetup<Real> prepare_bounds(const GEPInstance<Real>& instance, MarginPolicy policy) {
  BoundSetup<Real> setup;
  setup.truth = &require_truth(instance);
  setup.m = setup.truth->subspace.dimension(setup.truth->model);
  if (setup.m < 1) throw IndexOutOfRange("bounds: subspace dimension must be >= 1");
  if (setup.m > instance.trial_dimension())
    throw SubspaceDimensionExceedsTrial("bounds: subspace dimension exceeds trial dimension");
  if (setup.m < instance.trial_dimension())
    throw DimensionMismatch("bounds: trial dimension must equal the subspace dimension; "
                            "refine the instance down to the detected dimension first");
  setup.conditioning = check_well_conditioned(instance);
  if (policy == MarginPolicy::RequireMargin && !(setup.conditioning.margin > Real(0)))
    throw IllConditioned("bounds: conditioning margin " +
                         std::to_string(static_cast<double>(setup.conditioning.margin)) +
                         " is not positive");
  if (policy == MarginPolicy::RequirePositiveWeight &&
      !(setup.conditioning.lambda_m_weight > Real(0)))
    throw SingularWeight("bounds: lambda_m(B) must be positive");
  setup.solution = solve_gep(instance.A, instance.B);
  return setup;
}

}  // namespace detail

// Master bracket: for each estimate t, the signed error t - lambda lies in
//   [ (moment below t  + min0(dA - t dB)) / margin,
//     (moment above t  + max0(dA - t dB)) / margin ]
// where the moments integrate (atom - t) over the noise mass on either side
// of t and margin is the well-conditioning gap.
template <typename Real>
EigenvalueBounds<Real> bounds_master(const GEPInstance<Real>& instance) {
  const auto setup = detail::prepare_bounds(instance, detail::MarginPolicy::RequireMargin);
  const GroundTruth<Real>& gt = *setup.truth;
  EigenvalueBounds<Real> out{BoundMethod::Master, setup.conditioning.margin, {}, {}};
  for (Index i = 0; i < setup.m; ++i) {
    const Real t = setup.solution.values[i];
    const HermitianMatrix<Real> shift = gt.dA - t * gt.dB;
    const Real below = weighted_error_integral(gt.model, gt.subspace, gt.V, t, Side::Below);
    const Real above = weighted_error_integral(gt.model, gt.subspace, gt.V, t, Side::Above);
    out.rows.push_back({t, (below + min_eigenvalue_or_zero(shift)) / out.denominator,
                        (above + max_eigenvalue_or_zero(shift)) / out.denominator});
  }
  return out;
}

// Same shape as the master bracket with the scalar moments replaced by the
// extremal eigenvalues of the matrix moments; never wider than master since
// an extremal eigenvalue of a semidefinite matrix is bounded by its trace.
template <typename Real>
EigenvalueBounds<Real> bounds_matrix_form(const GEPInstance<Real>& instance) {
  const auto setup = detail::prepare_bounds(instance, detail::MarginPolicy::RequireMargin);
  const GroundTruth<Real>& gt = *setup.truth;
  EigenvalueBounds<Real> out{BoundMethod::MatrixForm, setup.conditioning.margin, {}, {}};
  for (Index i = 0; i < setup.m; ++i) {
    const Real t = setup.solution.values[i];
    const HermitianMatrix<Real> shift = gt.dA - t * gt.dB;
    const Real below =
        eigh(weighted_error_matrix(gt.model, gt.subspace, gt.V, t, Side::Below))
            .values[instance.trial_dimension() - 1];
    const Real above =
        eigh(weighted_error_matrix(gt.model, gt.subspace, gt.V, t, Side::Above)).values[0];
    out.rows.push_back({t, (below + min_eigenvalue_or_zero(shift)) / out.denominator,
                        (above + max_eigenvalue_or_zero(shift)) / out.denominator});
  }
  return out;
}

namespace detail {

template <typename Real>
void require_band_form(const GroundTruth<Real>& gt) {
  if (!gt.subspace.interval_form())
    throw InvalidSpec("band-restricted bounds require an interval-form subspace, which "
                      "guarantees no unselected atom sits inside the band");
}

template <typename Real>
void flag_estimates_outside_band(const BoundSetup<Real>& setup, Real lo, Real hi,
                                 std::vector<std::string>& flags) {
  for (Index i = 0; i < setup.m; ++i) {
    const Real t = setup.solution.values[i];
    if (t < lo || t > hi) {
      flags.push_back("AssumptionViolated:estimate_outside_band");
      return;
    }
  }
}

}  // namespace detail

// Master bracket with the integration regions pushed out to the band edges:
// moments run over atoms below the band start / above the band end while the
// weights stay centered at each estimate.  When every estimate lies inside
// the band this coincides with the master bracket (no noise atom can sit
// between an estimate and the nearer band edge); estimates escaping the band
// are reported via a flag, with rows still computed.
template <typename Real>
EigenvalueBounds<Real> bounds_band(const GEPInstance<Real>& instance) {
  const auto setup = detail::prepare_bounds(instance, detail::MarginPolicy::RequireMargin);
  const GroundTruth<Real>& gt = *setup.truth;
  detail::require_band_form(gt);
  const Real lo = gt.subspace.interval_lo();
  const Real hi = gt.subspace.interval_hi();
  EigenvalueBounds<Real> out{BoundMethod::Band, setup.conditioning.margin, {}, {}};
  detail::flag_estimates_outside_band(setup, lo, hi, out.flags);
  for (Index i = 0; i < setup.m; ++i) {
    const Real t = setup.solution.values[i];
    const HermitianMatrix<Real> shift = gt.dA - t * gt.dB;
    const Real below =
        weighted_error_integral(gt.model, gt.subspace, gt.V, lo, t, Side::Below);
    const Real above =
        weighted_error_integral(gt.model, gt.subspace, gt.V, hi, t, Side::Above);
    out.rows.push_back({t, (below + min_eigenvalue_or_zero(shift)) / out.denominator,
                        (above + max_eigenvalue_or_zero(shift)) / out.denominator});
  }
  return out;
}

// Band bracket for a model known a priori to live inside [e_min, e_max]:
// each off-band moment is replaced by the worst case (band-edge to spectrum
// edge) times the spectral norm of the off-band noise mass.  Needs only the
// two norms, not where the off-band atoms sit.
template <typename Real>
EigenvalueBounds<Real> bounds_bounded(const GEPInstance<Real>& instance, Real e_min,
                                      Real e_max) {
  const auto setup = detail::prepare_bounds(instance, detail::MarginPolicy::RequireMargin);
  const GroundTruth<Real>& gt = *setup.truth;
  detail::require_band_form(gt);
  if (!(e_min <= e_max)) throw InvalidSpec("bounds_bounded: requires e_min <= e_max");
  for (const Real atom : gt.model.atoms())
    if (atom < e_min || atom > e_max)
      throw BoundViolatedByModel("bounds_bounded: model atom outside [e_min, e_max]");
  const Real lo = gt.subspace.interval_lo();
  const Real hi = gt.subspace.interval_hi();
  const OffBandComponents<Real> off = off_band_components(instance);
  EigenvalueBounds<Real> out{BoundMethod::Bounded, setup.conditioning.margin, {}, {}};
  detail::flag_estimates_outside_band(setup, lo, hi, out.flags);
  for (Index i = 0; i < setup.m; ++i) {
    const Real t = setup.solution.values[i];
    if (t < e_min || t > e_max) {
      out.flags.push_back("AssumptionViolated:estimate_outside_operator_range");
      break;
    }
  }
  for (Index i = 0; i < setup.m; ++i) {
    const Real t = setup.solution.values[i];
    const HermitianMatrix<Real> shift = gt.dA - t * gt.dB;
    out.rows.push_back(
        {t, ((e_min - t) * off.norm_below + min_eigenvalue_or_zero(shift)) / out.denominator,
         ((e_max - t) * off.norm_above + max_eigenvalue_or_zero(shift)) / out.denominator});
  }
  return out;
}

// Bracket anchored at caller-supplied true eigenvalues instead of the
// estimates: moments and perturbation shifts are evaluated at each true
// value and the denominator is lambda_m(B) alone.  No well-conditioning is
// required, so this is the family that survives noise-dominated problems;
// the price is the weaker denominator.
template <typename Real>
EigenvalueBounds<Real> bounds_alternative(const GEPInstance<Real>& instance,
                                          const RealVector<Real>& true_values) {
  const auto setup = detail::prepare_bounds(instance, detail::MarginPolicy::RequirePositiveWeight);
  const GroundTruth<Real>& gt = *setup.truth;
  if (true_values.size() != setup.m)
    throw DimensionMismatch("bounds_alternative: need one true eigenvalue per subspace "
                            "dimension, descending");
  const Real lambda_m_weight = setup.conditioning.lambda_m_weight;
  EigenvalueBounds<Real> out{BoundMethod::Alternative, lambda_m_weight, {}, {}};
  for (Index i = 0; i < setup.m; ++i) {
    const Real truth_value = true_values[i];
    const HermitianMatrix<Real> shift = gt.dA - truth_value * gt.dB;
    const Real below =
        weighted_error_integral(gt.model, gt.subspace, gt.V, truth_value, Side::Below);
    const Real above =
        weighted_error_integral(gt.model, gt.subspace, gt.V, truth_value, Side::Above);
    out.rows.push_back({setup.solution.values[i],
                        (below + min_eigenvalue_or_zero(shift)) / lambda_m_weight,
                        (above + max_eigenvalue_or_zero(shift)) / lambda_m_weight});
  }
  return out;
}

}  // namespace subspectra
