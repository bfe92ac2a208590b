#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "subspectra/borel.hpp"
#include "subspectra/hermitian.hpp"
#include "subspectra/types.hpp"

namespace subspectra {

// A self-adjoint operator given diagonally in its own eigenbasis: entry k of
// `atoms` is the eigenvalue attached to basis direction k, repeated values
// encode multiplicity.  All spectral projections are then 0/1 diagonal
// selectors, which keeps every measure below exact to the atom.
template <typename Real>
class DiscreteSpectralModel {
 public:
  explicit DiscreteSpectralModel(std::vector<Real> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw InvalidSpec("DiscreteSpectralModel: needs at least one atom");
    for (const Real a : atoms_) {
      if (!std::isfinite(a)) throw InvalidSpec("DiscreteSpectralModel: atoms must be finite");
      // Bounded dynamic range keeps the error-measure arithmetic well scaled.
      if (std::abs(a) > Real(1e6))
        throw InvalidSpec("DiscreteSpectralModel: atom magnitudes must stay within 1e6");
    }
  }

  Index dim() const { return static_cast<Index>(atoms_.size()); }
  const std::vector<Real>& atoms() const { return atoms_; }

  Real max_abs_atom() const {
    Real m = 0;
    for (const Real a : atoms_) m = std::max(m, std::abs(a));
    return m;
  }

 private:
  std::vector<Real> atoms_;
};

// Selects the target eigenspace either by explicit basis indices or as the
// span of everything with an atom inside a closed interval [lo, hi].  The
// interval form is what the band-restricted bounds require: it guarantees by
// construction that no unselected atom lies inside the band.
template <typename Real>
class SpectralSubspace {
 public:
  static SpectralSubspace from_indices(std::vector<Index> indices) {
    SpectralSubspace s;
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
      throw InvalidSpec("SpectralSubspace: duplicate indices");
    s.indices_ = std::move(indices);
    return s;
  }

  static SpectralSubspace from_interval(Real lo, Real hi) {
    if (!(lo <= hi)) throw InvalidSpec("SpectralSubspace: interval requires lo <= hi");
    SpectralSubspace s;
    s.interval_ = std::make_pair(lo, hi);
    return s;
  }

  bool interval_form() const { return interval_.has_value(); }

  Real interval_lo() const { return require_interval().first; }
  Real interval_hi() const { return require_interval().second; }

  // Stored index list; empty when in interval form.
  const std::vector<Index>& indices() const { return indices_; }

  // Flat selected indices, ascending.
  std::vector<Index> resolve(const DiscreteSpectralModel<Real>& model) const {
    if (interval_) {
      std::vector<Index> out;
      for (Index k = 0; k < model.dim(); ++k) {
        const Real a = model.atoms()[static_cast<std::size_t>(k)];
        if (interval_->first <= a && a <= interval_->second) out.push_back(k);
      }
      return out;
    }
    for (const Index k : indices_)
      if (k < 0 || k >= model.dim())
        throw IndexOutOfRange("SpectralSubspace: index outside the model basis");
    return indices_;
  }

  Index dimension(const DiscreteSpectralModel<Real>& model) const {
    return static_cast<Index>(resolve(model).size());
  }

  // mask[k] == true iff basis direction k is selected.
  std::vector<bool> mask(const DiscreteSpectralModel<Real>& model) const {
    std::vector<bool> out(static_cast<std::size_t>(model.dim()), false);
    for (const Index k : resolve(model)) out[static_cast<std::size_t>(k)] = true;
    return out;
  }

 private:
  const std::pair<Real, Real>& require_interval() const {
    if (!interval_) throw InvalidSpec("SpectralSubspace: not in interval form");
    return *interval_;
  }

  std::vector<Index> indices_;
  std::optional<std::pair<Real, Real>> interval_;
};

template <typename Real>
struct SignalNoiseSplit {
  TrialMap<Real> signal;  // rows inside the selection, others zeroed
  TrialMap<Real> noise;   // the complement; signal + noise == trial map exactly
};

namespace detail {

// Keeps the full row layout and zeroes the complement, so downstream products
// are literally products of the split maps (no row compaction drift).
template <typename Real>
TrialMap<Real> masked_rows(const TrialMap<Real>& v, const std::vector<bool>& keep) {
  TrialMap<Real> out = TrialMap<Real>::Zero(v.rows(), v.cols());
  for (Index k = 0; k < v.rows(); ++k)
    if (keep[static_cast<std::size_t>(k)]) out.row(k) = v.row(k);
  return out;
}

template <typename Real>
void require_model_rows(const DiscreteSpectralModel<Real>& model, const TrialMap<Real>& v) {
  if (v.rows() != model.dim())
    throw DimensionMismatch("trial map row count does not match the model dimension");
  if (v.cols() < 1) throw InvalidSpec("trial map needs at least one column");
}

}  // namespace detail

template <typename Real>
SignalNoiseSplit<Real> split(const DiscreteSpectralModel<Real>& model,
                             const SpectralSubspace<Real>& subspace, const TrialMap<Real>& v) {
  detail::require_model_rows(model, v);
  std::vector<bool> keep = subspace.mask(model);
  SignalNoiseSplit<Real> out;
  out.signal = detail::masked_rows(v, keep);
  keep.flip();
  out.noise = detail::masked_rows(v, keep);
  return out;
}

// Scalar error measure of a region: the total squared noise mass the trial
// map places on unselected atoms inside the region.
template <typename Real>
Real error_measure(const DiscreteSpectralModel<Real>& model,
                   const SpectralSubspace<Real>& subspace, const TrialMap<Real>& v,
                   const BorelSet<Real>& region) {
  detail::require_model_rows(model, v);
  const std::vector<bool> selected = subspace.mask(model);
  Real total = 0;
  for (Index k = 0; k < model.dim(); ++k) {
    if (selected[static_cast<std::size_t>(k)]) continue;
    const Real atom = model.atoms()[static_cast<std::size_t>(k)];
    if (region.contains(atom)) total += v.row(k).squaredNorm();
  }
  return total;
}

// Matrix-valued refinement of error_measure: the Gram matrix of the noise
// rows whose atoms fall inside the region.  Trace equals error_measure.
template <typename Real>
HermitianMatrix<Real> error_matrix(const DiscreteSpectralModel<Real>& model,
                                   const SpectralSubspace<Real>& subspace,
                                   const TrialMap<Real>& v, const BorelSet<Real>& region) {
  detail::require_model_rows(model, v);
  const std::vector<bool> selected = subspace.mask(model);
  std::vector<bool> keep(selected.size());
  for (std::size_t k = 0; k < selected.size(); ++k)
    keep[k] = !selected[k] && region.contains(model.atoms()[k]);
  const TrialMap<Real> rows = detail::masked_rows(v, keep);
  return HermitianMatrix<Real>::trusted(rows.adjoint() * rows);
}

enum class Side { Below, Above };

// Signed first moment of the error measure relative to `center`, restricted
// to the strictly one-sided region {atom < cut} or {atom > cut}:
//   Above:  sum over noise atoms > cut of (atom - center) * mass   (>= 0 when center <= cut)
//   Below:  sum over noise atoms < cut of (atom - center) * mass   (<= 0 when center >= cut)
// The common single-cut form uses center == cut; band-restricted bounds keep
// the weight centered at an eigenvalue estimate while cutting at a band edge.
template <typename Real>
Real weighted_error_integral(const DiscreteSpectralModel<Real>& model,
                             const SpectralSubspace<Real>& subspace, const TrialMap<Real>& v,
                             Real cut, Real center, Side side) {
  detail::require_model_rows(model, v);
  const std::vector<bool> selected = subspace.mask(model);
  Real total = 0;
  for (Index k = 0; k < model.dim(); ++k) {
    if (selected[static_cast<std::size_t>(k)]) continue;
    const Real atom = model.atoms()[static_cast<std::size_t>(k)];
    const bool in_region = side == Side::Above ? atom > cut : atom < cut;
    if (in_region) total += (atom - center) * v.row(k).squaredNorm();
  }
  return total;
}

template <typename Real>
Real weighted_error_integral(const DiscreteSpectralModel<Real>& model,
                             const SpectralSubspace<Real>& subspace, const TrialMap<Real>& v,
                             Real cut, Side side) {
  return weighted_error_integral(model, subspace, v, cut, cut, side);
}

// Matrix analogue of weighted_error_integral; positive semidefinite for
// Above with center <= cut, negative semidefinite for Below with center >= cut.
template <typename Real>
HermitianMatrix<Real> weighted_error_matrix(const DiscreteSpectralModel<Real>& model,
                                            const SpectralSubspace<Real>& subspace,
                                            const TrialMap<Real>& v, Real cut, Real center,
                                            Side side) {
  detail::require_model_rows(model, v);
  const std::vector<bool> selected = subspace.mask(model);
  RealVector<Real> weights = RealVector<Real>::Zero(model.dim());
  for (Index k = 0; k < model.dim(); ++k) {
    if (selected[static_cast<std::size_t>(k)]) continue;
    const Real atom = model.atoms()[static_cast<std::size_t>(k)];
    const bool in_region = side == Side::Above ? atom > cut : atom < cut;
    if (in_region) weights[k] = atom - center;
  }
  return HermitianMatrix<Real>::trusted(v.adjoint() * weights.asDiagonal() * v);
}

template <typename Real>
HermitianMatrix<Real> weighted_error_matrix(const DiscreteSpectralModel<Real>& model,
                                            const SpectralSubspace<Real>& subspace,
                                            const TrialMap<Real>& v, Real cut, Side side) {
  return weighted_error_matrix(model, subspace, v, cut, cut, side);
}

// Trial measure of a region: total squared mass (signal and noise alike) the
// trial map places on atoms inside the region.
template <typename Real>
Real trial_measure(const DiscreteSpectralModel<Real>& model, const TrialMap<Real>& v,
                   const BorelSet<Real>& region) {
  detail::require_model_rows(model, v);
  Real total = 0;
  for (Index k = 0; k < model.dim(); ++k)
    if (region.contains(model.atoms()[static_cast<std::size_t>(k)]))
      total += v.row(k).squaredNorm();
  return total;
}

// Everything needed to recover signal/noise structure from an assembled
// problem: the model, the target subspace, the trial map, and the two
// perturbations folded into the assembled matrices.
template <typename Real>
struct GroundTruth {
  DiscreteSpectralModel<Real> model;
  SpectralSubspace<Real> subspace;
  TrialMap<Real> V;
  HermitianMatrix<Real> dA;
  HermitianMatrix<Real> dB;
};

// The generalized eigenvalue problem [A, B] handed to solvers and bounds.
// `truth` is present for assembled/synthetic problems and absent when only
// the matrices are known.
template <typename Real>
struct GEPInstance {
  HermitianMatrix<Real> A;
  HermitianMatrix<Real> B;
  std::optional<GroundTruth<Real>> truth;

  Index trial_dimension() const { return A.dim(); }
};

template <typename Real>
const GroundTruth<Real>& require_truth(const GEPInstance<Real>& instance) {
  if (!instance.truth)
    throw MissingGroundTruth("operation needs the instance's ground truth");
  return *instance.truth;
}

// A = V^* H V + dA and B = V^* V + dB from the stated pieces.
template <typename Real>
GEPInstance<Real> assemble_gep(const DiscreteSpectralModel<Real>& model,
                               const SpectralSubspace<Real>& subspace, const TrialMap<Real>& v,
                               const HermitianMatrix<Real>& da, const HermitianMatrix<Real>& db) {
  detail::require_model_rows(model, v);
  if (da.dim() != v.cols() || db.dim() != v.cols())
    throw DimensionMismatch("assemble_gep: perturbation dimensions must match trial columns");
  subspace.resolve(model);  // validates indices against the model
  Eigen::Map<const RealVector<Real>> atoms(model.atoms().data(), model.dim());
  const HermitianMatrix<Real> a0 =
      HermitianMatrix<Real>::trusted(v.adjoint() * atoms.asDiagonal() * v);
  const HermitianMatrix<Real> b0 = HermitianMatrix<Real>::trusted(v.adjoint() * v);
  GEPInstance<Real> out{a0 + da, b0 + db,
                        GroundTruth<Real>{model, subspace, v, da, db}};
  return out;
}

// Rebuilds A and B from the attached truth and checks they match the stored
// matrices to 1e-12 relative; guards instances deserialized from files.
template <typename Real>
void validate_instance(const GEPInstance<Real>& instance) {
  const GroundTruth<Real>& gt = require_truth(instance);
  const GEPInstance<Real> rebuilt =
      assemble_gep(gt.model, gt.subspace, gt.V, gt.dA, gt.dB);
  const Real scale = std::max({Real(1), instance.A.matrix().cwiseAbs().maxCoeff(),
                               instance.B.matrix().cwiseAbs().maxCoeff()});
  const Real defect =
      std::max((rebuilt.A.matrix() - instance.A.matrix()).cwiseAbs().maxCoeff(),
               (rebuilt.B.matrix() - instance.B.matrix()).cwiseAbs().maxCoeff());
  if (defect > Real(1e-12) * scale)
    throw InvalidSpec("GEPInstance: matrices are inconsistent with the attached ground truth");
}

// Noise weight in the metric: N^* N + dB for the noise part N of the trial map.
template <typename Real>
HermitianMatrix<Real> noise_weight(const GEPInstance<Real>& instance) {
  const GroundTruth<Real>& gt = require_truth(instance);
  const TrialMap<Real> noise = split(gt.model, gt.subspace, gt.V).noise;
  return HermitianMatrix<Real>::trusted(noise.adjoint() * noise) + gt.dB;
}

// Noise weight against the operator: N^* H N + dA.
template <typename Real>
HermitianMatrix<Real> noise_operator_weight(const GEPInstance<Real>& instance) {
  const GroundTruth<Real>& gt = require_truth(instance);
  const TrialMap<Real> noise = split(gt.model, gt.subspace, gt.V).noise;
  Eigen::Map<const RealVector<Real>> atoms(gt.model.atoms().data(), gt.model.dim());
  return HermitianMatrix<Real>::trusted(noise.adjoint() * atoms.asDiagonal() * noise) + gt.dA;
}

}  // namespace subspectra
