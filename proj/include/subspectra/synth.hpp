#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subspectra/bounds.hpp"
#include "subspectra/model.hpp"
#include "subspectra/protocol.hpp"
#include "subspectra/rng.hpp"
#include "subspectra/types.hpp"

namespace subspectra {

enum class SpectrumLayout { Uniform, Clustered, HeavyTail };

// Everything a deterministic instance draw depends on.  Two specs with equal
// fields produce bit-identical instances; distinct stream tags per ingredient
// keep e.g. a change of noise_scale from disturbing the atom draw.
template <typename Real>
struct InstanceSpec {
  std::uint64_t seed = 0;
  Index n_atoms = 8;
  SpectrumLayout layout = SpectrumLayout::Uniform;
  Real spectrum_lo = Real(-1);
  Real spectrum_hi = Real(1);
  Index subspace_dim = 1;  // m*: number of randomly selected target atoms
  std::optional<std::pair<Real, Real>> band;  // interval target instead of a count
  Index trial_dim = 1;     // M
  Real noise_scale = Real(0);
  Real delta_scale = Real(0);
};

template <typename Real>
struct SynthInstance {
  DiscreteSpectralModel<Real> model;
  SpectralSubspace<Real> subspace;
  TrialMap<Real> V;
  HermitianMatrix<Real> dA;
  HermitianMatrix<Real> dB;
};

template <typename Real>
GEPInstance<Real> assemble(const SynthInstance<Real>& s) {
  return assemble_gep(s.model, s.subspace, s.V, s.dA, s.dB);
}

// True eigenvalues of the model restricted to the selected subspace, sorted
// descending: the oracle every enclosure check compares against.
template <typename Real>
RealVector<Real> brute_force_reference(const DiscreteSpectralModel<Real>& model,
                                       const SpectralSubspace<Real>& subspace) {
  const std::vector<Index> picked = subspace.resolve(model);
  RealVector<Real> out(static_cast<Index>(picked.size()));
  for (std::size_t k = 0; k < picked.size(); ++k)
    out[static_cast<Index>(k)] = model.atoms()[static_cast<std::size_t>(picked[k])];
  std::sort(out.begin(), out.end(), std::greater<Real>());
  return out;
}

namespace detail {

inline constexpr double kMaxAtomMagnitude = 1e6;

template <typename Real>
std::vector<Real> draw_atoms(const InstanceSpec<Real>& spec) {
  if (spec.n_atoms < 1) throw InvalidSpec("gen_instance: n_atoms must be >= 1");
  if (!(spec.spectrum_lo <= spec.spectrum_hi))
    throw InvalidSpec("gen_instance: spectrum_lo must not exceed spectrum_hi");
  if (std::abs(spec.spectrum_lo) > Real(kMaxAtomMagnitude) ||
      std::abs(spec.spectrum_hi) > Real(kMaxAtomMagnitude))
    throw InvalidSpec("gen_instance: spectrum must stay within |atom| <= 1e6");
  Rng rng(spec.seed, "atoms");
  const double lo = static_cast<double>(spec.spectrum_lo);
  const double hi = static_cast<double>(spec.spectrum_hi);
  std::vector<Real> atoms(static_cast<std::size_t>(spec.n_atoms));
  switch (spec.layout) {
    case SpectrumLayout::Uniform: {
      for (Real& a : atoms) a = static_cast<Real>(rng.uniform(lo, hi));
      break;
    }
    case SpectrumLayout::Clustered: {
      // A few cluster centers, atoms tightly scattered around them.
      const Index k = std::max<Index>(1, spec.n_atoms / 8);
      std::vector<double> centers(static_cast<std::size_t>(k));
      for (double& c : centers) c = rng.uniform(lo, hi);
      const double width = 2e-3 * (hi - lo);
      for (Real& a : atoms) {
        const double c = centers[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))];
        a = static_cast<Real>(std::clamp(c + width * rng.normal(), lo, hi));
      }
      break;
    }
    case SpectrumLayout::HeavyTail: {
      // Magnitudes spread over six decades below the larger range edge.
      const double cap = std::max(std::abs(lo), std::abs(hi));
      if (!(cap > 0)) throw InvalidSpec("gen_instance: heavy_tail needs a nonzero range");
      const double top = std::log10(cap);
      for (Real& a : atoms) {
        double value = std::pow(10.0, rng.uniform(top - 6.0, top));
        if (lo < 0 && rng.bits() & 1u) value = -value;
        a = static_cast<Real>(std::clamp(value, lo, hi));
      }
      break;
    }
  }
  return atoms;
}

template <typename Real>
SpectralSubspace<Real> draw_subspace(const InstanceSpec<Real>& spec,
                                     const DiscreteSpectralModel<Real>& model) {
  if (spec.band) {
    SpectralSubspace<Real> s =
        SpectralSubspace<Real>::from_interval(spec.band->first, spec.band->second);
    if (s.dimension(model) < 1)
      throw InvalidSpec("gen_instance: band target contains no atom");
    return s;
  }
  if (spec.subspace_dim < 1 || spec.subspace_dim > spec.n_atoms)
    throw InvalidSpec("gen_instance: subspace_dim must lie in 1..n_atoms");
  Rng rng(spec.seed, "subspace");
  std::vector<Index> all(static_cast<std::size_t>(spec.n_atoms));
  for (Index k = 0; k < spec.n_atoms; ++k) all[static_cast<std::size_t>(k)] = k;
  for (Index k = 0; k < spec.subspace_dim; ++k) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(k, static_cast<std::int64_t>(spec.n_atoms) - 1));
    std::swap(all[static_cast<std::size_t>(k)], all[j]);
  }
  all.resize(static_cast<std::size_t>(spec.subspace_dim));
  return SpectralSubspace<Real>::from_indices(std::move(all));
}

// Signal rows are redrawn (fresh engine draws, deterministic) until the
// signal Gram is decently conditioned; wildly collinear trial vectors are
// legal inputs but worthless corpus members, and a floor on the Gram keeps
// solver roundoff far below the suite tolerances.
template <typename Real>
void draw_signal_rows(Rng& rng, const std::vector<bool>& selected, TrialMap<Real>& v) {
  const Index cols = v.cols();
  Index m = 0;
  for (const bool s : selected) m += s ? 1 : 0;
  if (m == 0) return;
  ComplexMatrix<Real> rows(m, cols);
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (Index r = 0; r < m; ++r)
      for (Index c = 0; c < cols; ++c)
        rows(r, c) = static_cast<Complex<Real>>(rng.complex_normal());
    if (m > cols) break;  // Gram is singular by shape; nothing to condition
    const HermitianMatrix<Real> gram = HermitianMatrix<Real>::trusted(rows * rows.adjoint());
    const RealVector<Real> ev = eigh(gram).values;
    if (ev[m - 1] >= Real(0.02) * ev[0]) break;
  }
  Index r = 0;
  for (Index k = 0; k < v.rows(); ++k)
    if (selected[static_cast<std::size_t>(k)]) v.row(k) = rows.row(r++);
}

template <typename Real>
TrialMap<Real> draw_trial(const InstanceSpec<Real>& spec, const DiscreteSpectralModel<Real>& model,
                          const SpectralSubspace<Real>& subspace, Index cols,
                          const std::string& stream_salt) {
  const std::vector<bool> selected = subspace.mask(model);
  TrialMap<Real> v = TrialMap<Real>::Zero(model.dim(), cols);
  Rng signal_rng(spec.seed, "signal" + stream_salt);
  draw_signal_rows(signal_rng, selected, v);
  Rng noise_rng(spec.seed, "noise" + stream_salt);
  for (Index k = 0; k < model.dim(); ++k) {
    if (selected[static_cast<std::size_t>(k)]) continue;
    for (Index c = 0; c < cols; ++c)
      v(k, c) = spec.noise_scale * static_cast<Complex<Real>>(noise_rng.complex_normal());
  }
  return v;
}

template <typename Real>
ComplexMatrix<Real> random_unitary(Rng& rng, Index dim) {
  ComplexMatrix<Real> g(dim, dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) g(r, c) = static_cast<Complex<Real>>(rng.complex_normal());
  return Eigen::HouseholderQR<ComplexMatrix<Real>>(g).householderQ() *
         ComplexMatrix<Real>::Identity(dim, dim);
}

// Q diag(d) Q^* with d uniform in [-scale, scale]: indefinite by design, so
// perturbations exercise both signs of the shifted terms in the bounds.
template <typename Real>
HermitianMatrix<Real> random_hermitian(Rng& rng, Index dim, Real scale) {
  const ComplexMatrix<Real> q = random_unitary<Real>(rng, dim);
  RealVector<Real> d(dim);
  for (Index k = 0; k < dim; ++k) d[k] = scale * static_cast<Real>(rng.uniform(-1.0, 1.0));
  return HermitianMatrix<Real>::trusted(q * d.asDiagonal() * q.adjoint());
}

}  // namespace detail

template <typename Real>
SynthInstance<Real> gen_instance(const InstanceSpec<Real>& spec) {
  if (spec.trial_dim < 1) throw InvalidSpec("gen_instance: trial_dim must be >= 1");
  if (!(spec.noise_scale >= Real(0)) || !(spec.delta_scale >= Real(0)))
    throw InvalidSpec("gen_instance: scales must be >= 0");
  DiscreteSpectralModel<Real> model(detail::draw_atoms(spec));
  SpectralSubspace<Real> subspace = detail::draw_subspace(spec, model);
  if (subspace.dimension(model) > spec.trial_dim)
    throw InvalidSpec("gen_instance: trial_dim must be >= the subspace dimension");
  TrialMap<Real> v = detail::draw_trial(spec, model, subspace, spec.trial_dim, "");
  Rng da_rng(spec.seed, "deltaA");
  Rng db_rng(spec.seed, "deltaB");
  return {std::move(model), std::move(subspace), std::move(v),
          detail::random_hermitian<Real>(da_rng, spec.trial_dim, spec.delta_scale),
          detail::random_hermitian<Real>(db_rng, spec.trial_dim, spec.delta_scale)};
}

// Halves the noise and perturbation scales until the assembled instance is
// well-conditioned.  Scales enter all draws linearly, so each halving reuses
// the same underlying variates and the retuning replays exactly per seed.
template <typename Real>
SynthInstance<Real> gen_well_conditioned(InstanceSpec<Real> spec, int max_halvings = 60) {
  for (int k = 0;; ++k) {
    SynthInstance<Real> inst = gen_instance(spec);
    if (check_well_conditioned(assemble(inst)).well_conditioned || k >= max_halvings)
      return inst;
    spec.noise_scale /= Real(2);
    spec.delta_scale /= Real(2);
  }
}

// Band-structured family: the target is everything inside [band_lo, band_hi],
// off-band atoms provide the noise.  All noise rows on one side of the band
// share a single direction in trial space, so each off-band mass matrix has
// rank one and its norm equals its trace; that is the regime in which the
// bounded-operator bracket provably contains the band bracket.  The trial
// dimension equals the in-band count, keeping the instance square for the
// bound families.
template <typename Real>
struct BandSpec {
  std::uint64_t seed = 0;
  Index n_inside = 2;
  Index n_below = 1;
  Index n_above = 1;
  Real band_lo = Real(-1);
  Real band_hi = Real(1);
  Real spread = Real(1);  // distance scale of off-band atoms from the band edges
  Real noise_scale = Real(0);
  Real delta_scale = Real(0);
};

template <typename Real>
SynthInstance<Real> gen_band_instance(const BandSpec<Real>& spec) {
  if (spec.n_inside < 1) throw InvalidSpec("gen_band_instance: n_inside must be >= 1");
  if (spec.n_below < 0 || spec.n_above < 0)
    throw InvalidSpec("gen_band_instance: off-band counts must be >= 0");
  if (!(spec.band_lo < spec.band_hi))
    throw InvalidSpec("gen_band_instance: band_lo must be < band_hi");
  if (!(spec.spread > Real(0))) throw InvalidSpec("gen_band_instance: spread must be > 0");
  if (!(spec.noise_scale >= Real(0)) || !(spec.delta_scale >= Real(0)))
    throw InvalidSpec("gen_band_instance: scales must be >= 0");
  const Index m = spec.n_inside;
  const Index n = spec.n_inside + spec.n_below + spec.n_above;
  Rng atom_rng(spec.seed, "atoms");
  const double lo = static_cast<double>(spec.band_lo);
  const double hi = static_cast<double>(spec.band_hi);
  const double pad = 0.05 * (hi - lo);  // keep perturbed estimates inside the band
  std::vector<Real> atoms;
  atoms.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < spec.n_inside; ++k)
    atoms.push_back(static_cast<Real>(atom_rng.uniform(lo + pad, hi - pad)));
  for (Index k = 0; k < spec.n_below; ++k)
    atoms.push_back(static_cast<Real>(
        lo - static_cast<double>(spec.spread) * (0.2 + atom_rng.uniform())));
  for (Index k = 0; k < spec.n_above; ++k)
    atoms.push_back(static_cast<Real>(
        hi + static_cast<double>(spec.spread) * (0.2 + atom_rng.uniform())));
  DiscreteSpectralModel<Real> model(std::move(atoms));
  SpectralSubspace<Real> subspace =
      SpectralSubspace<Real>::from_interval(spec.band_lo, spec.band_hi);

  TrialMap<Real> v = TrialMap<Real>::Zero(n, m);
  Rng signal_rng(spec.seed, "signal");
  detail::draw_signal_rows(signal_rng, subspace.mask(model), v);
  Rng noise_rng(spec.seed, "noise");
  const auto shared_direction_rows = [&](Index first, Index count) {
    if (count == 0) return;
    ComplexVector<Real> direction(m);
    for (Index c = 0; c < m; ++c)
      direction[c] = static_cast<Complex<Real>>(noise_rng.complex_normal());
    direction.normalize();
    for (Index k = 0; k < count; ++k) {
      const Complex<Real> weight =
          spec.noise_scale * static_cast<Complex<Real>>(noise_rng.complex_normal());
      v.row(first + k) = weight * direction.transpose();
    }
  };
  shared_direction_rows(spec.n_inside, spec.n_below);
  shared_direction_rows(spec.n_inside + spec.n_below, spec.n_above);

  Rng da_rng(spec.seed, "deltaA");
  Rng db_rng(spec.seed, "deltaB");
  return {std::move(model), std::move(subspace), std::move(v),
          detail::random_hermitian<Real>(da_rng, m, spec.delta_scale),
          detail::random_hermitian<Real>(db_rng, m, spec.delta_scale)};
}

// Halves the band family's noise scales until the instance is well-conditioned
// and every generalized eigenvalue estimate lies inside the band, i.e. until
// the band bracket's assumptions hold without flags.
template <typename Real>
SynthInstance<Real> gen_band_well_behaved(BandSpec<Real> spec, int max_halvings = 60) {
  for (int k = 0;; ++k) {
    SynthInstance<Real> inst = gen_band_instance(spec);
    const GEPInstance<Real> gep = assemble(inst);
    if (check_well_conditioned(gep).well_conditioned) {
      const RealVector<Real> values = solve_gep(gep.A, gep.B).values;
      const bool inside = (values.array() >= spec.band_lo).all() &&
                          (values.array() <= spec.band_hi).all();
      if (inside || k >= max_halvings) return inst;
    } else if (k >= max_halvings) {
      return inst;
    }
    spec.noise_scale /= Real(2);
    spec.delta_scale /= Real(2);
  }
}

namespace detail {

// Shares one precomputed top-level problem across all guess dimensions and
// serves leading principal blocks, so nesting is exact by construction: the
// same stored columns back every M, nothing is recomputed per guess.
template <typename Real>
struct NestedPayload {
  DiscreteSpectralModel<Real> model;
  SpectralSubspace<Real> subspace;
  TrialMap<Real> v_full;
  ComplexMatrix<Real> a_full;
  ComplexMatrix<Real> b_full;
  ComplexMatrix<Real> da_full;
  ComplexMatrix<Real> db_full;
};

template <typename Real>
std::shared_ptr<const NestedPayload<Real>> make_nested_payload(SynthInstance<Real> inst) {
  const GEPInstance<Real> assembled = assemble(inst);
  auto payload = std::make_shared<NestedPayload<Real>>(
      NestedPayload<Real>{std::move(inst.model), std::move(inst.subspace), std::move(inst.V),
                          assembled.A.matrix(), assembled.B.matrix(), inst.dA.matrix(),
                          inst.dB.matrix()});
  return payload;
}

template <typename Real>
GEPInstance<Real> sliced_instance(const std::shared_ptr<const NestedPayload<Real>>& payload,
                                  Index guess) {
  GroundTruth<Real> truth{
      payload->model, payload->subspace, payload->v_full.leftCols(guess).eval(),
      HermitianMatrix<Real>::trusted(payload->da_full.topLeftCorner(guess, guess)),
      HermitianMatrix<Real>::trusted(payload->db_full.topLeftCorner(guess, guess))};
  return {HermitianMatrix<Real>::trusted(payload->a_full.topLeftCorner(guess, guess)),
          HermitianMatrix<Real>::trusted(payload->b_full.topLeftCorner(guess, guess)),
          std::move(truth)};
}

}  // namespace detail

// Wraps one concrete instance as a nested protocol: the problem at guess M
// is the leading M-column compression, sliced from precomputed full
// matrices so nesting is exact.
template <typename Real>
SubspaceProtocol<Real> instance_protocol(SynthInstance<Real> inst) {
  SubspaceProtocol<Real> out;
  out.max_guess = inst.V.cols();
  out.nested = true;
  auto payload = detail::make_nested_payload(std::move(inst));
  out.instance = [payload](Index guess) { return detail::sliced_instance(payload, guess); };
  return out;
}

// Protocol over one fixed instance spec.  Nested mode slices leading blocks
// of a single draw at max_guess; fresh mode redraws the trial columns per
// guess dimension (same model, subspace and perturbation blocks), which
// deliberately breaks nesting for tests of the nesting contract.
template <typename Real>
SubspaceProtocol<Real> gen_protocol(InstanceSpec<Real> spec, Index max_guess,
                                    bool nested = true) {
  if (max_guess < 1) throw InvalidSpec("gen_protocol: max_guess must be >= 1");
  spec.trial_dim = max_guess;
  SubspaceProtocol<Real> out;
  out.max_guess = max_guess;
  out.nested = nested;
  if (nested) {
    auto payload = detail::make_nested_payload(gen_instance(spec));
    out.instance = [payload](Index guess) { return detail::sliced_instance(payload, guess); };
    return out;
  }
  auto payload = detail::make_nested_payload(gen_instance(spec));
  out.instance = [payload, spec](Index guess) {
    InstanceSpec<Real> fresh = spec;
    fresh.trial_dim = guess;
    const TrialMap<Real> v = detail::draw_trial(fresh, payload->model, payload->subspace, guess,
                                                "#" + std::to_string(guess));
    return assemble_gep(
        payload->model, payload->subspace, v,
        HermitianMatrix<Real>::trusted(payload->da_full.topLeftCorner(guess, guess)),
        HermitianMatrix<Real>::trusted(payload->db_full.topLeftCorner(guess, guess)));
  };
  return out;
}

// Tabulates a dominating noise bound from ground truth: the measured noise
// weight norm plus a small relative and absolute cushion.  The cushion keeps
// the bound dominating through eigensolver roundoff in later strict
// threshold comparisons while staying a valid (conservative) bound.
template <typename Real>
NoiseBoundSequence<Real> valid_noise_bounds(const SubspaceProtocol<Real>& protocol,
                                            Index max_guess) {
  if (max_guess < 1 || max_guess > protocol.max_guess)
    throw IndexOutOfRange("valid_noise_bounds: max_guess outside protocol range");
  std::vector<Real> eps(static_cast<std::size_t>(max_guess));
  for (Index guess = 1; guess <= max_guess; ++guess) {
    const GEPInstance<Real> inst = protocol.instance(guess);
    const Real noise_norm = spectral_norm(noise_weight(inst));
    const Real weight_norm = spectral_norm(inst.B);
    eps[static_cast<std::size_t>(guess - 1)] =
        noise_norm * (Real(1) + Real(1e-9)) + Real(1e-12) * weight_norm;
  }
  return NoiseBoundSequence<Real>::table(std::move(eps));
}

// Harmonic-retrieval style demonstration: the model's atoms are the
// frequencies of a sampled sum of complex exponentials, and the trial
// vectors are plain exponential-window filters of the sampled signal at a
// fixed sequence of filter centers.  Filter centers enumerate a golden-ratio
// sequence over the padded frequency band, so growing the guess dimension
// only appends filters and the protocol is nested.  noise_floor sets the
// norm of random perturbations folded into A and B.
template <typename Real>
struct FilterDiagSpec {
  std::vector<Real> frequencies;
  std::vector<Real> amplitudes;
  Index samples = 64;
  Real time_step = Real(0.1);
  Real noise_floor = Real(0);
  std::uint64_t seed = 0;
};

template <typename Real>
SubspaceProtocol<Real> filter_diag_protocol(const FilterDiagSpec<Real>& spec) {
  const Index n = static_cast<Index>(spec.frequencies.size());
  if (n < 1) throw InvalidSpec("filter_diag_protocol: need at least one frequency");
  if (spec.amplitudes.size() != spec.frequencies.size())
    throw InvalidSpec("filter_diag_protocol: one amplitude per frequency");
  for (std::size_t i = 0; i < spec.frequencies.size(); ++i)
    for (std::size_t j = i + 1; j < spec.frequencies.size(); ++j)
      if (spec.frequencies[i] == spec.frequencies[j])
        throw InvalidSpec("filter_diag_protocol: frequencies must be distinct");
  for (const Real a : spec.amplitudes)
    if (!(a >= Real(0))) throw InvalidSpec("filter_diag_protocol: amplitudes must be >= 0");
  if (spec.samples < 1) throw InvalidSpec("filter_diag_protocol: samples must be >= 1");
  if (!(spec.time_step > Real(0)))
    throw InvalidSpec("filter_diag_protocol: time_step must be > 0");
  if (!(spec.noise_floor >= Real(0)))
    throw InvalidSpec("filter_diag_protocol: noise_floor must be >= 0");

  const Index max_guess = spec.samples;
  const double dt = static_cast<double>(spec.time_step);
  const double j_count = static_cast<double>(spec.samples);
  double omega_lo = static_cast<double>(spec.frequencies[0]);
  double omega_hi = omega_lo;
  double omega_abs = std::abs(omega_lo);
  for (const Real w : spec.frequencies) {
    omega_lo = std::min(omega_lo, static_cast<double>(w));
    omega_hi = std::max(omega_hi, static_cast<double>(w));
    omega_abs = std::max(omega_abs, std::abs(static_cast<double>(w)));
  }
  const double pad = 0.25 * std::max(omega_hi - omega_lo, 6.283185307179586 / (j_count * dt));
  const double center_lo = omega_lo - pad;
  const double center_hi = omega_hi + pad;

  TrialMap<Real> v(n, max_guess);
  for (Index c = 0; c < max_guess; ++c) {
    // Golden-ratio enumeration: successive centers fill the band evenly and
    // earlier centers never move when more filters are appended.
    double frac = 0.5 + 0.6180339887498949 * static_cast<double>(c + 1);
    frac -= std::floor(frac);
    const double center = center_lo + frac * (center_hi - center_lo);
    for (Index k = 0; k < n; ++k) {
      const double detune = center - static_cast<double>(spec.frequencies[k]);
      std::complex<double> sum(0, 0);
      for (Index j = 0; j < spec.samples; ++j) {
        const double phase = detune * dt * static_cast<double>(j);
        sum += std::complex<double>(std::cos(phase), std::sin(phase));
      }
      v(k, c) = static_cast<Complex<Real>>(
          (static_cast<double>(spec.amplitudes[static_cast<std::size_t>(k)]) / j_count) * sum);
    }
  }

  std::vector<Real> atoms(spec.frequencies.begin(), spec.frequencies.end());
  DiscreteSpectralModel<Real> model(std::move(atoms));
  std::vector<Index> everything(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) everything[static_cast<std::size_t>(k)] = k;
  SpectralSubspace<Real> subspace = SpectralSubspace<Real>::from_indices(std::move(everything));

  Rng da_rng(spec.seed, "deltaA");
  Rng db_rng(spec.seed, "deltaB");
  SynthInstance<Real> inst{
      std::move(model), std::move(subspace), std::move(v),
      detail::random_hermitian<Real>(da_rng, max_guess,
                                     spec.noise_floor * (Real(1) + static_cast<Real>(omega_abs))),
      detail::random_hermitian<Real>(db_rng, max_guess, spec.noise_floor)};
  return instance_protocol(std::move(inst));
}

}  // namespace subspectra
