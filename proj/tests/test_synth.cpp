#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "subspectra/synth.hpp"

using namespace subspectra;
using Mat = ComplexMatrix<double>;

namespace {

InstanceSpec<double> base_spec(std::uint64_t seed) {
  InstanceSpec<double> spec;
  spec.seed = seed;
  spec.n_atoms = 9;
  spec.layout = SpectrumLayout::Uniform;
  spec.spectrum_lo = -2.0;
  spec.spectrum_hi = 2.5;
  spec.subspace_dim = 3;
  spec.trial_dim = 4;
  spec.noise_scale = 0.1;
  spec.delta_scale = 1e-3;
  return spec;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("instance draws are bit-identical for equal specs") {
  const auto a = gen_instance(base_spec(42));
  const auto b = gen_instance(base_spec(42));
  CHECK(a.model.atoms() == b.model.atoms());
  CHECK(max_abs_diff(a.V, b.V) == 0.0);
  CHECK(max_abs_diff(a.dA.matrix(), b.dA.matrix()) == 0.0);
  CHECK(max_abs_diff(a.dB.matrix(), b.dB.matrix()) == 0.0);

  const auto c = gen_instance(base_spec(43));
  CHECK(a.model.atoms() != c.model.atoms());
}

TEST_CASE("each ingredient draws from its own stream") {
  // Changing the noise scale must not disturb the atoms or the signal rows,
  // and because scales enter linearly, doubling the scale exactly doubles
  // the noise rows.
  auto lo = base_spec(7);
  lo.noise_scale = 0.1;
  auto hi = base_spec(7);
  hi.noise_scale = 0.2;
  const auto a = gen_instance(lo);
  const auto b = gen_instance(hi);
  CHECK(a.model.atoms() == b.model.atoms());
  const std::vector<bool> selected = a.subspace.mask(a.model);
  for (Index r = 0; r < a.V.rows(); ++r) {
    if (selected[static_cast<std::size_t>(r)]) {
      CHECK(max_abs_diff(a.V.row(r), b.V.row(r)) == 0.0);
    } else {
      CHECK(max_abs_diff((2.0 * a.V.row(r)).eval(), b.V.row(r)) == 0.0);
    }
  }

  // The perturbation scale only touches the perturbations.
  auto tweaked = base_spec(7);
  tweaked.noise_scale = 0.1;
  tweaked.delta_scale = 2e-3;
  const auto c = gen_instance(tweaked);
  CHECK(max_abs_diff(a.V, c.V) == 0.0);
  CHECK(max_abs_diff(a.dA.matrix(), c.dA.matrix()) > 0.0);
}

TEST_CASE("zero scales produce exactly zero perturbations and noise rows") {
  auto spec = base_spec(11);
  spec.noise_scale = 0.0;
  spec.delta_scale = 0.0;
  const auto s = gen_instance(spec);
  CHECK(s.dA.matrix().cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.dB.matrix().cwiseAbs().maxCoeff() == 0.0);
  const std::vector<bool> selected = s.subspace.mask(s.model);
  for (Index r = 0; r < s.V.rows(); ++r)
    if (!selected[static_cast<std::size_t>(r)])
      CHECK(s.V.row(r).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("instance specs are validated before any drawing") {
  auto spec = base_spec(1);
  spec.trial_dim = 0;
  CHECK_THROWS_AS(gen_instance(spec), InvalidSpec);
  spec = base_spec(1);
  spec.trial_dim = 2;  // below subspace_dim = 3
  CHECK_THROWS_AS(gen_instance(spec), InvalidSpec);
  spec = base_spec(1);
  spec.noise_scale = -0.1;
  CHECK_THROWS_AS(gen_instance(spec), InvalidSpec);

  BandSpec<double> band;
  band.n_inside = 0;
  CHECK_THROWS_AS(gen_band_instance(band), InvalidSpec);
  band = BandSpec<double>{};
  band.band_lo = 1.0;
  band.band_hi = 1.0;
  CHECK_THROWS_AS(gen_band_instance(band), InvalidSpec);
  band = BandSpec<double>{};
  band.spread = 0.0;
  CHECK_THROWS_AS(gen_band_instance(band), InvalidSpec);
}

TEST_CASE("well-conditioned retuning ends with a positive margin") {
  auto spec = base_spec(21);
  spec.noise_scale = 0.8;  // deliberately too loud at first
  spec.subspace_dim = 2;
  spec.trial_dim = 2;
  const auto s = gen_well_conditioned(spec);
  CHECK(check_well_conditioned(assemble(s)).well_conditioned);

  // The retuning path is itself deterministic.
  const auto again = gen_well_conditioned(spec);
  CHECK(max_abs_diff(s.V, again.V) == 0.0);
}

TEST_CASE("band family separates atoms and shares one noise direction per side") {
  BandSpec<double> spec;
  spec.seed = 5;
  spec.n_inside = 3;
  spec.n_below = 3;
  spec.n_above = 2;
  spec.band_lo = -0.5;
  spec.band_hi = 1.25;
  spec.spread = 2.0;
  spec.noise_scale = 0.2;
  spec.delta_scale = 1e-4;
  const auto s = gen_band_instance(spec);

  REQUIRE(s.model.dim() == 8);
  CHECK(s.V.cols() == 3);  // square in the in-band count
  CHECK(s.subspace.interval_form());
  CHECK(s.subspace.interval_lo() == -0.5);
  CHECK(s.subspace.interval_hi() == 1.25);
  const auto& atoms = s.model.atoms();
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(atoms[k] > -0.5);
    CHECK(atoms[k] < 1.25);
  }
  for (std::size_t k = 3; k < 6; ++k) CHECK(atoms[k] < -0.5);
  for (std::size_t k = 6; k < 8; ++k) CHECK(atoms[k] > 1.25);

  // Each off-band block is a rank-one outer product: one shared direction,
  // per-row complex weights.
  const Mat below = s.V.block(3, 0, 3, 3);
  const Eigen::JacobiSVD<Mat> svd(below);
  REQUIRE(svd.singularValues().size() == 3);
  CHECK(svd.singularValues()[0] > 0.0);
  CHECK(svd.singularValues()[1] <= 1e-12 * svd.singularValues()[0]);
}

TEST_CASE("band retuning ends well-conditioned with in-band estimates") {
  BandSpec<double> spec;
  spec.seed = 3;
  spec.n_inside = 2;
  spec.n_below = 2;
  spec.n_above = 2;
  spec.band_lo = -1.0;
  spec.band_hi = 1.0;
  spec.spread = 1.5;
  spec.noise_scale = 0.6;
  spec.delta_scale = 1e-3;
  const auto s = gen_band_well_behaved(spec);
  const auto gep = assemble(s);
  CHECK(check_well_conditioned(gep).well_conditioned);
  const RealVector<double> values = solve_gep(gep.A, gep.B).values;
  for (Index i = 0; i < values.size(); ++i) {
    CHECK(values[i] >= -1.0);
    CHECK(values[i] <= 1.0);
  }
}

TEST_CASE("the brute-force reference lists selected atoms descending") {
  DiscreteSpectralModel<double> model({3.0, -1.0, 7.0});
  const auto all = brute_force_reference(model, SpectralSubspace<double>::from_indices({0, 1, 2}));
  REQUIRE(all.size() == 3);
  CHECK(all[0] == 7.0);
  CHECK(all[1] == 3.0);
  CHECK(all[2] == -1.0);
  const auto one = brute_force_reference(model, SpectralSubspace<double>::from_indices({2}));
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 7.0);
}

TEST_CASE("nested protocols serve exact leading blocks of one draw") {
  auto spec = base_spec(99);
  const auto p = gen_protocol(spec, 8, true);
  CHECK(p.nested);
  CHECK(p.max_guess == 8);
  const auto small = p.instance(3);
  const auto full = p.instance(8);
  CHECK(small.trial_dimension() == 3);
  CHECK(full.trial_dimension() == 8);
  CHECK(max_abs_diff(small.A.matrix(), full.A.matrix().topLeftCorner(3, 3)) == 0.0);
  CHECK(max_abs_diff(small.B.matrix(), full.B.matrix().topLeftCorner(3, 3)) == 0.0);
  CHECK(max_abs_diff(require_truth(small).V, require_truth(full).V.leftCols(3)) == 0.0);
  CHECK_NOTHROW(validate_instance(small));
  CHECK_NOTHROW(validate_instance(full));
}

TEST_CASE("fresh protocols reuse the model but redraw the trial columns") {
  auto spec = base_spec(99);
  const auto p = gen_protocol(spec, 8, false);
  CHECK_FALSE(p.nested);
  const auto small = p.instance(3);
  const auto full = p.instance(8);
  CHECK(require_truth(small).model.atoms() == require_truth(full).model.atoms());
  CHECK(max_abs_diff(require_truth(small).V, require_truth(full).V.leftCols(3)) > 0.0);
  // The perturbation blocks still nest, so only the trial map breaks nesting.
  CHECK(max_abs_diff(require_truth(small).dA.matrix(),
                     require_truth(full).dA.matrix().topLeftCorner(3, 3)) == 0.0);
}

TEST_CASE("tabulated noise bounds dominate the measured noise at every guess") {
  const auto p = gen_protocol(base_spec(123), 8, true);
  const auto bounds = valid_noise_bounds(p, 8);
  for (Index guess = 1; guess <= 8; ++guess) {
    CAPTURE(guess);
    CHECK(bounds.at(guess) > spectral_norm(noise_weight(p.instance(guess))));
  }
  CHECK_THROWS_AS(valid_noise_bounds(p, 9), IndexOutOfRange);
  CHECK_THROWS_AS(valid_noise_bounds(p, 0), IndexOutOfRange);
}

TEST_CASE("wrapping one instance as a protocol slices its own columns") {
  const auto s = gen_instance(base_spec(55));
  const Mat full_a = assemble(s).A.matrix();
  const auto p = instance_protocol(s);
  CHECK(p.nested);
  CHECK(p.max_guess == 4);
  CHECK(max_abs_diff(p.instance(4).A.matrix(), full_a) == 0.0);
  CHECK(p.instance(2).trial_dimension() == 2);
}

TEST_CASE("filter protocol validates its signal description") {
  FilterDiagSpec<double> spec;
  CHECK_THROWS_AS(filter_diag_protocol(spec), InvalidSpec);  // no frequencies
  spec.frequencies = {0.5, -0.2};
  spec.amplitudes = {1.0};
  CHECK_THROWS_AS(filter_diag_protocol(spec), InvalidSpec);  // count mismatch
  spec.amplitudes = {1.0, 0.5};
  spec.frequencies = {0.5, 0.5};
  CHECK_THROWS_AS(filter_diag_protocol(spec), InvalidSpec);  // duplicate frequency
  spec.frequencies = {0.5, -0.2};
  spec.amplitudes = {1.0, -0.5};
  CHECK_THROWS_AS(filter_diag_protocol(spec), InvalidSpec);  // negative amplitude
  spec.amplitudes = {1.0, 0.5};
  spec.samples = 0;
  CHECK_THROWS_AS(filter_diag_protocol(spec), InvalidSpec);
  spec.samples = 8;
  spec.time_step = 0.0;
  CHECK_THROWS_AS(filter_diag_protocol(spec), InvalidSpec);
  spec.time_step = 0.1;
  spec.noise_floor = -1e-6;
  CHECK_THROWS_AS(filter_diag_protocol(spec), InvalidSpec);
}

TEST_CASE("filter protocol is a nested family over the sampled filters") {
  FilterDiagSpec<double> spec;
  spec.frequencies = {-0.9, 0.15, 1.3};
  spec.amplitudes = {1.0, 0.8, 1.25};
  spec.samples = 6;
  spec.time_step = 0.35;
  spec.noise_floor = 0.0;
  const auto p = filter_diag_protocol(spec);
  CHECK(p.nested);
  CHECK(p.max_guess == 6);

  const auto inst = p.instance(4);
  const auto& gt = require_truth(inst);
  REQUIRE(gt.model.dim() == 3);
  CHECK(gt.model.atoms()[0] == -0.9);
  CHECK(gt.model.atoms()[2] == 1.3);
  // Every atom is a target here, so the only noise the weight can carry is
  // the perturbation, which is zero at a zero noise floor.
  CHECK(gt.subspace.dimension(gt.model) == 3);
  CHECK(spectral_norm(noise_weight(inst)) == 0.0);

  CHECK(max_abs_diff(p.instance(2).B.matrix(), inst.B.matrix().topLeftCorner(2, 2)) == 0.0);

  // Noise-free detection finds the frequency count and then, through the
  // refined square problem, the frequencies themselves.
  const auto det = run_epsilon_protocol(p, 4, 6, NoiseBoundSequence<double>::constant(0.0));
  CHECK(det.detected == 3);
  REQUIRE(det.estimates.has_value());
  REQUIRE(det.estimates->values.size() == 3);
  CHECK(det.estimates->values[0] == doctest::Approx(1.3).epsilon(1e-8));
  CHECK(det.estimates->values[1] == doctest::Approx(0.15).epsilon(1e-8));
  CHECK(det.estimates->values[2] == doctest::Approx(-0.9).epsilon(1e-8));

  // With a noise floor the perturbation block is the entire noise weight.
  FilterDiagSpec<double> noisy = spec;
  noisy.noise_floor = 1e-4;
  noisy.seed = 17;
  const auto pn = filter_diag_protocol(noisy);
  const auto ninst = pn.instance(5);
  CHECK(spectral_norm(noise_weight(ninst)) ==
        doctest::Approx(spectral_norm(require_truth(ninst).dB)).epsilon(1e-14));

  // Rebuilding the protocol reproduces the same matrices bit for bit.
  const auto again = filter_diag_protocol(noisy);
  CHECK(max_abs_diff(again.instance(5).A.matrix(), pn.instance(5).A.matrix()) == 0.0);
}
