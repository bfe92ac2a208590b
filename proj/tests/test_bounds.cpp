#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "subspectra/bounds.hpp"
#include "subspectra/synth.hpp"

using namespace subspectra;
using Mat = ComplexMatrix<double>;

namespace {

bool has_flag(const std::vector<std::string>& flags, const std::string& value) {
  return std::find(flags.begin(), flags.end(), value) != flags.end();
}

// Single-column worked example used as a frozen oracle throughout this file:
// signal atom at 1, noise atom at 10 with mass 0.04, dA = 0, dB = 0.01.
// Assembles to A = 1.4, B = 1.05, estimate 4/3, noise weight 0.05, margin 1.
GEPInstance<double> worked_example() {
  DiscreteSpectralModel<double> model({1.0, 10.0});
  auto subspace = SpectralSubspace<double>::from_indices({0});
  TrialMap<double> v(2, 1);
  v(0, 0) = 1.0;
  v(1, 0) = 0.2;
  Mat db(1, 1);
  db(0, 0) = 0.01;
  return assemble_gep(model, subspace, v, HermitianMatrix<double>(Mat::Zero(1, 1)),
                      HermitianMatrix<double>(db));
}

// Band-form variant with one in-band signal atom at 0 and one noise atom at 5
// carrying weight w.  With zero perturbations the estimate is 5w^2/(1+w^2),
// which escapes the band [-1, 1] once w^2 > 1/4.
GEPInstance<double> one_noise_band(double w) {
  DiscreteSpectralModel<double> model({0.0, 5.0});
  auto subspace = SpectralSubspace<double>::from_interval(-1.0, 1.0);
  TrialMap<double> v(2, 1);
  v(0, 0) = 1.0;
  v(1, 0) = w;
  const HermitianMatrix<double> zero(Mat::Zero(1, 1));
  return assemble_gep(model, subspace, v, zero, zero);
}

// Square two-dimensional problem whose noise mass dwarfs the signal: signal
// rows 0.1 * I over atoms {1, -1}, noise rows of weight 3 and 1 over atoms
// {5, -5}.  B = diag(9.01, 1.01) while the noise weight tops out at 9, so the
// conditioning margin is 1.01 - 9 < 0 yet B itself stays positive definite.
GEPInstance<double> noise_dominated() {
  DiscreteSpectralModel<double> model({1.0, -1.0, 5.0, -5.0});
  auto subspace = SpectralSubspace<double>::from_indices({0, 1});
  TrialMap<double> v = TrialMap<double>::Zero(4, 2);
  v(0, 0) = 0.1;
  v(1, 1) = 0.1;
  v(2, 0) = 3.0;
  v(3, 1) = 1.0;
  const HermitianMatrix<double> zero(Mat::Zero(2, 2));
  return assemble_gep(model, subspace, v, zero, zero);
}

void check_encloses(const EigenvalueBounds<double>& b, const RealVector<double>& truth,
                    double tol) {
  REQUIRE(b.rows.size() == static_cast<std::size_t>(truth.size()));
  for (Index i = 0; i < truth.size(); ++i) {
    const BoundRow<double>& row = b.rows[static_cast<std::size_t>(i)];
    const double err = row.approx - truth[i];
    CHECK(err >= row.lower - tol);
    CHECK(err <= row.upper + tol);
  }
}

}  // namespace

TEST_CASE("conditioning report carries the margin and its two ingredients") {
  const auto report = check_well_conditioned(worked_example());
  CHECK(report.lambda_m_weight == doctest::Approx(1.05).epsilon(1e-14));
  CHECK(report.noise_weight_top == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(report.margin == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.well_conditioned);
  CHECK(report.flags.empty());

  // More target dimensions than trial columns cannot be conditioned at all;
  // the report says so via a flag instead of throwing.
  DiscreteSpectralModel<double> model({1.0, 10.0});
  auto wide = SpectralSubspace<double>::from_indices({0, 1});
  TrialMap<double> v(2, 1);
  v(0, 0) = 1.0;
  v(1, 0) = 0.2;
  const HermitianMatrix<double> zero(Mat::Zero(1, 1));
  const auto inst = assemble_gep(model, wide, v, zero, zero);
  const auto bad = check_well_conditioned(inst);
  CHECK_FALSE(bad.well_conditioned);
  CHECK(has_flag(bad.flags, "SubspaceDimensionExceedsTrial"));
  CHECK(std::isnan(bad.margin));
}

TEST_CASE("master bracket reproduces the worked example") {
  const auto b = bounds_master(worked_example());
  CHECK(b.method == BoundMethod::Master);
  CHECK(b.flags.empty());
  CHECK(b.denominator == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(b.rows.size() == 1);

  // Estimate 1.4/1.05 = 4/3.  Upward moment (10 - 4/3) * 0.04; the shift
  // dA - t dB = -t/100 only feeds the lower end since its max against 0 is 0.
  const double t = 4.0 / 3.0;
  CHECK(b.rows[0].approx == doctest::Approx(t).epsilon(1e-14));
  CHECK(b.rows[0].upper == doctest::Approx((10.0 - t) * 0.04).epsilon(1e-12));
  CHECK(b.rows[0].lower == doctest::Approx(-t * 0.01).epsilon(1e-12));

  // The bracket is a statement about the signed error against the true atom.
  const double err = b.rows[0].approx - 1.0;
  CHECK(err == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(err >= b.rows[0].lower);
  CHECK(err <= b.rows[0].upper);

  CHECK(std::string(method_name(BoundMethod::Master)) == "master");
  CHECK(std::string(method_name(BoundMethod::MatrixForm)) == "matrix_form");
  CHECK(std::string(method_name(BoundMethod::Band)) == "band");
  CHECK(std::string(method_name(BoundMethod::Bounded)) == "bounded");
  CHECK(std::string(method_name(BoundMethod::Alternative)) == "alternative");
}

TEST_CASE("matrix moments collapse to the scalar bracket on one column") {
  const auto master = bounds_master(worked_example());
  const auto matrix = bounds_matrix_form(worked_example());
  REQUIRE(matrix.rows.size() == 1);
  CHECK(matrix.method == BoundMethod::MatrixForm);
  // A 1x1 moment matrix has its trace as the only eigenvalue.
  CHECK(matrix.rows[0].approx == master.rows[0].approx);
  CHECK(matrix.rows[0].lower == doctest::Approx(master.rows[0].lower).epsilon(1e-14));
  CHECK(matrix.rows[0].upper == doctest::Approx(master.rows[0].upper).epsilon(1e-14));
}

TEST_CASE("matrix form tightens the master bracket across a random corpus") {
  const SpectrumLayout layouts[] = {SpectrumLayout::Uniform, SpectrumLayout::Clustered,
                                    SpectrumLayout::HeavyTail};
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    CAPTURE(seed);
    InstanceSpec<double> spec;
    spec.seed = seed;
    spec.n_atoms = 12;
    spec.layout = layouts[seed % 3];
    spec.spectrum_lo = -2.0;
    spec.spectrum_hi = 3.0;
    spec.subspace_dim = 3;
    spec.trial_dim = 3;
    spec.noise_scale = 0.05;
    spec.delta_scale = 1e-4;
    const auto s = gen_well_conditioned(spec);
    const auto inst = assemble(s);
    const auto truth = brute_force_reference(s.model, s.subspace);
    const double tol = 1e-9 * std::max(1.0, s.model.max_abs_atom());

    const auto master = bounds_master(inst);
    const auto matrix = bounds_matrix_form(inst);
    check_encloses(master, truth, tol);
    check_encloses(matrix, truth, tol);
    REQUIRE(matrix.rows.size() == master.rows.size());
    const double slack = 1e-12 * std::max(1.0, s.model.max_abs_atom());
    for (std::size_t i = 0; i < master.rows.size(); ++i) {
      CHECK(matrix.rows[i].lower >= master.rows[i].lower - slack);
      CHECK(matrix.rows[i].upper <= master.rows[i].upper + slack);
    }
  }
}

TEST_CASE("band cut agrees with the master cut while estimates stay inside") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    CAPTURE(seed);
    BandSpec<double> spec;
    spec.seed = seed;
    spec.n_inside = 3;
    spec.n_below = 2;
    spec.n_above = 2;
    spec.band_lo = -0.5;
    spec.band_hi = 0.75;
    spec.spread = 1.5;
    spec.noise_scale = 0.04;
    spec.delta_scale = 2e-4;
    const auto s = gen_band_well_behaved(spec);
    const auto inst = assemble(s);

    const auto band = bounds_band(inst);
    const auto master = bounds_master(inst);
    CHECK(band.flags.empty());
    REQUIRE(band.rows.size() == master.rows.size());
    // No noise atom sits between an in-band estimate and the nearer band
    // edge, so both cuts integrate the same terms in the same order.
    for (std::size_t i = 0; i < band.rows.size(); ++i) {
      CHECK(band.rows[i].approx == master.rows[i].approx);
      CHECK(band.rows[i].lower == master.rows[i].lower);
      CHECK(band.rows[i].upper == master.rows[i].upper);
    }
  }
}

TEST_CASE("estimates escaping the band are flagged, not hidden") {
  // w = 0.8 puts the lone estimate at 3.2/1.64, well above the band end 1.
  const auto inst = one_noise_band(0.8);
  const auto b = bounds_band(inst);
  CHECK(has_flag(b.flags, "AssumptionViolated:estimate_outside_band"));
  REQUIRE(b.rows.size() == 1);
  CHECK(b.rows[0].approx == doctest::Approx(3.2 / 1.64).epsilon(1e-14));

  // A calm weight keeps the estimate inside and the flag away.
  CHECK(bounds_band(one_noise_band(0.3)).flags.empty());
}

TEST_CASE("band-restricted families insist on an interval-form subspace") {
  const auto inst = worked_example();  // index-form subspace
  CHECK_THROWS_AS(bounds_band(inst), InvalidSpec);
  CHECK_THROWS_AS(bounds_bounded(inst, 0.0, 11.0), InvalidSpec);
  CHECK_THROWS_AS(off_band_components(inst), InvalidSpec);
}

TEST_CASE("off-band noise norms match a direct Gram computation") {
  DiscreteSpectralModel<double> model({0.5, 3.0, -2.0, 7.0});
  auto subspace = SpectralSubspace<double>::from_interval(0.0, 1.0);
  TrialMap<double> v(4, 1);
  v(0, 0) = 1.0;
  v(1, 0) = 0.3;
  v(2, 0) = 0.4;
  v(3, 0) = 0.5;
  const HermitianMatrix<double> zero(Mat::Zero(1, 1));
  const auto inst = assemble_gep(model, subspace, v, zero, zero);
  const auto off = off_band_components(inst);
  // Below the band only the atom at -2 contributes, mass 0.16; above it the
  // atoms at 3 and 7 contribute 0.09 + 0.25.
  CHECK(off.norm_below == doctest::Approx(0.16).epsilon(1e-14));
  CHECK(off.norm_above == doctest::Approx(0.34).epsilon(1e-14));
}

TEST_CASE("bounded corollary checks its operator range against the model") {
  const auto inst = one_noise_band(0.3);
  CHECK_THROWS_AS(bounds_bounded(inst, 2.0, 1.0), InvalidSpec);
  // The noise atom at 5 falls outside a claimed range ending at 4.
  CHECK_THROWS_AS(bounds_bounded(inst, -1.0, 4.0), BoundViolatedByModel);
  CHECK_NOTHROW(bounds_bounded(inst, -1.0, 5.0));
}

TEST_CASE("bounded corollary contains the band bracket on shared-direction noise") {
  for (std::uint64_t seed = 11; seed <= 14; ++seed) {
    CAPTURE(seed);
    BandSpec<double> spec;
    spec.seed = seed;
    spec.n_inside = 2;
    spec.n_below = 2;
    spec.n_above = 3;
    spec.band_lo = -1.0;
    spec.band_hi = 1.0;
    spec.spread = 2.0;
    spec.noise_scale = 0.05;
    spec.delta_scale = 1e-4;
    const auto s = gen_band_well_behaved(spec);
    const auto inst = assemble(s);
    const auto atoms = s.model.atoms();
    const double e_min = *std::min_element(atoms.begin(), atoms.end()) - 0.25;
    const double e_max = *std::max_element(atoms.begin(), atoms.end()) + 0.25;

    const auto band = bounds_band(inst);
    const auto bounded = bounds_bounded(inst, e_min, e_max);
    const auto truth = brute_force_reference(s.model, s.subspace);
    const double tol = 1e-9 * std::max(1.0, s.model.max_abs_atom());
    check_encloses(bounded, truth, tol);

    // The generator gives each off-band side a single shared noise direction,
    // which is the regime where the norm-based bracket provably contains the
    // per-atom one.
    REQUIRE(bounded.rows.size() == band.rows.size());
    const double slack = 1e-12 * std::max(1.0, s.model.max_abs_atom());
    for (std::size_t i = 0; i < band.rows.size(); ++i) {
      CHECK(bounded.rows[i].lower <= band.rows[i].lower + slack);
      CHECK(bounded.rows[i].upper >= band.rows[i].upper - slack);
    }
  }
}

TEST_CASE("non-square instances are rejected before any bound is computed") {
  // More trial columns than target dimensions: the caller must refine first.
  DiscreteSpectralModel<double> model({1.0, 10.0});
  auto subspace = SpectralSubspace<double>::from_indices({0});
  TrialMap<double> v(2, 2);
  v << 1.0, 0.1, 0.2, 0.9;
  const HermitianMatrix<double> zero(Mat::Zero(2, 2));
  const auto wide_trial = assemble_gep(model, subspace, v, zero, zero);
  CHECK_THROWS_AS(bounds_master(wide_trial), DimensionMismatch);
  CHECK_THROWS_AS(bounds_matrix_form(wide_trial), DimensionMismatch);
  RealVector<double> truth(1);
  truth << 1.0;
  CHECK_THROWS_AS(bounds_alternative(wide_trial, truth), DimensionMismatch);
  // The conditioning report itself is still well defined in this direction.
  CHECK_NOTHROW(check_well_conditioned(wide_trial));

  // More target dimensions than trial columns.
  auto wide_target = SpectralSubspace<double>::from_indices({0, 1});
  TrialMap<double> narrow(2, 1);
  narrow(0, 0) = 1.0;
  narrow(1, 0) = 0.2;
  const HermitianMatrix<double> zero1(Mat::Zero(1, 1));
  const auto starved = assemble_gep(model, wide_target, narrow, zero1, zero1);
  CHECK_THROWS_AS(bounds_master(starved), SubspaceDimensionExceedsTrial);

  // No ground truth, no bounds.
  const auto some = worked_example();
  const GEPInstance<double> bare{some.A, some.B, std::nullopt};
  CHECK_THROWS_AS(bounds_master(bare), MissingGroundTruth);
}

TEST_CASE("noise domination disables margin families but not the anchored one") {
  const auto inst = noise_dominated();
  const auto report = check_well_conditioned(inst);
  CHECK(report.margin == doctest::Approx(1.01 - 9.0).epsilon(1e-12));
  CHECK_FALSE(report.well_conditioned);
  CHECK_THROWS_AS(bounds_master(inst), IllConditioned);
  CHECK_THROWS_AS(bounds_matrix_form(inst), IllConditioned);

  RealVector<double> truth(2);
  truth << 1.0, -1.0;
  const auto alt = bounds_alternative(inst, truth);
  CHECK(alt.method == BoundMethod::Alternative);
  // Denominator is lambda_2(B) alone, not the (negative) margin.
  CHECK(alt.denominator == doctest::Approx(1.01).epsilon(1e-12));
  REQUIRE(alt.rows.size() == 2);
  CHECK(alt.rows[0].approx == doctest::Approx(45.01 / 9.01).epsilon(1e-13));
  CHECK(alt.rows[1].approx == doctest::Approx(-5.01 / 1.01).epsilon(1e-13));
  check_encloses(alt, truth, 1e-12 * 10.0);

  RealVector<double> short_truth(1);
  short_truth << 1.0;
  CHECK_THROWS_AS(bounds_alternative(inst, short_truth), DimensionMismatch);
}

TEST_CASE("anchored family still demands an invertible weight") {
  // Cancel B completely: V*V = 1.04 against dB = -1.04.
  DiscreteSpectralModel<double> model({1.0, 10.0});
  auto subspace = SpectralSubspace<double>::from_indices({0});
  TrialMap<double> v(2, 1);
  v(0, 0) = 1.0;
  v(1, 0) = 0.2;
  Mat db(1, 1);
  db(0, 0) = -1.04;
  const auto inst = assemble_gep(model, subspace, v, HermitianMatrix<double>(Mat::Zero(1, 1)),
                                 HermitianMatrix<double>(db));
  RealVector<double> truth(1);
  truth << 1.0;
  CHECK_THROWS_AS(bounds_alternative(inst, truth), SingularWeight);
}

TEST_CASE("anchored bracket pivots on the supplied values, not the estimates") {
  const auto inst = worked_example();
  RealVector<double> truth(1);
  truth << 1.0;
  const auto alt = bounds_alternative(inst, truth);
  REQUIRE(alt.rows.size() == 1);
  CHECK(alt.denominator == doctest::Approx(1.05).epsilon(1e-14));
  // Moment above the true atom 1 is (10 - 1) * 0.04 = 0.36; the shift
  // dA - 1 * dB = -0.01 feeds only the lower end.
  CHECK(alt.rows[0].upper == doctest::Approx(0.36 / 1.05).epsilon(1e-12));
  CHECK(alt.rows[0].lower == doctest::Approx(-0.01 / 1.05).epsilon(1e-12));
  const double err = alt.rows[0].approx - 1.0;
  CHECK(err >= alt.rows[0].lower);
  CHECK(err <= alt.rows[0].upper);
}

TEST_CASE("zero perturbations collapse every bracket onto the truth") {
  BandSpec<double> spec;
  spec.seed = 77;
  spec.n_inside = 3;
  spec.n_below = 1;
  spec.n_above = 2;
  spec.band_lo = -0.25;
  spec.band_hi = 1.0;
  spec.spread = 1.0;
  spec.noise_scale = 0.0;
  spec.delta_scale = 0.0;
  const auto s = gen_band_instance(spec);
  const auto inst = assemble(s);
  const auto truth = brute_force_reference(s.model, s.subspace);
  const double tol = 1e-12 * std::max(1.0, s.model.max_abs_atom());

  const auto master = bounds_master(inst);
  REQUIRE(master.rows.size() == static_cast<std::size_t>(truth.size()));
  for (Index i = 0; i < truth.size(); ++i) {
    const BoundRow<double>& row = master.rows[static_cast<std::size_t>(i)];
    CHECK(std::abs(row.approx - truth[i]) <= tol);
    CHECK(std::abs(row.lower) <= tol);
    CHECK(std::abs(row.upper) <= tol);
  }
}
