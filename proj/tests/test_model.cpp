#include <cmath>
#include <limits>

#include "doctest.h"
#include "subspectra/borel.hpp"
#include "subspectra/model.hpp"

using namespace subspectra;
using Cplx = Complex<double>;
using Mat = ComplexMatrix<double>;
using Set = BorelSet<double>;

namespace {

// One signal atom at 1 and one noise atom at 10, v = (1, 0.2).
struct TwoAtomFixture {
  DiscreteSpectralModel<double> model{{1.0, 10.0}};
  SpectralSubspace<double> subspace = SpectralSubspace<double>::from_indices({0});
  TrialMap<double> v = [] {
    TrialMap<double> m(2, 1);
    m(0, 0) = 1.0;
    m(1, 0) = 0.2;
    return m;
  }();
};

// Noise atoms at 5 and -4 with masses 0.09 and 0.16.
struct ThreeAtomFixture {
  DiscreteSpectralModel<double> model{{0.0, 5.0, -4.0}};
  SpectralSubspace<double> subspace = SpectralSubspace<double>::from_indices({0});
  TrialMap<double> v = [] {
    TrialMap<double> m(3, 1);
    m(0, 0) = 1.0;
    m(1, 0) = 0.3;
    m(2, 0) = 0.4;
    return m;
  }();
};

}  // namespace

TEST_CASE("model construction validates the atom list") {
  CHECK_THROWS_AS(DiscreteSpectralModel<double>({}), InvalidSpec);
  CHECK_THROWS_AS(DiscreteSpectralModel<double>({2e6}), InvalidSpec);
  CHECK_THROWS_AS(DiscreteSpectralModel<double>({std::nan("")}), InvalidSpec);
  DiscreteSpectralModel<double> m({3.0, -7.0, 3.0});
  CHECK(m.dim() == 3);
  CHECK(m.max_abs_atom() == 7.0);
}

TEST_CASE("region membership honors endpoint openness") {
  const Set closed = Set::interval(1.0, 2.0);
  CHECK(closed.contains(1.0));
  CHECK(closed.contains(2.0));
  CHECK(closed.contains(1.5));
  CHECK_FALSE(closed.contains(0.999999));
  const Set half = Set::interval(1.0, 2.0, false, true);
  CHECK_FALSE(half.contains(1.0));
  CHECK(half.contains(2.0));
  CHECK(Set::point(3.0).contains(3.0));
  CHECK_FALSE(Set::point(3.0).contains(3.0000001));
  CHECK_FALSE(Set::below(2.0).contains(2.0));
  CHECK(Set::below(2.0, true).contains(2.0));
  CHECK(Set::above(2.0, true).contains(2.0));
  CHECK(Set::all().contains(1e308));
  CHECK_FALSE(Set::empty().contains(0.0));
}

TEST_CASE("touching regions merge only across a closed endpoint") {
  const Set merged = Set::unite(Set::interval(1.0, 2.0), Set::interval(2.0, 3.0));
  CHECK(merged == Set::interval(1.0, 3.0));
  const Set split_at_2 = Set::unite(Set::interval(1.0, 2.0, true, false),
                                    Set::interval(2.0, 3.0, false, true));
  CHECK_FALSE(split_at_2.contains(2.0));
  CHECK(split_at_2.contains(1.5));
  CHECK(split_at_2.contains(2.5));
  CHECK_THROWS_AS(Set::interval(2.0, 1.0), InvalidSpec);
  CHECK_THROWS_AS(Set::point(std::numeric_limits<double>::quiet_NaN()), InvalidSpec);
}

TEST_CASE("subspace selection by indices and by interval") {
  DiscreteSpectralModel<double> model({0.0, 5.0, -4.0});
  CHECK_THROWS_AS(SpectralSubspace<double>::from_indices({1, 1}), InvalidSpec);
  const auto byidx = SpectralSubspace<double>::from_indices({2, 0});
  CHECK(byidx.indices() == std::vector<Index>{0, 2});  // sorted on construction
  CHECK(byidx.dimension(model) == 2);
  CHECK_THROWS_AS(SpectralSubspace<double>::from_indices({7}).resolve(model), IndexOutOfRange);
  CHECK_THROWS_AS(byidx.interval_lo(), InvalidSpec);

  const auto byiv = SpectralSubspace<double>::from_interval(-5.0, 1.0);
  CHECK(byiv.interval_form());
  CHECK(byiv.interval_lo() == -5.0);
  CHECK(byiv.resolve(model) == std::vector<Index>{0, 2});
  const auto mask = byiv.mask(model);
  CHECK(mask == std::vector<bool>{true, false, true});
  CHECK_THROWS_AS(SpectralSubspace<double>::from_interval(1.0, -1.0), InvalidSpec);
}

TEST_CASE("signal/noise split is an exact decomposition") {
  ThreeAtomFixture f;
  const SignalNoiseSplit<double> s = split(f.model, f.subspace, f.v);
  CHECK((s.signal + s.noise - f.v).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.signal(0, 0) == Cplx(1.0, 0.0));
  CHECK(s.signal(1, 0) == Cplx(0.0, 0.0));
  CHECK(s.noise(1, 0) == Cplx(0.3, 0.0));
  CHECK(s.noise(0, 0) == Cplx(0.0, 0.0));
}

TEST_CASE("error measure counts only noise mass inside the region") {
  TwoAtomFixture f;
  CHECK(error_measure(f.model, f.subspace, f.v, Set::point(10.0)) == doctest::Approx(0.04));
  CHECK(error_measure(f.model, f.subspace, f.v, Set::all()) == doctest::Approx(0.04));
  CHECK(error_measure(f.model, f.subspace, f.v, Set::below(5.0)) == 0.0);
  // The signal atom never contributes, even when the region covers it.
  CHECK(error_measure(f.model, f.subspace, f.v, Set::point(1.0)) == 0.0);
  CHECK(trial_measure(f.model, f.v, Set::all()) == doctest::Approx(1.04));
  CHECK(trial_measure(f.model, f.v, Set::point(1.0)) == doctest::Approx(1.0));
}

TEST_CASE("error matrix traces back to the scalar measure") {
  ThreeAtomFixture f;
  const auto m5 = error_matrix(f.model, f.subspace, f.v, Set::point(5.0));
  CHECK(m5.matrix()(0, 0).real() == doctest::Approx(0.09));
  const auto all = error_matrix(f.model, f.subspace, f.v, Set::all());
  CHECK(all.matrix()(0, 0).real() == doctest::Approx(0.25));
}

TEST_CASE("one-sided first moments with separate cut and center") {
  ThreeAtomFixture f;
  CHECK(weighted_error_integral(f.model, f.subspace, f.v, 2.0, 1.0, Side::Above) ==
        doctest::Approx(0.36));
  CHECK(weighted_error_integral(f.model, f.subspace, f.v, -2.0, -1.0, Side::Below) ==
        doctest::Approx(-0.48));
  // Single-cut form centers the weight at the cut itself.
  CHECK(weighted_error_integral(f.model, f.subspace, f.v, 0.0, Side::Above) ==
        doctest::Approx(0.45));
  CHECK(weighted_error_integral(f.model, f.subspace, f.v, 0.0, Side::Below) ==
        doctest::Approx(-0.64));
  // Matrix analogue agrees in the one-column case.
  CHECK(weighted_error_matrix(f.model, f.subspace, f.v, 2.0, 1.0, Side::Above)
            .matrix()(0, 0)
            .real() == doctest::Approx(0.36));
}

TEST_CASE("assembly reproduces the closed-form compressed matrices") {
  TwoAtomFixture f;
  const HermitianMatrix<double> da(Mat::Zero(1, 1));
  Mat db1(1, 1);
  db1(0, 0) = 0.01;
  const HermitianMatrix<double> db(db1);
  const GEPInstance<double> inst = assemble_gep(f.model, f.subspace, f.v, da, db);
  CHECK(inst.A.matrix()(0, 0).real() == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(inst.B.matrix()(0, 0).real() == doctest::Approx(1.05).epsilon(1e-15));
  CHECK(inst.trial_dimension() == 1);
  CHECK(inst.truth.has_value());
  CHECK_NOTHROW(validate_instance(inst));

  // Tampered matrices are inconsistent with the attached truth.
  Mat bumped = inst.A.matrix();
  bumped(0, 0) += 0.1;
  const GEPInstance<double> bad{HermitianMatrix<double>(bumped), inst.B, inst.truth};
  CHECK_THROWS_AS(validate_instance(bad), InvalidSpec);

  const HermitianMatrix<double> wrong(Mat::Zero(2, 2));
  CHECK_THROWS_AS(assemble_gep(f.model, f.subspace, f.v, wrong, db), DimensionMismatch);
  const GEPInstance<double> bare{inst.A, inst.B, std::nullopt};
  CHECK_THROWS_AS(require_truth(bare), MissingGroundTruth);
}

TEST_CASE("noise weights against the metric and the operator") {
  ThreeAtomFixture f;
  Mat db1(1, 1), da1(1, 1);
  db1(0, 0) = 0.01;
  da1(0, 0) = 0.0;
  const GEPInstance<double> inst = assemble_gep(f.model, f.subspace, f.v,
                                                HermitianMatrix<double>(da1),
                                                HermitianMatrix<double>(db1));
  CHECK(noise_weight(inst).matrix()(0, 0).real() == doctest::Approx(0.26));
  CHECK(noise_operator_weight(inst).matrix()(0, 0).real() == doctest::Approx(-0.19));
}
