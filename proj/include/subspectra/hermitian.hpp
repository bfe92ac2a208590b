#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "subspectra/rng.hpp"
#include "subspectra/types.hpp"

namespace subspectra {

// Dense Hermitian matrix validated at construction.  The stored matrix is the
// Hermitian part (X + X^*)/2 of the input, so entries satisfy
// m(i,j) == conj(m(j,i)) exactly and sums, differences and real scalings of
// stored matrices stay exactly Hermitian without re-validation.
template <typename Real>
class HermitianMatrix {
 public:
  explicit HermitianMatrix(ComplexMatrix<Real> entries) {
    if (entries.rows() < 1 || entries.rows() != entries.cols())
      throw InvalidSpec("HermitianMatrix requires a square matrix of dimension >= 1");
    const Real largest = entries.cwiseAbs().maxCoeff();
    const Real defect = (entries - entries.adjoint().eval()).cwiseAbs().maxCoeff();
    if (defect > Real(1e-12) * largest)
      throw NonHermitianInput("adjoint defect " + std::to_string(static_cast<double>(defect)) +
                              " exceeds 1e-12 relative to largest entry");
    mat_ = ((entries + entries.adjoint().eval()) / Real(2)).eval();
  }

  // Fast path for matrices that are Hermitian by construction (results of
  // congruences, sums of stored matrices, ...).  Symmetrizes, never throws.
  static HermitianMatrix trusted(ComplexMatrix<Real> entries) {
    return HermitianMatrix(Trusted{}, std::move(entries));
  }

  Index dim() const { return mat_.rows(); }
  const ComplexMatrix<Real>& matrix() const { return mat_; }

  friend HermitianMatrix operator+(const HermitianMatrix& x, const HermitianMatrix& y) {
    if (x.dim() != y.dim()) throw DimensionMismatch("Hermitian sum of unequal dimensions");
    return HermitianMatrix(Trusted{}, x.mat_ + y.mat_);
  }
  friend HermitianMatrix operator-(const HermitianMatrix& x, const HermitianMatrix& y) {
    if (x.dim() != y.dim()) throw DimensionMismatch("Hermitian difference of unequal dimensions");
    return HermitianMatrix(Trusted{}, x.mat_ - y.mat_);
  }
  friend HermitianMatrix operator*(Real c, const HermitianMatrix& x) {
    return HermitianMatrix(Trusted{}, c * x.mat_);
  }

 private:
  struct Trusted {};
  HermitianMatrix(Trusted, ComplexMatrix<Real> entries) {
    mat_ = ((entries + entries.adjoint().eval()) / Real(2)).eval();
  }

  ComplexMatrix<Real> mat_;
};

// Eigenvalues sorted descending; vectors stores the matching orthonormal
// eigenvectors column-wise.  Ties keep the underlying solver's order.
template <typename Real>
struct EigenDecomposition {
  RealVector<Real> values;
  ComplexMatrix<Real> vectors;
};

// Generalized eigenpairs of [A, B], values descending, vectors B-orthonormal.
template <typename Real>
struct GEPSolution {
  RealVector<Real> values;
  ComplexMatrix<Real> vectors;
};

template <typename Real>
EigenDecomposition<Real> eigh(const HermitianMatrix<Real>& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> solver(h.matrix());
  if (solver.info() != Eigen::Success)
    throw Error("eigh: eigendecomposition did not converge");
  EigenDecomposition<Real> out;
  out.values = solver.eigenvalues().reverse().eval();
  out.vectors = solver.eigenvectors().rowwise().reverse().eval();
  return out;
}

// Largest |eigenvalue|, i.e. the spectral norm of a Hermitian matrix.
template <typename Real>
Real spectral_norm(const HermitianMatrix<Real>& h) {
  return eigh(h).values.cwiseAbs().maxCoeff();
}

// min(lambda_min(h), 0): the negative part of the bottom of the spectrum.
// Appears in lower-bound numerators where only an indefinite perturbation's
// negative excursion can hurt.
template <typename Real>
Real min_eigenvalue_or_zero(const HermitianMatrix<Real>& h) {
  return std::min(eigh(h).values.minCoeff(), Real(0));
}

// max(lambda_max(h), 0), the matching positive excursion.
template <typename Real>
Real max_eigenvalue_or_zero(const HermitianMatrix<Real>& h) {
  return std::max(eigh(h).values.maxCoeff(), Real(0));
}

// Solves A x = lambda B x for Hermitian A and positive definite B by spectral
// whitening: with B = U S U^*, form W = U S^{-1/2} U^* and eigendecompose
// W A W.  Mapping eigenvectors back through W makes them B-orthonormal.
// Whitening keeps the error analysis tied to eig(B) rather than to a
// triangular factor, which is what the conditioning checks in bounds.hpp
// reason about.
template <typename Real>
GEPSolution<Real> solve_gep(const HermitianMatrix<Real>& a, const HermitianMatrix<Real>& b) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("solve_gep: operator and weight dimensions differ");
  const EigenDecomposition<Real> bd = eigh(b);
  const Real bnorm = bd.values.cwiseAbs().maxCoeff();
  const Real floor = static_cast<Real>(b.dim()) * Real(1e-14) * bnorm;
  if (!(bd.values.minCoeff() > floor))
    throw IndefiniteWeight("solve_gep: weight matrix is not positive definite "
                           "(smallest eigenvalue not above dim * 1e-14 * norm)");
  const ComplexMatrix<Real> whitener =
      bd.vectors * bd.values.cwiseSqrt().cwiseInverse().asDiagonal() * bd.vectors.adjoint();
  const HermitianMatrix<Real> compressed =
      HermitianMatrix<Real>::trusted(whitener * a.matrix() * whitener);
  EigenDecomposition<Real> cd = eigh(compressed);
  GEPSolution<Real> out;
  out.values = std::move(cd.values);
  out.vectors = (whitener * cd.vectors).eval();
  return out;
}

// One instance of the two-sided eigenvalue perturbation chain
//   lambda_{i+j-m}(A+B) >= lambda_i(A) + lambda_j(B) >= lambda_{i+j-1}(A+B)
// with descending 1-based indices; a side whose composite index falls outside
// 1..m is omitted and reported as vacuously holding.
struct WeylCheck {
  bool left_holds = true;    // lambda_{i+j-m}(A+B) >= lambda_i(A) + lambda_j(B)
  bool right_holds = true;   // lambda_i(A) + lambda_j(B) >= lambda_{i+j-1}(A+B)
  bool indices_in_range = true;  // false when either composite index was omitted
};

template <typename Real>
WeylCheck check_weyl_inequality(const HermitianMatrix<Real>& a, const HermitianMatrix<Real>& b,
                                Index i, Index j) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("check_weyl_inequality: dimensions differ");
  const Index m = a.dim();
  if (i < 1 || i > m || j < 1 || j > m)
    throw IndexOutOfRange("check_weyl_inequality: i and j must lie in 1..dim");
  const RealVector<Real> ea = eigh(a).values;
  const RealVector<Real> eb = eigh(b).values;
  const RealVector<Real> es = eigh(a + b).values;
  const Real scale = std::max({Real(1), ea.cwiseAbs().maxCoeff(), eb.cwiseAbs().maxCoeff(),
                               es.cwiseAbs().maxCoeff()});
  const Real slack = Real(1e-10) * scale;
  const Real middle = ea[i - 1] + eb[j - 1];
  WeylCheck out;
  const Index left = i + j - m;   // 1-based
  const Index right = i + j - 1;  // 1-based
  if (left >= 1 && left <= m)
    out.left_holds = es[left - 1] >= middle - slack;
  if (right >= 1 && right <= m)
    out.right_holds = middle >= es[right - 1] - slack;
  out.indices_in_range = (left >= 1 && left <= m) && (right >= 1 && right <= m);
  return out;
}

// Checks the max-min characterization of the n-th eigenvalue numerically:
// `achieved` is the smallest Rayleigh quotient over the span of the n leading
// eigenvectors (the optimal subspace), `sampled_max` the best smallest
// Rayleigh quotient over random n-dimensional subspaces.  No sample may beat
// the optimum beyond roundoff.
template <typename Real>
struct MinMaxWitness {
  Real achieved;
  Real sampled_max;
  bool holds;
};

template <typename Real>
MinMaxWitness<Real> courant_fischer_witness(const HermitianMatrix<Real>& h, Index n,
                                            Index trials, std::uint64_t seed) {
  const Index dim = h.dim();
  if (n < 1 || n > dim)
    throw IndexOutOfRange("courant_fischer_witness: subspace dimension out of range");
  if (trials < 1) throw InvalidSpec("courant_fischer_witness: trials must be >= 1");
  const EigenDecomposition<Real> hd = eigh(h);
  const auto smallest_compressed = [&](const ComplexMatrix<Real>& basis) {
    const HermitianMatrix<Real> c =
        HermitianMatrix<Real>::trusted(basis.adjoint() * h.matrix() * basis);
    return eigh(c).values.minCoeff();
  };
  MinMaxWitness<Real> out;
  out.achieved = smallest_compressed(hd.vectors.leftCols(n));
  Rng rng(seed, "courant_fischer");
  Real best = -std::numeric_limits<Real>::infinity();
  for (Index t = 0; t < trials; ++t) {
    ComplexMatrix<Real> g(dim, n);
    for (Index r = 0; r < dim; ++r)
      for (Index c = 0; c < n; ++c) g(r, c) = static_cast<Complex<Real>>(rng.complex_normal());
    const ComplexMatrix<Real> q =
        Eigen::HouseholderQR<ComplexMatrix<Real>>(g).householderQ() *
        ComplexMatrix<Real>::Identity(dim, n);
    best = std::max(best, smallest_compressed(q));
  }
  out.sampled_max = best;
  const Real scale = std::max(Real(1), hd.values.cwiseAbs().maxCoeff());
  out.holds = out.sampled_max <= out.achieved + Real(1e-10) * scale;
  return out;
}

}  // namespace subspectra
