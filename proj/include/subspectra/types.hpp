#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace subspectra {

using Index = Eigen::Index;

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using ComplexMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using ComplexVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// A trial map stores trial vectors column-wise: column j holds the coefficients
// of the j-th trial vector in the eigenbasis of the model operator.
template <typename Real>
using TrialMap = ComplexMatrix<Real>;

// Conditions that abort an operation are thrown; conditions a caller may want
// to inspect and continue from (exhausted growth budget, violated corollary
// assumptions, noise bounds contradicted by ground truth) travel as string
// flags on result structs instead.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define SUBSPECTRA_ERROR_TYPE(NAME)                             \
  struct NAME : Error {                                         \
    explicit NAME(const std::string& what)                      \
        : Error(std::string(#NAME) + ": " + what) {}            \
  };

SUBSPECTRA_ERROR_TYPE(NonHermitianInput)
SUBSPECTRA_ERROR_TYPE(IndefiniteWeight)
SUBSPECTRA_ERROR_TYPE(SingularWeight)
SUBSPECTRA_ERROR_TYPE(DimensionMismatch)
SUBSPECTRA_ERROR_TYPE(SubspaceDimensionExceedsTrial)
SUBSPECTRA_ERROR_TYPE(IndexOutOfRange)
SUBSPECTRA_ERROR_TYPE(MissingGroundTruth)
SUBSPECTRA_ERROR_TYPE(IllConditioned)
SUBSPECTRA_ERROR_TYPE(BoundViolatedByModel)
SUBSPECTRA_ERROR_TYPE(NonPositiveThreshold)
SUBSPECTRA_ERROR_TYPE(InvalidNoiseBound)
SUBSPECTRA_ERROR_TYPE(NotNested)
SUBSPECTRA_ERROR_TYPE(NonOrthonormalBasis)
SUBSPECTRA_ERROR_TYPE(InvalidSpec)
SUBSPECTRA_ERROR_TYPE(IoFailure)

#undef SUBSPECTRA_ERROR_TYPE

}  // namespace subspectra
