#pragma once

#include <complex>

#include <Eigen/Dense>

namespace ktop {

using Real = double;
using Complex = std::complex<Real>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatrix = DenseMatrix<Complex>;
using CVector = DenseVector<Complex>;
using RMatrix = DenseMatrix<Real>;
using RVector = DenseVector<Real>;

using Vec3 = Eigen::Matrix<Real, 3, 1>;
using Mat3 = Eigen::Matrix<Real, 3, 3>;

}  // namespace ktop
