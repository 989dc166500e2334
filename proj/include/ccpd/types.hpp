#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace ccpd {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace ccpd
