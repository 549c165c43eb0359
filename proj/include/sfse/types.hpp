#pragma once

#include <complex>

#include <Eigen/Dense>

namespace sfse {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

}  // namespace sfse
