#pragma once
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace freeconvex {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using MatrixList = std::vector<Matrix>;

}  // namespace freeconvex
