#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace subrad {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

// Raised when a dense solver fails or a computed object violates a numerical
// contract (non-unique steady state, eigensolver non-convergence, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Short stable fingerprint of a complex matrix (dims + FNV-1a of the raw
// doubles), used in error messages so failing inputs can be matched up.
std::string matrix_fingerprint(const CMatrix& m);

}  // namespace subrad
