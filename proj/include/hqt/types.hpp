/** \file
 * Common scalar/matrix typedefs and error types used across the toolkit.
 */
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hqt {

using cxd = std::complex<double>;

/// General complex matrix (states, unitaries, Choi matrices).
using CMat = Eigen::MatrixXcd;
/// Two-qubit operator in the computational basis, control qubit in the
/// first tensor slot throughout the toolkit.
using CMat4 = Eigen::Matrix4cd;
/// Pauli transfer matrix of a two-qubit channel (normalized Pauli basis).
using Ptm = Eigen::Matrix<double, 16, 16>;
/// Pauli coordinate vector of a two-qubit operator.
using PtmVec = Eigen::Matrix<double, 16, 1>;

constexpr double pi = 3.14159265358979323846;

/// Bad arguments or malformed inputs (dimension mismatch, odd qubit count, ...).
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge or produced an unusable result.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An operation was called before its prerequisites (e.g. calibration order).
struct precondition_error : std::logic_error {
    using std::logic_error::logic_error;
};

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * pi);
    if (a <= -pi) a += 2.0 * pi;
    if (a > pi) a -= 2.0 * pi;
    return a;
}

}  // namespace hqt
