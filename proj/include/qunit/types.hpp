#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qunit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Malformed input: bad config fields, out-of-range parameters, dimension
/// mismatches. Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a trustworthy result (non-convergence,
/// unstable loop, failed fit). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximum entrywise deviation of U^dagger U from the identity.
double unitarity_deviation(const CMatrix& u);

/// Angle reduced to [0, 2pi).
double wrap_two_pi(double angle);

/// Angle reduced to (-pi, pi].
double wrap_pi(double angle);

}  // namespace qunit
