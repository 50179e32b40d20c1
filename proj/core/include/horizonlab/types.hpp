#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace horizonlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Invalid user-supplied configuration or malformed input.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (e.g. an initial
/// condition outside an invariant set).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Two objects cannot be compared on the requested window, typically because
/// one trajectory escaped before the end of it.
class NonComparableError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine produced non-finite values it cannot represent.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Symmetric part (M + M^T) / 2.
inline Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

} // namespace horizonlab
