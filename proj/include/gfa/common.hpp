#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gfa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Error taxonomy shared by every module. The CLI maps ConfigError to a usage
// failure and everything else to a runtime failure.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvariantError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class LookupError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace gfa
