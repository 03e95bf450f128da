#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace rcas {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using CRow = Eigen::RowVectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using RRow = Eigen::RowVectorXd;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline double db_to_linear_power(double db) { return std::pow(10.0, db / 10.0); }
inline double db_to_linear_magnitude(double db) { return std::pow(10.0, db / 20.0); }

/// Input outside the mathematical domain of an operation (bad angle, negative
/// power, non-PSD correlation, non-complementary selection, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration. `field` names the offending key when known.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Linear algebra failure that regularization could not repair.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double condition_estimate)
      : std::runtime_error(what + " (condition estimate " + std::to_string(condition_estimate) + ")"),
        condition_(condition_estimate) {}
  double condition_estimate() const { return condition_; }

 private:
  double condition_;
};

}  // namespace rcas
