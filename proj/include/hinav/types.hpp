#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hinav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Base class for all recoverable errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define HINAV_ERROR_TYPE(Name)                                                 \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

HINAV_ERROR_TYPE(NotAntisymmetric);
HINAV_ERROR_TYPE(NotUnitAxis);
HINAV_ERROR_TYPE(InvalidDt);
HINAV_ERROR_TYPE(DegenerateLandmarks);
HINAV_ERROR_TYPE(InsufficientLandmarks);
HINAV_ERROR_TYPE(NonFiniteState);
HINAV_ERROR_TYPE(NonMonotoneTime);
HINAV_ERROR_TYPE(SingularInnovationCovariance);
HINAV_ERROR_TYPE(LostPositivity);
HINAV_ERROR_TYPE(WindowTooShort);
HINAV_ERROR_TYPE(MuTooSmall);
HINAV_ERROR_TYPE(MaxIterationsExceeded);
HINAV_ERROR_TYPE(UnknownLandmarkId);
HINAV_ERROR_TYPE(MalformedRow);
HINAV_ERROR_TYPE(ConfigError);
HINAV_ERROR_TYPE(IoError);

#undef HINAV_ERROR_TYPE

} // namespace hinav
