#pragma once

#include <stdexcept>
#include <string>

namespace motionprep {

// Base class for all recoverable pipeline failures.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Geometry
struct InvalidRotationError : Error {
  using Error::Error;
};
struct PointAtInfinityError : Error {
  using Error::Error;
};
struct PointBehindCameraError : Error {
  using Error::Error;
};
struct AmbiguousHalfRotationError : Error {
  using Error::Error;
};
struct SingularHomographyError : Error {
  using Error::Error;
};

// Features / estimation
struct DegenerateInputError : Error {
  using Error::Error;
};
struct DegenerateSampleError : Error {
  using Error::Error;
};
struct InsufficientDataError : Error {
  using Error::Error;
};
struct EstimationFailedError : Error {
  using Error::Error;
};
struct CheiralityError : Error {
  using Error::Error;
};
struct NoIntersectionError : Error {
  using Error::Error;
};

// Rectification
struct NoOverlapError : Error {
  using Error::Error;
};
struct ExcessiveRotationError : Error {
  using Error::Error;
};

// Synthesis / analysis
struct InfeasibleSceneError : Error {
  using Error::Error;
};

// Configuration / IO
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace motionprep
