#pragma once

#include <stdexcept>
#include <string>

namespace geograsp {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GEOGRASP_DEFINE_ERROR(Name, Base)          \
  class Name : public Base {                       \
   public:                                         \
    explicit Name(const std::string& what_arg)     \
        : Base(#Name ": " + what_arg) {}           \
  }

// I/O and input validation.
GEOGRASP_DEFINE_ERROR(IoError, Error);
GEOGRASP_DEFINE_ERROR(ParseError, Error);
GEOGRASP_DEFINE_ERROR(InvalidArgument, Error);
GEOGRASP_DEFINE_ERROR(InvalidTransform, Error);
GEOGRASP_DEFINE_ERROR(InvalidConfig, Error);

/// Failures of segmentation and object estimation: the scene did not yield
/// a usable support plane or object.
class PerceptionError : public Error {
 public:
  using Error::Error;
};
GEOGRASP_DEFINE_ERROR(InsufficientPoints, PerceptionError);
GEOGRASP_DEFINE_ERROR(DegenerateSample, PerceptionError);
GEOGRASP_DEFINE_ERROR(TooFewInliers, PerceptionError);
GEOGRASP_DEFINE_ERROR(NonHorizontalPlane, PerceptionError);
GEOGRASP_DEFINE_ERROR(NoObjectFound, PerceptionError);
GEOGRASP_DEFINE_ERROR(EmptyObject, PerceptionError);
GEOGRASP_DEFINE_ERROR(DegenerateCloud, PerceptionError);

/// A grasp could be constructed geometrically but cannot be executed.
class InfeasibleGrasp : public Error {
 public:
  using Error::Error;
};
GEOGRASP_DEFINE_ERROR(InfeasibleWidth, InfeasibleGrasp);
GEOGRASP_DEFINE_ERROR(PalmCollision, InfeasibleGrasp);
GEOGRASP_DEFINE_ERROR(TableCollision, InfeasibleGrasp);
GEOGRASP_DEFINE_ERROR(DegenerateAxes, InfeasibleGrasp);

GEOGRASP_DEFINE_ERROR(InvalidScene, Error);
GEOGRASP_DEFINE_ERROR(UnsupportedShape, Error);
GEOGRASP_DEFINE_ERROR(EmptySuite, Error);
GEOGRASP_DEFINE_ERROR(InvalidCounts, Error);

#undef GEOGRASP_DEFINE_ERROR

}  // namespace geograsp
