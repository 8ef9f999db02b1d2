#pragma once

#include <stdexcept>
#include <string>

namespace mvtrack {

// Base class for every error raised by the library. Derived types map onto
// the failure modes callers are expected to branch on.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A point reached the projection with non-positive camera depth.
class BehindCamera : public Error {
 public:
  BehindCamera() : Error("point is behind the camera (depth <= 0)") {}
};

class NotARotation : public Error {
 public:
  using Error::Error;
};

class EmptyMesh : public Error {
 public:
  EmptyMesh() : Error("mesh has no vertices") {}
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateRegion : public Error {
 public:
  using Error::Error;
};

class EmptySampleSet : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class LostTrack : public Error {
 public:
  using Error::Error;
};

// Malformed configuration: names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File-level I/O or parse failure. Messages carry the path and, for text
// formats, the line number.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvtrack
