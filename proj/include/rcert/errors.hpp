#pragma once

#include <stdexcept>
#include <string>

namespace rcert {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedFile : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct NegativeStd : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct EmptyArch : Error {
  using Error::Error;
};
struct BadDimension : Error {
  using Error::Error;
};
struct OutOfRange : Error {
  using Error::Error;
};
struct UnboundedPolytope : Error {
  using Error::Error;
};
struct SizeMismatch : Error {
  using Error::Error;
};
struct TooLarge : Error {
  using Error::Error;
};
struct NotConcave : Error {
  using Error::Error;
};
struct InfeasibleSupport : Error {
  using Error::Error;
};
struct UnsupportedStructure : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rcert
