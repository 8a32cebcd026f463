#pragma once

#include <stdexcept>
#include <string>

namespace steklov {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A point or argument lies outside the domain of validity.
struct DomainError : Error {
  using Error::Error;
};

/// An operation was called on a shape variant it does not support.
struct UnsupportedShapeError : Error {
  using Error::Error;
};

/// An iterative or direct numerical procedure failed to reach its tolerance.
struct NumericalError : Error {
  using Error::Error;
};

/// Mesh generation or validation failure.
struct MeshError : Error {
  using Error::Error;
};

/// Malformed text input (mesh files, configs, profiles).
struct ParseError : Error {
  using Error::Error;
};

/// A caller violated an operation precondition.
struct ContractError : Error {
  using Error::Error;
};

}  // namespace steklov
