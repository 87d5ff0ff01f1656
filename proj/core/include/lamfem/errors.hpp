#pragma once

#include <stdexcept>
#include <string>

namespace lamfem {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor inversion requested on a (numerically) singular matrix.
class SingularTensor : public Error {
public:
  using Error::Error;
};

// A symmetric-only operation received a non-symmetric argument.
class NotSymmetric : public Error {
public:
  using Error::Error;
};

// det F <= 0 encountered during a finite-strain evaluation.
class NonPositiveJacobian : public Error {
public:
  using Error::Error;
};

// Return mapping at a material point failed to converge.
class LocalDivergence : public Error {
public:
  using Error::Error;
};

// Laminate jump solve failed to converge.
class InterfaceDivergence : public Error {
public:
  using Error::Error;
};

// Global Newton failed even after all load-step halvings.
class GlobalDivergence : public Error {
public:
  using Error::Error;
};

// The laminate acoustic tensor is not invertible (ill-posed jump problem).
class SingularAcousticTensor : public Error {
public:
  using Error::Error;
};

// Level-set gradient vanishes where an interface normal is required.
class DegenerateLevelSet : public Error {
public:
  using Error::Error;
};

// Two fields live on incompatible meshes (e.g. non-nested refinement).
class MeshMismatch : public Error {
public:
  using Error::Error;
};

// Invalid run configuration (bad JSON, unknown keys, out-of-range values).
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace lamfem
