#pragma once

#include <stdexcept>
#include <string>

namespace calabi {

// Base of every error raised by the library. The CLI maps each subclass to
// its own exit code (see cli.h).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// mesh
class InvalidSurface : public Error {
public:
  using Error::Error;
};
class BoundaryEdge : public InvalidSurface {
public:
  using InvalidSurface::InvalidSurface;
};
class DegenerateFace : public InvalidSurface {
public:
  using InvalidSurface::InvalidSurface;
};
class NonManifold : public InvalidSurface {
public:
  using InvalidSurface::InvalidSurface;
};

// geometry and linear algebra
class DomainError : public Error {
public:
  using Error::Error;
};
class TriangleInequalityViolation : public Error {
public:
  using Error::Error;
};
class DimensionMismatch : public Error {
public:
  using Error::Error;
};
class ConvergenceFailure : public Error {
public:
  ConvergenceFailure(const std::string& what, int iterations) : Error(what), iterations_(iterations) {}
  int iterations() const { return iterations_; }

private:
  int iterations_;
};
class NotPositiveDefinite : public Error {
public:
  using Error::Error;
};

// solvers
class NoConvergence : public Error {
public:
  NoConvergence(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

private:
  double residual_;
  int iterations_;
};
class BlowupGuard : public Error {
public:
  using Error::Error;
};
class QuadratureFailure : public Error {
public:
  using Error::Error;
};

// input
class ParseError : public Error {
public:
  using Error::Error;
};
class FileError : public Error {
public:
  using Error::Error;
};

} // namespace calabi
