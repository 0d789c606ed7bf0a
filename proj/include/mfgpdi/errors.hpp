#pragma once

#include <stdexcept>
#include <string>

namespace mfgpdi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Golden-section prox search did not contract (usually a non-convex base).
class NonConvergence : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

/// A pivot of the tridiagonal elimination fell below the singularity threshold.
class SingularMatrix : public Error {
public:
    using Error::Error;
};

class SingularTangent : public Error {
public:
    using Error::Error;
};

class MeshMismatch : public Error {
public:
    using Error::Error;
};

/// The outer fixed-point increment blew up.
class Diverged : public Error {
public:
    using Error::Error;
};

class MeshTooCoarse : public Error {
public:
    using Error::Error;
};

} // namespace mfgpdi
