#pragma once

#include <stdexcept>
#include <string>

namespace edgepupil {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes, so keep the hierarchy shallow.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad argument to an operation: even kernel, empty contour, tiny image.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Rectangle or index outside the image.
class BoundsError : public Error {
public:
    using Error::Error;
};

// DetectionParams (or another config document) violates its invariants.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed file contents: bad image header, label count mismatch, ...
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Ellipse fit impossible: too few points, collinear scatter, non-ellipse conic.
class FitDegenerate : public Error {
public:
    using Error::Error;
};

}  // namespace edgepupil
