#pragma once

#include <stdexcept>
#include <string>

namespace qpat {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input violates a documented precondition (bad coefficients, data too
/// large for the contraction regime, inadmissible configuration, ...).
/// Pipelines map this to exit code 2.
class PreconditionError : public Error {
  public:
    explicit PreconditionError(const std::string& what) : Error(what) {}
};

/// An iteration failed to converge within its cap. Exit code 3.
class DivergenceError : public Error {
  public:
    explicit DivergenceError(const std::string& what) : Error(what) {}
};

/// Malformed config or field file. Exit code 2.
class ParseError : public PreconditionError {
  public:
    explicit ParseError(const std::string& what) : PreconditionError(what) {}
};

} // namespace qpat
