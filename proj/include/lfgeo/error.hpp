#pragma once

#include <stdexcept>
#include <string>

namespace lfgeo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input is malformed: missing table entries, unknown names, bad shapes.
class StructuralError : public Error {
public:
    explicit StructuralError(const std::string& what) : Error(what) {}
};

/// Input is well formed but violates an operation's precondition.
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(what) {}
};

/// A configured size cap would be exceeded.
class CapExceeded : public Error {
public:
    explicit CapExceeded(const std::string& what) : Error(what) {}
};

/// Should not happen for valid inputs (e.g. an unbounded LP over a polytope).
class InternalError : public Error {
public:
    explicit InternalError(const std::string& what) : Error(what) {}
};

}  // namespace lfgeo
