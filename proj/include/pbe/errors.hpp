#pragma once

#include <stdexcept>
#include <string>

namespace pbe {

/// Base class for all library errors. The category string is stable and is
/// used by the CLI as the machine-parsable reason prefix.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

class MeshError : public Error {
public:
    explicit MeshError(const std::string& what) : Error("mesh", what) {}
};

class DegenerateElementError : public MeshError {
public:
    using MeshError::MeshError;
};

/// A mesh (or mesh file) violates one of the structural invariants.
class InvariantViolation : public MeshError {
public:
    using MeshError::MeshError;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error("parse", "line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

class PointOutsideMesh : public Error {
public:
    explicit PointOutsideMesh(const std::string& what) : Error("geometry", what) {}
};

class SolverError : public Error {
public:
    explicit SolverError(const std::string& what) : Error("solver", what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config", what) {}
    ConfigError(const std::string& what, int line)
        : Error("config", "line " + std::to_string(line) + ": " + what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

}  // namespace pbe
