#pragma once

#include <stdexcept>
#include <string>

namespace pslab {

/// Input that violates a documented precondition (bad geometry, unknown marker, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Mesh generation could not produce a valid triangulation.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Element assembly hit a degenerate triangle or a structurally broken mesh.
class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear solver or optimizer failed to converge.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

}  // namespace pslab
