#pragma once

#include <optional>
#include <string>

#include "pslab/analytic.hpp"

namespace pslab {

enum class ObjectiveKind { L1, MaxMin, Combined };
enum class ConstraintKind { None, FluxAtZero, Continuity };

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::L1;
    ConstraintKind constraint = ConstraintKind::None;
    double background = 0.0;  // C, used by the continuity constraint
    double horizon = 40.0;
    int quadrature_points = 2001;

    /// Options 1-6: odd ids are unconstrained, even ids use the flux-at-zero
    /// constraint; 1/2 = L1, 3/4 = MaxMin, 5/6 = Combined.
    static ObjectiveSpec option(int id);
    /// L1 objective under the continuity constraint with background C.
    static ObjectiveSpec continuity(double C);
    void validate() const;
    std::string describe() const;
};

struct OptimResult {
    double p0 = 0.0;
    double t0 = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string diagnostics;
};

// Search box for (t0, p0).
inline constexpr double kMinT0 = 1e-4;
inline constexpr double kMaxT0 = 1e4;
inline constexpr double kMaxP0 = 1e8;

/// Deviation of phi_sum from phi on a uniform grid over [0, horizon]:
/// L1 by composite trapezoid, MaxMin = |max| + |min|, Combined = their sum.
/// Returns +inf outside the search box or for non-finite p0.
double objective_value(const ObjectiveSpec& spec, double p0, double t0, const FluxParams& fp);

/// p0 implied by the spec's constraint (spec must be constrained).
double constrained_p0(const ObjectiveSpec& spec, double t0, const FluxParams& fp);

/// Unconstrained specs: Nelder-Mead from t0 in {0.5, 1, 2, 4, 8} with p0 from
/// the flux-at-zero constraint, restarted from the incumbent until it stops
/// improving. `start` = (p0, t0) replaces the multi-start set.
/// Constrained specs: log-spaced scan of t0 then golden-section refinement;
/// `start` is ignored.
OptimResult optimize(const ObjectiveSpec& spec, const FluxParams& fp,
                     std::optional<std::pair<double, double>> start = std::nullopt);

}  // namespace pslab
