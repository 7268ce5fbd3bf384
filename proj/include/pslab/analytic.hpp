#pragma once

#include <string>
#include <vector>

namespace pslab {

/// Amplitude p0 and pre-diffusion time t0 of a Gaussian-shaped extension,
/// plus the background concentration C of the environment.
struct GaussianICParams {
    double p0 = 0.0;
    double t0 = 1.0;
    double background = 0.0;
};

/// Cell radius R, diffusivity D, flux density phi and point-source rate Phi.
struct FluxParams {
    double R = 0.5;
    double D = 0.1;
    double phi = 1.0;
    double Phi = 3.14159265358979323846;

    /// Phi = 2 pi R phi.
    static FluxParams matched(double R, double D, double phi);
    double alpha() const { return R * R / (4.0 * D); }
    /// Throws InvalidInput unless all values are positive.
    void validate() const;
};

/// Heat kernel in 2-D: (4 pi D t)^-1 exp(-r^2 / (4 D t)); zero for t < 0.
double fundamental_solution(double r, double t, double D);

/// Flux density over the circle from the Gaussian initial condition.
double phi1(double t, const FluxParams& fp, const GaussianICParams& ic);
/// Flux density over the circle from the point source; zero at t = 0.
double phi2(double t, const FluxParams& fp);
double phi_sum(double t, const FluxParams& fp, const GaussianICParams& ic);
/// Closed-form time derivative of phi_sum (t > 0).
double phi_sum_derivative(double t, const FluxParams& fp, const GaussianICParams& ic);

/// p0 making phi_sum(0) = phi.
double p0_from_t0(double t0, const FluxParams& fp);
/// p0 making the Gaussian equal C on the circle. Rejects C <= 0.
double p0_from_continuity(double t0, double C, const FluxParams& fp);

struct PhiSumClassification {
    std::vector<double> critical_points;  // interior sign changes of phi_sum'
    std::string label;                    // "i", "ii", "iii", "iv" or "degenerate"
    bool degenerate = false;
    double t_minus = 0.0;  // extremum locations of h(t) = (t - alpha/2) t^-4 exp(-alpha/t)
    double t_plus = 0.0;
    double min_deviation = 0.0;  // min over the horizon of phi_sum - phi
    double max_deviation = 0.0;
    double horizon = 0.0;
    /// phi_sum is not yet rising below phi at the horizon, so later critical
    /// points may be missing.
    bool truncated = false;
};

/// Locates critical points of phi_sum on (0, T) by a uniform scan of `scan_intervals`
/// cells and bisection, then labels the shape by the number of critical points.
PhiSumClassification classify_phi_sum(const FluxParams& fp, const GaussianICParams& ic, double horizon,
                                      int scan_intervals = 10000);

/// Classification on (0, infinity): doubles the horizon, keeping the scan
/// spacing of the first call, until the result is no longer truncated.
PhiSumClassification classify_phi_sum_settled(const FluxParams& fp, const GaussianICParams& ic, double horizon = 40.0,
                                              double max_horizon = 1e5);

}  // namespace pslab
