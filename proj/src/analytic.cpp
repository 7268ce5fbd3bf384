#include "pslab/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "pslab/errors.hpp"

namespace pslab {

FluxParams FluxParams::matched(double R, double D, double phi) {
    return {R, D, phi, 2.0 * M_PI * R * phi};
}

void FluxParams::validate() const {
    if (!(R > 0.0) || !(D > 0.0) || !(phi > 0.0) || !(Phi > 0.0))
        throw InvalidInput("flux parameters R, D, phi, Phi must be positive");
}

double fundamental_solution(double r, double t, double D) {
    if (t < 0.0) return 0.0;
    if (t == 0.0) {
        if (r == 0.0) throw InvalidInput("fundamental solution is singular at r = 0, t = 0");
        return 0.0;
    }
    return std::exp(-r * r / (4.0 * D * t)) / (4.0 * M_PI * D * t);
}

double phi1(double t, const FluxParams& fp, const GaussianICParams& ic) {
    const double s = t + ic.t0;
    return ic.p0 * fp.R / (8.0 * M_PI * fp.D * s * s) * std::exp(-fp.alpha() / s);
}

double phi2(double t, const FluxParams& fp) {
    if (t <= 0.0) return 0.0;
    return fp.Phi / (2.0 * M_PI * fp.R) * std::exp(-fp.alpha() / t);
}

double phi_sum(double t, const FluxParams& fp, const GaussianICParams& ic) {
    return phi1(t, fp, ic) + phi2(t, fp);
}

double phi_sum_derivative(double t, const FluxParams& fp, const GaussianICParams& ic) {
    const double a = fp.alpha();
    const double s = t + ic.t0;
    const double k1 = ic.p0 * fp.R / (8.0 * M_PI * fp.D);
    const double k2 = fp.Phi / (2.0 * M_PI * fp.R);
    const double d1 = -k1 * std::exp(-a / s) * (2.0 * s - a) / (s * s * s * s);
    const double d2 = t > 0.0 ? k2 * a * std::exp(-a / t) / (t * t) : 0.0;
    return d1 + d2;
}

double p0_from_t0(double t0, const FluxParams& fp) {
    if (!(t0 > 0.0)) throw InvalidInput("t0 must be positive");
    return 2.0 * t0 * fp.phi / (fp.R * fundamental_solution(fp.R, t0, fp.D));
}

double p0_from_continuity(double t0, double C, const FluxParams& fp) {
    if (!(t0 > 0.0)) throw InvalidInput("t0 must be positive");
    if (!(C > 0.0)) throw InvalidInput("continuity constraint needs a positive background C");
    return C * 4.0 * M_PI * fp.D * t0 * std::exp(fp.R * fp.R / (4.0 * fp.D * t0));
}

PhiSumClassification classify_phi_sum(const FluxParams& fp, const GaussianICParams& ic, double horizon,
                                      int scan_intervals) {
    fp.validate();
    if (!(horizon > 0.0)) throw InvalidInput("horizon must be positive");
    if (scan_intervals < 10) throw InvalidInput("scan_intervals must be at least 10");
    if (std::abs(fp.Phi - 2.0 * M_PI * fp.R * fp.phi) > 1e-12 * fp.Phi)
        throw InvalidInput("classification requires Phi = 2 pi R phi");

    PhiSumClassification out;
    const double a = fp.alpha();
    // Roots of t^2 - alpha t + alpha^2 / 6, the zeros of h'.
    out.t_minus = a * (0.5 - std::sqrt(3.0) / 6.0);
    out.t_plus = a * (0.5 + std::sqrt(3.0) / 6.0);

    auto f = [&](double t) { return phi_sum_derivative(t, fp, ic); };
    const double dt = horizon / scan_intervals;
    std::vector<double> d(static_cast<std::size_t>(scan_intervals) + 1);
    double scale = 0.0;
    for (int k = 0; k <= scan_intervals; ++k) {
        d[static_cast<std::size_t>(k)] = f(k * dt);
        scale = std::max(scale, std::abs(d[static_cast<std::size_t>(k)]));
    }

    out.min_deviation = out.max_deviation = phi_sum(0.0, fp, ic) - fp.phi;
    auto track = [&](double t) {
        const double v = phi_sum(t, fp, ic) - fp.phi;
        out.min_deviation = std::min(out.min_deviation, v);
        out.max_deviation = std::max(out.max_deviation, v);
    };

    for (int k = 0; k < scan_intervals; ++k) {
        const double lo_v = d[static_cast<std::size_t>(k)];
        const double hi_v = d[static_cast<std::size_t>(k) + 1];
        track((k + 1) * dt);
        if (k > 0 && lo_v == 0.0) {
            out.critical_points.push_back(k * dt);
            continue;
        }
        if ((lo_v < 0.0 && hi_v > 0.0) || (lo_v > 0.0 && hi_v < 0.0)) {
            double lo = k * dt, hi = (k + 1) * dt;
            const bool rising = lo_v < 0.0;
            while (hi - lo > 1e-12) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if ((f(mid) < 0.0) == rising)
                    lo = mid;
                else
                    hi = mid;
            }
            const double root = 0.5 * (lo + hi);
            out.critical_points.push_back(root);
            track(root);
        }
        // Tangential contact: |phi'| dips to (numerically) zero without a sign change.
        if (k > 0) {
            const double prev = d[static_cast<std::size_t>(k) - 1];
            const bool same_sign = (prev > 0.0 && lo_v > 0.0 && hi_v > 0.0) || (prev < 0.0 && lo_v < 0.0 && hi_v < 0.0);
            if (same_sign && std::abs(lo_v) < std::abs(prev) && std::abs(lo_v) < std::abs(hi_v) &&
                std::abs(lo_v) < 1e-9 * scale)
                out.degenerate = true;
        }
    }

    // phi_sum' > 0 and phi_sum < phi eventually; short of that the horizon cut the shape.
    out.horizon = horizon;
    out.truncated = !(d.back() > 0.0 && phi_sum(horizon, fp, ic) < fp.phi);

    if (out.degenerate) {
        out.label = "degenerate";
        return out;
    }
    switch (out.critical_points.size()) {
        case 0: out.label = "i"; break;
        case 1: out.label = "ii"; break;
        case 2: out.label = "iii"; break;
        case 3: out.label = "iv"; break;
        default:
            out.label = "degenerate";
            out.degenerate = true;
    }
    return out;
}

PhiSumClassification classify_phi_sum_settled(const FluxParams& fp, const GaussianICParams& ic, double horizon,
                                              double max_horizon) {
    const double spacing = horizon / 10000.0;
    for (;;) {
        const int intervals = static_cast<int>(std::ceil(horizon / spacing));
        PhiSumClassification c = classify_phi_sum(fp, ic, horizon, intervals);
        if (!c.truncated || 2.0 * horizon > max_horizon) return c;
        horizon *= 2.0;
    }
}

}  // namespace pslab
