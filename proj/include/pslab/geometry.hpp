#pragma once

#include <cmath>
#include <vector>

namespace pslab {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Circular mass-emitting cell. All quantities are dimensionless
/// (lengths in cell diameters, flux density scaled to 1 by default).
struct CellSpec {
    Point center;
    double radius = 0.5;
    double flux_density = 1.0;

    /// Total emission rate of the equivalent point source, 2*pi*R*phi.
    double source_rate() const { return 2.0 * M_PI * radius * flux_density; }
};

/// Square domain [-half_width, half_width]^2 containing disjoint cells.
struct DomainSpec {
    double half_width = 10.0;
    std::vector<CellSpec> cells;

    double area() const { return 4.0 * half_width * half_width; }
};

/// Smallest distance between two cell boundaries, or between a cell boundary
/// and the outer square. Infinity for an empty domain.
double min_clearance(const DomainSpec& domain);

/// Throws InvalidInput when a cell has non-positive radius, negative flux,
/// touches the outer boundary, or touches another cell.
void validate_domain(const DomainSpec& domain);

/// Area of the regular n-gon inscribed in a circle of the given radius.
inline double regular_polygon_area(double radius, int segments) {
    return 0.5 * segments * radius * radius * std::sin(2.0 * M_PI / segments);
}

/// Perimeter of the regular n-gon inscribed in a circle of the given radius.
inline double regular_polygon_perimeter(double radius, int segments) {
    return 2.0 * segments * radius * std::sin(M_PI / segments);
}

}  // namespace pslab
