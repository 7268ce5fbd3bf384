#include <sstream>

#include "doctest.h"
#include "pslab/errors.hpp"
#include "pslab/metrics.hpp"
#include "support.hpp"

using namespace pslab;

namespace {

struct Fixture {
    SimConfig config;
    MeshPair pair;
    SparseMatrix M, K;
    Fixture() {
        config.target_h = 0.25;
        config.dt = 0.08;
        config.T = 4.0;
        config.domain = test::single_cell();
        pair = generate_mesh_pair(config.domain, config.target_h, config.segments);
        M = assemble_mass(pair.exclusion);
        K = assemble_stiffness(pair.exclusion);
    }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "restriction and zero extension") {
    NodalField full = NodalField::constant(pair.full, 0.0);
    for (std::size_t i = 0; i < pair.full.node_count(); ++i) full[i] = pair.full.nodes[i].x * pair.full.nodes[i].y;
    const NodalField r = restrict_field(full, pair);
    CHECK(r.mesh_id == pair.exclusion.id);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == full[pair.node_map[i]]);
    const NodalField z = extend_by_zero(r, pair);
    CHECK(z[pair.center_nodes[0]] == 0.0);
    CHECK(restrict_field(z, pair).values == r.values);
    CHECK_THROWS_AS(restrict_field(r, pair), InvalidInput);
}

TEST_CASE_FIXTURE(Fixture, "norm differences") {
    NodalField a = NodalField::constant(pair.exclusion, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::sin(pair.exclusion.nodes[i].x);
    const NormDiff same = norm_diff(a, a, M, K);
    CHECK(same.l2 == 0.0);
    CHECK(same.h1 == 0.0);

    NodalField b = a;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += pair.exclusion.nodes[i].x;  // w = -x
    const NormDiff d = norm_diff(a, b, M, K);
    const double area = validate_mesh(pair.exclusion).environment_area;
    CHECK(d.grad_l2 == doctest::Approx(std::sqrt(area)).epsilon(1e-12));
    CHECK(d.h1 * d.h1 == doctest::Approx(d.l2 * d.l2 + d.grad_l2 * d.grad_l2).epsilon(1e-14));
}

TEST_CASE_FIXTURE(Fixture, "adjacent-gradient flux of a linear field is exact") {
    const BoundaryFluxOperator op(pair);
    NodalField u = NodalField::constant(pair.exclusion, 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = 2.0 * pair.exclusion.nodes[i].x - pair.exclusion.nodes[i].y;
    const auto q = op.adjacent_gradient(u, 0, 0.1);
    const auto edges = pair.exclusion.edges_with(BoundaryMarker::cell_boundary(0));
    REQUIRE(q.size() == edges.size());
    const Point c = config.domain.cells[0].center;
    for (std::size_t e = 0; e < q.size(); ++e) {
        const Point mid = 0.5 * (pair.exclusion.nodes[edges[e].nodes[0]] + pair.exclusion.nodes[edges[e].nodes[1]]);
        const Point n = (1.0 / distance(c, mid)) * (c - mid);  // into the cell
        CHECK(q[e] == doctest::Approx(0.1 * (2.0 * n.x - n.y)).epsilon(1e-10));
    }
    double perim = 0.0;
    for (double l : op.edge_lengths(0)) perim += l;
    CHECK(perim == doctest::Approx(regular_polygon_perimeter(0.5, 64)).epsilon(1e-14));
}

TEST_CASE_FIXTURE(Fixture, "radial field emits outward") {
    // -log(r) decreases away from the cell: positive flux into the environment.
    NodalField u = NodalField::constant(pair.full, 0.0);
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = -std::log(std::max(distance(pair.full.nodes[i], config.domain.cells[0].center), 0.5));
    const auto q = boundary_flux(u, pair, 0, 0.1);
    for (double v : q) {
        CHECK(v > 0.0);
        CHECK(v == doctest::Approx(0.1 / 0.5).epsilon(0.25));  // D / R up to O(h)
    }
    CHECK_THROWS_AS(boundary_flux(u, pair, 1, 0.1), InvalidInput);
}

TEST_CASE_FIXTURE(Fixture, "consistent flux recovers the prescribed density") {
    const auto load = assemble_boundary_flux_load(pair.exclusion, BoundaryMarker::cell_boundary(0), 1.0);
    const BackwardEuler be(M, K, config.D, config.dt);
    std::vector<double> u0(pair.exclusion.node_count(), 0.0);
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = std::cos(pair.exclusion.nodes[i].y);
    const std::vector<double> u1 = be.step(u0, load);
    const BoundaryFluxOperator op(pair);
    const auto q = op.consistent({u1, pair.exclusion.id}, {u0, pair.exclusion.id}, 0, config.D, config.dt, M, K);
    for (double v : q) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("time-integrated deviation") {
    const std::vector<double> len = {0.5, 1.5};
    const std::vector<std::vector<double>> hist = {{1.0, 1.0}, {0.5, 0.5}, {0.5, 0.5}};
    const auto c = c_star(hist, len, 1.0, 0.1);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == doctest::Approx(0.5 * 0.1 * (0.0 + 0.25 * 2.0)));
    CHECK(c[2] == doctest::Approx(c[1] + 0.1 * 0.25 * 2.0));
    CHECK_THROWS_AS(c_star({{1.0}}, len, 1.0, 0.1), InvalidInput);
}

TEST_CASE("relative error normalization") {
    CHECK(relative_error(2.0, 4.0, 100.0, 0.0, M_PI, 1.0) == doctest::Approx(4.0 / M_PI));
    CHECK(relative_error(2.0, 4.0, 100.0, 0.1, 0.0, 0.0) == doctest::Approx(0.4));
    CHECK_THROWS_AS(relative_error(1.0, 1.0, 100.0, 0.0, M_PI, 0.0), InvalidInput);
}

TEST_CASE_FIXTURE(Fixture, "identity terms of a known pair") {
    const NodalField w0 = NodalField::constant(pair.exclusion, 1.0);
    const NodalField w1 = NodalField::constant(pair.exclusion, 2.0);
    const double area = validate_mesh(pair.exclusion).environment_area;
    const IdentityTerms t = energy_identity_terms(w0, w1, M, K, 0.1, 0.5, {2.0, 2.0}, {0.25, -0.5}, {1.0, 3.0});
    CHECK(t.energy_rate == doctest::Approx((4.0 - 1.0) * area / 1.0));
    CHECK(std::fabs(t.dissipation) < 1e-10);
    CHECK(t.boundary == doctest::Approx(2.0 * 0.25 * 1.0 + 2.0 * -0.5 * 3.0));
    CHECK(t.residual() == doctest::Approx(t.energy_rate + t.dissipation - t.boundary));
}

TEST_CASE_FIXTURE(Fixture, "lock-step comparison") {
    SimConfig c = config;
    c.ic_kind = ICKind::GaussianExtension;
    c.background = 10.0;
    c.gaussian = {{p0_from_continuity(3.6, 10.0, FluxParams::matched(0.5, 0.1, 1.0)), 3.6, 10.0}};
    int seen = 0;
    const ComparisonResult r = run_comparison(pair, c, FluxRecovery::Consistent,
                                              [&](int, const NodalField&, const NodalField&) { ++seen; });
    const auto& rows = r.series.rows;
    REQUIRE(rows.size() == 51);
    CHECK(seen == 51);
    CHECK(rows[0].t == 0.0);
    CHECK(rows.back().t == doctest::Approx(4.0));
    CHECK(r.stats.max_mass_drift_s < 1e-8);
    CHECK(r.stats.max_mass_drift_p < 1e-8);
    CHECK(r.stats.worst_l1_l2_violation <= 1e-12);
    CHECK(r.stats.max_cg_iterations_s <= r.stats.cg_cap);
    for (const auto& row : rows) {
        CHECK(row.h1 * row.h1 == doctest::Approx(row.l2 * row.l2 + row.grad_l2 * row.grad_l2).epsilon(1e-12));
        CHECK(row.c_star >= 0.0);
    }
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].c_star >= rows[k - 1].c_star);

    // Post-processing from stored series reproduces the streamed rows.
    const TimeSeries s = run_spatial_exclusion(pair, c), p = run_point_source(pair, c);
    const ErrorSeries e = error_series(s, p, pair, c);
    REQUIRE(e.rows.size() == rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(e.rows[k].l2 == doctest::Approx(rows[k].l2).epsilon(1e-12));
        CHECK(e.rows[k].c_star == doctest::Approx(rows[k].c_star).epsilon(1e-12));
        CHECK(e.rows[k].rel_err == doctest::Approx(rows[k].rel_err).epsilon(1e-12));
    }

    std::ostringstream csv;
    write_error_csv(csv, r.series);
    std::string header;
    std::istringstream in(csv.str());
    std::getline(in, header);
    CHECK(header == "t,l2,h1,gradl2,c_star,rel_err,mass_s,mass_p,identity_residual");
    int lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 51);
}

TEST_CASE_FIXTURE(Fixture, "consistent recovery needs every step") {
    SimConfig c = config;
    c.stride = 2;
    const TimeSeries s = run_spatial_exclusion(pair, c), p = run_point_source(pair, c);
    CHECK_THROWS_AS(error_series(s, p, pair, c, FluxRecovery::Consistent), InvalidInput);
    CHECK_NOTHROW(error_series(s, p, pair, c, FluxRecovery::AdjacentGradient));
}
