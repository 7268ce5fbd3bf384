#include "doctest.h"
#include "pslab/errors.hpp"
#include "pslab/simulation.hpp"
#include "support.hpp"

using namespace pslab;

namespace {

SimConfig coarse(double T = 4.0) {
    SimConfig c;
    c.target_h = 0.25;
    c.dt = 0.08;
    c.T = T;
    c.domain = test::single_cell();
    return c;
}

double l2(const SparseMatrix& M, const NodalField& u) { return std::sqrt(M.quadratic_form(u.values)); }

}  // namespace

TEST_CASE("nondimensionalization") {
    const double r = 2.5, tau0 = 3.0;
    const Nondimensional n = nondimensionalize(r, 20 * r, 4 * r * r / tau0, 0.7, tau0);
    CHECK(n.D == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(n.half_width == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(n.cell_radius == 0.5);
    CHECK(n.length_scale == doctest::Approx(1.0 / (2 * r)));
    CHECK(n.flux_density == 1.0);
    for (double rr : {0.1, 1.0, 7.0}) {
        const Nondimensional m = nondimensionalize(rr, 10.0, 0.3, 2.0, 0.5);
        CHECK(m.source_rate == doctest::Approx(M_PI).epsilon(1e-14));
        CHECK(0.7 * tau0 / (2 * r * n.u_star) == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(nondimensionalize(-1.0, 10.0, 1.0, 1.0, 1.0), InvalidInput);
}

TEST_CASE("configuration checks") {
    SimConfig c = coarse();
    CHECK_NOTHROW(c.validate());
    CHECK(c.steps() == 50);
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = coarse();
    c.T = 0.01;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = coarse();
    c.ic_kind = ICKind::GaussianExtension;
    c.domain.cells.clear();
    c.gaussian = {{1.0, 1.0, 0.0}};
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = coarse();
    c.D = 20.0;
    const auto w = c.warnings();
    CHECK_FALSE(w.empty());
    CHECK(coarse().warnings().empty());
}

TEST_CASE("initial conditions") {
    const SimConfig base = coarse();
    const MeshPair pair = generate_mesh_pair(base.domain, base.target_h, base.segments);
    SUBCASE("zero") {
        const auto [s, p] = build_initial_condition(pair, base);
        for (double v : s.values) CHECK(v == 0.0);
        for (double v : p.values) CHECK(v == 0.0);
        CHECK(s.mesh_id == pair.exclusion.id);
        CHECK(p.mesh_id == pair.full.id);
    }
    SUBCASE("Gaussian extension over a constant environment") {
        SimConfig c = base;
        c.ic_kind = ICKind::GaussianExtension;
        c.background = 10.0;
        c.gaussian = {{53.4, 3.57, 10.0}};
        const auto [s, p] = build_initial_condition(pair, c);
        for (double v : s.values) CHECK(v == 10.0);
        CHECK(p[pair.center_nodes[0]] == doctest::Approx(53.4 / (4 * M_PI * 0.1 * 3.57)).epsilon(1e-14));
        for (int v : pair.polygon_nodes[0]) CHECK(p[v] == 10.0);
        for (std::size_t i = 0; i < pair.node_map.size(); ++i) CHECK(p[pair.node_map[i]] == 10.0);
    }
}

TEST_CASE("discrete mass balance") {
    const SimConfig c = coarse();
    const MeshPair pair = generate_mesh_pair(c.domain, c.target_h, c.segments);
    const TimeSeries s = run_spatial_exclusion(pair, c);
    const TimeSeries p = run_point_source(pair, c);
    const SparseMatrix Ms = assemble_mass(pair.exclusion), Mp = assemble_mass(pair.full);
    const double perim = regular_polygon_perimeter(0.5, 64);
    REQUIRE(s.times.size() == 51);
    for (std::size_t n = 1; n < s.times.size(); ++n) {
        const double expect_s = s.times[n] * perim, expect_p = p.times[n] * M_PI;
        CHECK(std::fabs(total_mass(Ms, s.fields[n].values) - expect_s) < 1e-8 * expect_s);
        CHECK(std::fabs(total_mass(Mp, p.fields[n].values) - expect_p) < 1e-8 * expect_p);
        CHECK(s.times[n] == doctest::Approx(n * c.dt).epsilon(1e-15));
    }
}

TEST_CASE("no flux keeps a constant state") {
    SimConfig c = coarse(2.0);
    c.domain.cells[0].flux_density = 0.0;
    c.ic_kind = ICKind::Constant;
    c.background = 3.0;
    const MeshPair pair = generate_mesh_pair(c.domain, c.target_h, c.segments);
    const TimeSeries s = run_spatial_exclusion(pair, c);
    for (const auto& f : s.fields)
        for (double v : f.values) CHECK(v == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("environment norm grows under constant influx") {
    const SimConfig c = coarse(8.0);
    const MeshPair pair = generate_mesh_pair(c.domain, c.target_h, c.segments);
    const TimeSeries s = run_spatial_exclusion(pair, c);
    const SparseMatrix M = assemble_mass(pair.exclusion);
    for (std::size_t n = 1; n < s.fields.size(); ++n) CHECK(l2(M, s.fields[n]) > l2(M, s.fields[n - 1]));
}

TEST_CASE("snapshot stride") {
    SimConfig c = coarse(2.0);
    c.stride = 5;
    const MeshPair pair = generate_mesh_pair(c.domain, c.target_h, c.segments);
    const TimeSeries s = run_spatial_exclusion(pair, c);
    REQUIRE(s.times.size() == 6);
    for (std::size_t k = 1; k < s.times.size(); ++k) CHECK(s.times[k] - s.times[k - 1] == doctest::Approx(0.4));
}

TEST_CASE("cell order does not change the solutions") {
    SimConfig a = coarse(2.0);
    a.domain.cells = {{{-3.5, -4.0}, 0.5, 1.0}, {{3.5, 4.0}, 0.5, 1.0}};
    SimConfig b = a;
    std::swap(b.domain.cells[0], b.domain.cells[1]);
    const MeshPair pa = generate_mesh_pair(a.domain, a.target_h, a.segments);
    const MeshPair pb = generate_mesh_pair(b.domain, b.target_h, b.segments);
    const TimeSeries sa = run_spatial_exclusion(pa, a), sb = run_spatial_exclusion(pb, b);
    const TimeSeries qa = run_point_source(pa, a), qb = run_point_source(pb, b);
    CHECK(sa.fields.back().values == sb.fields.back().values);
    CHECK(qa.fields.back().values == qb.fields.back().values);
}

TEST_CASE("point source matches the free-space Duhamel integral at short times") {
    // D = 1 so the annulus sits inside the diffusion length sqrt(4 D t) = 1.26.
    SimConfig c;
    c.D = 1.0;
    c.T = 0.4;
    c.domain = test::single_cell();
    const MeshPair pair = generate_mesh_pair(c.domain, c.target_h, c.segments);
    const TimeSeries p = run_point_source(pair, c);
    const double t = p.times.back();
    double worst = 0.0;
    for (std::size_t i = 0; i < pair.full.node_count(); ++i) {
        const double r = distance(pair.full.nodes[i], c.domain.cells[0].center);
        if (r < 0.75 || r > 1.5) continue;
        const double ref = test::simpson(
            [&](double s) { return s < t ? M_PI * fundamental_solution(r, t - s, c.D) : 0.0; }, 0.0, t, 1e-12);
        worst = std::max(worst, std::fabs(p.fields.back()[i] - ref) / ref);
    }
    CHECK(worst < 0.10);
}

TEST_CASE("halving the time step") {
    SimConfig c;
    c.domain = test::single_cell();
    c.stride = c.steps();
    SimConfig half = c;
    half.dt = c.dt / 2;
    half.stride = half.steps();
    const MeshPair pair = generate_mesh_pair(c.domain, c.target_h, c.segments);
    const SparseMatrix Ms = assemble_mass(pair.exclusion), Mp = assemble_mass(pair.full);
    const SparseMatrix Ks = assemble_stiffness(pair.exclusion), Kp = assemble_stiffness(pair.full);
    const NodalField s1 = run_spatial_exclusion(pair, c).fields.back(), s2 = run_spatial_exclusion(pair, half).fields.back();
    const NodalField p1 = run_point_source(pair, c).fields.back(), p2 = run_point_source(pair, half).fields.back();
    CHECK(std::fabs(l2(Ms, s1) / l2(Ms, s2) - 1.0) < 0.02);
    CHECK(std::fabs(l2(Mp, p1) / l2(Mp, p2) - 1.0) < 0.02);
    CHECK(std::fabs(std::sqrt(Ks.quadratic_form(s1.values) / Ks.quadratic_form(s2.values)) - 1.0) < 0.02);
    CHECK(std::fabs(std::sqrt(Kp.quadratic_form(p1.values) / Kp.quadratic_form(p2.values)) - 1.0) < 0.02);
}
