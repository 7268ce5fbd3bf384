#include "pslab/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "pslab/errors.hpp"

namespace pslab {

NodalField restrict_field(const NodalField& full, const MeshPair& pair) {
    check_field(full, pair.full);
    std::vector<double> v(pair.node_map.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = full.values[static_cast<std::size_t>(pair.node_map[i])];
    return {std::move(v), pair.exclusion.id};
}

NodalField extend_by_zero(const NodalField& exclusion, const MeshPair& pair) {
    check_field(exclusion, pair.exclusion);
    std::vector<double> v(pair.full.node_count(), 0.0);
    for (std::size_t i = 0; i < pair.node_map.size(); ++i) v[static_cast<std::size_t>(pair.node_map[i])] = exclusion.values[i];
    return {std::move(v), pair.full.id};
}

NormDiff norm_diff(const NodalField& u_s, const NodalField& u_p_restricted, const SparseMatrix& M_excl,
                   const SparseMatrix& K_excl) {
    if (u_s.mesh_id != u_p_restricted.mesh_id || u_s.size() != u_p_restricted.size() || u_s.size() != M_excl.dimension())
        throw InvalidInput("norm_diff: fields must live on the same exclusion mesh");
    std::vector<double> w(u_s.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = u_s.values[i] - u_p_restricted.values[i];
    const double l2sq = std::max(0.0, M_excl.quadratic_form(w));
    const double gsq = std::max(0.0, K_excl.quadratic_form(w));
    return {std::sqrt(l2sq), std::sqrt(gsq), std::sqrt(l2sq + gsq)};
}

// ---------------------------------------------------------------------------

namespace {
std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}
}  // namespace

BoundaryFluxOperator::BoundaryFluxOperator(const MeshPair& pair) : mesh_(pair.exclusion) {
    const std::size_t ncells = pair.center_nodes.size();
    cells_.resize(ncells);
    std::unordered_map<std::uint64_t, int> tri_of_edge;
    tri_of_edge.reserve(mesh_.triangle_count() * 3);
    for (std::size_t t = 0; t < mesh_.triangle_count(); ++t) {
        if (!mesh_.regions[t].is_environment()) continue;
        const auto& tri = mesh_.triangles[t];
        for (int k = 0; k < 3; ++k)
            tri_of_edge.emplace(edge_key(tri[static_cast<std::size_t>(k)], tri[static_cast<std::size_t>((k + 1) % 3)]),
                                static_cast<int>(t));
    }
    for (std::size_t e = 0; e < mesh_.boundary_edges.size(); ++e) {
        const BoundaryEdge& be = mesh_.boundary_edges[e];
        if (be.marker.is_outer()) continue;
        const auto ci = static_cast<std::size_t>(be.marker.cell);
        if (ci >= ncells) throw AssemblyError("boundary edge refers to an unknown cell");
        CellEdges& c = cells_[ci];
        const Point a = mesh_.nodes[static_cast<std::size_t>(be.nodes[0])];
        const Point b = mesh_.nodes[static_cast<std::size_t>(be.nodes[1])];
        const double len = distance(a, b);
        const Point center = pair.full.nodes[static_cast<std::size_t>(pair.center_nodes[ci])];
        Point n{-(b.y - a.y) / len, (b.x - a.x) / len};
        if (dot(n, center - 0.5 * (a + b)) < 0.0) n = -1.0 * n;
        auto it = tri_of_edge.find(edge_key(be.nodes[0], be.nodes[1]));
        if (it == tri_of_edge.end())
            throw AssemblyError("cell " + std::to_string(ci) + " boundary edge " + std::to_string(e) +
                                " has no environment-side triangle");
        c.nodes.push_back(be.nodes);
        c.length.push_back(len);
        c.inward.push_back(n);
        c.triangle.push_back(it->second);
    }
    for (CellEdges& c : cells_) {
        std::unordered_map<int, int> slot;
        for (std::size_t e = 0; e < c.nodes.size(); ++e) {
            std::array<int, 2> s{};
            for (int k = 0; k < 2; ++k) {
                const int v = c.nodes[e][static_cast<std::size_t>(k)];
                auto [it, inserted] = slot.emplace(v, static_cast<int>(c.lumped_nodes.size()));
                if (inserted) {
                    c.lumped_nodes.push_back(v);
                    c.lumped_length.push_back(0.0);
                }
                s[static_cast<std::size_t>(k)] = it->second;
                c.lumped_length[static_cast<std::size_t>(it->second)] += 0.5 * c.length[e];
            }
            c.edge_slots.push_back(s);
        }
    }
}

double BoundaryFluxOperator::perimeter(std::size_t cell) const {
    double s = 0.0;
    for (double l : cells_.at(cell).length) s += l;
    return s;
}

double BoundaryFluxOperator::total_perimeter() const {
    double s = 0.0;
    for (std::size_t i = 0; i < cells_.size(); ++i) s += perimeter(i);
    return s;
}

std::vector<double> BoundaryFluxOperator::adjacent_gradient(const NodalField& u, std::size_t cell, double D) const {
    check_field(u, mesh_);
    const CellEdges& c = cells_.at(cell);
    std::vector<double> q(c.nodes.size());
    for (std::size_t e = 0; e < q.size(); ++e) {
        const auto& tri = mesh_.triangles[static_cast<std::size_t>(c.triangle[e])];
        const double twice_area = 2.0 * mesh_.signed_area(static_cast<std::size_t>(c.triangle[e]));
        Point g{};
        for (int k = 0; k < 3; ++k) {
            const Point p1 = mesh_.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)])];
            const Point p2 = mesh_.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 2) % 3)])];
            const Point grad_phi{-(p2.y - p1.y) / twice_area, (p2.x - p1.x) / twice_area};
            g = g + u.values[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])] * grad_phi;
        }
        q[e] = D * dot(g, c.inward[e]);
    }
    return q;
}

std::vector<double> BoundaryFluxOperator::consistent(const NodalField& u_new, const NodalField& u_old, std::size_t cell,
                                                     double D, double dt, const SparseMatrix& M_excl,
                                                     const SparseMatrix& K_excl) const {
    check_field(u_new, mesh_);
    check_field(u_old, mesh_);
    const CellEdges& c = cells_.at(cell);
    auto row = [](const SparseMatrix& A, int j, const std::vector<double>& x) {
        double s = 0.0;
        const auto& off = A.row_offsets();
        for (std::size_t k = off[static_cast<std::size_t>(j)]; k < off[static_cast<std::size_t>(j) + 1]; ++k)
            s += A.values()[k] * x[static_cast<std::size_t>(A.columns()[k])];
        return s;
    };
    std::vector<double> nodal(c.lumped_nodes.size());
    for (std::size_t s = 0; s < nodal.size(); ++s) {
        const int j = c.lumped_nodes[s];
        const double f = (row(M_excl, j, u_new.values) - row(M_excl, j, u_old.values)) / dt + D * row(K_excl, j, u_new.values);
        nodal[s] = f / c.lumped_length[s];
    }
    std::vector<double> q(c.nodes.size());
    for (std::size_t e = 0; e < q.size(); ++e)
        q[e] = 0.5 * (nodal[static_cast<std::size_t>(c.edge_slots[e][0])] + nodal[static_cast<std::size_t>(c.edge_slots[e][1])]);
    return q;
}

std::vector<double> BoundaryFluxOperator::edge_average(const NodalField& u, std::size_t cell) const {
    const CellEdges& c = cells_.at(cell);
    std::vector<double> v(c.nodes.size());
    for (std::size_t e = 0; e < v.size(); ++e)
        v[e] = 0.5 * (u.values[static_cast<std::size_t>(c.nodes[e][0])] + u.values[static_cast<std::size_t>(c.nodes[e][1])]);
    return v;
}

std::vector<double> boundary_flux(const NodalField& u_p_full, const MeshPair& pair, int cell, double D) {
    if (cell < 0 || static_cast<std::size_t>(cell) >= pair.center_nodes.size())
        throw InvalidInput("boundary_flux: unknown cell");
    const BoundaryFluxOperator op(pair);
    return op.adjacent_gradient(restrict_field(u_p_full, pair), static_cast<std::size_t>(cell), D);
}

std::vector<double> c_star(const std::vector<std::vector<double>>& flux_history, const std::vector<double>& edge_lengths,
                           double phi, double dt) {
    std::vector<double> out;
    out.reserve(flux_history.size());
    double acc = 0.0, prev = 0.0;
    for (std::size_t m = 0; m < flux_history.size(); ++m) {
        const auto& q = flux_history[m];
        if (q.size() != edge_lengths.size()) throw InvalidInput("c_star: flux and edge counts differ");
        double integrand = 0.0;
        for (std::size_t e = 0; e < q.size(); ++e) integrand += (phi - q[e]) * (phi - q[e]) * edge_lengths[e];
        if (m > 0) acc += 0.5 * dt * (prev + integrand);
        out.push_back(acc);
        prev = integrand;
    }
    return out;
}

double relative_error(double numerator_integral, double perimeter, double env_area, double C, double emission_rate,
                      double t) {
    const double den = env_area * C + emission_rate * t;
    if (!(den > 0.0)) throw InvalidInput("relative error undefined: zero environmental mass (C = 0 at t = 0)");
    return std::sqrt(perimeter) * numerator_integral / den;
}

double IdentityTerms::magnitude() const { return std::abs(energy_rate) + std::abs(dissipation) + std::abs(boundary); }

IdentityTerms energy_identity_terms(const NodalField& w_prev, const NodalField& w_now, const SparseMatrix& M_excl,
                                    const SparseMatrix& K_excl, double D, double dt,
                                    const std::vector<double>& w_on_edges, const std::vector<double>& flux_deviation,
                                    const std::vector<double>& edge_lengths) {
    if (w_on_edges.size() != flux_deviation.size() || w_on_edges.size() != edge_lengths.size())
        throw InvalidInput("energy identity: edge data sizes differ");
    IdentityTerms t;
    t.energy_rate = 0.5 * (M_excl.quadratic_form(w_now.values) - M_excl.quadratic_form(w_prev.values)) / dt;
    t.dissipation = D * K_excl.quadratic_form(w_now.values);
    for (std::size_t e = 0; e < edge_lengths.size(); ++e) t.boundary += w_on_edges[e] * flux_deviation[e] * edge_lengths[e];
    return t;
}

// ---------------------------------------------------------------------------

namespace {
void put(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    os << buf;
}
}  // namespace

void write_error_csv(std::ostream& os, const ErrorSeries& series) {
    os << "t,l2,h1,gradl2,c_star,rel_err,mass_s,mass_p,identity_residual\n";
    for (const auto& r : series.rows) {
        for (double v : {r.t, r.l2, r.h1, r.grad_l2, r.c_star, r.rel_err, r.mass_s, r.mass_p}) {
            put(os, v);
            os << ',';
        }
        put(os, r.identity.residual());
        os << '\n';
    }
}

void write_identity_csv(std::ostream& os, const ErrorSeries& series) {
    os << "t,energy_rate,dissipation,boundary,residual\n";
    for (const auto& r : series.rows) {
        for (double v : {r.t, r.identity.energy_rate, r.identity.dissipation, r.identity.boundary}) {
            put(os, v);
            os << ',';
        }
        put(os, r.identity.residual());
        os << '\n';
    }
}

void write_cell_cstar_csv(std::ostream& os, const ErrorSeries& series) {
    const std::size_t ncells = series.c_star_per_cell.empty() ? 0 : series.c_star_per_cell.front().size();
    os << 't';
    for (std::size_t i = 0; i < ncells; ++i) os << ",cell" << i;
    os << '\n';
    for (std::size_t r = 0; r < series.rows.size(); ++r) {
        put(os, series.rows[r].t);
        for (double v : series.c_star_per_cell[r]) {
            os << ',';
            put(os, v);
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------------------

MetricsAccumulator::MetricsAccumulator(const MeshPair& pair, const SimConfig& config, const SparseMatrix& M_excl,
                                       const SparseMatrix& K_excl, FluxRecovery recovery)
    : pair_(pair), config_(config), M_(M_excl), K_(K_excl), recovery_(recovery), op_(pair) {
    std::vector<double> ones(pair.exclusion.node_count(), 1.0);
    env_area_ = M_.quadratic_form(ones);
    for (const auto& c : config.domain.cells) emission_rate_ += 2.0 * M_PI * c.radius * c.flux_density;
    cstar_cell_.assign(op_.cell_count(), 0.0);
}

std::vector<std::vector<double>> MetricsAccumulator::fluxes(const NodalField& u_p, const NodalField* u_p_old) const {
    std::vector<std::vector<double>> q(op_.cell_count());
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (u_p_old && recovery_ == FluxRecovery::Consistent)
            q[i] = op_.consistent(u_p, *u_p_old, i, config_.D, config_.dt, M_, K_);
        else
            q[i] = op_.adjacent_gradient(u_p, i, config_.D);
    }
    return q;
}

std::vector<double> MetricsAccumulator::deviation_sq(const std::vector<std::vector<double>>& q) {
    std::vector<double> out(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double phi = config_.domain.cells[i].flux_density;
        const auto& len = op_.edge_lengths(i);
        double sq = 0.0, l1 = 0.0, perim = 0.0;
        for (std::size_t e = 0; e < len.size(); ++e) {
            const double d = phi - q[i][e];
            sq += d * d * len[e];
            l1 += std::abs(d) * len[e];
            perim += len[e];
        }
        out[i] = sq;
        const double bound = std::sqrt(perim) * std::sqrt(sq);
        if (bound > 0.0 || l1 > 0.0) worst_l1l2_ = std::max(worst_l1l2_, (l1 - bound) / std::max(bound, 1e-300));
    }
    return out;
}

void MetricsAccumulator::append(double t, const NodalField& u_s, const NodalField& u_p, const IdentityTerms& id) {
    ErrorRow r;
    r.t = t;
    const NormDiff nd = norm_diff(u_s, u_p, M_, K_);
    r.l2 = nd.l2;
    r.grad_l2 = nd.grad_l2;
    r.h1 = nd.h1;
    for (double v : cstar_cell_) r.c_star += v;
    const double C = config_.ic_kind == ICKind::Zero ? 0.0 : config_.background;
    const double den = env_area_ * C + emission_rate_ * t;
    r.rel_err = den > 0.0 ? relative_error(dev_integral_, op_.total_perimeter(), env_area_, C, emission_rate_, t) : 0.0;
    r.mass_s = total_mass(M_, u_s.values);
    r.mass_p = total_mass(M_, u_p.values);
    r.identity = id;
    series_.rows.push_back(r);
    series_.c_star_per_cell.push_back(cstar_cell_);
}

void MetricsAccumulator::start(const NodalField& u_s0, const NodalField& u_p0_full) {
    check_field(u_s0, pair_.exclusion);
    NodalField up = restrict_field(u_p0_full, pair_);
    step_ = 0;
    series_ = {};
    dev_integral_ = 0.0;
    std::fill(cstar_cell_.begin(), cstar_cell_.end(), 0.0);
    dev_sq_prev_ = deviation_sq(fluxes(up, nullptr));
    double total = 0.0;
    for (double v : dev_sq_prev_) total += v;
    dev_norm_prev_ = std::sqrt(total);
    std::vector<double> w(u_s0.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = u_s0.values[i] - up.values[i];
    w_prev_ = NodalField(std::move(w), pair_.exclusion.id);
    append(0.0, u_s0, up, IdentityTerms{});
    up_prev_ = std::move(up);
}

void MetricsAccumulator::step(const NodalField& u_s, const NodalField& u_p_full, bool record) {
    check_field(u_s, pair_.exclusion);
    NodalField up = restrict_field(u_p_full, pair_);
    ++step_;
    const double dt = config_.dt;
    const auto q = fluxes(up, &up_prev_);
    const auto dsq = deviation_sq(q);
    double total = 0.0;
    for (std::size_t i = 0; i < dsq.size(); ++i) {
        cstar_cell_[i] += 0.5 * dt * (dev_sq_prev_[i] + dsq[i]);
        total += dsq[i];
    }
    const double dnorm = std::sqrt(total);
    dev_integral_ += 0.5 * dt * (dev_norm_prev_ + dnorm);

    std::vector<double> wv(u_s.size());
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = u_s.values[i] - up.values[i];
    NodalField w(std::move(wv), pair_.exclusion.id);
    if (record) {
        std::vector<double> w_edges, dev, len;
        for (std::size_t i = 0; i < op_.cell_count(); ++i) {
            const auto we = op_.edge_average(w, i);
            const auto& l = op_.edge_lengths(i);
            const double phi = config_.domain.cells[i].flux_density;
            for (std::size_t e = 0; e < we.size(); ++e) {
                w_edges.push_back(we[e]);
                dev.push_back(phi - q[i][e]);
                len.push_back(l[e]);
            }
        }
        const IdentityTerms id = energy_identity_terms(w_prev_, w, M_, K_, config_.D, dt, w_edges, dev, len);
        append(step_ * dt, u_s, up, id);
    }
    dev_sq_prev_ = dsq;
    dev_norm_prev_ = dnorm;
    w_prev_ = std::move(w);
    up_prev_ = std::move(up);
}

ErrorSeries error_series(const TimeSeries& s, const TimeSeries& p, const MeshPair& pair, const SimConfig& config,
                         FluxRecovery recovery) {
    if (s.times.size() != p.times.size() || s.times.empty()) throw InvalidInput("error_series: series lengths differ");
    for (std::size_t k = 0; k < s.times.size(); ++k)
        if (s.times[k] != p.times[k]) throw InvalidInput("error_series: series are not aligned in time");
    if (recovery == FluxRecovery::Consistent && config.stride != 1)
        throw InvalidInput("consistent flux recovery needs every step (stride 1)");
    SimConfig c = config;
    c.dt = config.dt * config.stride;
    const SparseMatrix M = assemble_mass(pair.exclusion);
    const SparseMatrix K = assemble_stiffness(pair.exclusion);
    MetricsAccumulator acc(pair, c, M, K, recovery);
    acc.start(s.fields.front(), p.fields.front());
    for (std::size_t k = 1; k < s.times.size(); ++k) acc.step(s.fields[k], p.fields[k], true);
    return acc.take();
}

ComparisonResult run_comparison(const MeshPair& pair, const SimConfig& config, FluxRecovery recovery,
                                const std::function<void(int, const NodalField&, const NodalField&)>& on_record) {
    config.validate();
    auto [ic_s, ic_p] = build_initial_condition(pair, config);
    ModelStepper s(ModelKind::SpatialExclusion, pair, config, std::move(ic_s));
    ModelStepper p(ModelKind::PointSource, pair, config, std::move(ic_p));
    MetricsAccumulator acc(pair, config, s.mass(), s.stiffness(), recovery);
    acc.start(s.state(), p.state());
    if (on_record) on_record(0, s.state(), p.state());

    ComparisonResult res;
    res.warnings = config.warnings();
    res.stats.cg_cap = s.integrator().iteration_cap();
    res.stats.influx_s = s.influx_rate();
    res.stats.influx_p = p.influx_rate();
    const std::vector<double> ws = s.mass() * std::vector<double>(pair.exclusion.node_count(), 1.0);
    const std::vector<double> wp = p.mass() * std::vector<double>(pair.full.node_count(), 1.0);
    auto mass = [](const std::vector<double>& w, const NodalField& u) {
        double m = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * u.values[i];
        return m;
    };
    const double m0s = mass(ws, s.state()), m0p = mass(wp, p.state());
    const int n = config.steps();
    for (int k = 1; k <= n; ++k) {
        s.advance();
        p.advance();
        const double t = k * config.dt;
        const double line_s = m0s + t * res.stats.influx_s;
        const double line_p = m0p + t * res.stats.influx_p;
        res.stats.max_mass_drift_s =
            std::max(res.stats.max_mass_drift_s, std::abs(mass(ws, s.state()) - line_s) / std::max(std::abs(line_s), 1.0));
        res.stats.max_mass_drift_p =
            std::max(res.stats.max_mass_drift_p, std::abs(mass(wp, p.state()) - line_p) / std::max(std::abs(line_p), 1.0));
        const bool record = k % config.stride == 0;
        acc.step(s.state(), p.state(), record);
        if (record && on_record) on_record(k, s.state(), p.state());
    }
    res.stats.max_cg_iterations_s = s.integrator().max_iterations_seen();
    res.stats.max_cg_iterations_p = p.integrator().max_iterations_seen();
    res.stats.worst_l1_l2_violation = acc.worst_l1_l2_violation();
    res.series = acc.take();
    return res;
}

}  // namespace pslab
