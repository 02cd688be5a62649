#include "adhesim/assembly.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>

namespace adhesim {

template <int N>
typename TimeSeries<N>::Value TimeSeries<N>::operator()(double time) const {
    if (t.empty()) return Value::Zero();
    if (t.size() == 1) return values.front();
    const double slack = 1e-12 * (1.0 + std::abs(time));
    if (time < t.front() - slack || time > t.back() + slack)
        throw AssemblyError("load table evaluated at t = " + std::to_string(time) + " outside its samples [" +
                            std::to_string(t.front()) + ", " + std::to_string(t.back()) + "]");
    if (time <= t.front()) return values.front();
    if (time >= t.back()) return values.back();
    std::size_t i = 1;
    while (t[i] < time) ++i;
    double w = (time - t[i - 1]) / (t[i] - t[i - 1]);
    return (1.0 - w) * values[i - 1] + w * values[i];
}

template <int N>
typename TimeSeries<N>::Value TimeSeries<N>::slope(double time) const {
    if (t.size() < 2) return Value::Zero();
    std::size_t i = 1;
    while (i + 1 < t.size() && t[i] < time) ++i;
    return (values[i] - values[i - 1]) / (t[i] - t[i - 1]);
}

template struct TimeSeries<1>;
template struct TimeSeries<2>;

namespace {

SpMat from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
    SpMat m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

}  // namespace

DiscreteOperators assemble_all(const TwoBodyMesh& mesh, const MaterialSet& mat) {
    validate(mesh);
    DiscreteOperators ops;
    ops.mesh = mesh;
    ops.imesh = interface_mesh(mesh);
    ops.jumps = jump_maps(mesh);
    ops.n_nodes = mesh.num_nodes();
    ops.n_dofs = mesh.num_dofs();
    ops.n_iface = mesh.num_interface();
    ops.n_seg = static_cast<int>(ops.imesh.segments.size());
    ops.n_elem = mesh.num_triangles();
    const int nd = ops.n_dofs, nn = ops.n_nodes, ni = ops.n_iface, ne = ops.n_elem;

    std::vector<Triplet> tm, tml, tk, tv, tb, ts, tdiv;
    ops.bulk_lumped = Vec::Zero(nn);
    ops.elements.resize(ne);
    for (int e = 0; e < ne; ++e) {
        ElementData& el = ops.elements[e];
        el.v = mesh.triangles[e];
        el.label = mesh.labels[e];
        const Vec2& p0 = mesh.nodes[el.v[0]];
        const Vec2& p1 = mesh.nodes[el.v[1]];
        const Vec2& p2 = mesh.nodes[el.v[2]];
        const double det = (p1 - p0).x() * (p2 - p0).y() - (p2 - p0).x() * (p1 - p0).y();
        const double hmax = std::max({(p1 - p0).squaredNorm(), (p2 - p1).squaredNorm(), (p0 - p2).squaredNorm()});
        if (!(std::abs(det) > 1e-12 * hmax))
            throw AssemblyError("degenerate triangle " + std::to_string(e) + " (zero area)");
        el.area = 0.5 * std::abs(det);
        const Vec2* p[3] = {&p0, &p1, &p2};
        for (int i = 0; i < 3; ++i) {
            const Vec2& pj = *p[(i + 1) % 3];
            const Vec2& pk = *p[(i + 2) % 3];
            el.grad(0, i) = (pj.y() - pk.y()) / det;
            el.grad(1, i) = (pk.x() - pj.x()) / det;
        }
        el.B.setZero();
        for (int i = 0; i < 3; ++i) {
            el.B(0, 2 * i) = el.grad(0, i);
            el.B(1, 2 * i + 1) = el.grad(1, i);
            el.B(2, 2 * i) = el.grad(1, i);
            el.B(2, 2 * i + 1) = el.grad(0, i);
        }
        const BulkMaterial& m = mat.body(el.label);
        Eigen::Matrix<double, 6, 6> ke = el.area * el.B.transpose() * m.elastic_voigt() * el.B;
        Eigen::Matrix<double, 6, 6> kv = el.area * el.B.transpose() * m.viscous_voigt() * el.B;
        int dof[6];
        for (int i = 0; i < 3; ++i) dof[2 * i] = 2 * el.v[i], dof[2 * i + 1] = 2 * el.v[i] + 1;
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b) {
                tk.emplace_back(dof[a], dof[b], ke(a, b));
                tv.emplace_back(dof[a], dof[b], kv(a, b));
            }
        for (int i = 0; i < 3; ++i) {
            ops.bulk_lumped[el.v[i]] += el.area / 3.0;
            for (int j = 0; j < 3; ++j)
                for (int c = 0; c < 2; ++c)
                    tm.emplace_back(2 * el.v[i] + c, 2 * el.v[j] + c, m.rho * el.area / 12.0 * (i == j ? 2.0 : 1.0));
            for (int c = 0; c < 2; ++c) tml.emplace_back(2 * el.v[i] + c, 2 * el.v[i] + c, m.rho * el.area / 3.0);
        }
        const double bs = m.B_scalar();
        for (int a = 0; a < 6; ++a) {
            double div = el.B(0, a) + el.B(1, a);
            if (div == 0.0) continue;
            tdiv.emplace_back(e, dof[a], div);
            for (int i = 0; i < 3; ++i) tb.emplace_back(el.v[i], dof[a], bs * el.area / 3.0 * div);
        }
        for (int r = 0; r < 3; ++r)
            for (int a = 0; a < 6; ++a)
                if (el.B(r, a) != 0.0) ts.emplace_back(3 * e + r, dof[a], el.B(r, a));
    }
    ops.M_mass = from_triplets(nd, nd, tm);
    ops.M_lumped = from_triplets(nd, nd, tml);
    ops.K_elast = from_triplets(nd, nd, tk);
    ops.K_visc = from_triplets(nd, nd, tv);
    ops.B_thermal = from_triplets(nn, nd, tb);
    ops.strain = from_triplets(3 * ne, nd, ts);
    ops.divergence = from_triplets(ne, nd, tdiv);

    ops.E_jump = ops.jumps.jump;
    ops.N_jump = ops.jumps.normal_jump;
    ops.T_jump = ops.jumps.tangential_scalar;
    ops.surface_grad = surface_gradient(ops.imesh);
    ops.S_lb = laplace_beltrami(ops.imesh, 1.0);
    ops.S_pi = mat.iface.kappa1 * ops.S_lb;
    ops.S_alpha = mat.iface.kappa2 * ops.S_lb;
    ops.Mi_lumped = ops.imesh.lumped;

    // monolithic gradient/difference operator
    std::vector<Triplet> tg;
    for (int s = 0; s < ops.n_seg; ++s) {
        auto [p, q] = ops.imesh.segments[s];
        tg.emplace_back(s, p, -1.0 / ops.imesh.lengths[s]);
        tg.emplace_back(s, q, 1.0 / ops.imesh.lengths[s]);
    }
    for (int i = 0; i < ni; ++i)
        for (int side = 1; side <= 2; ++side) {
            tg.emplace_back(ops.G_row_transfer(side, i), ni + mesh.node_pairs[i][side - 1], 1.0);
            tg.emplace_back(ops.G_row_transfer(side, i), i, -1.0);
        }
    for (int e = 0; e < ne; ++e)
        for (int r = 0; r < 2; ++r)
            for (int i = 0; i < 3; ++i)
                tg.emplace_back(ops.G_row_bulk(e) + r, ni + ops.elements[e].v[i], ops.elements[e].grad(r, i));
    ops.G_heat = from_triplets(ops.n_seg + 2 * ni + 2 * ne, ni + nn, tg);

    // y -> u with jump coordinates in the side-1 slots
    ops.pair_of_node.assign(nn, -1);
    std::vector<char> is_side1(nn, 0);
    for (int i = 0; i < ni; ++i) {
        ops.pair_of_node[mesh.node_pairs[i][0]] = i;
        ops.pair_of_node[mesh.node_pairs[i][1]] = i;
        is_side1[mesh.node_pairs[i][0]] = 1;
    }
    std::vector<Triplet> tt;
    for (int node = 0; node < nn; ++node) {
        if (!is_side1[node]) {
            tt.emplace_back(2 * node, 2 * node, 1.0);
            tt.emplace_back(2 * node + 1, 2 * node + 1, 1.0);
            continue;
        }
        const int i = ops.pair_of_node[node];
        const int b = mesh.node_pairs[i][1];
        const Vec2& n = mesh.normal_n2[i];
        const Vec2 t = tangent_of(n);
        for (int c = 0; c < 2; ++c) {
            tt.emplace_back(2 * node + c, 2 * b + c, 1.0);
            tt.emplace_back(2 * node + c, 2 * node, n[c]);
            tt.emplace_back(2 * node + c, 2 * node + 1, t[c]);
        }
    }
    ops.pair_transform = from_triplets(nd, nd, tt);

    ops.dirichlet_dof.assign(nd, 0);
    for (const auto& e : mesh.boundary_edges)
        if (e.tag == EdgeTag::Dirichlet)
            for (int node : {e.a, e.b}) ops.dirichlet_dof[2 * node] = ops.dirichlet_dof[2 * node + 1] = 1;
    return ops;
}

void validate(const LoadSet& loads) {
    for (const auto& h : loads.heat_flux.values)
        if (h[0] < 0) throw ModelError("heat flux samples must be non-negative");
    auto check = [](const std::vector<double>& t, const char* name) {
        for (std::size_t i = 1; i < t.size(); ++i)
            if (!(t[i] > t[i - 1])) throw ConfigError(std::string(name) + ": sample times must increase");
    };
    check(loads.body_force.t, "body_force");
    check(loads.traction.t, "traction");
    check(loads.dirichlet.t, "dirichlet");
    check(loads.heat_flux.t, "heat_flux");
}

Vec dirichlet_lift(double t, const LoadSet& loads, const DiscreteOperators& ops) {
    Vec lift = Vec::Zero(ops.n_dofs);
    if (loads.dirichlet.empty()) return lift;
    Vec2 ud = loads.dirichlet(t);
    for (int d = 0; d < ops.n_dofs; ++d)
        if (ops.dirichlet_dof[d]) lift[d] = ud[d % 2];
    return lift;
}

Vec assemble_load_vector(double t, const LoadSet& loads, const DiscreteOperators& ops) {
    Vec F = Vec::Zero(ops.n_dofs);
    if (!loads.body_force.empty()) {
        Vec2 g = loads.body_force(t);
        for (const auto& el : ops.elements)
            for (int i = 0; i < 3; ++i)
                for (int c = 0; c < 2; ++c) F[2 * el.v[i] + c] += g[c] * el.area / 3.0;
    }
    if (!loads.traction.empty()) {
        Vec2 f = loads.traction(t);
        for (const auto& e : ops.mesh.boundary_edges) {
            if (e.tag != EdgeTag::Neumann) continue;
            const Vec2 mid = 0.5 * (ops.mesh.nodes[e.a] + ops.mesh.nodes[e.b]);
            if (!loads.traction_window.contains(mid.x())) continue;
            const double len = (ops.mesh.nodes[e.a] - ops.mesh.nodes[e.b]).norm();
            for (int node : {e.a, e.b})
                for (int c = 0; c < 2; ++c) F[2 * node + c] += 0.5 * len * f[c];
        }
    }
    return F;
}

Vec assemble_F(double t, const LoadSet& loads, const DiscreteOperators& ops, const MaterialSet& mat) {
    (void)mat;
    Vec F = assemble_load_vector(t, loads, ops);
    if (!loads.dirichlet.empty()) {
        // shift to homogeneous data: the lift is piecewise linear in time, so
        // only its velocity and position enter
        Vec lift = dirichlet_lift(t, loads, ops);
        Vec2 s = loads.dirichlet.slope(t);
        Vec lift_rate = Vec::Zero(ops.n_dofs);
        for (int d = 0; d < ops.n_dofs; ++d)
            if (ops.dirichlet_dof[d]) lift_rate[d] = s[d % 2];
        F -= ops.K_elast * lift + ops.K_visc * lift_rate;
    }
    for (int d = 0; d < ops.n_dofs; ++d)
        if (ops.dirichlet_dof[d]) F[d] = 0.0;
    return F;
}

Vec assemble_heat_flux(double t0, double t1, double eps_h, const LoadSet& loads, const DiscreteOperators& ops) {
    Vec out = Vec::Zero(ops.heat_size());
    if (loads.heat_flux.empty()) return out;
    const double tau = t1 - t0;
    // time average of the regularised flux, split at table breakpoints
    std::vector<double> cuts{t0};
    for (double s : loads.heat_flux.breakpoints())
        if (s > t0 && s < t1) cuts.push_back(s);
    cuts.push_back(t1);
    double avg = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        for (int g = 0; g < 3; ++g) {
            double h = loads.heat_flux(a + kGaussX[g] * (b - a))[0];
            avg += kGaussW[g] * (b - a) * h / (1.0 + tau * eps_h * h);
        }
    }
    avg /= tau;
    for (const auto& e : ops.mesh.boundary_edges) {
        if (!loads.heat_flux_all_edges && e.tag != loads.heat_flux_tag) continue;
        const Vec2 mid = 0.5 * (ops.mesh.nodes[e.a] + ops.mesh.nodes[e.b]);
        if (!loads.heat_window.contains(mid.x())) continue;
        const double len = (ops.mesh.nodes[e.a] - ops.mesh.nodes[e.b]).norm();
        out[ops.n_iface + e.a] += 0.5 * len * avg;
        out[ops.n_iface + e.b] += 0.5 * len * avg;
    }
    return out;
}

SpMat heat_weights(const DiscreteOperators& ops, const MaterialSet& mat, const Vec& theta_A, const Vec& theta_B,
                   const Vec& jn, const Vec& alpha) {
    const InterfaceMaterial& a = mat.iface;
    std::vector<Triplet> t;
    for (int s = 0; s < ops.n_seg; ++s) {
        auto [p, q] = ops.imesh.segments[s];
        double k = 0.0;
        for (int g = 0; g < 3; ++g) {
            double th = (1.0 - kGaussX[g]) * theta_A[p] + kGaussX[g] * theta_A[q];
            k += kGaussW[g] * a.K_A * a.K_A_theta(th);
        }
        t.emplace_back(s, s, ops.imesh.lengths[s] * k);
    }
    for (int i = 0; i < ops.n_iface; ++i)
        for (int side = 1; side <= 2; ++side) {
            double k = a.transfer(side, jn[i], alpha[i], theta_A[i]);
            if (k < 0) throw ModelError("negative heat transfer coefficient at interface node " + std::to_string(i));
            int r = ops.G_row_transfer(side, i);
            t.emplace_back(r, r, ops.Mi_lumped[i] * k);
        }
    for (int e = 0; e < ops.n_elem; ++e) {
        const ElementData& el = ops.elements[e];
        const BulkMaterial& m = mat.body(el.label);
        double th = (theta_B[el.v[0]] + theta_B[el.v[1]] + theta_B[el.v[2]]) / 3.0;
        Mat2 K = el.area * m.K_B * m.K_B_theta(th);
        int r = ops.G_row_bulk(e);
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) t.emplace_back(r + x, r + y, K(x, y));
    }
    const int rows = static_cast<int>(ops.G_heat.rows());
    return from_triplets(rows, rows, t);
}

RegularisedSources heat_sources(const DiscreteOperators& ops, const MaterialSet& mat, const HeatStepInput& in) {
    const int ni = ops.n_iface, nn = ops.n_nodes;
    const double tau = in.tau;
    const RegularisationSet& reg = *in.reg;
    const StepRates& r = *in.rates;
    const FrozenCoefficients& fz = *in.frozen;
    const InterfaceMaterial& a = mat.iface;

    RegularisedSources src;
    src.interface = Vec::Zero(ni);
    src.bulk = Vec::Zero(nn);
    src.adiabatic = Vec::Zero(ni + nn);

    const Vec jvn = ops.N_jump * r.v_half;
    const Vec jvt = ops.T_jump * r.v_half;
    for (int i = 0; i < ni; ++i) {
        const double w = ops.Mi_lumped[i];
        const double fv = 1.0 / (1.0 + tau * reg.eps_v * (jvn[i] * jvn[i] + jvt[i] * jvt[i]));
        const double dpi = tau * r.pi_rate[i];
        const double fpi = 1.0 / (1.0 + reg.eps_pi * dpi * dpi / tau);
        const double dal = tau * r.alpha_rate[i];
        const double fal = 1.0 / (1.0 + reg.eps_alpha * dal * dal / tau);
        const double slip = jvt[i] - r.pi_rate[i];
        const double fric = w * fz.friction[i] * std::abs(jvt[i]) * fv;
        const double adh = w * (fz.d_N[i] * jvn[i] * jvn[i] + fz.d_T[i] * slip * slip) * fv;
        const double yld = w * fz.yield[i] * std::abs(r.pi_rate[i]) * fpi;
        const double dam = w * r.alpha_rate[i] * a1_partial(r.alpha_rate[i], a.eps_dam, a.eps_heal) * fal;
        src.interface[i] += fric + adh + yld + dam;
        src.friction += fric;
        src.adhesive += adh;
        src.yield += yld;
        src.damage += dam;
        if (in.b_coupling)
            src.adiabatic[i] = -w * a.b0.slope(in.prev->alpha[i]) * dal / (tau + reg.eps_alpha * dal * dal);
    }

    const Vec e = ops.strain * r.v_half;
    for (int k = 0; k < ops.n_elem; ++k) {
        const ElementData& el = ops.elements[k];
        const BulkMaterial& m = mat.body(el.label);
        Eigen::Vector3d ek = e.segment<3>(3 * k);
        const double ee = ek[0] * ek[0] + ek[1] * ek[1] + 0.5 * ek[2] * ek[2];
        const double fe = 1.0 / (1.0 + tau * reg.eps_e * ee);
        const double visc = el.area * ek.dot(m.viscous_voigt() * ek) * fe;
        src.viscous += visc;
        for (int v : el.v) src.bulk[v] += visc / 3.0;
        if (in.b_coupling) {
            const double adia = -m.B_scalar() * (ek[0] + ek[1]) * fe * el.area / 3.0;
            for (int v : el.v) src.adiabatic[ni + v] += adia;
        }
    }

    if (in.diffusion_weights && r.mu_half.size() > 0) {
        const SpMat& W = *in.diffusion_weights;
        const Vec q = ops.G_heat * r.mu_half;
        for (int s = 0; s < ops.n_seg; ++s) {
            double d = W.coeff(s, s) * q[s] * q[s] / (1.0 + tau * reg.eps_v * q[s] * q[s]);
            src.interface[ops.imesh.segments[s][0]] += 0.5 * d;
            src.interface[ops.imesh.segments[s][1]] += 0.5 * d;
            src.diffusion += d;
        }
        for (int i = 0; i < ni; ++i)
            for (int side = 1; side <= 2; ++side) {
                int row = ops.G_row_transfer(side, i);
                double d = W.coeff(row, row) * q[row] * q[row] / (1.0 + tau * reg.eps_v * q[row] * q[row]);
                src.interface[i] += 0.5 * d;
                src.bulk[ops.mesh.node_pairs[i][side - 1]] += 0.5 * d;
                src.diffusion += d;
            }
        for (int k = 0; k < ops.n_elem; ++k) {
            int row = ops.G_row_bulk(k);
            Vec2 qk = q.segment<2>(row);
            Mat2 Wk;
            Wk << W.coeff(row, row), W.coeff(row, row + 1), W.coeff(row + 1, row), W.coeff(row + 1, row + 1);
            double d = qk.dot(Wk * qk) / (1.0 + tau * reg.eps_v * qk.squaredNorm());
            for (int v : ops.elements[k].v) src.bulk[v] += d / 3.0;
            src.diffusion += d;
        }
    }

    Vec flux = assemble_heat_flux(in.prev->t, in.prev->t + tau, reg.eps_h, *in.loads, ops);
    src.boundary = flux.tail(nn);
    src.bulk += src.boundary;
    src.external = flux.sum();
    (void)a;
    return src;
}

HeatSystem assemble_heat_step_matrix(const DiscreteOperators& ops, const MaterialSet& mat, const HeatStepInput& in,
                                     RegularisedSources* sources_out) {
    const int ni = ops.n_iface, nn = ops.n_nodes;
    const SystemState& prev = *in.prev;
    const SystemState& next = *in.next;
    const Vec jn = ops.N_jump * next.u;
    SpMat W = heat_weights(ops, mat, prev.theta_A, prev.theta_B, jn, next.alpha);
    RegularisedSources src = heat_sources(ops, mat, in);

    HeatSystem sys;
    sys.K = SpMat(ops.G_heat.transpose()) * W * ops.G_heat;
    for (int i = 0; i < ni + nn; ++i)
        if (src.adiabatic[i] != 0.0) sys.K.coeffRef(i, i) -= src.adiabatic[i];
    sys.source.resize(ni + nn);
    sys.source << src.interface, src.bulk;
    sys.weight.resize(ni + nn);
    sys.weight << ops.Mi_lumped, ops.bulk_lumped;
    sys.capacity.resize(ni + nn);
    for (int i = 0; i < ni; ++i) sys.capacity[i] = mat.iface.c_A;
    for (const auto& el : ops.elements)
        for (int v : el.v) sys.capacity[ni + v] = mat.body(el.label).c_B;
    if (sources_out) *sources_out = std::move(src);
    return sys;
}

void write_triplets(std::ostream& os, const SpMat& A) {
    os << "# rows " << A.rows() << " cols " << A.cols() << " nnz " << A.nonZeros() << "\n";
    os << std::setprecision(17);
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

SpMat read_triplets(std::istream& is) {
    std::string hash, w1, w2, w3;
    long rows = 0, cols = 0, nnz = 0;
    if (!(is >> hash >> w1 >> rows >> w2 >> cols >> w3 >> nnz) || hash != "#")
        throw Error("triplet file: bad header");
    std::vector<Triplet> t;
    long r, c;
    double v;
    while (is >> r >> c >> v) t.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    SpMat A(rows, cols);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

}  // namespace adhesim
