#include "adhesim/stepper.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <thread>

namespace adhesim {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1]
constexpr double kGL8X[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                             0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGL8W[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                             0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

struct Compliance {
    double kappa, p;
    double g(double z) const { return gamma_C_value(z, kappa, p); }
    double dg(double z) const { return gamma_C_prime(z, kappa, p); }
    double ddg(double z) const { return gamma_C_second(z, kappa, p); }

    // secant slope between zt and z, in a form that does not cancel when the
    // two are close
    double quotient(double z, double zt) const {
        if (z >= 0.0 && zt >= 0.0) return 0.0;
        if (z < 0.0 && zt < 0.0) {
            const double a = -z, b = -zt;
            const double d = (a - b) / b;
            const double bp = std::pow(b, p - 1.0);
            if (d == 0.0) return -kappa * bp;
            return -kappa / p * bp * std::expm1(p * std::log1p(d)) / d;
        }
        return (g(z) - g(zt)) / (z - zt);
    }

    double quotient_derivative(double z, double zt) const {
        const double gap = z - zt;
        if (std::abs(gap) <= 1e-4 * std::max(std::abs(z), std::abs(zt))) return 0.5 * ddg(0.5 * (z + zt));
        return (dg(z) * gap - (g(z) - g(zt))) / (gap * gap);
    }

    // int_{zt}^{z} quotient(s, zt) ds, split where the law changes form
    double primitive(double z, double zt) const {
        if (z == zt) return 0.0;
        double total = 0.0;
        auto piece = [&](double a, double b) {
            if (a == b) return;
            const double mid = 0.5 * (a + b);
            if (mid >= 0.0) {
                // open side: the law vanishes, quotient is -g(zt)/(s - zt)
                const double gz = g(zt);
                if (gz != 0.0) total += -gz * std::log((b - zt) / (a - zt));
                return;
            }
            const double h = 0.5 * (b - a);
            for (int k = 0; k < 8; ++k) total += h * kGL8W[k] * quotient(mid + h * kGL8X[k], zt);
        };
        if ((zt < 0.0 && z > 0.0) || (zt > 0.0 && z < 0.0)) {
            piece(zt, 0.0);
            piece(0.0, z);
        } else {
            piece(zt, z);
        }
        return total;
    }
};

// Secant primitive of the alpha-dependent interface energy of one node,
// exact for piecewise linear tables.
struct AlphaPotential {
    const InterfaceMaterial* mat = nullptr;
    const std::vector<double>* breaks = nullptr;
    double jn2 = 0, el2 = 0, theta = 0;
    bool thermal = false;
    double alpha_prev = 0;

    double psi(double a) const {
        double v = 0.5 * mat->kappa_N(a) * jn2 + 0.5 * mat->kappa_T(a) * el2 + mat->a0(a);
        if (thermal) v -= mat->b0(a) * theta;
        return v;
    }
    double slope(double a) const {
        double v = 0.5 * mat->kappa_N.slope(a) * jn2 + 0.5 * mat->kappa_T.slope(a) * el2 + mat->a0.slope(a);
        if (thermal) v -= mat->b0.slope(a) * theta;
        return v;
    }
    std::vector<double> cuts(double a) const {
        std::vector<double> c{alpha_prev};
        const double lo = std::min(a, alpha_prev), hi = std::max(a, alpha_prev);
        for (double x : *breaks)
            if (x > lo && x < hi) c.push_back(x);
        if (a < alpha_prev) std::sort(c.begin() + 1, c.end(), std::greater<double>());
        c.push_back(a);
        return c;
    }
    double quotient(double a) const {
        return diff_quotient([this](double s) { return psi(s); }, [this](double s) { return slope(s); }, a,
                             alpha_prev);
    }
    double quotient_derivative(double a) const {
        const double gap = a - alpha_prev;
        if (std::abs(gap) <= kDiffQuotientSwitch * std::max({1.0, std::abs(a), std::abs(alpha_prev)})) return 0.0;
        return (slope(a) * gap - (psi(a) - psi(alpha_prev))) / (gap * gap);
    }
    double primitive(double a) const {
        if (a == alpha_prev) return 0.0;
        const std::vector<double> c = cuts(a);
        const double p0 = psi(alpha_prev);
        double total = 0.0;
        for (std::size_t k = 0; k + 1 < c.size(); ++k) {
            const double lo = c[k], hi = c[k + 1];
            if (lo == hi) continue;
            const double m = (psi(hi) - psi(lo)) / (hi - lo);
            const double A = psi(lo) - p0 - m * (lo - alpha_prev);
            total += m * (hi - lo);
            if (k > 0 && A != 0.0) total += A * std::log((hi - alpha_prev) / (lo - alpha_prev));
        }
        return total;
    }
};

SpMat block_diag_identity_tail(const SpMat& T, int extra) {
    std::vector<Triplet> t;
    for (int col = 0; col < T.outerSize(); ++col)
        for (SpMat::InnerIterator it(T, col); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    const int n = static_cast<int>(T.rows());
    for (int i = 0; i < extra; ++i) t.emplace_back(n + i, n + i, 1.0);
    SpMat out(n + extra, n + extra);
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

void append(std::vector<Triplet>& t, const SpMat& A, int row0, int col0, double factor) {
    for (int col = 0; col < A.outerSize(); ++col)
        for (SpMat::InnerIterator it(A, col); it; ++it)
            t.emplace_back(row0 + it.row(), col0 + it.col(), factor * it.value());
}

Vec stack(const Vec& a, const Vec& b) {
    Vec out(a.size() + b.size());
    out << a, b;
    return out;
}

}  // namespace

void validate(const Scenario& sc) {
    if (!(sc.tau > 0.0)) throw ConfigError("time step tau must be positive");
    if (!(sc.T > 0.0)) throw ConfigError("time horizon T must be positive");
    const double n = sc.T / sc.tau;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
        throw ConfigError("time step tau does not divide the horizon T");
    validate(sc.mesh);
    validate(sc.mat, sc.flags.poro);
    validate(sc.loads);
    auto covers = [&](const std::vector<double>& t, const char* what) {
        if (t.size() > 1 && (t.front() > 0.0 || t.back() < sc.T * (1.0 - 1e-12)))
            throw ConfigError(std::string("load table '") + what + "' must cover [0, T]");
    };
    covers(sc.loads.body_force.t, "body_force");
    covers(sc.loads.traction.t, "traction");
    covers(sc.loads.dirichlet.t, "dirichlet");
    covers(sc.loads.heat_flux.t, "heat_flux");
    const RegularisationSet& r = sc.reg;
    for (double e : {r.eps_v, r.eps_pi, r.eps_alpha, r.eps_e, r.eps_h})
        if (!(e > 0.0)) throw ConfigError("regularisation coefficients must be positive");
    if (!(sc.solver.mech_tol > 0 && sc.solver.damage_tol > 0 && sc.solver.heat_tol > 0))
        throw ConfigError("solver tolerances must be positive");
}

int step_count(const Scenario& sc) { return static_cast<int>(std::lround(sc.T / sc.tau)); }

EnergyOptions StepContext::energy_options() const {
    EnergyOptions o;
    o.b_coupling = sc.flags.b_coupling;
    o.poro = poro ? &*poro : nullptr;
    return o;
}

StepContext prepare(const Scenario& sc) {
    validate(sc);
    StepContext ctx;
    ctx.sc = sc;
    ctx.ops = assemble_all(sc.mesh, sc.mat);
    const DiscreteOperators& ops = ctx.ops;
    Vec thB = sc.initial.theta_B.size() ? sc.initial.theta_B : Vec::Constant(ops.n_nodes, sc.initial.theta0);
    if (thB.size() != ops.n_nodes) throw ConfigError("initial theta_B has wrong size");
    resolve_reference_temperatures(ctx.sc.mat, ops, thB);
    ctx.theta_R_nodes = reference_temperature_nodes(ops, ctx.sc.mat);
    ctx.theta_scale = std::max(ctx.sc.mat.bulk[0].theta_R, ctx.sc.mat.bulk[1].theta_R);
    if (!(ctx.theta_scale > 0.0)) ctx.theta_scale = 1.0;
    ctx.healing = sc.flags.healing || sc.mat.iface.healing;
    if (sc.flags.poro) ctx.poro = assemble_poro(ops, ctx.sc.mat);
    const double tau = sc.tau;
    SpMat Hu = (2.0 / (tau * tau)) * ops.M_mass + (1.0 / tau) * ops.K_visc + 0.5 * ops.K_elast;
    ctx.H_bulk = SpMat(ops.pair_transform.transpose()) * Hu * ops.pair_transform;
    return ctx;
}

Vec to_pair_coordinates(const DiscreteOperators& ops, const Vec& u) {
    Vec y = u;
    for (int i = 0; i < ops.n_iface; ++i) {
        const int a = ops.mesh.node_pairs[i][0], b = ops.mesh.node_pairs[i][1];
        const Vec2 jump = u.segment<2>(2 * a) - u.segment<2>(2 * b);
        const Vec2& n = ops.mesh.normal_n2[i];
        y[2 * a] = jump.dot(n);
        y[2 * a + 1] = jump.dot(tangent_of(n));
    }
    return y;
}

SystemState initial_state(const StepContext& ctx) {
    const DiscreteOperators& ops = ctx.ops;
    const InitialData& in = ctx.sc.initial;
    const MaterialSet& mat = ctx.sc.mat;
    const int nd = ops.n_dofs, ni = ops.n_iface, nn = ops.n_nodes;
    auto pick = [](const Vec& v, int n, double fill, const char* name) {
        if (v.size() == 0) return Vec(Vec::Constant(n, fill));
        if (v.size() != n) throw ConfigError(std::string("initial field ") + name + " has wrong size");
        return v;
    };
    SystemState s;
    s.t = 0.0;
    s.u = pick(in.u, nd, 0.0, "u");
    s.v = pick(in.v, nd, 0.0, "v");
    s.pi = pick(in.pi, ni, 0.0, "pi");
    s.alpha = pick(in.alpha, ni, 1.0, "alpha");
    Vec thA = pick(in.theta_A, ni, in.theta0, "theta_A");
    Vec thB = pick(in.theta_B, nn, in.theta0, "theta_B");
    for (int i = 0; i < ni; ++i)
        if (!(s.alpha[i] >= 0.0 && s.alpha[i] <= 1.0)) throw DomainError("initial alpha outside [0,1]");
    for (int d = 0; d < nd; ++d)
        if (ops.dirichlet_dof[d] && (s.u[d] != 0.0 || s.v[d] != 0.0))
            throw ConfigError("initial displacement and velocity must vanish on Dirichlet nodes");
    const double th = ctx.sc.tau * ctx.sc.reg.eps_h;
    s.theta_A = thA.array() / (1.0 + th * thA.array());
    s.theta_B = thB.array() / (1.0 + th * thB.array());
    s.vartheta_A.resize(ni);
    s.vartheta_B.resize(nn);
    for (int i = 0; i < ni; ++i) s.vartheta_A[i] = heat_content(s.theta_A[i], mat.iface.c_A);
    std::vector<int> label(nn, 1);
    for (const auto& el : ops.elements)
        for (int v : el.v) label[v] = el.label;
    for (int v = 0; v < nn; ++v) s.vartheta_B[v] = heat_content(s.theta_B[v], mat.body(label[v]).c_B);
    if (ctx.poro) {
        s.zeta_A = pick(in.zeta_A, ni, mat.iface.zeta_eq_A, "zeta_A");
        Vec zb(nn);
        for (int v = 0; v < nn; ++v) zb[v] = mat.body(label[v]).zeta_eq;
        s.zeta_B = in.zeta_B.size() ? pick(in.zeta_B, nn, 0.0, "zeta_B") : zb;
        auto [muA, muB] = chemical_potentials(s, *ctx.poro);
        s.mu_A = muA;
        s.mu_B = muB;
    }
    return s;
}

MechStepResult step_mech(const StepContext& ctx, const SystemState& prev, double t_k) {
    const DiscreteOperators& ops = ctx.ops;
    const MaterialSet& mat = ctx.sc.mat;
    const InterfaceMaterial& a = mat.iface;
    const PhysicsFlags& flags = ctx.sc.flags;
    const double tau = ctx.sc.tau;
    const int nd = ops.n_dofs, ni = ops.n_iface, nn = ops.n_nodes;
    const int nx = nd + ni;
    const bool poro = ctx.poro.has_value();
    const int nc = poro ? ni + nn : 0;
    const int n = nx + 2 * nc;

    const FrozenCoefficients frozen = frozen_coefficients(prev, ops, mat, flags.friction);
    const Vec F = assemble_F(t_k, ctx.sc.loads, ops, mat);
    Vec bu = -(2.0 / (tau * tau)) * (ops.M_mass * (prev.u + tau * prev.v)) - (ops.K_visc * prev.u) / tau +
             0.5 * (ops.K_elast * prev.u) - F;
    if (flags.b_coupling) bu += ops.B_thermal.transpose() * (ctx.theta_R_nodes - prev.theta_B);
    const Vec yp = to_pair_coordinates(ops, prev.u);

    Vec b = Vec::Zero(nx);
    b.head(nd) = ops.pair_transform.transpose() * bu;
    std::vector<Triplet> th;
    append(th, ctx.H_bulk, 0, 0, 1.0);
    append(th, ops.S_pi, nd, nd, 0.5);
    b.tail(ni) += 0.5 * (ops.S_pi * prev.pi);

    std::vector<ProxBlock> blocks;
    for (int i = 0; i < ni; ++i) {
        const double l = ops.Mi_lumped[i];
        const double al = prev.alpha[i];
        const double kN = a.kappa_N(al), kT = a.kappa_T(al);
        const int jn = ops.jn_index(i), jt = ops.jt_index(i), ip = nd + i;
        const double jnp = yp[jn], jtp = yp[jt], pip = prev.pi[i], sp = jtp - pip;
        const double cn = l * (frozen.d_N[i] / tau + 0.5 * kN);
        th.emplace_back(jn, jn, cn);
        b[jn] += l * (-frozen.d_N[i] / tau + 0.5 * kN) * jnp;
        const double ct = l * (frozen.d_T[i] / tau + 0.5 * kT);
        th.emplace_back(jt, jt, ct);
        th.emplace_back(jt, ip, -ct);
        th.emplace_back(ip, jt, -ct);
        th.emplace_back(ip, ip, ct);
        const double bt = l * (-frozen.d_T[i] / tau + 0.5 * kT) * sp;
        b[jt] += bt;
        b[ip] -= bt;
        th.emplace_back(ip, ip, 0.5 * l * a.kappa_H);
        b[ip] += 0.5 * l * a.kappa_H * pip;

        if (frozen.friction[i] > 0.0) {
            ProxBlock blk;
            blk.kind = ProxBlock::Kind::WeightedAbs;
            blk.start = jt;
            blk.weight = l * frozen.friction[i];
            blk.center = Vec2(jtp, 0.0);
            blocks.push_back(blk);
        }
        if (frozen.yield[i] > 0.0) {
            ProxBlock blk;
            blk.kind = ProxBlock::Kind::WeightedAbs;
            blk.start = ip;
            blk.weight = l * frozen.yield[i];
            blk.center = Vec2(pip, 0.0);
            blocks.push_back(blk);
        }
    }
    for (int d = 0; d < nd; ++d)
        if (ops.dirichlet_dof[d]) {
            ProxBlock blk;
            blk.kind = ProxBlock::Kind::Box;
            blk.start = d;
            blk.lo = blk.hi = 0.0;
            blocks.push_back(blk);
        }

    SpMat Hm(nx, nx);
    Hm.setFromTriplets(th.begin(), th.end());

    // poro blocks in pair coordinates
    SpMat Qy;
    Vec qy, zp;
    if (poro) {
        const PoroOperators& P = *ctx.poro;
        SpMat Tz = block_diag_identity_tail(ops.pair_transform, ni + nc);
        Qy = SpMat(Tz.transpose()) * P.Q * Tz;
        qy = Tz.transpose() * P.q;
        zp.resize(nx + nc);
        zp << yp, prev.pi, prev.zeta_A, prev.zeta_B;
        append(th, Qy, 0, 0, 0.5);
        const Vec& W = P.content_weight;
        for (int k = 0; k < nc; ++k) {
            th.emplace_back(nx + k, nx + nc + k, -W[k]);
            th.emplace_back(nx + nc + k, nx + k, -W[k]);
        }
        append(th, P.L, nx + nc, nx + nc, -tau);
    }
    SpMat H(n, n);
    H.setFromTriplets(th.begin(), th.end());

    const Compliance comp{a.kappa_C, a.p};
    const bool compliance_active = a.kappa_C > 0.0;
    std::vector<double> jn_prev(ni);
    for (int i = 0; i < ni; ++i) jn_prev[i] = yp[ops.jn_index(i)];

    auto compliance_terms = [&](const Vec& x, double* value, Vec* grad, std::vector<Triplet>* hess) {
        if (!compliance_active) return;
        for (int s = 0; s < ops.n_seg; ++s) {
            auto [p, q] = ops.imesh.segments[s];
            const int ip = ops.jn_index(p), iq = ops.jn_index(q);
            const double l = ops.imesh.lengths[s];
            for (int g = 0; g < 3; ++g) {
                const double xi = kGaussX[g], w = kGaussW[g] * l;
                const double z = (1.0 - xi) * x[ip] + xi * x[iq];
                const double zt = (1.0 - xi) * jn_prev[p] + xi * jn_prev[q];
                if (value) *value += w * comp.primitive(z, zt);
                if (grad) {
                    const double dq = w * comp.quotient(z, zt);
                    (*grad)[ip] += (1.0 - xi) * dq;
                    (*grad)[iq] += xi * dq;
                }
                if (hess) {
                    const double h = w * comp.quotient_derivative(z, zt);
                    hess->emplace_back(ip, ip, (1.0 - xi) * (1.0 - xi) * h);
                    hess->emplace_back(ip, iq, (1.0 - xi) * xi * h);
                    hess->emplace_back(iq, ip, (1.0 - xi) * xi * h);
                    hess->emplace_back(iq, iq, xi * xi * h);
                }
            }
        }
    };

    CompositeProblem prob;
    prob.n = n;
    prob.blocks = std::move(blocks);
    prob.tol = ctx.sc.solver.mech_tol;
    prob.max_iter = ctx.sc.solver.max_iter;
    prob.newton = ctx.sc.solver.newton || poro;
    prob.saddle = poro;
    if (!poro) {
        prob.smooth.value = [&](const Vec& x) {
            double v = 0.5 * x.dot(H * x) + b.dot(x);
            compliance_terms(x, &v, nullptr, nullptr);
            return v;
        };
        prob.smooth.gradient = [&](const Vec& x) {
            Vec g = H * x + b;
            compliance_terms(x, nullptr, &g, nullptr);
            return g;
        };
    } else {
        const Vec& W = ctx.poro->content_weight;
        prob.smooth.value = [](const Vec&) { return 0.0; };
        prob.smooth.gradient = [&, nc](const Vec& x) {
            Vec g = Vec::Zero(n);
            g.head(nx) = Hm * x.head(nx) + b;
            compliance_terms(x, nullptr, &g, nullptr);
            Vec zmid = x.head(nx + nc) + zp;
            g.head(nx + nc) += 0.5 * (Qy * zmid) - qy;
            g.segment(nx, nc) -= W.cwiseProduct(x.tail(nc));
            g.tail(nc) = -W.cwiseProduct(x.segment(nx, nc) - zp.tail(nc)) - tau * (ctx.poro->L * x.tail(nc));
            return g;
        };
    }
    prob.smooth.hessian = [&](const Vec& x) {
        if (!compliance_active) return H;
        std::vector<Triplet> t;
        compliance_terms(x, nullptr, nullptr, &t);
        SpMat G(n, n);
        G.setFromTriplets(t.begin(), t.end());
        return SpMat(H + G);
    };

    Vec x0(n);
    if (poro) {
        Vec mu0 = prev.mu_A.size() ? stack(prev.mu_A, prev.mu_B) : Vec::Zero(nc);
        x0 << yp, prev.pi, prev.zeta_A, prev.zeta_B, mu0;
    } else {
        x0 << yp, prev.pi;
    }

    MechStepResult out;
    Vec x = solve_composite(prob, x0, &out.solve);

    SystemState& next = out.next;
    next = prev;
    next.t = t_k;
    next.u = ops.pair_transform * x.head(nd);
    next.pi = x.segment(nd, ni);
    next.v = 2.0 * (next.u - prev.u) / tau - prev.v;
    if (poro) {
        next.zeta_A = x.segment(nx, ni);
        next.zeta_B = x.segment(nx + ni, nn);
        next.mu_A = x.segment(nx + nc, ni);
        next.mu_B = x.segment(nx + nc + ni, nn);
    }
    for (int i = 0; i < ni; ++i) {
        if (!(frozen.friction[i] > 0.0)) continue;
        if (x[ops.jt_index(i)] == yp[ops.jt_index(i)]) ++out.stick_nodes;
        else ++out.slip_nodes;
    }
    return out;
}

DamageStepResult step_damage(const StepContext& ctx, const SystemState& prev, const SystemState& mech) {
    const DiscreteOperators& ops = ctx.ops;
    const InterfaceMaterial& a = ctx.sc.mat.iface;
    const double tau = ctx.sc.tau;
    const int ni = ops.n_iface;
    DamageStepResult out;
    if (!ctx.sc.flags.damage) {
        out.alpha = prev.alpha;
        return out;
    }

    std::set<double> bset;
    for (const PiecewiseLinear* t : {&a.kappa_N, &a.kappa_T, &a.a0, &a.b0})
        for (double x : t->xs()) bset.insert(x);
    const std::vector<double> breaks(bset.begin(), bset.end());
    const Vec jn = ops.N_jump * mech.u;
    const Vec jt = ops.T_jump * mech.u;
    std::vector<AlphaPotential> pot(ni);
    for (int i = 0; i < ni; ++i) {
        AlphaPotential& p = pot[i];
        p.mat = &a;
        p.breaks = &breaks;
        p.jn2 = jn[i] * jn[i];
        const double el = jt[i] - mech.pi[i];
        p.el2 = el * el;
        p.theta = prev.theta_A[i];
        p.thermal = ctx.sc.flags.b_coupling;
        p.alpha_prev = prev.alpha[i];
    }
    const Vec& ap = prev.alpha;
    const Vec& l = ops.Mi_lumped;
    const SpMat& S = ops.S_alpha;

    CompositeProblem prob;
    prob.n = ni;
    prob.tol = ctx.sc.solver.damage_tol;
    prob.max_iter = ctx.sc.solver.max_iter;
    prob.newton = ctx.sc.solver.newton;
    prob.smooth.value = [&](const Vec& x) {
        double v = 0.25 * (x + ap).dot(S * (x + ap));
        for (int i = 0; i < ni; ++i)
            v += l[i] * (tau * a1_value((x[i] - ap[i]) / tau, a.eps_dam, a.eps_heal) + pot[i].primitive(x[i]));
        return v;
    };
    auto gradient = [&](const Vec& x) {
        Vec g = 0.5 * (S * (x + ap));
        for (int i = 0; i < ni; ++i)
            g[i] += l[i] * (a1_partial((x[i] - ap[i]) / tau, a.eps_dam, a.eps_heal) + pot[i].quotient(x[i]));
        return g;
    };
    prob.smooth.gradient = gradient;
    prob.smooth.hessian = [&](const Vec& x) {
        SpMat Hm = 0.5 * S;
        for (int i = 0; i < ni; ++i)
            Hm.coeffRef(i, i) +=
                l[i] * (a1_second((x[i] - ap[i]) / tau, a.eps_dam, a.eps_heal) / tau + pot[i].quotient_derivative(x[i]));
        return Hm;
    };
    for (int i = 0; i < ni; ++i) {
        ProxBlock blk;
        blk.kind = ProxBlock::Kind::Box;
        blk.start = i;
        blk.lo = 0.0;
        blk.hi = ctx.healing ? 1.0 : ap[i];
        prob.blocks.push_back(blk);
    }
    out.alpha = solve_composite(prob, ap, &out.solve);
    out.constraint_work = -gradient(out.alpha).dot(out.alpha - ap);
    return out;
}

HeatStepResult step_heat(const StepContext& ctx, const SystemState& prev, const SystemState& next) {
    const DiscreteOperators& ops = ctx.ops;
    const MaterialSet& mat = ctx.sc.mat;
    const double tau = ctx.sc.tau;
    const int ni = ops.n_iface, nn = ops.n_nodes;

    const FrozenCoefficients frozen = frozen_coefficients(prev, ops, mat, ctx.sc.flags.friction);
    StepRates rates;
    rates.v_half = (next.u - prev.u) / tau;
    rates.pi_rate = (next.pi - prev.pi) / tau;
    rates.alpha_rate = (next.alpha - prev.alpha) / tau;
    if (ctx.poro && next.mu_A.size()) rates.mu_half = stack(next.mu_A, next.mu_B);

    HeatStepInput in;
    in.prev = &prev;
    in.next = &next;
    in.frozen = &frozen;
    in.rates = &rates;
    in.reg = &ctx.sc.reg;
    in.loads = &ctx.sc.loads;
    in.tau = tau;
    in.b_coupling = ctx.sc.flags.b_coupling;
    in.diffusion_weights = ctx.poro ? &ctx.poro->mobility : nullptr;

    HeatStepResult out;
    HeatSystem sys = assemble_heat_step_matrix(ops, mat, in, &out.sources);
    const Vec vp = stack(prev.vartheta_A, prev.vartheta_B);
    const Vec guess = stack(prev.theta_A, prev.theta_B);
    Vec theta = solve_monotone_heat(sys, vp, tau, guess, ctx.sc.solver.heat_tol, &out.solve);

    const double floor = -1e-12 * ctx.theta_scale;
    for (int i = 0; i < theta.size(); ++i)
        if (theta[i] < floor) {
            std::string where = i < ni ? "interface node " + std::to_string(i) : "bulk node " + std::to_string(i - ni);
            throw InvariantError("temperature non-negativity violated at " + where + " (theta = " +
                                 std::to_string(theta[i]) + ")");
        }
    Vec content(theta.size());
    for (int i = 0; i < theta.size(); ++i) content[i] = sys.capacity[i].content_ext(theta[i]);
    out.theta_A = theta.head(ni);
    out.theta_B = theta.tail(nn);
    out.vartheta_A = content.head(ni);
    out.vartheta_B = content.tail(nn);
    out.heat_in = tau * out.sources.external;
    out.adiabatic = tau * out.sources.adiabatic.dot(theta);
    return out;
}

StepOutcome advance(const StepContext& ctx, const SystemState& prev, int k) {
    const DiscreteOperators& ops = ctx.ops;
    const MaterialSet& mat = ctx.sc.mat;
    const double tau = ctx.sc.tau;
    const double t_k = k * tau;
    StepOutcome o;
    StepReport& r = o.report;
    r.k = k;
    r.t = t_k;

    MechStepResult mech = step_mech(ctx, prev, t_k);
    SystemState next = std::move(mech.next);
    r.mech_iterations = mech.solve.iterations;
    r.mech_solver_residual = mech.solve.residual;
    r.stick_nodes = mech.stick_nodes;
    r.slip_nodes = mech.slip_nodes;

    DamageStepResult dmg = step_damage(ctx, prev, next);
    next.alpha = dmg.alpha;
    r.damage_iterations = dmg.solve.iterations;
    r.constraint_work = dmg.constraint_work;
    for (int i = 0; i < next.alpha.size(); ++i) {
        if (!(next.alpha[i] >= 0.0 && next.alpha[i] <= 1.0))
            throw InvariantError("delamination variable left [0,1] at interface node " + std::to_string(i));
        if (!ctx.healing && next.alpha[i] > prev.alpha[i])
            throw InvariantError("delamination variable increased without healing at interface node " +
                                 std::to_string(i));
        r.max_alpha_change = std::max(r.max_alpha_change, std::abs(next.alpha[i] - prev.alpha[i]));
    }

    HeatStepResult heat = step_heat(ctx, prev, next);
    next.theta_A = heat.theta_A;
    next.theta_B = heat.theta_B;
    next.vartheta_A = heat.vartheta_A;
    next.vartheta_B = heat.vartheta_B;
    r.heat_iterations = heat.solve.iterations;
    r.heat_fallback = heat.solve.nonsymmetric_fallback;
    r.heat_in = heat.heat_in;
    r.adiabatic = heat.adiabatic;
    r.min_theta = std::min(next.theta_A.size() ? next.theta_A.minCoeff() : 0.0, next.theta_B.minCoeff());

    const EnergyOptions eo = ctx.energy_options();
    const Vec F = assemble_F(t_k, ctx.sc.loads, ops, mat);
    r.balance = mech_balance(prev, next, ops, mat, F, tau, eo, ctx.sc.flags.friction, dmg.constraint_work);
    r.energy_prev =
        kinetic_energy(ops, prev.v) + free_energy(prev, ops, mat, eo).mechanical() + heat_energy(ops, prev);
    r.energy_next =
        kinetic_energy(ops, next.v) + free_energy(next, ops, mat, eo).mechanical() + heat_energy(ops, next);
    r.total_slack = r.energy_prev + r.balance.work + r.heat_in + r.balance.coupling + r.adiabatic - r.energy_next;

    EntropyDiagnostics ent = entropy_production_terms(prev, next, ops, mat, heat.sources, 1e-12 * ctx.theta_scale);
    r.entropy_min = ent.min_term();
    r.entropy_below_floor = ent.below_floor;
    if (ctx.poro && next.mu_A.size()) r.diffusion_dissipation = diffusion_dissipation(*ctx.poro, stack(next.mu_A, next.mu_B));
    r.sources = std::move(heat.sources);
    o.next = std::move(next);
    return o;
}

namespace {

LedgerRow initial_row(const StepContext& ctx, const SystemState& s) {
    const EnergyOptions eo = ctx.energy_options();
    LedgerRow row;
    row.t = s.t;
    row.M = kinetic_energy(ctx.ops, s.v);
    row.E = free_energy(s, ctx.ops, ctx.sc.mat, eo).mechanical();
    row.H = heat_energy(ctx.ops, s);
    row.min_theta = std::min(s.theta_A.size() ? s.theta_A.minCoeff() : 0.0, s.theta_B.minCoeff());
    row.poro_mass = poro_mass(ctx.ops, s);
    return row;
}

template <typename E>
[[noreturn]] void rethrow_at(const E& e, int k, double t) {
    throw E("step " + std::to_string(k) + " (t = " + std::to_string(t) + "): " + e.what());
}

}  // namespace

RunResult run(const StepContext& ctx, const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    SystemState state = initial_state(ctx);
    LedgerRow row = initial_row(ctx, state);
    res.ledger.push_back(row);
    res.min_theta = row.min_theta;
    res.min_entropy_term = std::numeric_limits<double>::infinity();
    res.min_total_slack = std::numeric_limits<double>::infinity();
    if (opt.keep_states) res.states.push_back(state);
    if (opt.snapshot_stride > 0 && opt.on_snapshot) opt.on_snapshot(0, state);
    if (opt.diagnostics)
        *opt.diagnostics << "k,t,mech_iterations,mech_residual,damage_iterations,heat_iterations,heat_residual,"
                            "heat_fallback\n";

    const int N = step_count(ctx.sc);
    for (int k = 1; k <= N; ++k) {
        StepOutcome o;
        const double t = k * ctx.sc.tau;
        try {
            o = advance(ctx, state, k);
        } catch (const NonConvergenceError& e) {
            throw NonConvergenceError("step " + std::to_string(k) + " (t = " + std::to_string(t) + "): " + e.what(),
                                      e.residual);
        } catch (const InvariantError& e) {
            rethrow_at(e, k, t);
        } catch (const DomainError& e) {
            rethrow_at(e, k, t);
        } catch (const MatrixError& e) {
            rethrow_at(e, k, t);
        } catch (const ModelError& e) {
            rethrow_at(e, k, t);
        }
        const StepReport& r = o.report;
        state = std::move(o.next);

        row.t = state.t;
        row.M = kinetic_energy(ctx.ops, state.v);
        row.E = free_energy(state, ctx.ops, ctx.sc.mat, ctx.energy_options()).mechanical();
        row.H = heat_energy(ctx.ops, state);
        row.R_cum += r.balance.dissipated;
        row.work_cum += r.balance.work;
        row.mech_residual = r.balance.residual;
        row.mech_rel_residual = std::abs(r.balance.residual) / std::max(r.balance.scale, 1e-300);
        row.total_slack = r.total_slack;
        row.min_theta = r.min_theta;
        row.max_alpha_change = r.max_alpha_change;
        row.constraint_work_cum += r.constraint_work;
        row.coupling_work_cum += r.balance.coupling;
        row.heat_in_cum += r.heat_in;
        row.adiabatic_cum += r.adiabatic;
        row.entropy_min = r.entropy_min;
        row.poro_mass = poro_mass(ctx.ops, state);
        row.diffusion_dissipation = r.diffusion_dissipation;
        row.mech_iterations = r.mech_iterations;
        row.heat_iterations = r.heat_iterations;
        row.stick_nodes = r.stick_nodes;
        row.slip_nodes = r.slip_nodes;
        res.ledger.push_back(row);

        if (r.balance.scale > 0) res.worst_mech_rel_residual = std::max(res.worst_mech_rel_residual, row.mech_rel_residual);
        res.min_theta = std::min(res.min_theta, r.min_theta);
        res.min_entropy_term = std::min(res.min_entropy_term, r.entropy_min);
        res.min_total_slack = std::min(res.min_total_slack, r.total_slack);
        if (opt.diagnostics)
            *opt.diagnostics << k << "," << std::setprecision(17) << state.t << "," << r.mech_iterations << ","
                             << r.mech_solver_residual << "," << r.damage_iterations << "," << r.heat_iterations
                             << "," << r.sources.external << "," << (r.heat_fallback ? 1 : 0) << "\n";
        if (opt.keep_states) res.states.push_back(state);
        if (opt.snapshot_stride > 0 && opt.on_snapshot && (k % opt.snapshot_stride == 0 || k == N))
            opt.on_snapshot(k, state);
        res.reports.push_back(r);
    }
    if (!std::isfinite(res.min_entropy_term)) res.min_entropy_term = 0.0;
    if (!std::isfinite(res.min_total_slack)) res.min_total_slack = 0.0;
    res.final_state = std::move(state);
    res.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

RunResult run(const Scenario& sc, const RunOptions& opt) { return run(prepare(sc), opt); }

std::vector<StudyRow> convergence_study(const Scenario& sc, const std::vector<double>& taus, const StudyOptions& opt) {
    if (taus.empty()) throw ConfigError("study: empty tau list");
    for (std::size_t i = 1; i < taus.size(); ++i)
        if (!(taus[i] < taus[i - 1])) throw ConfigError("study: tau list must be decreasing");
    const int nt = static_cast<int>(taus.size());
    std::vector<StudyRow> rows(nt);
    std::vector<SystemState> finals(nt);
    std::vector<StepContext> contexts(nt);
    auto one_case = [&](int i) {
        const double tau = taus[i];
        Scenario s = sc;
        s.tau = tau;
        if (opt.scale_regularisation) {
            const double f = tau / sc.tau;
            s.reg.eps_v *= f;
            s.reg.eps_pi *= f;
            s.reg.eps_alpha *= f;
            s.reg.eps_e *= f;
            s.reg.eps_h *= f;
        }
        StepContext ctx = prepare(s);
        const DiscreteOperators& ops = ctx.ops;
        const SpMat KM = ops.K_elast + ops.M_mass;
        SystemState state = initial_state(ctx);
        StudyRow row;
        row.tau = tau;
        row.steps = step_count(s);
        double v2 = 0.0;
        row.norm_u = std::sqrt(state.u.dot(KM * state.u));
        row.norm_theta = heat_energy(ops, state);
        for (int k = 1; k <= row.steps; ++k) {
            StepOutcome o = advance(ctx, state, k);
            const Vec vh = (o.next.u - state.u) / tau;
            v2 += tau * vh.dot(ops.M_mass * vh);
            row.R_cum += o.report.balance.dissipated;
            state = std::move(o.next);
            row.norm_u = std::max(row.norm_u, std::sqrt(state.u.dot(KM * state.u)));
            row.norm_theta = std::max(row.norm_theta, heat_energy(ops, state));
        }
        row.norm_v = std::sqrt(v2);
        rows[i] = row;
        finals[i] = std::move(state);
        contexts[i] = std::move(ctx);
    };
    const int workers = std::clamp(opt.threads, 1, nt);
    if (workers == 1) {
        for (int i = 0; i < nt; ++i) one_case(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(nt);
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int i = next++; i < nt; i = next++) {
                    try {
                        one_case(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    const DiscreteOperators& ops = contexts.back().ops;
    const SpMat KM = ops.K_elast + ops.M_mass;
    const SystemState& ref = finals.back();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SystemState& s = finals[i];
        Vec du = opt.exact_u ? Vec(s.u - opt.exact_u(sc.T)) : Vec(s.u - ref.u);
        rows[i].err_u = std::sqrt(std::max(du.dot(KM * du), 0.0));
        Vec dv = opt.exact_v ? Vec(s.v - opt.exact_v(sc.T)) : Vec(s.v - ref.v);
        rows[i].err_v = std::sqrt(std::max(dv.dot(ops.M_mass * dv), 0.0));
        rows[i].err_theta = ops.Mi_lumped.dot((s.vartheta_A - ref.vartheta_A).cwiseAbs()) +
                            ops.bulk_lumped.dot((s.vartheta_B - ref.vartheta_B).cwiseAbs());
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    // the finest run is its own reference: no error to report
    if (!opt.exact_u) rows.back().err_u = nan;
    if (!opt.exact_v) rows.back().err_v = nan;
    rows.back().err_theta = nan;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == 0) {
            rows[i].order_u = rows[i].order_v = nan;
            continue;
        }
        const double lt = std::log(rows[i - 1].tau / rows[i].tau);
        auto order = [&](double e0, double e1) { return (e0 > 0 && e1 > 0) ? std::log(e0 / e1) / lt : nan; };
        rows[i].order_u = order(rows[i - 1].err_u, rows[i].err_u);
        rows[i].order_v = order(rows[i - 1].err_v, rows[i].err_v);
        auto ratio = [nan](double a, double b) { return b != 0.0 ? a / b : (a == 0.0 ? 1.0 : nan); };
        rows[i].ratio_u = ratio(rows[i].norm_u, rows[i - 1].norm_u);
        rows[i].ratio_v = ratio(rows[i].norm_v, rows[i - 1].norm_v);
        rows[i].ratio_theta = ratio(rows[i].norm_theta, rows[i - 1].norm_theta);
        rows[i].ratio_R = ratio(rows[i].R_cum, rows[i - 1].R_cum);
    }
    return rows;
}

CoulombNodeResult coulomb_single_node(double mass, const Vec2& load, const InterfaceMaterial& mat, double alpha,
                                      double theta_A, double jn_prev, double length, double tau, double tol) {
    CoulombNodeResult r;
    r.threshold = length * mat.friction_coefficient(alpha, theta_A) *
                  std::max(-gamma_C_prime(jn_prev, mat.kappa_C, mat.p), 0.0);
    const double h = 2.0 * mass / (tau * tau);
    CompositeProblem p;
    p.n = 2;
    p.tol = tol;
    p.smooth.value = [&](const Vec& x) { return 0.5 * h * x.squaredNorm() - load.dot(x); };
    p.smooth.gradient = [&](const Vec& x) { return Vec(h * x - load); };
    p.smooth.hessian = [&](const Vec&) {
        SpMat H(2, 2);
        H.insert(0, 0) = h;
        H.insert(1, 1) = h;
        return H;
    };
    ProxBlock blk;
    blk.start = 0;
    blk.size = 2;
    blk.weight = r.threshold;
    p.blocks.push_back(blk);
    Vec x = solve_composite(p, Vec::Zero(2), &r.solve);
    r.increment = Vec2(x[0], x[1]);
    r.rate = r.increment / tau;
    r.stick = r.increment.squaredNorm() == 0.0;
    return r;
}

Vec2 coulomb_single_node_exact(double mass, const Vec2& load, double threshold, double tau) {
    const double f = load.norm();
    if (f <= threshold) return Vec2::Zero();
    return tau * tau * (load - threshold * load / f) / (2.0 * mass);
}

}  // namespace adhesim
