#include "adhesim/energetics.hpp"

#include "adhesim/poro.hpp"

#include <cmath>
#include <limits>

namespace adhesim {

namespace {

// thermal part of the free energy per unit weight; theta phi'' = c
double thermal_potential(double theta, const Capacity& c, double theta_R) {
    if (!(theta > 0.0)) return 0.0;
    if (!(theta_R > 0.0)) theta_R = 1.0;
    return c.c0 * theta * (std::log(theta / theta_R) - 1.0) + 0.5 * c.c1 * theta * theta;
}

double interface_reference(const MaterialSet& mat) {
    double r = mat.bulk[0].theta_R;
    return std::isfinite(r) ? r : 1.0;
}

}  // namespace

Vec reference_temperature_nodes(const DiscreteOperators& ops, const MaterialSet& mat) {
    Vec r = Vec::Zero(ops.n_nodes);
    for (const auto& el : ops.elements) {
        double ref = mat.body(el.label).theta_R;
        for (int v : el.v) r[v] = std::isfinite(ref) ? ref : 0.0;
    }
    return r;
}

void resolve_reference_temperatures(MaterialSet& mat, const DiscreteOperators& ops, const Vec& theta_B) {
    for (int label = 1; label <= 2; ++label) {
        BulkMaterial& m = mat.bulk[label - 1];
        if (std::isfinite(m.theta_R)) continue;
        double sum = 0.0, w = 0.0;
        for (const auto& el : ops.elements) {
            if (el.label != label) continue;
            for (int v : el.v) {
                sum += el.area / 3.0 * theta_B[v];
                w += el.area / 3.0;
            }
        }
        m.theta_R = w > 0 ? sum / w : 0.0;
    }
}

double kinetic_energy(const DiscreteOperators& ops, const Vec& v) { return 0.5 * v.dot(ops.M_mass * v); }

double heat_energy(const DiscreteOperators& ops, const SystemState& s) {
    return ops.Mi_lumped.dot(s.vartheta_A) + ops.bulk_lumped.dot(s.vartheta_B);
}

double compliance_energy(const DiscreteOperators& ops, const MaterialSet& mat, const Vec& jn) {
    const InterfaceMaterial& a = mat.iface;
    double e = 0.0;
    for (int s = 0; s < ops.n_seg; ++s) {
        auto [p, q] = ops.imesh.segments[s];
        for (int g = 0; g < 3; ++g) {
            double z = (1.0 - kGaussX[g]) * jn[p] + kGaussX[g] * jn[q];
            e += ops.imesh.lengths[s] * kGaussW[g] * gamma_C_value(z, a.kappa_C, a.p);
        }
    }
    return e;
}

EnergySplit free_energy(const SystemState& s, const DiscreteOperators& ops, const MaterialSet& mat,
                        const EnergyOptions& opt) {
    const InterfaceMaterial& a = mat.iface;
    for (int i = 0; i < s.alpha.size(); ++i)
        if (!(s.alpha[i] >= 0.0 && s.alpha[i] <= 1.0))
            throw DomainError("free energy: delamination variable out of [0,1] at interface node " +
                              std::to_string(i));
    EnergySplit E;
    E.bulk_elastic = 0.5 * s.u.dot(ops.K_elast * s.u);
    const Vec Bu = ops.B_thermal * s.u;
    if (opt.b_coupling) {
        E.reference_stress = reference_temperature_nodes(ops, mat).dot(Bu);
        E.coupling = -s.theta_B.dot(Bu);
    }
    const Vec jn = ops.N_jump * s.u;
    const Vec jt = ops.T_jump * s.u;
    for (int i = 0; i < ops.n_iface; ++i) {
        const double l = ops.Mi_lumped[i];
        const double al = s.alpha[i];
        const double el = jt[i] - s.pi[i];
        E.adhesive += l * 0.5 * (a.kappa_N(al) * jn[i] * jn[i] + a.kappa_T(al) * el * el);
        E.hardening += l * 0.5 * a.kappa_H * s.pi[i] * s.pi[i];
        E.stored += l * a.a0(al);
        if (opt.b_coupling) E.coupling -= l * s.theta_A[i] * a.b0(al);
    }
    E.compliance = compliance_energy(ops, mat, jn);
    E.gradient_pi = 0.5 * s.pi.dot(ops.S_pi * s.pi);
    E.gradient_alpha = 0.5 * s.alpha.dot(ops.S_alpha * s.alpha);
    if (opt.poro && s.poro()) E.poro = poro_energy(*opt.poro, s);

    const double ref_A = interface_reference(mat);
    for (int i = 0; i < ops.n_iface; ++i) E.thermal += ops.Mi_lumped[i] * thermal_potential(s.theta_A[i], a.c_A, ref_A);
    for (const auto& el : ops.elements) {
        const BulkMaterial& m = mat.body(el.label);
        for (int v : el.v) E.thermal += el.area / 3.0 * thermal_potential(s.theta_B[v], m.c_B, m.theta_R);
    }
    E.heat = heat_energy(ops, s);
    return E;
}

FrozenCoefficients frozen_coefficients(const SystemState& s, const DiscreteOperators& ops, const MaterialSet& mat,
                                       bool friction_enabled) {
    const InterfaceMaterial& a = mat.iface;
    const int ni = ops.n_iface;
    FrozenCoefficients f;
    f.friction = Vec::Zero(ni);
    f.yield.resize(ni);
    f.d_N.resize(ni);
    f.d_T.resize(ni);
    const Vec jn = ops.N_jump * s.u;
    for (int i = 0; i < ni; ++i) {
        const double al = s.alpha[i], th = s.theta_A[i];
        if (friction_enabled)
            f.friction[i] = a.friction_coefficient(al, th) * std::max(-gamma_C_prime(jn[i], a.kappa_C, a.p), 0.0);
        f.yield[i] = a.yield_stress(al, th);
        f.d_N[i] = a.d_N * a.d_theta(th);
        f.d_T[i] = a.d_T * a.d_theta(th);
    }
    return f;
}

DissipationBreakdown dissipation_rate(const FrozenCoefficients& frozen, const StepRates& rates,
                                      const DiscreteOperators& ops, const MaterialSet& mat) {
    const InterfaceMaterial& a = mat.iface;
    DissipationBreakdown R;
    R.viscous = rates.v_half.dot(ops.K_visc * rates.v_half);
    const Vec jvn = ops.N_jump * rates.v_half;
    const Vec jvt = ops.T_jump * rates.v_half;
    for (int i = 0; i < ops.n_iface; ++i) {
        const double l = ops.Mi_lumped[i];
        const double slip = jvt[i] - rates.pi_rate[i];
        R.friction += l * frozen.friction[i] * std::abs(jvt[i]);
        R.yield += l * frozen.yield[i] * std::abs(rates.pi_rate[i]);
        R.adhesive_N += l * frozen.d_N[i] * jvn[i] * jvn[i];
        R.adhesive_T += l * frozen.d_T[i] * slip * slip;
        if (rates.alpha_rate.size() > 0)
            R.damage += l * rates.alpha_rate[i] * a1_partial(rates.alpha_rate[i], a.eps_dam, a.eps_heal);
    }
    return R;
}

CouplingWork coupling_work(const SystemState& prev, const SystemState& next, const DiscreteOperators& ops,
                           const MaterialSet& mat) {
    CouplingWork w;
    w.bulk = prev.theta_B.dot(ops.B_thermal * (next.u - prev.u));
    for (int i = 0; i < ops.n_iface; ++i)
        w.interface +=
            ops.Mi_lumped[i] * prev.theta_A[i] * (mat.iface.b0(next.alpha[i]) - mat.iface.b0(prev.alpha[i]));
    return w;
}

MechBalance mech_balance(const SystemState& prev, const SystemState& next, const DiscreteOperators& ops,
                         const MaterialSet& mat, const Vec& F_k, double tau, const EnergyOptions& opt,
                         bool friction_enabled, double constraint_work) {
    MechBalance b;
    const double M0 = kinetic_energy(ops, prev.v), M1 = kinetic_energy(ops, next.v);
    const double E0 = free_energy(prev, ops, mat, opt).mechanical();
    const double E1 = free_energy(next, ops, mat, opt).mechanical();
    StepRates rates;
    rates.v_half = (next.u - prev.u) / tau;
    rates.pi_rate = (next.pi - prev.pi) / tau;
    rates.alpha_rate = (next.alpha - prev.alpha) / tau;
    const FrozenCoefficients frozen = frozen_coefficients(prev, ops, mat, friction_enabled);
    DissipationBreakdown R = dissipation_rate(frozen, rates, ops, mat);
    if (opt.poro && next.poro() && next.mu_A.size() > 0) {
        Vec mu(next.mu_A.size() + next.mu_B.size());
        mu << next.mu_A, next.mu_B;
        R.diffusion = diffusion_dissipation(*opt.poro, mu);
    }
    b.kinetic_change = M1 - M0;
    b.energy_change = E1 - E0;
    b.dissipated = tau * R.total() + constraint_work;
    b.work = F_k.dot(next.u - prev.u);
    if (opt.b_coupling) {
        CouplingWork w = coupling_work(prev, next, ops, mat);
        b.coupling = w.bulk + w.interface;
    }
    b.residual = b.kinetic_change + b.energy_change + b.dissipated - b.work - b.coupling;
    b.scale = M1 + std::abs(E1) + b.dissipated + std::abs(b.work) + std::abs(b.coupling);
    return b;
}

double EntropyDiagnostics::min_term() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto* v : {&conduction, &transfer, &dissipation})
        for (double x : *v) m = std::min(m, x);
    return std::isfinite(m) ? m : 0.0;
}

EntropyDiagnostics entropy_production_terms(const SystemState& prev, const SystemState& next,
                                            const DiscreteOperators& ops, const MaterialSet& mat,
                                            const RegularisedSources& sources, double theta_floor) {
    const InterfaceMaterial& a = mat.iface;
    EntropyDiagnostics d;
    const Vec& tA = next.theta_A;
    const Vec& tB = next.theta_B;
    for (int s = 0; s < ops.n_seg; ++s) {
        auto [p, q] = ops.imesh.segments[s];
        const double grad = (tA[q] - tA[p]) / ops.imesh.lengths[s];
        for (int g = 0; g < 3; ++g) {
            const double th = (1.0 - kGaussX[g]) * tA[p] + kGaussX[g] * tA[q];
            if (!(th > theta_floor)) {
                ++d.below_floor;
                continue;
            }
            const double thp = (1.0 - kGaussX[g]) * prev.theta_A[p] + kGaussX[g] * prev.theta_A[q];
            d.conduction.push_back(a.K_A * a.K_A_theta(thp) * grad * grad / (th * th));
        }
    }
    for (const auto& el : ops.elements) {
        const BulkMaterial& m = mat.body(el.label);
        const double th = (tB[el.v[0]] + tB[el.v[1]] + tB[el.v[2]]) / 3.0;
        if (!(th > theta_floor)) {
            ++d.below_floor;
            continue;
        }
        const double thp = (prev.theta_B[el.v[0]] + prev.theta_B[el.v[1]] + prev.theta_B[el.v[2]]) / 3.0;
        Vec2 g = Vec2::Zero();
        for (int i = 0; i < 3; ++i) g += el.grad.col(i) * tB[el.v[i]];
        d.conduction.push_back(g.dot(m.K_B * m.K_B_theta(thp) * g) / (th * th));
    }
    const Vec jn = ops.N_jump * next.u;
    for (int i = 0; i < ops.n_iface; ++i)
        for (int side = 1; side <= 2; ++side) {
            const double ta = tA[i], tb = tB[ops.mesh.node_pairs[i][side - 1]];
            if (!(ta > theta_floor && tb > theta_floor)) {
                ++d.below_floor;
                continue;
            }
            const double k = a.transfer(side, jn[i], next.alpha[i], prev.theta_A[i]);
            d.transfer.push_back(k * (tb - ta) * (tb - ta) / (ta * tb));
        }
    if (sources.interface.size() == ops.n_iface)
        for (int i = 0; i < ops.n_iface; ++i) {
            if (!(tA[i] > theta_floor)) {
                ++d.below_floor;
                continue;
            }
            d.dissipation.push_back(sources.interface[i] / ops.Mi_lumped[i] / tA[i]);
        }
    if (sources.bulk.size() == ops.n_nodes)
        for (int v = 0; v < ops.n_nodes; ++v) {
            if (!(tB[v] > theta_floor)) {
                ++d.below_floor;
                continue;
            }
            double r = sources.bulk[v] - (sources.boundary.size() ? sources.boundary[v] : 0.0);
            d.dissipation.push_back(r / ops.bulk_lumped[v] / tB[v]);
        }
    return d;
}

std::vector<std::string> ledger_columns() {
    return {"t",
            "M",
            "E",
            "H",
            "R_cum",
            "work_cum",
            "mech_residual",
            "total_slack",
            "min_theta",
            "max_alpha_change",
            "constraint_work_cum",
            "coupling_work_cum",
            "heat_in_cum",
            "adiabatic_cum",
            "entropy_min",
            "poro_mass",
            "diffusion_dissipation",
            "mech_rel_residual",
            "mech_iterations",
            "heat_iterations",
            "stick_nodes",
            "slip_nodes"};
}

std::vector<double> ledger_values(const LedgerRow& r) {
    return {r.t,
            r.M,
            r.E,
            r.H,
            r.R_cum,
            r.work_cum,
            r.mech_residual,
            r.total_slack,
            r.min_theta,
            r.max_alpha_change,
            r.constraint_work_cum,
            r.coupling_work_cum,
            r.heat_in_cum,
            r.adiabatic_cum,
            r.entropy_min,
            r.poro_mass,
            r.diffusion_dissipation,
            r.mech_rel_residual,
            double(r.mech_iterations),
            double(r.heat_iterations),
            double(r.stick_nodes),
            double(r.slip_nodes)};
}

LedgerRow ledger_from_values(const std::vector<double>& v) {
    if (v.size() < ledger_columns().size()) throw Error("ledger row has too few columns");
    LedgerRow r;
    r.t = v[0];
    r.M = v[1];
    r.E = v[2];
    r.H = v[3];
    r.R_cum = v[4];
    r.work_cum = v[5];
    r.mech_residual = v[6];
    r.total_slack = v[7];
    r.min_theta = v[8];
    r.max_alpha_change = v[9];
    r.constraint_work_cum = v[10];
    r.coupling_work_cum = v[11];
    r.heat_in_cum = v[12];
    r.adiabatic_cum = v[13];
    r.entropy_min = v[14];
    r.poro_mass = v[15];
    r.diffusion_dissipation = v[16];
    r.mech_rel_residual = v[17];
    r.mech_iterations = static_cast<int>(v[18]);
    r.heat_iterations = static_cast<int>(v[19]);
    r.stick_nodes = static_cast<int>(v[20]);
    r.slip_nodes = static_cast<int>(v[21]);
    return r;
}

}  // namespace adhesim
