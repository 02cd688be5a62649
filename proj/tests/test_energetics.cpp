#include "doctest.h"

#include "adhesim/energetics.hpp"

#include <cmath>

using namespace adhesim;

namespace {

struct Fixture {
    MaterialSet mat;
    DiscreteOperators ops;

    explicit Fixture(MaterialSet m, int nx = 1) : mat(std::move(m)) {
        for (auto& b : mat.bulk) b.theta_R = 1.0;
        ops = assemble_all(build_rect_two_body(1.0, 0.5, nx, 1), mat);
    }

    SystemState zero_state(double theta_A = 1.0, double theta_B = 1.0) const {
        SystemState s;
        s.u = Vec::Zero(ops.n_dofs);
        s.v = Vec::Zero(ops.n_dofs);
        s.pi = Vec::Zero(ops.n_iface);
        s.alpha = Vec::Ones(ops.n_iface);
        s.theta_A = Vec::Constant(ops.n_iface, theta_A);
        s.theta_B = Vec::Constant(ops.n_nodes, theta_B);
        s.vartheta_A = s.theta_A.unaryExpr([&](double t) { return mat.iface.c_A.content(t); });
        s.vartheta_B = s.theta_B.unaryExpr([&](double t) { return mat.bulk[0].c_B.content(t); });
        return s;
    }

    Vec shift_body1(double dx, double dy) const {
        Vec u = Vec::Zero(ops.n_dofs);
        for (const auto& el : ops.elements)
            if (el.label == 1)
                for (int v : el.v) u[2 * v] = dx, u[2 * v + 1] = dy;
        return u;
    }
};

MaterialSet no_stored_energy() {
    MaterialSet m;
    m.iface.a0 = PiecewiseLinear::constant(0.0);
    return m;
}

}  // namespace

TEST_CASE("zero state has zero mechanical energy") {
    Fixture f(no_stored_energy());
    const EnergySplit E = free_energy(f.zero_state(), f.ops, f.mat);
    CHECK(E.mechanical() == 0.0);
    CHECK(kinetic_energy(f.ops, f.zero_state().v) == 0.0);
}

TEST_CASE("pure tangential jump energy") {
    MaterialSet m = no_stored_energy();
    const double k = 10.0, alpha = 0.6, delta = 0.1;
    m.iface.kappa_T = PiecewiseLinear::linear01(0.0, k);
    Fixture f(m, 2);
    SystemState s = f.zero_state();
    s.alpha.setConstant(alpha);
    s.u = f.shift_body1(delta, 0.0);
    const EnergySplit E = free_energy(s, f.ops, f.mat);
    CHECK(E.adhesive == doctest::Approx(0.5 * k * alpha * delta * delta * 1.0).epsilon(1e-13));
    CHECK(E.bulk_elastic == doctest::Approx(0.0).scale(1e-12));
    CHECK(E.compliance == 0.0);
}

TEST_CASE("penetration energy is the compliance integral") {
    Fixture f(no_stored_energy(), 2);
    SystemState s = f.zero_state();
    const double delta = 0.01;
    s.u = f.shift_body1(0.0, delta);  // penetration jn = -delta
    const EnergySplit E = free_energy(s, f.ops, f.mat);
    const double expected = gamma_C_value(-delta, f.mat.iface.kappa_C, f.mat.iface.p) * 1.0;
    CHECK(E.compliance == doctest::Approx(expected).epsilon(1e-13));
    CHECK(compliance_energy(f.ops, f.mat, f.ops.N_jump * s.u) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("dissipation rate") {
    Fixture f(MaterialSet{}, 2);
    FrozenCoefficients fr;
    fr.friction = Vec::Zero(f.ops.n_iface);
    fr.yield = Vec::Zero(f.ops.n_iface);
    fr.d_N = Vec::Zero(f.ops.n_iface);
    fr.d_T = Vec::Zero(f.ops.n_iface);
    StepRates r;
    r.v_half = Vec::Zero(f.ops.n_dofs);
    r.pi_rate = Vec::Zero(f.ops.n_iface);
    r.alpha_rate = Vec::Zero(f.ops.n_iface);
    SUBCASE("no rates") { CHECK(dissipation_rate(fr, r, f.ops, f.mat).total() == 0.0); }
    SUBCASE("plastic slip against the yield stress") {
        fr.yield.setConstant(2.0);
        r.pi_rate.setConstant(1.0);
        CHECK(dissipation_rate(fr, r, f.ops, f.mat).yield == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("Coulomb friction") {
        // f = 0.3 against gamma_C' = -100
        fr.friction.setConstant(0.3 * 100.0);
        r.v_half = f.shift_body1(0.1, 0.0);
        CHECK(dissipation_rate(fr, r, f.ops, f.mat).friction == doctest::Approx(3.0).epsilon(1e-14));
    }
    SUBCASE("frozen friction weight") {
        MaterialSet m;
        m.iface.frict = PiecewiseLinear::constant(0.3);
        m.iface.kappa_C = 1000.0;
        Fixture g(m, 2);
        SystemState s = g.zero_state();
        s.u = g.shift_body1(0.0, 0.1);  // jn = -0.1, gamma_C' = -100
        const FrozenCoefficients c = frozen_coefficients(s, g.ops, g.mat);
        for (int i = 0; i < g.ops.n_iface; ++i) CHECK(c.friction[i] == doctest::Approx(30.0));
    }
}

TEST_CASE("mechanical balance of a step at rest") {
    Fixture f(MaterialSet{});
    const SystemState s = f.zero_state();
    const MechBalance b = mech_balance(s, s, f.ops, f.mat, Vec::Zero(f.ops.n_dofs), 0.1, {}, true, 0.0);
    CHECK(b.residual == 0.0);
}

TEST_CASE("entropy production terms") {
    MaterialSet m;
    m.iface.k1 = m.iface.k2 = 1.0;
    Fixture f(m, 2);
    const RegularisedSources none;
    SUBCASE("isothermal") {
        const SystemState s = f.zero_state(1.5, 1.5);
        const EntropyDiagnostics d = entropy_production_terms(s, s, f.ops, f.mat, none, 1e-12);
        CHECK(d.min_term() == 0.0);
        for (double x : d.transfer) CHECK(x == 0.0);
        for (double x : d.conduction) CHECK(x == 0.0);
    }
    SUBCASE("interface colder than the bulk") {
        const SystemState s = f.zero_state(1.0, 2.0);
        const EntropyDiagnostics d = entropy_production_terms(s, s, f.ops, f.mat, none, 1e-12);
        REQUIRE(d.transfer.size() == 2u * f.ops.n_iface);
        for (double x : d.transfer) CHECK(x == doctest::Approx(0.5));
    }
    SUBCASE("conduction terms are non-negative") {
        SystemState s = f.zero_state();
        for (int i = 0; i < f.ops.n_nodes; ++i) s.theta_B[i] = 1.0 + f.ops.mesh.nodes[i].x() * f.ops.mesh.nodes[i].y();
        const EntropyDiagnostics d = entropy_production_terms(s, s, f.ops, f.mat, none, 1e-12);
        for (double x : d.conduction) CHECK(x >= 0.0);
    }
}

TEST_CASE("ledger columns") {
    const auto cols = ledger_columns();
    const std::vector<std::string> lead = {"t",        "M",           "E",         "H",         "R_cum",
                                           "work_cum", "mech_residual", "total_slack", "min_theta", "max_alpha_change"};
    REQUIRE(cols.size() >= lead.size());
    for (std::size_t i = 0; i < lead.size(); ++i) CHECK(cols[i] == lead[i]);
    LedgerRow r;
    r.t = 0.5;
    r.E = -2.0;
    r.slip_nodes = 3;
    const LedgerRow back = ledger_from_values(ledger_values(r));
    CHECK(back.t == 0.5);
    CHECK(back.E == -2.0);
    CHECK(back.slip_nodes == 3);
}
