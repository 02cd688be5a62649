#include "doctest.h"

#include "adhesim/scenarios.hpp"
#include "adhesim/stepper.hpp"

#include <cmath>

using namespace adhesim;

namespace {

Vec shift_body1(const DiscreteOperators& ops, double dx, double dy) {
    Vec u = Vec::Zero(ops.n_dofs);
    for (const auto& el : ops.elements)
        if (el.label == 1)
            for (int v : el.v) u[2 * v] = dx, u[2 * v + 1] = dy;
    return u;
}

}  // namespace

TEST_CASE("validation of run parameters") {
    Scenario sc = null_scenario();
    CHECK_NOTHROW(validate(sc));
    sc.tau = 0.03;  // does not divide T = 0.2
    CHECK_THROWS_AS(validate(sc), ConfigError);
    sc.tau = -0.01;
    CHECK_THROWS_AS(validate(sc), ConfigError);
    sc = null_scenario();
    sc.reg.eps_h = 0.0;
    CHECK_THROWS_AS(validate(sc), ConfigError);
    CHECK(step_count(null_scenario()) == 10);
}

TEST_CASE("null scenario keeps every ledger column at zero") {
    const RunResult r = run(null_scenario());
    REQUIRE(r.ledger.size() == 11u);
    for (const LedgerRow& row : r.ledger) {
        const auto v = ledger_values(row);
        for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] == 0.0);
    }
    CHECK(r.final_state.u.norm() == 0.0);
    CHECK(r.final_state.v.norm() == 0.0);
}

TEST_CASE("initial data are checked") {
    Scenario sc = null_scenario();
    sc.initial.alpha = Vec::Constant(sc.mesh.num_interface(), 1.5);
    CHECK_THROWS(initial_state(prepare(sc)));
}

TEST_CASE("uniform temperature at rest stays put") {
    Scenario sc = null_scenario();
    sc.initial.theta0 = 1.0;
    const StepContext ctx = prepare(sc);
    const SystemState s0 = initial_state(ctx);
    const StepOutcome o = advance(ctx, s0, 1);
    CHECK((o.next.theta_B - s0.theta_B).lpNorm<Eigen::Infinity>() <= 1e-13);
    CHECK((o.next.theta_A - s0.theta_A).lpNorm<Eigen::Infinity>() <= 1e-13);
    CHECK(o.next.u.norm() == 0.0);
}

TEST_CASE("boundary flux raises the bulk heat content by the regularised amount") {
    Scenario sc = null_scenario();
    sc.initial.theta0 = 1.0;
    const double h = 0.3;
    sc.loads.heat_flux.t = {0.0};
    sc.loads.heat_flux.values = {ScalarSeries::Value::Constant(h)};
    const StepContext ctx = prepare(sc);
    const SystemState s0 = initial_state(ctx);
    const StepOutcome o = advance(ctx, s0, 1);
    const double tau = sc.tau, eps = sc.reg.eps_h;
    const double expected = tau * h / (1.0 + tau * eps * h) * 1.0;  // top edge of length 1
    CHECK(o.report.heat_in == doctest::Approx(expected).epsilon(1e-12));
    const double dH = ctx.ops.bulk_lumped.dot(o.next.vartheta_B - s0.vartheta_B) +
                      ctx.ops.Mi_lumped.dot(o.next.vartheta_A - s0.vartheta_A);
    CHECK(dH == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("heat content gain equals the regularised dissipation heat") {
    Scenario sc = active_friction_scenario();
    sc.T = 0.2;
    const StepContext ctx = prepare(sc);
    SystemState s = initial_state(ctx);
    for (int k = 1; k <= step_count(sc); ++k) {
        const StepOutcome o = advance(ctx, s, k);
        const RegularisedSources& src = o.report.sources;
        const double heat = src.interface.sum() + src.bulk.sum();
        const double dH = ctx.ops.bulk_lumped.dot(o.next.vartheta_B - s.vartheta_B) +
                          ctx.ops.Mi_lumped.dot(o.next.vartheta_A - s.vartheta_A);
        CHECK(dH == doctest::Approx(sc.tau * heat + o.report.adiabatic).epsilon(1e-10));
        s = o.next;
    }
}

TEST_CASE("single-node Coulomb step") {
    InterfaceMaterial mat = default_materials().iface;
    const double mass = 1.0, tau = 0.1, length = 0.5, jn_prev = -0.01;
    const double w = coulomb_single_node(mass, Vec2::Zero(), mat, 0.0, 1.0, jn_prev, length, tau).threshold;
    // 0.4 * 200 * 0.01 * 0.5
    CHECK(w == doctest::Approx(0.4));
    const Vec2 dir = Vec2(3.0, 4.0).normalized();
    SUBCASE("below threshold sticks") {
        const CoulombNodeResult r = coulomb_single_node(mass, 0.9 * w * dir, mat, 0.0, 1.0, jn_prev, length, tau);
        CHECK(r.stick);
        CHECK(r.rate.norm() == 0.0);
    }
    SUBCASE("above threshold slips along the load") {
        const Vec2 load = 2.0 * w * dir;
        const CoulombNodeResult r = coulomb_single_node(mass, load, mat, 0.0, 1.0, jn_prev, length, tau);
        CHECK_FALSE(r.stick);
        CHECK(r.rate.normalized().dot(dir) == doctest::Approx(1.0).epsilon(1e-14));
        const Vec2 exact = coulomb_single_node_exact(mass, load, w, tau);
        CHECK((r.increment - exact).norm() <= 1e-12);
    }
}

TEST_CASE("damage step") {
    Scenario sc = null_scenario();
    sc.initial.theta0 = 1.0;
    InterfaceMaterial& a = sc.mat.iface;
    const double k = 20.0, G = 1e-3;
    a.kappa_N = PiecewiseLinear::linear01(0.0, k);
    a.a0 = PiecewiseLinear::linear01(0.0, -G);
    a.eps_dam = 0.5;
    const StepContext ctx = prepare(sc);
    const SystemState s0 = initial_state(ctx);

    SUBCASE("no driving force leaves alpha unchanged") {
        Scenario z = sc;
        z.mat.iface.a0 = PiecewiseLinear::constant(0.0);
        const StepContext c0 = prepare(z);
        const SystemState p = initial_state(c0);
        const DamageStepResult d = step_damage(c0, p, p);
        CHECK((d.alpha - p.alpha).norm() == 0.0);
    }
    SUBCASE("opening drives a closed-form rate") {
        SystemState prev = s0;
        prev.alpha.setConstant(0.8);
        SystemState mech = prev;
        const double jn = 0.02;
        mech.u = shift_body1(ctx.ops, 0.0, -jn);  // body 1 pulled away: opening
        const DamageStepResult d = step_damage(ctx, prev, mech);
        const double expected = 0.8 - sc.tau * (0.5 * k * jn * jn - G) / a.eps_dam;
        for (int i = 0; i < d.alpha.size(); ++i) CHECK(d.alpha[i] == doctest::Approx(expected).epsilon(1e-9));
    }
    SUBCASE("box caps alpha at one") {
        Scenario heal = sc;
        heal.flags.healing = true;
        heal.mat.iface.a0 = PiecewiseLinear::linear01(0.0, -1.0);  // strong pull towards bonding
        const StepContext ch = prepare(heal);
        SystemState prev = initial_state(ch);
        prev.alpha.setConstant(0.99);
        const DamageStepResult d = step_damage(ch, prev, prev);
        for (int i = 0; i < d.alpha.size(); ++i) CHECK(d.alpha[i] == 1.0);
        CHECK(d.constraint_work >= 0.0);
    }
}

TEST_CASE("shipped friction scenario keeps the energy ledgers") {
    Scenario sc = friction_adhesion_scenario(false);
    sc.T = 0.6;
    const RunResult r = run(sc);
    CHECK(r.worst_mech_rel_residual <= 1e-9);
    CHECK(r.min_total_slack >= -1e-12);
    CHECK(r.min_theta >= 0.0);
    for (std::size_t k = 1; k < r.ledger.size(); ++k) CHECK(r.ledger[k].R_cum >= r.ledger[k - 1].R_cum);
    CHECK(r.ledger.back().R_cum > 0.0);
}

TEST_CASE("delamination is monotone without healing") {
    Scenario sc = peel_scenario();
    sc.T = 1.5;
    RunOptions ro;
    ro.keep_states = true;
    const RunResult r = run(sc, ro);
    for (std::size_t k = 1; k < r.states.size(); ++k) {
        CHECK((r.states[k].alpha.array() <= r.states[k - 1].alpha.array()).all());
        CHECK(r.states[k].alpha.minCoeff() >= 0.0);
    }
}

TEST_CASE("midpoint rule is second order on the damped mode") {
    const ModalCase mc = kelvin_voigt_modal_case();
    StudyOptions so;
    so.exact_u = [&](double t) { return mc.exact_u(t); };
    so.exact_v = [&](double t) { return mc.exact_v(t); };
    const double T = mc.sc.T;
    const auto rows = convergence_study(mc.sc, {T / 50, T / 100, T / 200}, so);
    REQUIRE(rows.size() == 3u);
    CHECK(std::isnan(rows[0].order_u));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].order_u == doctest::Approx(2.0).epsilon(0.05));
        CHECK(rows[i].order_v == doctest::Approx(2.0).epsilon(0.05));
    }
}

TEST_CASE("study threads give the serial result") {
    Scenario sc = active_friction_scenario();
    sc.T = 0.4;
    StudyOptions serial, pooled;
    pooled.threads = 3;
    const auto a = convergence_study(sc, {0.02, 0.01, 0.005}, serial);
    const auto b = convergence_study(sc, {0.02, 0.01, 0.005}, pooled);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].norm_u == b[i].norm_u);
        CHECK(a[i].R_cum == b[i].R_cum);
    }
}

TEST_CASE("active friction stays bounded under refinement") {
    Scenario sc = active_friction_scenario();
    sc.T = 1.0;
    const auto rows = convergence_study(sc, {0.01, 0.005, 0.0025});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].ratio_u <= 1.05);
        CHECK(rows[i].ratio_v <= 1.05);
        CHECK(rows[i].ratio_theta <= 1.05);
    }
}

TEST_CASE("load tables must cover the horizon") {
    Scenario sc = null_scenario();
    sc.loads.traction = piecewise_series({0.0, 0.1}, {Vec2(0, 0), Vec2(0, 1)});
    CHECK_THROWS_AS(validate(sc), ConfigError);
    sc.loads.traction = constant_series(Vec2(0, 1), sc.T);
    CHECK_NOTHROW(validate(sc));
}
