#include "doctest.h"

#include "adhesim/poro.hpp"
#include "adhesim/scenarios.hpp"
#include "adhesim/stepper.hpp"

using namespace adhesim;

namespace {

struct PoroFixture {
    MaterialSet mat;
    DiscreteOperators ops;
    SystemState s;

    PoroFixture() {
        mat = default_materials();
        for (auto& b : mat.bulk) {
            b.M_B = 2.0;
            b.beta_B = 0.5;
            b.K_chem = 0.7;
            b.zeta_eq = 0.0;
            b.kappa_cap = 0.0;
        }
        mat.iface.kappa3 = 0.0;
        ops = assemble_all(build_rect_two_body(1.0, 0.5, 2, 1), mat);
        s.u = Vec::Zero(ops.n_dofs);
        s.v = Vec::Zero(ops.n_dofs);
        s.pi = Vec::Zero(ops.n_iface);
        s.alpha = Vec::Ones(ops.n_iface);
        s.zeta_A = Vec::Constant(ops.n_iface, mat.iface.zeta_eq_A);
        s.zeta_B = Vec::Zero(ops.n_nodes);
    }

    void uniform_strain(double tr) {
        for (int i = 0; i < ops.n_nodes; ++i) {
            s.u[2 * i] = 0.5 * tr * ops.mesh.nodes[i].x();
            s.u[2 * i + 1] = 0.5 * tr * ops.mesh.nodes[i].y();
        }
    }
};

}  // namespace

TEST_CASE("chemical potentials") {
    PoroFixture f;
    SUBCASE("equilibrium") {
        const auto [muA, muB] = chemical_potentials(f.s, f.ops, f.mat);
        CHECK(muA.norm() <= 1e-14);
        CHECK(muB.norm() <= 1e-14);
    }
    SUBCASE("uniform excess content") {
        f.s.zeta_B.setConstant(1.0);
        const auto [muA, muB] = chemical_potentials(f.s, f.ops, f.mat);
        for (int i = 0; i < muB.size(); ++i) CHECK(muB[i] == doctest::Approx(2.0 + 0.7).epsilon(1e-13));
    }
    SUBCASE("uniform volumetric strain") {
        const double tr = 0.01;
        f.uniform_strain(tr);
        const auto [muA, muB] = chemical_potentials(f.s, f.ops, f.mat);
        for (int i = 0; i < muB.size(); ++i) CHECK(muB[i] == doctest::Approx(-2.0 * 0.5 * tr).epsilon(1e-12));
    }
    SUBCASE("disabled extension") {
        SystemState plain = f.s;
        plain.zeta_A.resize(0);
        plain.zeta_B.resize(0);
        CHECK_THROWS_AS(chemical_potentials(plain, f.ops, f.mat), ConfigError);
    }
}

TEST_CASE("poro stress") {
    PoroFixture f;
    SUBCASE("content without strain gives a spherical compression") {
        f.s.zeta_B.setConstant(1.0);
        for (const auto& sig : poro_stress_extension(f.s, f.ops, f.mat)) {
            CHECK(sig[0] == doctest::Approx(-2.0 * 0.5));
            CHECK(sig[1] == doctest::Approx(-2.0 * 0.5));
            CHECK(sig[2] == 0.0);
        }
    }
    SUBCASE("matches the strain derivative of the energy") {
        const PoroOperators P = assemble_poro(f.ops, f.mat);
        f.s.zeta_B.setConstant(0.3);
        const double tr = 0.02, h = 1e-6;
        f.uniform_strain(tr + h);
        const double ep = poro_energy(P, f.s);
        f.uniform_strain(tr - h);
        const double em = poro_energy(P, f.s);
        f.uniform_strain(tr);
        // bulk area is 1, the stress is spherical and uniform
        const double fd = (ep - em) / (2 * h);
        for (const auto& sig : poro_stress_extension(f.s, f.ops, f.mat)) CHECK(sig[0] == doctest::Approx(fd).epsilon(1e-7));
    }
    SUBCASE("no Biot coupling") {
        for (auto& b : f.mat.bulk) b.beta_B = 0.0;
        f.s.zeta_B.setConstant(1.0);
        for (const auto& sig : poro_stress_extension(f.s, f.ops, f.mat)) CHECK(sig.norm() == 0.0);
    }
}

TEST_CASE("diffusion operator") {
    PoroFixture f;
    const PoroOperators P = assemble_poro(f.ops, f.mat);
    CHECK((P.L * Vec::Ones(P.n_content())).norm() <= 1e-12);
    const Eigen::MatrixXd L = Eigen::MatrixXd(P.L);
    CHECK((L - L.transpose()).norm() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("poro steps") {
    Scenario sc = poro_scenario();
    sc.loads = LoadSet{};
    for (auto& b : sc.mat.bulk) b.beta_B = 0.0;
    sc.mat.iface.beta_A = 0.0;
    sc.T = 0.05;

    SUBCASE("equilibrium content stays put") {
        Scenario eq = sc;
        eq.initial.zeta_A.resize(0);
        eq.initial.zeta_B.resize(0);
        const RunResult r = run(eq);
        const StepContext ctx = prepare(eq);
        const SystemState s0 = initial_state(ctx);
        CHECK((r.final_state.zeta_B - s0.zeta_B).norm() <= 1e-13);
        CHECK((r.final_state.zeta_A - s0.zeta_A).norm() <= 1e-13);
        CHECK(r.final_state.u.norm() <= 1e-13);
    }
    SUBCASE("content flows down the potential gradient and is conserved") {
        const StepContext ctx = prepare(sc);
        const SystemState s0 = initial_state(ctx);
        const StepOutcome o = advance(ctx, s0, 1);
        const double m0 = poro_mass(ctx.ops, s0), m1 = poro_mass(ctx.ops, o.next);
        CHECK(std::abs(m1 - m0) <= 1e-12 * std::abs(m0));
        // initial content peaks at x = 0 and vanishes at x = 1
        int left = 0, right = 0;
        for (int i = 0; i < ctx.ops.n_nodes; ++i) {
            if (ctx.ops.mesh.nodes[i].x() < ctx.ops.mesh.nodes[left].x()) left = i;
            if (ctx.ops.mesh.nodes[i].x() > ctx.ops.mesh.nodes[right].x()) right = i;
        }
        CHECK(o.next.zeta_B[left] < s0.zeta_B[left]);
        CHECK(o.next.zeta_B[right] > s0.zeta_B[right]);
        CHECK(o.report.diffusion_dissipation >= 0.0);
    }
    SUBCASE("no transfer keeps an empty bulk empty") {
        Scenario d = sc;
        d.mat.iface.m_transfer = 0.0;
        d.initial.zeta_B = Vec::Zero(d.mesh.num_nodes());
        Vec za(d.mesh.num_interface());
        for (int i = 0; i < za.size(); ++i) za[i] = 0.1 * i;
        d.initial.zeta_A = za;
        const RunResult r = run(d);
        CHECK(r.final_state.zeta_B.norm() <= 1e-14);
        CHECK((r.final_state.zeta_A - za).norm() > 1e-6);
    }
}
