#include "adhesim/scenarios.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace adhesim {

namespace {

constexpr double kPi = 3.14159265358979323846;

void set_uniform_theta(Scenario& sc, double theta0) { sc.initial.theta0 = theta0; }

}  // namespace

MaterialSet default_materials() {
    MaterialSet m;
    for (auto& b : m.bulk) {
        b.lambda = 1.0;
        b.mu = 1.0;
        b.lambda_v = 0.02;
        b.mu_v = 0.02;
        b.rho = 1.0;
        b.c_B = {1.0, 0.0};
        b.K_B = 0.05 * Mat2::Identity();
    }
    InterfaceMaterial& a = m.iface;
    a.kappa_N = PiecewiseLinear::linear01(0.0, 20.0);
    a.kappa_T = PiecewiseLinear::linear01(0.0, 20.0);
    a.kappa_C = 200.0;
    a.p = 2.0;
    a.a0 = PiecewiseLinear::linear01(0.0, -2e-4);
    a.eps_dam = 0.05;
    a.frict = PiecewiseLinear::linear01(0.4, 0.2);
    a.sigma_y = PiecewiseLinear::constant(0.02);
    a.kappa_H = 1.0;
    a.kappa1 = 1e-4;
    a.kappa2 = 1e-4;
    a.d_N = 0.01;
    a.d_T = 0.01;
    a.c_A = {0.1, 0.0};
    a.K_A = 0.01;
    a.k1 = a.k2 = 0.5;
    return m;
}

VectorSeries constant_series(const Vec2& value, double T) { return piecewise_series({0.0, T}, {value, value}); }

VectorSeries piecewise_series(const std::vector<double>& t, const std::vector<Vec2>& values) {
    VectorSeries s;
    s.t = t;
    s.values = values;
    return s;
}

Scenario null_scenario() {
    Scenario sc;
    sc.name = "null";
    sc.mesh = build_rect_two_body(1.0, 0.25, 4, 1);
    sc.mat = default_materials();
    sc.T = 0.2;
    sc.tau = 0.02;
    sc.mat.iface.a0 = PiecewiseLinear::constant(0.0);  // nothing stored in the bond either
    set_uniform_theta(sc, 0.0);
    return sc;
}

Scenario friction_adhesion_scenario(bool b_coupling) {
    Scenario sc;
    sc.name = b_coupling ? "friction_adhesion_coupled" : "friction_adhesion";
    sc.mesh = build_rect_two_body(1.0, 0.25, 8, 2);
    sc.mat = default_materials();
    sc.T = 2.0;
    sc.tau = 0.01;
    // compression first, then shear on top of it
    sc.loads.traction = piecewise_series({0.0, 0.4, 2.0}, {Vec2(0.0, 0.0), Vec2(0.0, -0.02), Vec2(0.12, -0.02)});
    sc.mat.iface.sigma_y = PiecewiseLinear::constant(0.08);
    sc.mat.iface.eps_dam = 0.005;
    sc.flags.b_coupling = b_coupling;
    if (b_coupling) {
        for (auto& b : sc.mat.bulk) b.eps_th = 0.05;
        sc.mat.iface.b0 = PiecewiseLinear::linear01(0.0, 1e-4);
    }
    set_uniform_theta(sc, 1.0);
    return sc;
}

Scenario active_friction_scenario() {
    Scenario sc;
    sc.name = "active_friction";
    sc.mesh = build_rect_two_body(1.0, 0.25, 4, 1);
    sc.mat = default_materials();
    sc.T = 5.0;
    sc.tau = 0.01;
    sc.initial.alpha = Vec::Zero(5);
    // constant loads so the dead-load potential closes the energy budget
    sc.loads.traction = constant_series(Vec2(0.03, -0.04), sc.T);
    set_uniform_theta(sc, 1.0);
    return sc;
}

Scenario shock_heating_scenario() {
    Scenario sc;
    sc.name = "shock_heating";
    sc.mesh = build_rect_two_body(1.0, 0.25, 8, 2);
    sc.mat = default_materials();
    sc.mat.iface.c_A = {0.01, 0.0};
    sc.T = 1.0;
    sc.tau = 0.005;
    sc.initial.alpha = Vec::Zero(9);
    sc.loads.traction = piecewise_series({0.0, 0.2, 0.3, 0.31, 0.5, 0.51, 1.0},
                                         {Vec2(0.0, 0.0), Vec2(0.0, -0.05), Vec2(0.0, -0.05), Vec2(0.2, -0.05),
                                          Vec2(0.2, -0.05), Vec2(0.0, -0.05), Vec2(0.0, -0.05)});
    set_uniform_theta(sc, 0.05);
    return sc;
}

Scenario peel_scenario() {
    Scenario sc;
    sc.name = "peel";
    sc.mesh = build_rect_two_body(2.0, 0.2, 20, 2);
    sc.mat = default_materials();
    sc.mat.iface.a0 = PiecewiseLinear::linear01(0.0, -1e-3);
    sc.mat.iface.eps_dam = 1e-3;
    sc.T = 3.0;
    sc.tau = 0.01;
    sc.loads.traction = piecewise_series({0.0, 3.0}, {Vec2(0.0, 0.0), Vec2(0.0, 0.3)});
    sc.loads.traction_window = {-1.0, 0.3};
    set_uniform_theta(sc, 1.0);
    return sc;
}

Scenario poro_scenario() {
    Scenario sc;
    sc.name = "poro";
    sc.mesh = build_rect_two_body(1.0, 0.25, 4, 1);
    sc.mat = default_materials();
    for (auto& b : sc.mat.bulk) {
        b.beta_B = 0.5;
        b.M_B = 1.0;
        b.K_chem = 0.5;
        b.mob_B = 0.05;
        b.kappa_cap = 1e-3;
    }
    InterfaceMaterial& a = sc.mat.iface;
    a.beta_A = 0.2;
    a.M_A = 1.0;
    a.K_chem_A = 0.5;
    a.mob_A = 0.05;
    a.m_transfer = 0.2;
    a.kappa3 = 1e-3;
    sc.flags.poro = true;
    sc.T = 2.5;
    sc.tau = 0.005;
    sc.loads.traction = piecewise_series({0.0, 0.5, 2.5}, {Vec2(0.0, 0.0), Vec2(0.01, -0.02), Vec2(0.02, -0.02)});
    // uneven initial content drives diffusion
    const int nn = sc.mesh.num_nodes();
    Vec zb(nn);
    for (int i = 0; i < nn; ++i) zb[i] = 0.1 * (1.0 + std::cos(kPi * sc.mesh.nodes[i].x()));
    sc.initial.zeta_B = zb;
    sc.initial.zeta_A = Vec::Zero(sc.mesh.num_interface());
    set_uniform_theta(sc, 1.0);
    return sc;
}

double ModalCase::q(double t) const {
    const double wd = omega * std::sqrt(1.0 - zeta * zeta);
    return std::exp(-zeta * omega * t) * (std::cos(wd * t) + zeta * omega / wd * std::sin(wd * t));
}

double ModalCase::q_rate(double t) const {
    const double wd = omega * std::sqrt(1.0 - zeta * zeta);
    return -omega * omega / wd * std::exp(-zeta * omega * t) * std::sin(wd * t);
}

ModalCase kelvin_voigt_modal_case(double c, double cycles) {
    ModalCase mc;
    Scenario& sc = mc.sc;
    sc.name = "kelvin_voigt_modal";
    sc.mesh = build_rect_two_body(1.0, 0.5, 2, 1);
    sc.mat = default_materials();
    InterfaceMaterial& a = sc.mat.iface;
    a.kappa_C = 0.0;
    a.frict = PiecewiseLinear::constant(0.0);
    a.sigma_y = PiecewiseLinear::constant(1e6);
    a.a0 = PiecewiseLinear::linear01(0.0, -1e6);
    a.b0 = PiecewiseLinear::constant(0.0);
    a.d_N = c * a.kappa_N(1.0);
    a.d_T = c * a.kappa_T(1.0);
    for (auto& b : sc.mat.bulk) {
        b.lambda_v = c * b.lambda;
        b.mu_v = c * b.mu;
        b.eps_th = 0.0;
    }
    set_uniform_theta(sc, 1.0);

    const DiscreteOperators ops = assemble_all(sc.mesh, sc.mat);
    SpMat Kt = ops.K_elast;
    Vec kn = ops.Mi_lumped * a.kappa_N(1.0), kt = ops.Mi_lumped * a.kappa_T(1.0);
    Kt += SpMat(ops.N_jump.transpose() * kn.asDiagonal() * ops.N_jump);
    Kt += SpMat(ops.T_jump.transpose() * kt.asDiagonal() * ops.T_jump);
    std::vector<int> free;
    for (int d = 0; d < ops.n_dofs; ++d)
        if (!ops.dirichlet_dof[d]) free.push_back(d);
    const int nf = static_cast<int>(free.size());
    Eigen::MatrixXd Kd = Eigen::MatrixXd(Kt), Md = Eigen::MatrixXd(ops.M_mass);
    Eigen::MatrixXd Kf(nf, nf), Mf(nf, nf);
    for (int i = 0; i < nf; ++i)
        for (int j = 0; j < nf; ++j) {
            Kf(i, j) = Kd(free[i], free[j]);
            Mf(i, j) = Md(free[i], free[j]);
        }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kf, Mf);
    if (es.info() != Eigen::Success) throw MatrixError("modal case: eigen decomposition failed");
    mc.omega = std::sqrt(es.eigenvalues()[0]);
    mc.zeta = 0.5 * c * mc.omega;
    mc.mode = Vec::Zero(ops.n_dofs);
    for (int i = 0; i < nf; ++i) mc.mode[free[i]] = es.eigenvectors()(i, 0);
    mc.amplitude = 0.01 / mc.mode.cwiseAbs().maxCoeff();

    // end between extrema so phase errors show in both u and v
    sc.T = cycles * 2.0 * kPi / mc.omega;
    sc.tau = sc.T / 50.0;
    sc.initial.u = mc.exact_u(0.0);
    sc.initial.v = Vec::Zero(ops.n_dofs);
    return mc;
}

std::vector<std::string> builtin_scenario_names() {
    return {"null", "friction_adhesion", "friction_adhesion_coupled", "active_friction", "shock_heating",
            "peel", "poro", "kelvin_voigt_modal"};
}

Scenario builtin_scenario(const std::string& name) {
    if (name == "null") return null_scenario();
    if (name == "friction_adhesion") return friction_adhesion_scenario(false);
    if (name == "friction_adhesion_coupled") return friction_adhesion_scenario(true);
    if (name == "active_friction") return active_friction_scenario();
    if (name == "shock_heating") return shock_heating_scenario();
    if (name == "peel") return peel_scenario();
    if (name == "poro") return poro_scenario();
    if (name == "kelvin_voigt_modal") return kelvin_voigt_modal_case().sc;
    throw ConfigError("unknown built-in scenario '" + name + "'");
}

}  // namespace adhesim
