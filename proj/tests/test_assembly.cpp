#include "doctest.h"

#include "adhesim/assembly.hpp"
#include "adhesim/scenarios.hpp"

#include <sstream>

using namespace adhesim;

namespace {

DiscreteOperators ops_for(double width, double height, int nx, int ny, const MaterialSet& mat = MaterialSet{}) {
    return assemble_all(build_rect_two_body(width, height, nx, ny), mat);
}

Vec translation(int n_nodes, double dx, double dy) {
    Vec u(2 * n_nodes);
    for (int i = 0; i < n_nodes; ++i) u[2 * i] = dx, u[2 * i + 1] = dy;
    return u;
}

}  // namespace

TEST_CASE("stiffness annihilates rigid translations") {
    const DiscreteOperators ops = ops_for(1.0, 0.5, 1, 1);
    CHECK((ops.K_elast * translation(ops.n_nodes, 1.0, 0.0)).norm() <= 1e-13);
    CHECK((ops.K_elast * translation(ops.n_nodes, 0.0, 1.0)).norm() <= 1e-13);
    CHECK((ops.K_visc * translation(ops.n_nodes, 0.3, -0.7)).norm() <= 1e-13);
}

TEST_CASE("stiffness annihilates infinitesimal rotation") {
    const DiscreteOperators ops = ops_for(1.0, 0.5, 3, 2);
    Vec u(ops.n_dofs);
    for (int i = 0; i < ops.n_nodes; ++i) {
        const Vec2& x = ops.mesh.nodes[i];
        u[2 * i] = -x.y();
        u[2 * i + 1] = x.x();
    }
    CHECK((ops.K_elast * u).norm() <= 1e-12);
}

TEST_CASE("mass matrices carry the total mass") {
    MaterialSet mat;
    mat.bulk[0].rho = mat.bulk[1].rho = 2.0;
    const DiscreteOperators ops = ops_for(1.0, 0.5, 2, 1, mat);
    const Vec ex = translation(ops.n_nodes, 1.0, 0.0);
    CHECK(ex.dot(ops.M_mass * ex) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ex.dot(ops.M_lumped * ex) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ops.bulk_lumped.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ops.Mi_lumped.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("stiffness and mass are symmetric positive semidefinite") {
    const DiscreteOperators ops = ops_for(1.0, 0.25, 4, 2, default_materials());
    const Eigen::MatrixXd K = Eigen::MatrixXd(ops.K_elast);
    CHECK((K - K.transpose()).norm() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    const Eigen::MatrixXd M = Eigen::MatrixXd(ops.M_mass);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(M);
    CHECK(em.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("heat gradient annihilates constants") {
    const DiscreteOperators ops = ops_for(1.0, 0.5, 3, 1);
    const Vec five = Vec::Constant(ops.heat_size(), 5.0);
    CHECK((ops.G_heat * five).norm() <= 1e-12);
}

TEST_CASE("heat operator blocks") {
    MaterialSet mat;
    const DiscreteOperators ops = ops_for(1.0, 0.5, 3, 1, mat);
    const Vec tA = Vec::Ones(ops.n_iface), tB = Vec::Ones(ops.n_nodes);
    const Vec zero = Vec::Zero(ops.n_iface), alpha = Vec::Ones(ops.n_iface);
    SUBCASE("constant pair annihilated") {
        const SpMat W = heat_weights(ops, mat, tA, tB, zero, alpha);
        const SpMat K = SpMat(ops.G_heat.transpose()) * W * ops.G_heat;
        CHECK((K * Vec::Ones(ops.heat_size())).norm() <= 1e-12);
    }
    SUBCASE("no transfer decouples interface and bulk") {
        mat.iface.k1 = mat.iface.k2 = 0.0;
        mat.iface.K_A = 0.0;
        const SpMat W = heat_weights(ops, mat, tA, tB, zero, alpha);
        const Eigen::MatrixXd K = Eigen::MatrixXd(SpMat(ops.G_heat.transpose()) * W * ops.G_heat);
        CHECK(K.topRightCorner(ops.n_iface, ops.n_nodes).norm() == 0.0);
        CHECK(K.topLeftCorner(ops.n_iface, ops.n_iface).norm() == 0.0);
    }
}

TEST_CASE("load vector") {
    MaterialSet mat;
    const DiscreteOperators ops = ops_for(1.0, 0.5, 2, 1, mat);
    LoadSet loads;
    SUBCASE("no loads") { CHECK(assemble_F(0.3, loads, ops, mat).norm() == 0.0); }
    SUBCASE("gravity") {
        loads.body_force = constant_series(Vec2(0.0, -1.0), 1.0);
        const Vec F = assemble_load_vector(0.3, loads, ops);
        double fy = 0.0;
        for (int i = 0; i < ops.n_nodes; ++i) fy += F[2 * i + 1];
        CHECK(fy == doctest::Approx(-1.0).epsilon(1e-14));
        const Vec Fh = assemble_F(0.3, loads, ops, mat);
        for (int d = 0; d < ops.n_dofs; ++d) CHECK(Fh[d] == (ops.dirichlet_dof[d] ? 0.0 : F[d]));
    }
    SUBCASE("top traction") {
        loads.traction = constant_series(Vec2(0.0, 1.0), 1.0);
        const Vec F = assemble_F(0.3, loads, ops, mat);
        double fy = 0.0;
        for (int i = 0; i < ops.n_nodes; ++i) fy += F[2 * i + 1];
        CHECK(fy == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("time series interpolation") {
    const VectorSeries s = piecewise_series({0.0, 1.0, 2.0}, {Vec2(0, 0), Vec2(2, 0), Vec2(2, -1)});
    CHECK(s(0.5).x() == doctest::Approx(1.0));
    CHECK(s(1.5).y() == doctest::Approx(-0.5));
    CHECK(s(2.0).y() == doctest::Approx(-1.0));
    CHECK_THROWS(s(3.0));
    CHECK(s.slope(0.5).x() == doctest::Approx(2.0));
}

TEST_CASE("triplet text round trip") {
    const DiscreteOperators ops = ops_for(1.0, 0.5, 2, 1);
    std::stringstream ss;
    write_triplets(ss, ops.K_elast);
    const SpMat K = read_triplets(ss);
    CHECK(Eigen::MatrixXd(K - ops.K_elast).norm() == 0.0);
}
