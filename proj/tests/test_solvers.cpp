#include "doctest.h"

#include "adhesim/solvers.hpp"

#include <random>

using namespace adhesim;

namespace {

SpMat dense_to_sparse(const Eigen::MatrixXd& A) { return A.sparseView(); }

CompositeProblem quadratic(const Eigen::MatrixXd& A, const Vec& b) {
    CompositeProblem p;
    p.n = static_cast<int>(b.size());
    p.tol = 1e-12;
    p.smooth.value = [A, b](const Vec& y) { return 0.5 * y.dot(A * y) + b.dot(y); };
    p.smooth.gradient = [A, b](const Vec& y) { return Vec(A * y + b); };
    p.smooth.hessian = [A](const Vec&) { return dense_to_sparse(A); };
    return p;
}

}  // namespace

TEST_CASE("scalar shrinkage") {
    CHECK(prox_weighted_abs(3.0, 1.0, 1.0) == 2.0);
    CHECK(prox_weighted_abs(0.5, 1.0, 1.0) == 0.0);
    CHECK(prox_weighted_abs(-3.0, 1.0, 1.0) == -2.0);
}

TEST_CASE("block shrinkage") {
    CHECK(prox_weighted_norm(Vec2(3.0, 4.0), 1.0, 5.0) == Vec2::Zero());
    const Vec2 p = prox_weighted_norm(Vec2(3.0, 4.0), 1.0, 2.5);
    CHECK(p.x() == doctest::Approx(1.5));
    CHECK(p.y() == doctest::Approx(2.0));
}

TEST_CASE("box projection") {
    Eigen::Vector3d x(0.5, -0.2, 1.7);
    const Eigen::Vector3d p = project_box01(x);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.0);
    CHECK(p[2] == 1.0);
}

TEST_CASE("composite solver without prox matches a direct solve") {
    Eigen::MatrixXd A(3, 3);
    A << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const Vec b = Eigen::Vector3d(1, -2, 0.5);
    const Vec y = solve_composite(quadratic(A, b), Vec::Zero(3));
    const Vec ref = A.ldlt().solve(-b);
    CHECK((y - ref).norm() <= 1e-10);
}

TEST_CASE("composite solver with shrinkage") {
    Eigen::MatrixXd A(1, 1);
    A << 1.0;
    Vec b(1);
    b << -3.0;
    CompositeProblem p = quadratic(A, b);
    ProxBlock blk;
    blk.weight = 1.0;
    p.blocks = {blk};
    for (bool newton : {true, false}) {
        p.newton = newton;
        CHECK(solve_composite(p, Vec::Zero(1))[0] == doctest::Approx(2.0).epsilon(1e-10));
    }
}

TEST_CASE("two-dimensional stick") {
    Eigen::MatrixXd A = Eigen::Matrix2d::Identity() * 2.0;
    const Vec b = Vec2(0.3, -0.4);  // gradient at zero has norm 0.5
    CompositeProblem p = quadratic(A, b);
    ProxBlock blk;
    blk.size = 2;
    blk.weight = 0.6;
    p.blocks = {blk};
    const Vec y = solve_composite(p, Vec2(1.0, 1.0));
    CHECK(y.norm() <= 1e-12);
    p.blocks[0].weight = 0.25;
    const Vec s = solve_composite(p, Vec::Zero(2));
    // slip opposite the gradient, magnitude (0.5 - 0.25) / 2
    CHECK(s.norm() == doctest::Approx(0.125).epsilon(1e-10));
    CHECK(s.dot(b) / (s.norm() * b.norm()) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("composite solver reports non-convergence") {
    Eigen::MatrixXd A(2, 2);
    A << 1e6, 0, 0, 1;
    CompositeProblem p = quadratic(A, Vec2(1.0, 1.0));
    p.newton = false;
    p.max_iter = 2;
    ProxBlock blk;
    blk.weight = 0.1;
    p.blocks = {blk};
    CHECK_THROWS_AS(solve_composite(p, Vec2(5.0, 5.0)), NonConvergenceError);
}

TEST_CASE("objective decreases along proximal gradient iterations") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Eigen::MatrixXd R = Eigen::MatrixXd::NullaryExpr(6, 6, [&]() { return U(rng); });
    Eigen::MatrixXd A = R * R.transpose() + Eigen::MatrixXd::Identity(6, 6);
    Vec b = Vec::NullaryExpr(6, [&]() { return 3.0 * U(rng); });
    CompositeProblem p = quadratic(A, b);
    p.newton = false;
    for (int i = 0; i < 3; ++i) {
        ProxBlock blk;
        blk.start = 2 * i;
        blk.size = 2;
        blk.weight = 0.5;
        p.blocks.push_back(blk);
    }
    SolveReport rep;
    solve_composite(p, Vec::Zero(6), &rep);
    REQUIRE(rep.objective_history.size() > 1);
    for (std::size_t k = 1; k < rep.objective_history.size(); ++k)
        CHECK(rep.objective_history[k] <= rep.objective_history[k - 1] + 1e-12);
}

TEST_CASE("sparse SPD solve") {
    SpMat I(3, 3);
    I.setIdentity();
    const Vec b = Eigen::Vector3d(1, 2, 3);
    CHECK((solve_spd(I, b) - b).norm() == 0.0);
    Eigen::MatrixXd A(2, 2);
    A << 2, 1, 1, 2;
    const Vec x = solve_spd(dense_to_sparse(A), Vec2(3.0, 3.0));
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));
    Eigen::MatrixXd S(2, 2);
    S << 1, 1, 1, 1;
    CHECK_THROWS_AS(solve_spd(dense_to_sparse(S), Vec2(1.0, 0.0)), MatrixError);
}

TEST_CASE("monotone heat solve") {
    auto sys1 = [](double c0, double c1, double k, double s) {
        HeatSystem h;
        h.K = SpMat(1, 1);
        if (k != 0.0) h.K.insert(0, 0) = k;
        h.source = Vec::Constant(1, s);
        h.weight = Vec::Ones(1);
        h.capacity = {Capacity{c0, c1}};
        return h;
    };
    CHECK(solve_monotone_heat(sys1(1, 0, 0, 0), Vec::Constant(1, 3.0), 1.0, Vec::Zero(1))[0] ==
          doctest::Approx(3.0));
    CHECK(solve_monotone_heat(sys1(1, 0, 1, 2), Vec::Zero(1), 1.0, Vec::Zero(1))[0] == doctest::Approx(1.0));
    CHECK(solve_monotone_heat(sys1(1, 1, 0, 0), Vec::Constant(1, 4.0), 1.0, Vec::Zero(1))[0] ==
          doctest::Approx(2.0).epsilon(1e-10));
}
