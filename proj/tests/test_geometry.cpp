#include "doctest.h"

#include "adhesim/geometry.hpp"

#include <sstream>

using namespace adhesim;

TEST_CASE("rect mesh with one cell per body") {
    const TwoBodyMesh m = build_rect_two_body(1.0, 0.5, 1, 1);
    CHECK(m.num_triangles() == 4);
    CHECK(m.num_nodes() == 8);
    CHECK(m.num_interface() == 2);
    CHECK_NOTHROW(validate(m));
}

TEST_CASE("interface polyline length") {
    const TwoBodyMesh m = build_rect_two_body(1.0, 0.5, 2, 1);
    const InterfaceMesh im = interface_mesh(m);
    CHECK(im.lengths.sum() == 1.0);
    CHECK(im.lumped.sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("paired interface nodes coincide exactly") {
    const TwoBodyMesh m = build_rect_two_body(1.0, 0.5, 4, 2);
    for (const auto& p : m.node_pairs) {
        CHECK(m.nodes[p[0]].x() == m.nodes[p[1]].x());
        CHECK(m.nodes[p[0]].y() == m.nodes[p[1]].y());
    }
}

TEST_CASE("jump maps") {
    const TwoBodyMesh m = build_rect_two_body(1.0, 0.5, 2, 1);
    const JumpMaps J = jump_maps(m);
    const int N = m.num_nodes();
    std::vector<int> label(N, 0);
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
        for (int v : m.triangles[t]) label[v] = m.labels[t];

    SUBCASE("zero displacement gives zero jump") {
        CHECK((J.jump * Vec::Zero(2 * N)).norm() == 0.0);
    }
    SUBCASE("body 1 lifted onto body 2 penetrates") {
        const double delta = 0.01;
        Vec u = Vec::Zero(2 * N);
        for (int i = 0; i < N; ++i)
            if (label[i] == 1) u[2 * i + 1] = delta;
        const Vec jn = J.normal_jump * u;
        for (int i = 0; i < jn.size(); ++i) CHECK(jn[i] == doctest::Approx(-delta));
        CHECK((J.tangential_scalar * u).norm() == doctest::Approx(0.0));
    }
    SUBCASE("tangential shift of body 1") {
        const double delta = 0.02;
        Vec u = Vec::Zero(2 * N);
        for (int i = 0; i < N; ++i)
            if (label[i] == 1) u[2 * i] = delta;
        const Vec jt = J.tangential_scalar * u;
        const Vec2 t = tangent_of(m.normal_n2[0]);
        for (int i = 0; i < jt.size(); ++i) CHECK(jt[i] == doctest::Approx(delta * t.x()));
        CHECK((J.normal_jump * u).norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("surface gradient") {
    InterfaceMesh im;
    im.segments = {{0, 1}, {1, 2}};
    im.lengths = Vec2(0.5, 0.5);
    im.arclength = Eigen::Vector3d(0.0, 0.5, 1.0);
    im.lumped = Eigen::Vector3d(0.25, 0.5, 0.25);
    const SpMat G = surface_gradient(im);
    CHECK((G * Vec::Constant(3, 7.0)).norm() == 0.0);
    const Vec g1 = G * im.arclength;
    CHECK(g1[0] == doctest::Approx(1.0));
    CHECK(g1[1] == doctest::Approx(1.0));
    const Vec g = G * Eigen::Vector3d(0.0, 1.0, 3.0);
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(4.0));
    const SpMat S = laplace_beltrami(im);
    CHECK((S * Vec::Ones(3)).norm() == doctest::Approx(0.0));
}

TEST_CASE("mesh text round trip") {
    const TwoBodyMesh m = build_rect_two_body(1.0, 0.25, 3, 2);
    std::stringstream ss;
    write_mesh(ss, m);
    const TwoBodyMesh r = read_mesh(ss);
    CHECK(r.num_nodes() == m.num_nodes());
    CHECK(r.num_triangles() == m.num_triangles());
    CHECK(r.num_interface() == m.num_interface());
    for (int i = 0; i < m.num_nodes(); ++i) CHECK(r.nodes[i] == m.nodes[i]);
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(build_rect_two_body(1.0, 0.5, 0, 1), GeometryError);
    CHECK_THROWS_AS(build_rect_two_body(-1.0, 0.5, 2, 1), GeometryError);
    std::istringstream bad("not a mesh");
    CHECK_THROWS(read_mesh(bad));
}
