#include "doctest.h"

#include "adhesim/keyvalue.hpp"
#include "adhesim/model.hpp"

#include <random>

using namespace adhesim;

TEST_CASE("normal compliance") {
    CHECK(gamma_C_value(0.1, 1000.0, 2.0) == 0.0);
    CHECK(gamma_C_prime(0.1, 1000.0, 2.0) == 0.0);
    CHECK(gamma_C_value(-0.1, 1000.0, 2.0) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(gamma_C_prime(-0.1, 1000.0, 2.0) == doctest::Approx(-100.0).epsilon(1e-14));
    CHECK(gamma_C_value(0.0, 1000.0, 2.0) == 0.0);
    CHECK(gamma_C_prime(0.0, 1000.0, 2.0) == 0.0);
}

TEST_CASE("compliance derivative matches finite differences") {
    for (double p : {2.0, 2.5, 3.0})
        for (double z : {-0.3, -0.05, -1e-3}) {
            const double h = 1e-7;
            const double fd = (gamma_C_value(z + h, 50.0, p) - gamma_C_value(z - h, 50.0, p)) / (2 * h);
            CHECK(gamma_C_prime(z, 50.0, p) == doctest::Approx(fd).epsilon(1e-6));
        }
}

TEST_CASE("difference quotient") {
    auto half_sq = [](double z) { return 0.5 * z * z; };
    auto id = [](double z) { return z; };
    CHECK(diff_quotient(half_sq, id, 2.0, 0.0) == 1.0);
    auto quart = [](double z) { return z * z * z * z; };
    auto dquart = [](double z) { return 4 * z * z * z; };
    CHECK(diff_quotient(quart, dquart, 1.0, 0.0) == 1.0);
    CHECK(diff_quotient(half_sq, id, 3.0, 3.0) == 3.0);
}

TEST_CASE("difference quotient is symmetric and exact for quadratics") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const double a = U(rng), z = U(rng), zt = U(rng);
        auto f = [a](double s) { return 0.5 * a * s * s; };
        auto df = [a](double s) { return a * s; };
        CHECK(diff_quotient(f, df, z, zt) == doctest::Approx(diff_quotient(f, df, zt, z)).epsilon(1e-13));
        CHECK(diff_quotient(f, df, z, zt) == doctest::Approx(0.5 * a * (z + zt)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("damage rate cost derivative") {
    CHECK(a1_partial(0.0, 0.5, 4.0) == 0.0);
    CHECK(a1_partial(-2.0, 0.5, 4.0) == -1.0);
    CHECK(a1_partial(2.0, 0.5, 4.0) == 0.5);
    CHECK(a1_value(-2.0, 0.5, 4.0) == 1.0);
}

TEST_CASE("heat content") {
    const Capacity unit{1.0, 0.0};
    CHECK(heat_content(2.0, unit) == 2.0);
    const Capacity lin{1.0, 1.0};
    CHECK(heat_content(2.0, lin) == 4.0);
    CHECK(inverse_heat_content(4.0, lin) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(heat_content(-1.0, lin), DomainError);
    CHECK_THROWS_AS(inverse_heat_content(-1.0, lin), DomainError);
}

TEST_CASE("heat content inverse round trip") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(0.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const Capacity c{0.1 + U(rng), U(rng)};
        const double theta = U(rng);
        CHECK(inverse_heat_content(heat_content(theta, c), c) == doctest::Approx(theta).epsilon(1e-12));
    }
}

TEST_CASE("piecewise linear tables") {
    const PiecewiseLinear f = PiecewiseLinear::parse("0:1, 1:3, 2:2");
    CHECK(f(-1.0) == 1.0);
    CHECK(f(0.5) == 2.0);
    CHECK(f(1.5) == 2.5);
    CHECK(f(5.0) == 2.0);
    CHECK(f.slope(0.5) == 2.0);
    CHECK(f.min_value() == 1.0);
    CHECK_THROWS_AS(PiecewiseLinear::parse("0:1 oops"), ModelError);
    CHECK(PiecewiseLinear::linear01(0.4, 0.2)(0.5) == doctest::Approx(0.3));
}

TEST_CASE("material file parsing and units") {
    const auto f = KeyValueFile::parse(
        "[bulk]\nlambda = 2e9\nmu = 1e9\n[interface]\nkappa_N = 4e9\nG_C = 30\nf0 = 0.3\n", "mat");
    UnitSystem u;
    u.length = 1e-3;
    u.stress = 1e9;
    const MaterialSet m = parse_materials(f, u);
    CHECK(m.bulk[0].lambda == doctest::Approx(2.0));
    CHECK(m.bulk[1].mu == doctest::Approx(1.0));
    // stiffness per length: 4e9 / (1e9 / 1e-3)
    CHECK(m.iface.kappa_N(1.0) == doctest::Approx(4e-3));
    // energy per length: 30 / (1e9 * 1e-3)
    CHECK(m.iface.a0(1.0) == doctest::Approx(-3e-5));
    CHECK(m.iface.friction_coefficient(0.0, 1.0) == doctest::Approx(0.3));
    // rate coefficients: energy per length times time, and its inverse
    UnitSystem ut;
    ut.length = 2.0;
    ut.time = 3.0;
    ut.stress = 5.0;
    const MaterialSet r = parse_materials(KeyValueFile::parse("[interface]\neps_dam = 30\neps_heal = 0.5\n"), ut);
    CHECK(r.iface.eps_dam == doctest::Approx(1.0));
    CHECK(r.iface.eps_heal == doctest::Approx(15.0));
    CHECK_THROWS_AS(parse_materials(KeyValueFile::parse("[bulk]\nlamda = 1\n"), u), ConfigError);
}

TEST_CASE("material validation") {
    MaterialSet m;
    CHECK_NOTHROW(validate(m, false));
    m.bulk[0].mu = -1.0;
    CHECK_THROWS_AS(validate(m, false), ModelError);
    m = MaterialSet{};
    m.iface.p = 1.5;
    CHECK_THROWS_AS(validate(m, false), ModelError);
}
