#include "doctest.h"

#include "adhesim/config.hpp"
#include "adhesim/output.hpp"
#include "adhesim/scenarios.hpp"

#include "json.hpp"

#include <sstream>

using namespace adhesim;

namespace {

const char* kUnits = "[units]\nlength = 1\ntime = 1\nstress = 1\ntemperature = 1\n";

RunConfig parse(const std::string& body) { return parse_run_config(KeyValueFile::parse(kUnits + body, "test.cfg")); }

}  // namespace

TEST_CASE("key value files") {
    const auto f = KeyValueFile::parse("top = 1\n# comment\n[a]\nx = 2.5  # trailing\nflag = yes\nlist = 1, 2, 3\n");
    CHECK(f.get_double("", "top") == 1.0);
    CHECK(f.get_double("a", "x") == 2.5);
    CHECK(f.get_bool("a", "flag", false));
    CHECK(f.get_list("a", "list").size() == 3u);
    CHECK(f.get_int("a", "missing", 7) == 7);
    CHECK_THROWS_AS(f.get_double("a", "flag"), ConfigError);
    CHECK_THROWS_AS(KeyValueFile::parse("[a\n"), ConfigError);
    try {
        f.get_double("a", "nope");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("nope") != std::string::npos);
    }
}

TEST_CASE("run configuration") {
    SUBCASE("units block is mandatory") {
        CHECK_THROWS_AS(parse_run_config(KeyValueFile::parse("[scenario]\nbuiltin = null\n")), ConfigError);
    }
    SUBCASE("built-in scenario with overrides") {
        const RunConfig c = parse("[scenario]\nbuiltin = null\nT = 0.4\ntau = 0.01\n[output]\ndir = x\n");
        CHECK(c.scenario.T == 0.4);
        CHECK(c.scenario.tau == 0.01);
        CHECK(c.out_dir == "x");
        CHECK(c.builtin == "null");
        CHECK(c.builtin_unchanged);
    }
    SUBCASE("rect mesh and loads") {
        const RunConfig c = parse(
            "[scenario]\nT = 1\ntau = 0.1\n[mesh]\nkind = rect\nwidth = 2\nheight = 0.5\nnx = 4\nny = 1\n"
            "[loads]\ntraction = 0:0,0; 1:0.1,-0.2\n");
        CHECK(c.scenario.mesh.num_interface() == 5);
        CHECK(c.scenario.loads.traction(0.5).y() == doctest::Approx(-0.1));
        CHECK_FALSE(c.builtin_unchanged);
    }
    SUBCASE("unit scaling of the time axis") {
        const std::string text = std::string("[units]\nlength = 1\ntime = 2\nstress = 1\ntemperature = 1\n") +
                                 "[scenario]\nbuiltin = null\nT = 0.4\ntau = 0.02\n";
        const RunConfig c = parse_run_config(KeyValueFile::parse(text));
        CHECK(c.scenario.T == doctest::Approx(0.2));
        CHECK(c.scenario.tau == doctest::Approx(0.01));
    }
    SUBCASE("rejected inputs") {
        CHECK_THROWS_AS(parse("[scenario]\nbuiltin = null\ntau = -0.01\n"), ConfigError);
        CHECK_THROWS_AS(parse("[scenario]\nbuiltin = null\ntau = 0.03\n"), ConfigError);
        CHECK_THROWS_AS(parse("[scenario]\nbuiltin = null\ncolour = red\n"), ConfigError);
        CHECK_THROWS_AS(parse("[scenario]\nbuiltin = nowhere\n"), ConfigError);
        CHECK_THROWS_AS(parse("[scenario]\nT = 1\ntau = 0.1\n"), ConfigError);  // no mesh
        CHECK_THROWS_AS(parse("[extras]\na = 1\n[scenario]\nbuiltin = null\n"), ConfigError);
        CHECK_THROWS_AS(parse("[scenario]\nbuiltin = null\n[materials]\nfile = /nonexistent.mat\n"), ConfigError);
    }
}

TEST_CASE("series parsing") {
    const VectorSeries v = parse_vector_series("0:1,2 2:3,4", 1.0, 1.0);
    CHECK(v(1.0).x() == doctest::Approx(2.0));
    const ScalarSeries s = parse_scalar_series("0:1; 1:3", 2.0, 1.0);
    CHECK(s(0.25)[0] == doctest::Approx(2.0));
    CHECK_THROWS_AS(parse_vector_series("0:1", 1.0, 1.0), ConfigError);
}

TEST_CASE("ledger CSV round trip is exact") {
    Scenario sc = friction_adhesion_scenario(false);
    sc.T = 0.1;
    const RunResult r = run(sc);
    std::stringstream ss;
    write_ledger_csv(ss, r.ledger);
    std::string header;
    std::getline(std::stringstream(ss.str()), header);
    CHECK(header.rfind("t,M,E,H,R_cum,work_cum,mech_residual,total_slack,min_theta,max_alpha_change", 0) == 0);
    const auto back = read_ledger_csv(ss);
    REQUIRE(back.size() == r.ledger.size());
    for (std::size_t k = 0; k < back.size(); ++k) CHECK(ledger_values(back[k]) == ledger_values(r.ledger[k]));
}

TEST_CASE("snapshot and VTK output") {
    Scenario sc = friction_adhesion_scenario(false);
    const StepContext ctx = prepare(sc);
    const SystemState s = initial_state(ctx);
    std::ostringstream snap, vtk;
    write_snapshot(snap, s, ctx);
    write_vtk(vtk, s, ctx);
    CHECK(snap.str().find("# bulk " + std::to_string(ctx.ops.n_nodes)) != std::string::npos);
    CHECK(snap.str().find("# interface " + std::to_string(ctx.ops.n_iface)) != std::string::npos);
    CHECK(vtk.str().rfind("# vtk DataFile Version 3.0", 0) == 0);
    CHECK(vtk.str().find("POINTS " + std::to_string(ctx.ops.n_nodes)) != std::string::npos);
    CHECK(vtk.str().find("SCALARS alpha double 1") != std::string::npos);
}

TEST_CASE("run report") {
    RunReport rep;
    rep.scenario = "demo";
    rep.completed = true;
    rep.violations = {"alpha left [0,1] at node 3"};
    rep.checks = {{"energy_balance", true}};
    std::ostringstream os;
    write_run_report(os, rep);
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j["scenario"] == "demo");
    CHECK(j["hard_invariant_violations"] == 1);
    CHECK(j["checks"]["energy_balance"] == "pass");
}
