#include "adhesim/config.hpp"

#include "adhesim/scenarios.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

namespace adhesim {

namespace {

void check_keys(const KeyValueFile& f, const std::string& sec, const std::set<std::string>& allowed) {
    for (const auto& k : f.keys(sec))
        if (!allowed.count(k)) f.fail(sec, k, "unknown key");
}

std::vector<std::pair<double, std::vector<double>>> split_series(const std::string& text) {
    std::string s = text;
    std::replace(s.begin(), s.end(), ';', ' ');
    std::istringstream in(s);
    std::string tok;
    std::vector<std::pair<double, std::vector<double>>> out;
    while (in >> tok) {
        auto colon = tok.find(':');
        if (colon == std::string::npos) throw ConfigError("series entry '" + tok + "' is not t:value");
        std::pair<double, std::vector<double>> e;
        try {
            e.first = std::stod(tok.substr(0, colon));
            std::string rest = tok.substr(colon + 1);
            std::replace(rest.begin(), rest.end(), ',', ' ');
            std::istringstream vs(rest);
            std::string v;
            while (vs >> v) e.second.push_back(std::stod(v));
        } catch (const std::exception&) {
            throw ConfigError("series entry '" + tok + "' is not numeric");
        }
        out.push_back(std::move(e));
    }
    if (out.empty()) throw ConfigError("empty time series");
    return out;
}

std::string resolve(const std::string& base, const std::string& p) {
    namespace fs = std::filesystem;
    fs::path path(p);
    if (path.is_relative()) path = fs::path(base) / path;
    if (!fs::exists(path)) throw ConfigError("referenced file does not exist: " + path.string());
    return path.string();
}

EdgeWindow parse_window(const KeyValueFile& f, const std::string& sec, const std::string& key, double scale) {
    EdgeWindow w;
    if (!f.has(sec, key)) return w;
    std::vector<double> v = f.get_list(sec, key);
    if (v.size() != 2 || !(v[0] <= v[1])) f.fail(sec, key, "expected 'x_min, x_max'");
    w.x_min = v[0] / scale;
    w.x_max = v[1] / scale;
    return w;
}

EdgeTag parse_tag(const KeyValueFile& f, const std::string& sec, const std::string& key) {
    std::string v = f.get_string(sec, key);
    if (v == "dirichlet") return EdgeTag::Dirichlet;
    if (v == "neumann") return EdgeTag::Neumann;
    if (v == "free") return EdgeTag::Free;
    f.fail(sec, key, "expected dirichlet, neumann, free or all");
}

}  // namespace

VectorSeries parse_vector_series(const std::string& text, double time_scale, double value_scale) {
    VectorSeries s;
    for (const auto& [t, v] : split_series(text)) {
        if (v.size() != 2) throw ConfigError("vector series entries need two components");
        s.t.push_back(t / time_scale);
        s.values.emplace_back(v[0] / value_scale, v[1] / value_scale);
    }
    return s;
}

ScalarSeries parse_scalar_series(const std::string& text, double time_scale, double value_scale) {
    ScalarSeries s;
    for (const auto& [t, v] : split_series(text)) {
        if (v.size() != 1) throw ConfigError("scalar series entries need one value");
        s.t.push_back(t / time_scale);
        s.values.emplace_back(Eigen::Matrix<double, 1, 1>(v[0] / value_scale));
    }
    return s;
}

RunConfig parse_run_config(const KeyValueFile& f, const std::string& base_dir) {
    RunConfig cfg;
    cfg.path = f.origin();
    if (!f.keys("").empty()) f.fail("", f.keys("").front(), "key outside any section");
    static const std::set<std::string> known{"units",  "mesh",   "materials", "scenario", "loads",
                                             "initial", "regularisation", "solver", "output", "verify"};
    for (const auto& sec : f.sections())
        if (!sec.empty() && !known.count(sec)) throw ConfigError(f.origin() + ": unknown section [" + sec + "]");

    // units block is mandatory
    if (!f.has_section("units")) throw ConfigError(f.origin() + ": missing [units] block");
    check_keys(f, "units", {"length", "time", "stress", "temperature"});
    UnitSystem& u = cfg.units;
    u.length = f.get_double("units", "length");
    u.time = f.get_double("units", "time");
    u.stress = f.get_double("units", "stress");
    u.temperature = f.get_double("units", "temperature");
    for (const char* k : {"length", "time", "stress", "temperature"})
        if (!(f.get_double("units", k) > 0.0)) f.fail("units", k, "reference scale must be positive");

    Scenario& sc = cfg.scenario;
    check_keys(f, "scenario", {"name", "builtin", "T", "tau", "poro", "b_coupling", "friction", "healing", "damage"});
    const std::string builtin = f.get_string("scenario", "builtin", "");
    if (!builtin.empty()) {
        try {
            sc = builtin_scenario(builtin);
        } catch (const ConfigError& e) {
            f.fail("scenario", "builtin", e.what());
        }
    } else {
        sc.mat = default_materials();
    }
    sc.name = f.get_string("scenario", "name", builtin.empty() ? "run" : builtin);
    cfg.builtin = builtin;
    cfg.builtin_unchanged = !builtin.empty();
    for (const char* s : {"mesh", "materials", "loads", "initial", "regularisation"})
        if (f.has_section(s)) cfg.builtin_unchanged = false;
    for (const char* k : {"poro", "b_coupling", "friction", "healing", "damage"})
        if (f.has("scenario", k)) cfg.builtin_unchanged = false;
    if (f.has("scenario", "T")) sc.T = f.get_double("scenario", "T") / u.time;
    if (f.has("scenario", "tau")) {
        sc.tau = f.get_double("scenario", "tau") / u.time;
        if (!(sc.tau > 0.0)) f.fail("scenario", "tau", "time step must be positive");
    }
    if (!(sc.T > 0.0)) f.fail("scenario", "T", "time horizon must be positive");
    sc.flags.poro = f.get_bool("scenario", "poro", sc.flags.poro);
    sc.flags.b_coupling = f.get_bool("scenario", "b_coupling", sc.flags.b_coupling);
    sc.flags.friction = f.get_bool("scenario", "friction", sc.flags.friction);
    sc.flags.healing = f.get_bool("scenario", "healing", sc.flags.healing);
    sc.flags.damage = f.get_bool("scenario", "damage", sc.flags.damage);

    if (f.has_section("mesh")) {
        check_keys(f, "mesh", {"kind", "file", "width", "height", "nx", "ny"});
        const std::string kind = f.get_string("mesh", "kind", f.has("mesh", "file") ? "file" : "rect");
        if (kind == "file") {
            cfg.mesh_file = resolve(base_dir, f.get_string("mesh", "file"));
            sc.mesh = load_mesh_file(cfg.mesh_file);
            for (Vec2& x : sc.mesh.nodes) x /= u.length;
        } else if (kind == "rect") {
            const double w = f.get_double("mesh", "width") / u.length;
            const double h = f.get_double("mesh", "height") / u.length;
            const int nx = f.get_int("mesh", "nx", 4), ny = f.get_int("mesh", "ny", 1);
            try {
                sc.mesh = build_rect_two_body(w, h, nx, ny);
            } catch (const GeometryError& e) {
                f.fail("mesh", "width", e.what());
            }
        } else {
            f.fail("mesh", "kind", "expected rect or file");
        }
        sc.initial = InitialData{};
    } else if (builtin.empty()) {
        throw ConfigError(f.origin() + ": missing [mesh] block");
    }

    if (f.has_section("materials")) {
        check_keys(f, "materials", {"file"});
        cfg.material_file = resolve(base_dir, f.get_string("materials", "file"));
        sc.mat = load_material_file(cfg.material_file, u);
    }

    if (f.has_section("loads")) {
        check_keys(f, "loads", {"traction", "traction_window", "body_force", "dirichlet", "heat_flux", "heat_flux_edges",
                                "heat_window"});
        LoadSet& L = sc.loads;
        auto series = [&](const char* key, double scale) {
            try {
                return parse_vector_series(f.get_string("loads", key), u.time, scale);
            } catch (const ConfigError& e) {
                f.fail("loads", key, e.what());
            }
        };
        if (f.has("loads", "traction")) L.traction = series("traction", u.stress);
        if (f.has("loads", "body_force")) L.body_force = series("body_force", u.stress / u.length);
        if (f.has("loads", "dirichlet")) L.dirichlet = series("dirichlet", u.length);
        L.traction_window = parse_window(f, "loads", "traction_window", u.length);
        if (f.has("loads", "heat_flux")) {
            try {
                L.heat_flux = parse_scalar_series(f.get_string("loads", "heat_flux"), u.time,
                                                  u.stress * u.length / u.time);
            } catch (const ConfigError& e) {
                f.fail("loads", "heat_flux", e.what());
            }
        }
        if (f.has("loads", "heat_flux_edges")) {
            if (f.get_string("loads", "heat_flux_edges") == "all") L.heat_flux_all_edges = true;
            else L.heat_flux_tag = parse_tag(f, "loads", "heat_flux_edges");
        }
        L.heat_window = parse_window(f, "loads", "heat_window", u.length);
        try {
            validate(L);
        } catch (const Error& e) {
            throw ConfigError(f.origin() + ": [loads] " + e.what());
        }
    }

    if (f.has_section("initial")) {
        check_keys(f, "initial", {"theta0", "alpha0", "zeta_A0", "zeta_B0"});
        InitialData& in = sc.initial;
        in.theta0 = f.get_double("initial", "theta0", in.theta0 * u.temperature) / u.temperature;
        if (!(in.theta0 >= 0.0)) f.fail("initial", "theta0", "temperature must be non-negative");
        if (f.has("initial", "alpha0")) {
            const double a0 = f.get_double("initial", "alpha0");
            if (!(a0 >= 0.0 && a0 <= 1.0)) f.fail("initial", "alpha0", "must lie in [0, 1]");
            in.alpha = Vec::Constant(sc.mesh.num_interface(), a0);
        }
        if (f.has("initial", "zeta_A0"))
            in.zeta_A = Vec::Constant(sc.mesh.num_interface(), f.get_double("initial", "zeta_A0") / u.length);
        if (f.has("initial", "zeta_B0"))
            in.zeta_B = Vec::Constant(sc.mesh.num_nodes(), f.get_double("initial", "zeta_B0"));
    }

    if (f.has_section("regularisation")) {
        check_keys(f, "regularisation", {"eps_v", "eps_pi", "eps_alpha", "eps_e", "eps_h"});
        RegularisationSet& r = sc.reg;
        r.eps_v = f.get_double("regularisation", "eps_v", r.eps_v);
        r.eps_pi = f.get_double("regularisation", "eps_pi", r.eps_pi);
        r.eps_alpha = f.get_double("regularisation", "eps_alpha", r.eps_alpha);
        r.eps_e = f.get_double("regularisation", "eps_e", r.eps_e);
        r.eps_h = f.get_double("regularisation", "eps_h", r.eps_h);
    }

    if (f.has_section("solver")) {
        check_keys(f, "solver", {"mech_tol", "damage_tol", "heat_tol", "max_iter", "newton"});
        SolverSettings& s = sc.solver;
        s.mech_tol = f.get_double("solver", "mech_tol", s.mech_tol);
        s.damage_tol = f.get_double("solver", "damage_tol", s.damage_tol);
        s.heat_tol = f.get_double("solver", "heat_tol", s.heat_tol);
        s.max_iter = f.get_int("solver", "max_iter", s.max_iter);
        s.newton = f.get_bool("solver", "newton", s.newton);
    }

    if (f.has_section("output")) {
        check_keys(f, "output", {"dir", "snapshot_stride"});
        cfg.out_dir = f.get_string("output", "dir", cfg.out_dir);
        cfg.snapshot_stride = f.get_int("output", "snapshot_stride", 0);
        if (cfg.snapshot_stride < 0) f.fail("output", "snapshot_stride", "must be non-negative");
    }

    if (f.has_section("verify")) {
        check_keys(f, "verify",
                   {"energy_balance", "balance_tol", "total_energy", "slack_tol", "entropy", "entropy_tol"});
        VerifyToggles& v = cfg.verify;
        v.energy_balance = f.get_bool("verify", "energy_balance", v.energy_balance);
        v.balance_tol = f.get_double("verify", "balance_tol", v.balance_tol);
        v.total_energy = f.get_bool("verify", "total_energy", v.total_energy);
        v.slack_tol = f.get_double("verify", "slack_tol", v.slack_tol);
        v.entropy = f.get_bool("verify", "entropy", v.entropy);
        v.entropy_tol = f.get_double("verify", "entropy_tol", v.entropy_tol);
    }

    try {
        validate(sc);
    } catch (const Error& e) {
        throw ConfigError(f.origin() + ": " + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    KeyValueFile f = KeyValueFile::load(path);
    std::string base = std::filesystem::path(path).parent_path().string();
    if (base.empty()) base = ".";
    return parse_run_config(f, base);
}

}  // namespace adhesim
