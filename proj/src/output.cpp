#include "adhesim/output.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace adhesim {

namespace {

// shortest representation that parses back to the same double
std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ConfigError("ledger: bad number '" + s + "'");
    return v;
}

}  // namespace

void write_ledger_csv(std::ostream& os, const std::vector<LedgerRow>& rows) {
    const auto cols = ledger_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : rows) {
        const auto v = ledger_values(r);
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << fmt(v[i]);
        os << "\n";
    }
}

std::vector<LedgerRow> read_ledger_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("ledger: empty input");
    const auto cols = ledger_columns();
    {
        std::istringstream h(line);
        std::string name;
        for (const auto& c : cols) {
            if (!std::getline(h, name, ',') || name != c)
                throw ConfigError("ledger: header does not start with the expected columns");
        }
    }
    std::vector<LedgerRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream in(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(in, cell, ',')) v.push_back(parse_double(cell));
        rows.push_back(ledger_from_values(v));
    }
    return rows;
}

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows) {
    os << "tau,steps,err_u,err_v,err_theta,order_u,order_v,norm_u,norm_v,norm_theta,R_cum,ratio_u,ratio_v,"
          "ratio_theta,ratio_R\n";
    for (const auto& r : rows) {
        os << fmt(r.tau) << "," << r.steps;
        for (double x : {r.err_u, r.err_v, r.err_theta, r.order_u, r.order_v, r.norm_u, r.norm_v, r.norm_theta,
                         r.R_cum, r.ratio_u, r.ratio_v, r.ratio_theta, r.ratio_R})
            os << "," << fmt(x);
        os << "\n";
    }
}

void write_snapshot(std::ostream& os, const SystemState& s, const StepContext& ctx) {
    const DiscreteOperators& ops = ctx.ops;
    const Vec u = s.u + dirichlet_lift(s.t, ctx.sc.loads, ops);
    const bool poro = s.poro();
    os << "# t " << fmt(s.t) << "\n";
    os << "# bulk " << ops.n_nodes << "\n";
    os << "# id x y ux uy vx vy theta_B vartheta_B" << (poro ? " zeta_B mu_B" : "") << "\n";
    for (int i = 0; i < ops.n_nodes; ++i) {
        const Vec2& x = ops.mesh.nodes[i];
        os << i << " " << fmt(x.x()) << " " << fmt(x.y()) << " " << fmt(u[2 * i]) << " " << fmt(u[2 * i + 1]) << " "
           << fmt(s.v[2 * i]) << " " << fmt(s.v[2 * i + 1]) << " " << fmt(s.theta_B[i]) << " "
           << fmt(s.vartheta_B[i]);
        if (poro) os << " " << fmt(s.zeta_B[i]) << " " << fmt(s.mu_B.size() ? s.mu_B[i] : 0.0);
        os << "\n";
    }
    const Vec jn = ops.N_jump * u, jt = ops.T_jump * u;
    os << "# interface " << ops.n_iface << "\n";
    os << "# id side1 side2 pi alpha theta_A vartheta_A jn jt" << (poro ? " zeta_A mu_A" : "") << "\n";
    for (int i = 0; i < ops.n_iface; ++i) {
        os << i << " " << ops.mesh.node_pairs[i][0] << " " << ops.mesh.node_pairs[i][1] << " " << fmt(s.pi[i]) << " "
           << fmt(s.alpha[i]) << " " << fmt(s.theta_A[i]) << " " << fmt(s.vartheta_A[i]) << " " << fmt(jn[i]) << " "
           << fmt(jt[i]);
        if (poro) os << " " << fmt(s.zeta_A[i]) << " " << fmt(s.mu_A.size() ? s.mu_A[i] : 0.0);
        os << "\n";
    }
}

void write_vtk(std::ostream& os, const SystemState& s, const StepContext& ctx) {
    const DiscreteOperators& ops = ctx.ops;
    const Vec u = s.u + dirichlet_lift(s.t, ctx.sc.loads, ops);
    const int n = ops.n_nodes;
    os << "# vtk DataFile Version 3.0\n";
    os << ctx.sc.name << " t=" << fmt(s.t) << "\n";
    os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << n << " double\n";
    for (const Vec2& x : ops.mesh.nodes) os << fmt(x.x()) << " " << fmt(x.y()) << " 0\n";
    os << "CELLS " << ops.n_elem << " " << 4 * ops.n_elem << "\n";
    for (const auto& el : ops.elements) os << "3 " << el.v[0] << " " << el.v[1] << " " << el.v[2] << "\n";
    os << "CELL_TYPES " << ops.n_elem << "\n";
    for (int e = 0; e < ops.n_elem; ++e) os << "5\n";
    os << "CELL_DATA " << ops.n_elem << "\nSCALARS body int 1\nLOOKUP_TABLE default\n";
    for (const auto& el : ops.elements) os << el.label << "\n";
    os << "POINT_DATA " << n << "\n";
    os << "VECTORS displacement double\n";
    for (int i = 0; i < n; ++i) os << fmt(u[2 * i]) << " " << fmt(u[2 * i + 1]) << " 0\n";
    os << "VECTORS velocity double\n";
    for (int i = 0; i < n; ++i) os << fmt(s.v[2 * i]) << " " << fmt(s.v[2 * i + 1]) << " 0\n";
    os << "SCALARS theta_B double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < n; ++i) os << fmt(s.theta_B[i]) << "\n";
    // interface fields on both nodes of each pair, 0 elsewhere
    const std::vector<int>& pair = ops.pair_of_node;
    auto iface = [&](const char* name, const Vec& f) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int i = 0; i < n; ++i) os << (pair[i] >= 0 ? fmt(f[pair[i]]) : std::string("0")) << "\n";
    };
    os << "SCALARS interface_mask int 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < n; ++i) os << (pair[i] >= 0 ? 1 : 0) << "\n";
    iface("alpha", s.alpha);
    iface("theta_A", s.theta_A);
    iface("pi", s.pi);
    if (s.poro()) {
        os << "SCALARS zeta_B double 1\nLOOKUP_TABLE default\n";
        for (int i = 0; i < n; ++i) os << fmt(s.zeta_B[i]) << "\n";
        iface("zeta_A", s.zeta_A);
    }
}

void write_run_report(std::ostream& os, const RunReport& r) {
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["config"] = r.config;
    j["completed"] = r.completed;
    j["steps"] = r.steps;
    j["steps_done"] = r.steps_done;
    j["hard_invariant_violations"] = r.violations.size();
    j["violations"] = r.violations;
    nlohmann::ordered_json checks = nlohmann::ordered_json::object();
    for (const auto& [name, ok] : r.checks) checks[name] = ok ? "pass" : "fail";
    j["checks"] = checks;
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(fmt(x)); };
    j["worst_mech_rel_residual"] = num(r.worst_mech_rel_residual);
    j["min_theta"] = num(r.min_theta);
    j["min_total_slack"] = num(r.min_total_slack);
    j["min_entropy_term"] = num(r.min_entropy_term);
    j["min_alpha"] = num(r.min_alpha);
    j["max_alpha"] = num(r.max_alpha);
    j["R_cum"] = num(r.R_cum);
    j["work_cum"] = num(r.work_cum);
    j["runtime_seconds"] = num(r.runtime_seconds);
    if (!r.error.empty()) j["error"] = r.error;
    os << j.dump(2) << "\n";
}

}  // namespace adhesim
