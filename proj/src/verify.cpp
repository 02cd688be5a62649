#include "adhesim/verify.hpp"

#include "adhesim/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>

namespace adhesim {

namespace {

using Clock = std::chrono::steady_clock;

std::string sci(double x) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(2) << x;
    return s.str();
}

void note(const VerifyOptions& opt, const std::string& msg) {
    if (opt.log) *opt.log << "  " << msg << "\n";
}

double worst_balance(const RunResult& r) {
    double w = 0.0;
    for (const auto& rep : r.reports)
        if (rep.balance.scale > 0) w = std::max(w, std::abs(rep.balance.residual) / rep.balance.scale);
    return w;
}

struct ShippedRun {
    std::string name;
    double theta_scale = 1.0;
    bool healing = false;
    RunResult result;
};

// Every built-in scenario run once at default settings, states kept.
const std::vector<ShippedRun>& shipped_runs(const VerifyOptions& opt) {
    static std::mutex m;
    static std::map<bool, std::vector<ShippedRun>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(opt.poro);
    if (it != cache.end()) return it->second;
    std::vector<ShippedRun> runs;
    for (const auto& name : builtin_scenario_names()) {
        Scenario sc = builtin_scenario(name);
        if (sc.flags.poro && !opt.poro) continue;
        StepContext ctx = prepare(sc);
        ShippedRun r;
        r.name = name;
        r.theta_scale = ctx.theta_scale;
        r.healing = ctx.healing;
        RunOptions ro;
        ro.keep_states = true;
        r.result = run(ctx, ro);
        note(opt, name + ": " + std::to_string(r.result.reports.size()) + " steps");
        runs.push_back(std::move(r));
    }
    return cache.emplace(opt.poro, std::move(runs)).first->second;
}

template <typename F>
CriterionResult timed(int id, const std::string& name, F&& body) {
    CriterionResult c;
    c.id = id;
    c.name = name;
    const auto t0 = Clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("error: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return c;
}

}  // namespace

CriterionResult check_energy_balance(const VerifyOptions&) {
    return timed(1, "discrete mechanical energy balance", [&](CriterionResult& c) {
        Scenario sc = friction_adhesion_scenario(false);
        sc.solver.mech_tol = sc.solver.damage_tol = tolerances::solver_tol;
        const RunResult tight = run(sc);
        const double w_tight = worst_balance(tight);

        Scenario coupled = friction_adhesion_scenario(true);
        coupled.solver.mech_tol = coupled.solver.damage_tol = tolerances::solver_tol;
        const double w_coupled = worst_balance(run(coupled));

        // negative control: loose tolerance, proximal gradient only
        Scenario loose = sc;
        loose.solver.mech_tol = loose.solver.damage_tol = tolerances::loose_solver_tol;
        loose.solver.newton = false;
        const double w_loose = worst_balance(run(loose));
        const bool control_fails = w_loose > tolerances::balance_rel && w_loose > 10.0 * w_tight;

        double activity = 0.0;
        for (const auto& r : tight.reports) activity = std::max(activity, r.max_alpha_change);
        c.pass = w_tight <= tolerances::balance_rel && w_coupled <= tolerances::balance_rel && control_fails &&
                 tight.ledger.back().R_cum > 0.0 && activity > 0.0;
        c.detail = "worst rel residual " + sci(w_tight) + " (b-coupled " + sci(w_coupled) + "), negative control " +
                   sci(w_loose) + (control_fails ? " fails as expected" : " did not fail");
    });
}

CriterionResult check_total_energy(const VerifyOptions&) {
    return timed(2, "total energy inequality", [&](CriterionResult& c) {
        Scenario sc = active_friction_scenario();
        if (sc.flags.b_coupling || !sc.loads.heat_flux.empty())
            throw Error("active friction scenario must have b = 0 and no boundary heat");
        const RunResult r = run(sc);
        // loads are constant, so the dead-load potential -<F, u> closes the budget
        double worst = -std::numeric_limits<double>::infinity();
        int slip_steps = 0;
        for (std::size_t k = 1; k < r.ledger.size(); ++k) {
            const LedgerRow& a = r.ledger[k - 1];
            const LedgerRow& b = r.ledger[k];
            const double e0 = a.M + a.E + a.H - a.work_cum;
            const double e1 = b.M + b.E + b.H - b.work_cum;
            const double scale = a.M + std::abs(a.E) + a.H + std::abs(a.work_cum);
            worst = std::max(worst, (e1 - e0) / scale);
            if (b.slip_nodes > 0) ++slip_steps;
        }
        const int steps = static_cast<int>(r.reports.size());
        c.pass = steps >= tolerances::total_energy_min_steps && worst <= tolerances::total_energy_rel &&
                 slip_steps > 0 && r.ledger.back().R_cum > 0.0;
        c.detail = std::to_string(steps) + " steps, " + std::to_string(slip_steps) +
                   " with slip, largest relative increase " + sci(worst);
    });
}

CriterionResult check_temperature_sign(const VerifyOptions& opt) {
    return timed(3, "temperature non-negativity", [&](CriterionResult& c) {
        const auto& runs = shipped_runs(opt);
        bool ok = true;
        double worst = std::numeric_limits<double>::infinity();
        std::string worst_name;
        bool burst = false;
        for (const auto& s : runs) {
            for (const auto& row : s.result.ledger) {
                if (row.min_theta < -tolerances::theta_floor_rel * s.theta_scale) ok = false;
                if (row.min_theta / s.theta_scale < worst) {
                    worst = row.min_theta / s.theta_scale;
                    worst_name = s.name;
                }
            }
            if (s.name == "shock_heating") {
                double before = 0.0, after = 0.0;
                for (const auto& row : s.result.ledger) {
                    if (row.t <= 0.3) before = row.R_cum;
                    if (row.t <= 0.5) after = row.R_cum;
                }
                burst = after > 2.0 * before && after > 0.0;
            }
        }
        c.pass = ok && burst;
        c.detail = std::to_string(runs.size()) + " scenarios, min theta/theta_R " + sci(worst) + " (" + worst_name +
                   "), shock burst " + (burst ? "seen" : "missing");
    });
}

CriterionResult check_entropy_terms(const VerifyOptions& opt) {
    return timed(4, "entropy production signs", [&](CriterionResult& c) {
        const auto& runs = shipped_runs(opt);
        double worst = std::numeric_limits<double>::infinity();
        long terms = 0;
        for (const auto& s : runs)
            for (const auto& rep : s.result.reports) {
                worst = std::min(worst, rep.entropy_min);
                ++terms;
            }
        c.pass = worst >= tolerances::entropy_floor;
        c.detail = "min term " + sci(worst) + " over " + std::to_string(terms) + " steps";
    });
}

CriterionResult check_midpoint_order(const VerifyOptions& opt) {
    return timed(5, "midpoint order", [&](CriterionResult& c) {
        const ModalCase mc = kelvin_voigt_modal_case();
        const double T = mc.sc.T;
        StudyOptions so;
        so.exact_u = [&](double t) { return mc.exact_u(t); };
        so.exact_v = [&](double t) { return mc.exact_v(t); };
        so.threads = opt.threads;
        const auto rows = convergence_study(mc.sc, {T / 50, T / 100, T / 200, T / 400}, so);
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < rows.size(); ++i) {
            lo = std::min({lo, rows[i].order_u, rows[i].order_v});
            if (std::isnan(rows[i].order_u) || std::isnan(rows[i].order_v)) lo = -1.0;
        }
        c.pass = lo >= tolerances::midpoint_order;
        std::ostringstream d;
        d << "observed orders u/v " << std::fixed << std::setprecision(3);
        for (std::size_t i = 1; i < rows.size(); ++i) d << (i > 1 ? ", " : "") << rows[i].order_u << "/" << rows[i].order_v;
        c.detail = d.str();
    });
}

CriterionResult check_stability(const VerifyOptions& opt) {
    return timed(6, "stability across tau halvings", [&](CriterionResult& c) {
        Scenario sc = friction_adhesion_scenario(false);
        StudyOptions so;
        so.threads = opt.threads;
        const auto rows = convergence_study(sc, {0.02, 0.01, 0.005}, so);
        double worst = 0.0;
        for (std::size_t i = 1; i < rows.size(); ++i)
            for (double r : {rows[i].ratio_u, rows[i].ratio_v, rows[i].ratio_theta, rows[i].ratio_R})
                worst = std::max(worst, std::isfinite(r) ? std::abs(r - 1.0) : 1.0);
        c.pass = worst <= tolerances::stability_ratio && rows.back().R_cum > 0.0;
        c.detail = "largest ratio deviation " + sci(worst) + " (u, v, theta, R)";
    });
}

CriterionResult check_coulomb_threshold(const VerifyOptions&) {
    return timed(7, "Coulomb stick/slip threshold", [&](CriterionResult& c) {
        InterfaceMaterial mat = default_materials().iface;
        const double mass = 1.0, tau = 0.1, length = 0.5, jn_prev = -0.01, alpha = 0.0, theta = 1.0;
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> ang(0.0, 2.0 * 3.14159265358979323846);
        double worst_stick = 0.0, worst_cos = 0.0, worst_err = 0.0;
        bool stick_ok = true, slip_ok = true;
        for (int i = 0; i < 20; ++i) {
            const double phi = ang(rng);
            const Vec2 dir(std::cos(phi), std::sin(phi));
            const double w = coulomb_single_node(mass, Vec2::Zero(), mat, alpha, theta, jn_prev, length, tau).threshold;
            CoulombNodeResult below = coulomb_single_node(mass, 0.99 * w * dir, mat, alpha, theta, jn_prev, length, tau);
            worst_stick = std::max(worst_stick, below.rate.norm());
            stick_ok = stick_ok && below.stick;
            const Vec2 load = 1.5 * w * dir;
            CoulombNodeResult above = coulomb_single_node(mass, load, mat, alpha, theta, jn_prev, length, tau);
            const double cosine = above.rate.dot(load) / (above.rate.norm() * load.norm());
            worst_cos = std::max(worst_cos, 1.0 - cosine);
            const Vec2 exact = coulomb_single_node_exact(mass, load, w, tau) / tau;
            worst_err = std::max(worst_err, (above.rate - exact).norm());
            slip_ok = slip_ok && !above.stick;
        }
        c.pass = stick_ok && slip_ok && worst_stick <= tolerances::stick_rate && worst_cos <= tolerances::slip_cosine &&
                 worst_err <= tolerances::slip_closed_form;
        c.detail = "stick rate " + sci(worst_stick) + ", 1-cos " + sci(worst_cos) + ", closed-form error " +
                   sci(worst_err);
    });
}

namespace {

// Minimiser of a scalar function by grid search at the given final step.
template <typename F>
double grid_min_1d(F&& f, double lo, double hi, double step) {
    double best = lo, fb = f(lo);
    const long n = std::lround((hi - lo) / step);
    for (long i = 1; i <= n; ++i) {
        const double x = lo + i * step;
        const double v = f(x);
        if (v < fb) fb = v, best = x;
    }
    return best;
}

// Nested 2-D grid search: a sweep at step 100h over the box, then sweeps at
// 10h, h and h/10 over +-5 cells of the previous winner.  The last level
// pins the minimiser of shallow cones, where a grid at h alone is ambiguous.
template <typename F>
Vec2 grid_min_2d(F&& f, double lo, double hi, double step) {
    Vec2 best(lo, lo);
    double fb = f(best);
    auto sweep = [&](const Vec2& from, double h, long n) {
        for (long i = 0; i <= n; ++i)
            for (long j = 0; j <= n; ++j) {
                const Vec2 x(from.x() + i * h, from.y() + j * h);
                const double v = f(x);
                if (v < fb) fb = v, best = x;
            }
    };
    double h = 100.0 * step;
    sweep(Vec2(lo, lo), h, std::lround((hi - lo) / h));
    for (int level = 0; level < 3; ++level) {
        const double wide = 5.0 * h;
        h /= 10.0;
        sweep(best - Vec2(wide, wide), h, std::lround(2.0 * wide / h));
    }
    return best;
}

}  // namespace

CriterionResult check_prox_oracles(const VerifyOptions&) {
    return timed(8, "prox and solver oracles", [&](CriterionResult& c) {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        const double h = tolerances::grid_step;
        double worst = 0.0;
        const int n = tolerances::prox_instances;
        for (int i = 0; i < n; ++i) {
            // scalar shrinkage
            const double x = 2.0 * U(rng), w = 0.5 * (1.0 + U(rng)), step = 0.5 + 0.5 * (1.0 + U(rng));
            const double p = prox_weighted_abs(x, w, step);
            const double g = grid_min_1d([&](double y) { return 0.5 * (y - x) * (y - x) / step + w * std::abs(y); },
                                         -4.0, 4.0, h);
            worst = std::max(worst, std::abs(p - g));
            // block shrinkage in 2-D
            const Vec2 x2(2.0 * U(rng), 2.0 * U(rng));
            const Vec2 p2 = prox_weighted_norm(x2, w, step);
            const Vec2 g2 = grid_min_2d(
                [&](const Vec2& y) { return 0.5 * (y - x2).squaredNorm() / step + w * y.norm(); }, -3.0, 3.0, h);
            worst = std::max(worst, (p2 - g2).lpNorm<Eigen::Infinity>());
            // box projection
            Eigen::Matrix<double, 1, 1> xb(2.0 * U(rng));
            const double pb = project_box01(xb)[0];
            const double gb = grid_min_1d([&](double y) { return (y - xb[0]) * (y - xb[0]); }, 0.0, 1.0, h);
            worst = std::max(worst, std::abs(pb - gb));

            // composite solver: a shrinkage coordinate and an independent box coordinate
            {
                const double a = 1.5 + U(rng), b = 2.0 * U(rng), cc = U(rng), ww = 0.5 * (1.0 + U(rng));
                const double a2 = 1.5 + U(rng), b2 = 2.0 * U(rng), lo = -0.5 + 0.5 * U(rng), hi = lo + 0.8;
                CompositeProblem pr;
                pr.n = 2;
                pr.tol = 1e-12;
                pr.smooth.value = [&](const Vec& y) {
                    return 0.5 * a * y[0] * y[0] + b * y[0] + 0.5 * a2 * y[1] * y[1] + b2 * y[1];
                };
                pr.smooth.gradient = [&](const Vec& y) {
                    Vec gr(2);
                    gr << a * y[0] + b, a2 * y[1] + b2;
                    return gr;
                };
                pr.smooth.hessian = [&](const Vec&) {
                    SpMat H(2, 2);
                    H.insert(0, 0) = a;
                    H.insert(1, 1) = a2;
                    return H;
                };
                ProxBlock nb;
                nb.start = 0;
                nb.weight = ww;
                nb.center = Vec2(cc, 0.0);
                ProxBlock bb;
                bb.kind = ProxBlock::Kind::Box;
                bb.start = 1;
                bb.lo = lo;
                bb.hi = hi;
                pr.blocks = {nb, bb};
                const Vec y = solve_composite(pr, Vec::Zero(2));
                const double g0 = grid_min_1d(
                    [&](double t) { return 0.5 * a * t * t + b * t + ww * std::abs(t - cc); }, -4.0, 4.0, h);
                const double g1 = grid_min_1d([&](double t) { return 0.5 * a2 * t * t + b2 * t; }, lo, hi, h);
                worst = std::max({worst, std::abs(y[0] - g0), std::abs(y[1] - g1)});
            }
            // composite solver, 2-D block
            {
                Eigen::Matrix2d R;
                R << U(rng), U(rng), U(rng), U(rng);
                const Eigen::Matrix2d A = R * R.transpose() + Eigen::Matrix2d::Identity();
                const Vec2 b(U(rng), U(rng)), cc(0.5 * U(rng), 0.5 * U(rng));
                const double ww = 0.5 * (1.0 + U(rng));
                CompositeProblem pr;
                pr.n = 2;
                pr.tol = 1e-12;
                pr.smooth.value = [&](const Vec& y) { return 0.5 * y.dot(A * y) + b.dot(y); };
                pr.smooth.gradient = [&](const Vec& y) { return Vec(A * y + b); };
                pr.smooth.hessian = [&](const Vec&) { return SpMat(Eigen::MatrixXd(A).sparseView()); };
                ProxBlock nb;
                nb.start = 0;
                nb.size = 2;
                nb.weight = ww;
                nb.center = cc;
                pr.blocks = {nb};
                const Vec y = solve_composite(pr, Vec::Zero(2));
                const Vec2 gy = grid_min_2d(
                    [&](const Vec2& t) { return 0.5 * t.dot(A * t) + b.dot(t) + ww * (t - cc).norm(); }, -3.0, 3.0,
                    h);
                worst = std::max(worst, (Vec2(y[0], y[1]) - gy).lpNorm<Eigen::Infinity>());
            }
        }
        c.pass = worst <= tolerances::grid_match;
        c.detail = std::to_string(5 * n) + " instances, worst deviation from grid " + sci(worst);
    });
}

CriterionResult check_diff_quotient(const VerifyOptions&) {
    return timed(9, "difference quotient identity", [&](CriterionResult& c) {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        const double eps = std::numeric_limits<double>::epsilon();
        bool ok = true;
        double worst_rel = 0.0;
        for (int i = 0; i < tolerances::quotient_pairs; ++i) {
            const double a = 5.0 * U(rng), z = 10.0 * U(rng), zt = 10.0 * U(rng);
            auto f = [a](double s) { return 0.5 * a * s * s; };
            auto df = [a](double s) { return a * s; };
            const double q = diff_quotient(f, df, z, zt);
            const double exact = 0.5 * a * (z + zt);
            // rounding bound of the secant formula
            const double bound = 4.0 * eps * ((std::abs(f(z)) + std::abs(f(zt))) / std::abs(z - zt) + std::abs(exact));
            if (std::abs(q - exact) > bound) ok = false;
            worst_rel = std::max(worst_rel, std::abs(q - exact) / std::max(bound, 1e-300));
        }
        double worst_jump = 0.0;
        for (int i = 0; i < tolerances::quotient_pairs; ++i) {
            const double zt = U(rng);
            auto f = [](double s) { return s * s * s * s - 2.0 * s * s * s + s; };
            auto df = [](double s) { return 4.0 * s * s * s - 6.0 * s * s + 1.0; };
            const double gap = kDiffQuotientSwitch * std::max(1.0, std::abs(zt));
            const double above = diff_quotient(f, df, zt + gap * (1.0 + 1e-6), zt);
            const double below = diff_quotient(f, df, zt + gap * (1.0 - 1e-6), zt);
            worst_jump = std::max(worst_jump, std::abs(above - below));
        }
        c.pass = ok && worst_jump <= tolerances::quotient_switch_jump;
        c.detail = "quadratic error at most " + sci(worst_rel) + " of the rounding bound, switch jump " +
                   sci(worst_jump);
    });
}

CriterionResult check_poro_mass(const VerifyOptions& opt) {
    if (!opt.poro) {
        CriterionResult c;
        c.id = 10;
        c.name = "diffusant mass conservation";
        c.skipped = true;
        c.pass = true;
        c.detail = "poro extension disabled";
        return c;
    }
    return timed(10, "diffusant mass conservation", [&](CriterionResult& c) {
        Scenario sc = poro_scenario();
        const RunResult r = run(sc);
        const double m0 = r.ledger.front().poro_mass;
        double drift = 0.0, min_diss = std::numeric_limits<double>::infinity(), max_diss = 0.0;
        for (const auto& row : r.ledger) drift = std::max(drift, std::abs(row.poro_mass - m0) / std::abs(m0));
        for (const auto& rep : r.reports) {
            min_diss = std::min(min_diss, rep.diffusion_dissipation);
            max_diss = std::max(max_diss, rep.diffusion_dissipation);
        }
        const double wb = worst_balance(r);
        const int steps = static_cast<int>(r.reports.size());
        c.pass = steps >= tolerances::poro_min_steps && drift <= tolerances::poro_mass_rel && min_diss >= 0.0 &&
                 max_diss > 0.0 && wb <= tolerances::balance_rel;
        c.detail = std::to_string(steps) + " steps, mass drift " + sci(drift) + ", min diffusion dissipation " +
                   sci(min_diss) + ", worst balance " + sci(wb);
    });
}

CriterionResult check_delamination(const VerifyOptions& opt) {
    return timed(11, "delamination box and monotonicity", [&](CriterionResult& c) {
        bool box = true, monotone = true;
        for (const auto& s : shipped_runs(opt)) {
            const auto& st = s.result.states;
            for (std::size_t k = 0; k < st.size(); ++k) {
                if ((st[k].alpha.array() < 0.0).any() || (st[k].alpha.array() > 1.0).any()) box = false;
                if (k > 0 && !s.healing && (st[k].alpha.array() > st[k - 1].alpha.array()).any()) monotone = false;
            }
        }
        Scenario sc = peel_scenario();
        const RunResult r = run(sc);
        const Vec& a = r.final_state.alpha;
        int left = 0, right = 0;
        for (int i = 0; i < sc.mesh.num_interface(); ++i) {
            const double x = sc.mesh.nodes[sc.mesh.node_pairs[i][0]].x();
            if (x < sc.mesh.nodes[sc.mesh.node_pairs[left][0]].x()) left = i;
            if (x > sc.mesh.nodes[sc.mesh.node_pairs[right][0]].x()) right = i;
        }
        const bool peeled = a[left] < tolerances::peel_debonded && a[right] > tolerances::peel_bonded;
        c.pass = box && monotone && peeled;
        c.detail = std::string("box ") + (box ? "held" : "violated") + ", monotone " + (monotone ? "held" : "violated") +
                   ", peel alpha loaded end " + sci(a[left]) + ", far end " + sci(a[right]);
    });
}

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt) {
    using Check = CriterionResult (*)(const VerifyOptions&);
    const Check checks[] = {check_energy_balance, check_total_energy,   check_temperature_sign, check_entropy_terms,
                            check_midpoint_order, check_stability,      check_coulomb_threshold, check_prox_oracles,
                            check_diff_quotient,  check_poro_mass,      check_delamination};
    std::vector<CriterionResult> out;
    for (Check ch : checks) {
        out.push_back(ch(opt));
        if (opt.log) print_results(*opt.log, {out.back()});
    }
    return out;
}

void print_results(std::ostream& os, const std::vector<CriterionResult>& results) {
    for (const auto& r : results) {
        const char* tag = r.skipped ? "[SKIP]" : (r.pass ? "[PASS]" : "[FAIL]");
        os << tag << " " << r.id << " " << r.name << ": " << r.detail << " (" << std::fixed << std::setprecision(2)
           << r.seconds << " s)" << std::defaultfloat << "\n";
    }
}

bool all_passed(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.pass && !r.skipped) return false;
    return true;
}

}  // namespace adhesim
