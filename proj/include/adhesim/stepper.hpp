#pragma once

#include "adhesim/assembly.hpp"
#include "adhesim/energetics.hpp"
#include "adhesim/poro.hpp"
#include "adhesim/solvers.hpp"
#include "adhesim/state.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace adhesim {

struct PhysicsFlags {
    bool poro = false;
    bool b_coupling = false;
    bool friction = true;
    bool healing = false;  // or-ed with the interface material flag
    bool damage = true;    // off: alpha is frozen
};

struct SolverSettings {
    double mech_tol = 1e-10;
    double damage_tol = 1e-10;
    double heat_tol = 1e-10;
    int max_iter = 5000;
    bool newton = true;  // off: proximal gradient only
};

// Initial fields; empty vectors take defaults (zero u, v, pi; alpha 1; zeta at
// equilibrium; theta from theta0).
struct InitialData {
    Vec u, v, pi, alpha, theta_A, theta_B, zeta_A, zeta_B;
    double theta0 = 1.0;
};

struct Scenario {
    std::string name = "scenario";
    TwoBodyMesh mesh;
    MaterialSet mat;
    LoadSet loads;
    InitialData initial;
    RegularisationSet reg;
    PhysicsFlags flags;
    SolverSettings solver;
    double T = 1.0;
    double tau = 0.1;
};

void validate(const Scenario& sc);

int step_count(const Scenario& sc);

// Everything a run needs that does not change between steps.
struct StepContext {
    Scenario sc;  // copy with resolved reference temperatures
    DiscreteOperators ops;
    std::optional<PoroOperators> poro;
    SpMat H_bulk;  // T^T (2M/tau^2 + K_v/tau + K_e/2) T
    Vec theta_R_nodes;
    double theta_scale = 1.0;
    bool healing = false;

    EnergyOptions energy_options() const;
};

StepContext prepare(const Scenario& sc);

// Initial state; temperatures are damped as theta0 / (1 + tau eps_h theta0).
SystemState initial_state(const StepContext& ctx);

// y holds (jn, jt) in the side-1 slots of each pair; u = T y.
Vec to_pair_coordinates(const DiscreteOperators& ops, const Vec& u);

struct MechStepResult {
    SystemState next;  // u, v, pi (and zeta, mu) updated, the rest copied
    SolveReport solve;
    int stick_nodes = 0, slip_nodes = 0;
};

MechStepResult step_mech(const StepContext& ctx, const SystemState& prev, double t_k);

struct DamageStepResult {
    Vec alpha;
    double constraint_work = 0.0;  // reaction work of the box, >= 0
    SolveReport solve;
};

DamageStepResult step_damage(const StepContext& ctx, const SystemState& prev, const SystemState& mech);

struct HeatStepResult {
    Vec theta_A, theta_B, vartheta_A, vartheta_B;
    RegularisedSources sources;
    HeatSolveReport solve;
    double heat_in = 0.0;    // tau * boundary flux
    double adiabatic = 0.0;  // tau * implicit coupling heat
};

HeatStepResult step_heat(const StepContext& ctx, const SystemState& prev, const SystemState& next);

struct StepReport {
    int k = 0;
    double t = 0.0;
    int mech_iterations = 0, damage_iterations = 0, heat_iterations = 0;
    double mech_solver_residual = 0.0;
    MechBalance balance;
    double constraint_work = 0.0;
    double heat_in = 0.0, adiabatic = 0.0;
    double energy_prev = 0.0, energy_next = 0.0;  // M + E + H
    double total_slack = 0.0;
    double min_theta = 0.0, max_alpha_change = 0.0;
    double entropy_min = 0.0;
    int entropy_below_floor = 0;
    double diffusion_dissipation = 0.0;
    int stick_nodes = 0, slip_nodes = 0;
    bool heat_fallback = false;
    RegularisedSources sources;
};

struct StepOutcome {
    SystemState next;
    StepReport report;
};

// One full step k: mechanics (jointly with diffusion when enabled), damage,
// heat.  Hard invariants raise InvariantError.
StepOutcome advance(const StepContext& ctx, const SystemState& prev, int k);

struct RunOptions {
    int snapshot_stride = 0;  // 0: no snapshots
    std::function<void(int, const SystemState&)> on_snapshot;
    std::ostream* diagnostics = nullptr;  // per-step solver log when set
    bool keep_states = false;
};

struct RunResult {
    std::vector<LedgerRow> ledger;
    std::vector<StepReport> reports;
    std::vector<SystemState> states;  // when keep_states, including the initial one
    SystemState final_state;
    double worst_mech_rel_residual = 0.0;
    double min_theta = 0.0;
    double min_entropy_term = 0.0;
    double min_total_slack = 0.0;
    double runtime_seconds = 0.0;
};

RunResult run(const StepContext& ctx, const RunOptions& opt = {});
RunResult run(const Scenario& sc, const RunOptions& opt = {});

struct StudyOptions {
    bool scale_regularisation = true;  // eps proportional to tau
    std::function<Vec(double)> exact_u;  // reference solution when known
    std::function<Vec(double)> exact_v;
    int threads = 1;  // tau cases run concurrently, each isolated
};

struct StudyRow {
    double tau = 0.0;
    int steps = 0;
    // against the exact solution when given, else the finest run (NaN there)
    double err_u = 0.0, err_v = 0.0, err_theta = 0.0;
    double order_u = 0.0, order_v = 0.0;
    double norm_u = 0.0;      // max_k sqrt(u^T (K_e + M) u)
    double norm_v = 0.0;      // sqrt(tau sum M(v_half))
    double norm_theta = 0.0;  // max_k heat content
    double R_cum = 0.0;
    double ratio_u = 1.0, ratio_v = 1.0, ratio_theta = 1.0, ratio_R = 1.0;
};

std::vector<StudyRow> convergence_study(const Scenario& sc, const std::vector<double>& taus,
                                        const StudyOptions& opt = {});

// Single interface node without elastic terms: one mechanical step with the
// inertia, load and frozen Coulomb term.  The tangential variable is a
// 2-vector so colinearity can be checked.
struct CoulombNodeResult {
    Vec2 increment = Vec2::Zero();
    Vec2 rate = Vec2::Zero();
    double threshold = 0.0;
    bool stick = false;
    SolveReport solve;
};

CoulombNodeResult coulomb_single_node(double mass, const Vec2& load, const InterfaceMaterial& mat, double alpha,
                                      double theta_A, double jn_prev, double length, double tau, double tol = 1e-12);

// Closed form of the same step.
Vec2 coulomb_single_node_exact(double mass, const Vec2& load, double threshold, double tau);

}  // namespace adhesim
