#pragma once

#include "adhesim/assembly.hpp"
#include "adhesim/state.hpp"

#include <string>
#include <vector>

namespace adhesim {

// Reference temperature per bulk node (body value of theta_R).
Vec reference_temperature_nodes(const DiscreteOperators& ops, const MaterialSet& mat);

// Fills NaN reference temperatures with the initial mean bulk temperature of
// each body.
void resolve_reference_temperatures(MaterialSet& mat, const DiscreteOperators& ops, const Vec& theta_B);

struct PoroOperators;

struct EnergyOptions {
    bool b_coupling = false;
    const PoroOperators* poro = nullptr;  // poro energy is included when set
};

// Parts of the free energy.  mechanical() is the part that enters the
// mechanical balance; psi() = mechanical + coupling - thermal.
struct EnergySplit {
    double bulk_elastic = 0, reference_stress = 0;
    double adhesive = 0, compliance = 0, hardening = 0, stored = 0;
    double gradient_pi = 0, gradient_alpha = 0, poro = 0;
    double coupling = 0;  // -int theta_B B:e - int theta_A b0(alpha)
    double thermal = 0;   // sum of weights * phi(theta), phi'' theta = c
    double heat = 0;      // H: lumped integral of the heat contents

    double mechanical() const {
        return bulk_elastic + reference_stress + adhesive + compliance + hardening + stored + gradient_pi +
               gradient_alpha + poro;
    }
    double psi() const { return mechanical() + coupling - thermal; }
};

double kinetic_energy(const DiscreteOperators& ops, const Vec& v);

// Lumped integral of both heat contents.
double heat_energy(const DiscreteOperators& ops, const SystemState& s);

// Normal-compliance energy with 3-point Gauss quadrature per segment.
double compliance_energy(const DiscreteOperators& ops, const MaterialSet& mat, const Vec& jn);

EnergySplit free_energy(const SystemState& s, const DiscreteOperators& ops, const MaterialSet& mat,
                        const EnergyOptions& opt = {});

// Interface coefficients evaluated at a state (the "frozen" values of the
// next step).  Friction weight is f(alpha, theta_A) * max(-gamma_C'(jn), 0).
FrozenCoefficients frozen_coefficients(const SystemState& s, const DiscreteOperators& ops, const MaterialSet& mat,
                                       bool friction_enabled = true);

struct DissipationBreakdown {
    double friction = 0, yield = 0;                       // 1-homogeneous
    double viscous = 0, adhesive_N = 0, adhesive_T = 0;   // 2-homogeneous
    double damage = 0;                                    // 2-homogeneous rate cost
    double diffusion = 0;

    double one_homogeneous() const { return friction + yield; }
    double two_homogeneous() const { return viscous + adhesive_N + adhesive_T + damage + diffusion; }
    double total() const { return one_homogeneous() + two_homogeneous(); }
};

// Unregularised dissipation rate for the given rates with coefficients
// frozen as supplied.
DissipationBreakdown dissipation_rate(const FrozenCoefficients& frozen, const StepRates& rates,
                                      const DiscreteOperators& ops, const MaterialSet& mat);

// Energy exchanged with the temperature fields during one step through the
// thermal coupling of the mechanical and damage steps.
struct CouplingWork {
    double bulk = 0;       // sum theta_B^{k-1} (B (u_k - u_{k-1}))
    double interface = 0;  // sum l theta_A^{k-1} (b0(alpha_k) - b0(alpha_{k-1}))
};

CouplingWork coupling_work(const SystemState& prev, const SystemState& next, const DiscreteOperators& ops,
                           const MaterialSet& mat);

struct MechBalance {
    double kinetic_change = 0, energy_change = 0, dissipated = 0, work = 0, coupling = 0;
    double residual = 0;  // signed left minus right side
    double scale = 0;     // magnitude used for relative statements
};

// Discrete mechanical balance of one accepted step:
//   dM + dE + tau R = <F_k, u_k - u_{k-1}> + coupling work,
// R at frozen coefficients of prev and midpoint rates; constraint_work is the
// non-negative reaction work of the damage box.
MechBalance mech_balance(const SystemState& prev, const SystemState& next, const DiscreteOperators& ops,
                         const MaterialSet& mat, const Vec& F_k, double tau, const EnergyOptions& opt,
                         bool friction_enabled, double constraint_work);

struct EntropyDiagnostics {
    std::vector<double> conduction, transfer, dissipation;
    int below_floor = 0;  // quadrature points with theta under the floor
    double min_term() const;
};

// Entropy production terms of one step evaluated with the temperatures of
// next; dissipation sources divided by the local temperature.
EntropyDiagnostics entropy_production_terms(const SystemState& prev, const SystemState& next,
                                            const DiscreteOperators& ops, const MaterialSet& mat,
                                            const RegularisedSources& sources, double theta_floor);

// One row of the energy ledger.  The leading columns are fixed; the rest are
// diagnostics.
struct LedgerRow {
    double t = 0, M = 0, E = 0, H = 0, R_cum = 0, work_cum = 0, mech_residual = 0, total_slack = 0;
    double min_theta = 0, max_alpha_change = 0;
    double constraint_work_cum = 0, coupling_work_cum = 0, heat_in_cum = 0, adiabatic_cum = 0;
    double entropy_min = 0, poro_mass = 0, diffusion_dissipation = 0;
    double mech_rel_residual = 0;
    int mech_iterations = 0, heat_iterations = 0, stick_nodes = 0, slip_nodes = 0;
};

std::vector<std::string> ledger_columns();
std::vector<double> ledger_values(const LedgerRow& r);
LedgerRow ledger_from_values(const std::vector<double>& v);

}  // namespace adhesim
