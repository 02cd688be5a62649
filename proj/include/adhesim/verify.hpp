#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adhesim {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    bool skipped = false;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyOptions {
    bool poro = true;  // off: the diffusion criterion is reported skipped
    int threads = 1;
    std::ostream* log = nullptr;
};

// Tolerances of the suite.
namespace tolerances {
inline constexpr double balance_rel = 1e-9;
inline constexpr double solver_tol = 1e-10;
inline constexpr double loose_solver_tol = 1e-4;
inline constexpr double total_energy_rel = 1e-9;
inline constexpr int total_energy_min_steps = 500;
inline constexpr double theta_floor_rel = 1e-12;
inline constexpr double entropy_floor = -1e-12;
inline constexpr double midpoint_order = 1.9;
inline constexpr double stability_ratio = 0.05;
inline constexpr double stick_rate = 1e-10;
inline constexpr double slip_cosine = 1e-10;
inline constexpr double slip_closed_form = 1e-8;
inline constexpr double grid_step = 1e-4;
inline constexpr double grid_match = 2e-4;
inline constexpr int prox_instances = 100;
inline constexpr int quotient_pairs = 1000;
inline constexpr double quotient_switch_jump = 1e-7;
inline constexpr double poro_mass_rel = 1e-9;
inline constexpr int poro_min_steps = 500;
inline constexpr double peel_debonded = 0.05;
inline constexpr double peel_bonded = 0.9;
}  // namespace tolerances

CriterionResult check_energy_balance(const VerifyOptions& opt);
CriterionResult check_total_energy(const VerifyOptions& opt);
CriterionResult check_temperature_sign(const VerifyOptions& opt);
CriterionResult check_entropy_terms(const VerifyOptions& opt);
CriterionResult check_midpoint_order(const VerifyOptions& opt);
CriterionResult check_stability(const VerifyOptions& opt);
CriterionResult check_coulomb_threshold(const VerifyOptions& opt);
CriterionResult check_prox_oracles(const VerifyOptions& opt);
CriterionResult check_diff_quotient(const VerifyOptions& opt);
CriterionResult check_poro_mass(const VerifyOptions& opt);
CriterionResult check_delamination(const VerifyOptions& opt);

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt);

// One "[PASS] n name: detail" line per criterion; [SKIP] for gated ones.
void print_results(std::ostream& os, const std::vector<CriterionResult>& results);
bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace adhesim
