#pragma once

#include "adhesim/types.hpp"

namespace adhesim {

// Nodal fields at one time level.  u, v live on bulk dofs (2 per node); pi,
// alpha, theta_A, vartheta_A on interface nodes; theta_B, vartheta_B on bulk
// nodes.  The diffusant fields are empty unless the poro extension is active;
// mu_A, mu_B hold the midpoint chemical potential of the last step.
struct SystemState {
    double t = 0.0;
    Vec u, v, pi, alpha;
    Vec theta_A, theta_B, vartheta_A, vartheta_B;
    Vec zeta_A, zeta_B, mu_A, mu_B;

    bool poro() const { return zeta_A.size() > 0; }
};

// Interface coefficients frozen at the previous level, per interface node.
struct FrozenCoefficients {
    Vec friction;  // f(alpha, theta_A) * max(-gamma_C'(jn), 0)
    Vec yield;     // sigma_y(alpha, theta_A)
    Vec d_N, d_T;
};

// Midpoint rates of one step.
struct StepRates {
    Vec v_half;      // (u_k - u_{k-1}) / tau
    Vec pi_rate;     // (pi_k - pi_{k-1}) / tau
    Vec alpha_rate;  // (alpha_k - alpha_{k-1}) / tau
    Vec mu_half;     // stacked (mu_A, mu_B), empty without diffusion
};

}  // namespace adhesim
