#pragma once

#include "adhesim/stepper.hpp"

#include <string>
#include <vector>

namespace adhesim {

// Built-in desk-scale scenarios, all nondimensional.
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

Scenario null_scenario();
// bonded layer under compression and growing shear, partial debonding
Scenario friction_adhesion_scenario(bool b_coupling = false);
// debonded interface under compression and oscillating shear
Scenario active_friction_scenario();
// compressed frictional contact hit by a sudden shear burst
Scenario shock_heating_scenario();
// upper body pulled off at its left end
Scenario peel_scenario();
// bonded layer with diffusant redistribution, no-flux boundaries
Scenario poro_scenario();

// Free damped oscillation along one mode of the bonded two-body system;
// damping is proportional to stiffness so the mode decouples exactly.
struct ModalCase {
    Scenario sc;
    Vec mode;  // M-normalised
    double amplitude = 0.0;
    double omega = 0.0, zeta = 0.0;

    double q(double t) const;
    double q_rate(double t) const;
    Vec exact_u(double t) const { return amplitude * q(t) * mode; }
    Vec exact_v(double t) const { return amplitude * q_rate(t) * mode; }
};

ModalCase kelvin_voigt_modal_case(double damping_ratio_scale = 0.02, double cycles = 1.125);

// Material and mesh helpers shared by the scenarios.
MaterialSet default_materials();
VectorSeries constant_series(const Vec2& value, double T);
VectorSeries piecewise_series(const std::vector<double>& t, const std::vector<Vec2>& values);

}  // namespace adhesim
