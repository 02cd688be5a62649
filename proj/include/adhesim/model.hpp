#pragma once

#include "adhesim/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace adhesim {

class KeyValueFile;

// ---- scalar constitutive laws ----------------------------------------------

// Unilateral normal compliance (kappa_C/p) (-jn)^p for jn < 0, zero otherwise.
template <typename Scalar>
Scalar gamma_C_value(Scalar jn, Scalar kappa_C, Scalar p) {
    using std::pow;
    return jn < Scalar(0) ? kappa_C / p * pow(-jn, p) : Scalar(0);
}

template <typename Scalar>
Scalar gamma_C_prime(Scalar jn, Scalar kappa_C, Scalar p) {
    using std::pow;
    return jn < Scalar(0) ? -kappa_C * pow(-jn, p - Scalar(1)) : Scalar(0);
}

template <typename Scalar>
Scalar gamma_C_second(Scalar jn, Scalar kappa_C, Scalar p) {
    using std::pow;
    return jn < Scalar(0) ? kappa_C * (p - Scalar(1)) * pow(-jn, p - Scalar(2)) : Scalar(0);
}

inline constexpr double kDiffQuotientSwitch = 1e-8;

// Secant slope of f between z_tilde and z, falling back to the midpoint
// derivative when the two arguments are too close for a stable secant.
template <typename Scalar, typename F, typename DF>
Scalar diff_quotient(const F& f, const DF& df, Scalar z, Scalar z_tilde) {
    using std::abs;
    using std::max;
    const Scalar gap = abs(z - z_tilde);
    const Scalar scale = max(Scalar(1), max(abs(z), abs(z_tilde)));
    if (gap > Scalar(kDiffQuotientSwitch) * scale) return (f(z) - f(z_tilde)) / (z - z_tilde);
    return df(Scalar(0.5) * (z + z_tilde));
}

// Derivative of the rate cost a1: eps_dam * rate when damaging, rate / eps_heal
// when healing.
template <typename Scalar>
Scalar a1_partial(Scalar rate, Scalar eps_dam, Scalar eps_heal) {
    return rate <= Scalar(0) ? eps_dam * rate : rate / eps_heal;
}

template <typename Scalar>
Scalar a1_value(Scalar rate, Scalar eps_dam, Scalar eps_heal) {
    return Scalar(0.5) * rate * a1_partial(rate, eps_dam, eps_heal);
}

template <typename Scalar>
Scalar a1_second(Scalar rate, Scalar eps_dam, Scalar eps_heal) {
    return rate <= Scalar(0) ? eps_dam : Scalar(1) / eps_heal;
}

// ---- tables and capacities -------------------------------------------------

// Piecewise linear in one variable, clamped outside its breakpoints.
class PiecewiseLinear {
public:
    PiecewiseLinear() : xs_{0.0}, ys_{0.0} {}
    PiecewiseLinear(std::vector<double> xs, std::vector<double> ys);

    static PiecewiseLinear constant(double value) { return PiecewiseLinear({0.0}, {value}); }
    // value_at_0 + (value_at_1 - value_at_0) * alpha on [0, 1]
    static PiecewiseLinear linear01(double value_at_0, double value_at_1) {
        return PiecewiseLinear({0.0, 1.0}, {value_at_0, value_at_1});
    }
    static PiecewiseLinear parse(const std::string& text);

    double operator()(double x) const;
    double slope(double x) const;
    double min_value() const;
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }
    std::vector<double> breakpoints_between(double a, double b) const;

private:
    std::vector<double> xs_, ys_;
};

// c(theta) = c0 + c1 theta; the heat content C is its primitive from 0.
struct Capacity {
    double c0 = 1.0;
    double c1 = 0.0;

    double capacity(double theta) const { return c0 + c1 * std::max(theta, 0.0); }
    double content(double theta) const;
    // extended by c0*theta below zero so Newton iterates stay well defined
    double content_ext(double theta) const {
        return theta >= 0.0 ? c0 * theta + 0.5 * c1 * theta * theta : c0 * theta;
    }
    double inverse(double vartheta) const;
};

double heat_content(double theta, const Capacity& c);
double inverse_heat_content(double vartheta, const Capacity& c);

// ---- materials -------------------------------------------------------------

struct BulkMaterial {
    double lambda = 1.0, mu = 1.0;      // elastic Lame constants
    double lambda_v = 0.0, mu_v = 0.1;  // viscous Lame constants
    double eps_th = 0.0;                // isotropic thermal expansion
    double rho = 1.0;
    double theta_R = std::nan("");      // NaN: taken from the initial bulk temperature
    Capacity c_B;
    Mat2 K_B = Mat2::Identity();
    PiecewiseLinear K_B_theta = PiecewiseLinear::constant(1.0);
    // poro
    double M_B = 1.0, beta_B = 0.0, K_chem = 1.0, zeta_eq = 0.0, kappa_cap = 0.0, mob_B = 1.0;

    // B = C E_th = eps_th (2 lambda + 2 mu) I in plane strain
    double B_scalar() const { return eps_th * (2.0 * lambda + 2.0 * mu); }
    Eigen::Matrix3d elastic_voigt() const;
    Eigen::Matrix3d viscous_voigt() const;
};

struct InterfaceMaterial {
    PiecewiseLinear kappa_N = PiecewiseLinear::linear01(0.0, 100.0);
    PiecewiseLinear kappa_T = PiecewiseLinear::linear01(0.0, 100.0);
    double kappa_C = 1000.0, p = 2.0;
    PiecewiseLinear a0 = PiecewiseLinear::linear01(0.0, -1.0);  // stored energy, default -G_C alpha
    PiecewiseLinear b0 = PiecewiseLinear::constant(0.0);        // thermal part, enters as -b0 theta_A
    double eps_dam = 1.0, eps_heal = 1.0;
    bool healing = false;
    PiecewiseLinear frict = PiecewiseLinear::linear01(0.3, 0.0);
    PiecewiseLinear frict_theta = PiecewiseLinear::constant(1.0);
    PiecewiseLinear sigma_y = PiecewiseLinear::constant(1.0);
    PiecewiseLinear sigma_y_theta = PiecewiseLinear::constant(1.0);
    double d_N = 0.0, d_T = 0.0;
    PiecewiseLinear d_theta = PiecewiseLinear::constant(1.0);
    double kappa_H = 1.0, kappa1 = 1e-3, kappa2 = 1e-3;
    Capacity c_A;
    double K_A = 1.0;
    PiecewiseLinear K_A_theta = PiecewiseLinear::constant(1.0);
    double k1 = 1.0, k2 = 1.0, gap_length = 1.0;
    PiecewiseLinear k_alpha = PiecewiseLinear::constant(1.0);
    PiecewiseLinear k_theta = PiecewiseLinear::constant(1.0);
    // poro
    double M_A = 1.0, beta_A = 0.0, K_chem_A = 1.0, zeta_eq_A = 0.0, kappa3 = 0.0, mob_A = 1.0, m_transfer = 1.0;

    double friction_coefficient(double alpha, double theta) const { return frict(alpha) * frict_theta(theta); }
    double yield_stress(double alpha, double theta) const { return sigma_y(alpha) * sigma_y_theta(theta); }
    // per-side transfer coefficient, degraded by opening
    double transfer(int side, double jn, double alpha, double theta) const;
};

struct RegularisationSet {
    double eps_v = 1e-6, eps_pi = 1e-6, eps_alpha = 1e-6, eps_e = 1e-6, eps_h = 1e-6;
};

struct MaterialSet {
    BulkMaterial bulk[2];
    InterfaceMaterial iface;

    const BulkMaterial& body(int label) const { return bulk[label - 1]; }
};

// Reference scales of the nondimensionalisation.  Dimensional inputs are
// divided by L^a T^b S^c Theta^d for their key's exponents.
struct UnitSystem {
    double length = 1.0, time = 1.0, stress = 1.0, temperature = 1.0;

    double scale(double l, double t, double s, double th) const {
        return std::pow(length, l) * std::pow(time, t) * std::pow(stress, s) * std::pow(temperature, th);
    }
};

void validate(const MaterialSet& mat, bool poro_enabled);

// Material file sections: [bulk] (both bodies), [bulk1], [bulk2], [interface].
MaterialSet parse_materials(const KeyValueFile& file, const UnitSystem& units);
MaterialSet load_material_file(const std::string& path, const UnitSystem& units);

}  // namespace adhesim
