#pragma once

#include "adhesim/model.hpp"
#include "adhesim/types.hpp"

#include <functional>
#include <vector>

namespace adhesim {

// Block soft-threshold: prox of step*w*||.|| at x.  Returns zero on the
// threshold itself.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1>
prox_weighted_norm(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar w,
                   typename Derived::Scalar step) {
    using Scalar = typename Derived::Scalar;
    const Scalar nrm = x.norm();
    const Scalar thresh = step * w;
    if (!(nrm > thresh)) return Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, 1>::Zero(x.size());
    return x * (Scalar(1) - thresh / nrm);
}

template <typename Scalar>
Scalar prox_weighted_abs(Scalar x, Scalar w, Scalar step) {
    using std::abs;
    const Scalar thresh = step * w;
    if (!(abs(x) > thresh)) return Scalar(0);
    return x > Scalar(0) ? x - thresh : x + thresh;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1>
project_box01(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    return x.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
}

// Nonsmooth term attached to a block of one or two consecutive coordinates:
//   WeightedAbs: weight * ||x_block - center||
//   Box:         indicator of [lo, hi] (single coordinate)
struct ProxBlock {
    enum class Kind { WeightedAbs, Box };
    Kind kind = Kind::WeightedAbs;
    int start = 0;
    int size = 1;
    double weight = 0.0;
    Vec2 center = Vec2::Zero();
    double lo = 0.0, hi = 1.0;
};

struct SmoothPart {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<SpMat(const Vec&)> hessian;
};

struct CompositeProblem {
    int n = 0;
    SmoothPart smooth;
    std::vector<ProxBlock> blocks;
    double tol = 1e-10;
    int max_iter = 5000;
    bool newton = true;
    // Saddle problems (joint KKT systems) have no objective: the smooth part
    // supplies a symmetric indefinite Jacobian and convergence is measured on
    // the natural residual alone.
    bool saddle = false;
};

struct SolveReport {
    int iterations = 0;
    int newton_steps = 0;
    int gradient_steps = 0;
    double residual = 0.0;
    double objective = 0.0;
    std::vector<double> objective_history;
};

double prox_block_value(const ProxBlock& b, const Vec& x);

// Gradient-mapping residual of the composite problem at x with the diagonal
// metric of the Hessian.  Saddle rows use the plain gradient.
Vec composite_residual(const CompositeProblem& p, const Vec& x, const Vec& grad, const Vec& diag);

Vec solve_composite(const CompositeProblem& p, const Vec& x0, SolveReport* report = nullptr);

struct LinearSolveOptions {
    double tol = 1e-12;
    int cg_max_iter = 10000;
};

// Sparse LDL^T; negative or vanishing pivots raise MatrixError.  Falls back to
// Jacobi-preconditioned CG if the direct solve misses the tolerance.
Vec solve_spd(const SpMat& A, const Vec& b, const LinearSolveOptions& opt = {});

struct HeatSystem {
    SpMat K;            // conduction + transfer + implicit adiabatic diagonal
    Vec source;         // explicit sources times nodal weights
    Vec weight;         // lumped nodal weights of the content equation
    std::vector<Capacity> capacity;  // per dof
};

struct HeatSolveReport {
    int iterations = 0;
    double residual = 0.0;
    bool nonsymmetric_fallback = false;
};

// Solves weight.*(C(theta) - vartheta_prev)/tau + K theta = source by damped
// Newton starting from theta_guess.
Vec solve_monotone_heat(const HeatSystem& sys, const Vec& vartheta_prev, double tau, const Vec& theta_guess,
                        double tol = 1e-10, HeatSolveReport* report = nullptr);

}  // namespace adhesim
