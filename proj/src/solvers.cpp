#include "adhesim/solvers.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

namespace adhesim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// prox of the block term with scalar metric d (i.e. step 1/d)
void apply_prox(const ProxBlock& b, const double* z, double d, double* out) {
    if (b.kind == ProxBlock::Kind::Box) {
        out[0] = std::min(std::max(z[0], b.lo), b.hi);
        return;
    }
    if (b.size == 1) {
        out[0] = b.center[0] + prox_weighted_abs(z[0] - b.center[0], b.weight, 1.0 / d);
        return;
    }
    Vec2 y(z[0] - b.center[0], z[1] - b.center[1]);
    Vec2 p = prox_weighted_norm(y, b.weight, 1.0 / d);
    out[0] = b.center[0] + p[0];
    out[1] = b.center[1] + p[1];
}

double block_metric(const ProxBlock& b, const Vec& diag) {
    double d = std::abs(diag[b.start]);
    if (b.size == 2) d = std::max(d, std::abs(diag[b.start + 1]));
    return d > 0 ? d : 1.0;
}

double objective(const CompositeProblem& p, const Vec& x) {
    double v = p.smooth.value(x);
    for (const auto& b : p.blocks) v += prox_block_value(b, x);
    return v;
}

void project_boxes(const CompositeProblem& p, Vec& x) {
    for (const auto& b : p.blocks)
        if (b.kind == ProxBlock::Kind::Box) x[b.start] = std::min(std::max(x[b.start], b.lo), b.hi);
}

Vec hessian_diag(const SpMat& H) {
    Vec d = H.diagonal();
    return d;
}

struct NewtonSystem {
    std::vector<int> free;  // reduced index -> full index
    Vec rhs;
    SpMat matrix;
    Vec fixed_step;  // full-length step on fixed coordinates
};

NewtonSystem build_newton_system(const CompositeProblem& p, const Vec& x, const Vec& g, const SpMat& H) {
    const int n = p.n;
    const Vec diag = hessian_diag(H);
    std::vector<int> state(n, 0);  // 0 free smooth, 1 fixed, 2 free with block force
    Vec force = Vec::Zero(n);
    Vec fixed_step = Vec::Zero(n);
    std::vector<Triplet> extra;

    for (const auto& b : p.blocks) {
        const double d = block_metric(b, diag);
        if (b.kind == ProxBlock::Kind::Box) {
            const int i = b.start;
            double z = x[i] - g[i] / d;
            if (b.lo == b.hi || z <= b.lo) {
                state[i] = 1;
                fixed_step[i] = b.lo - x[i];
            } else if (z >= b.hi) {
                state[i] = 1;
                fixed_step[i] = b.hi - x[i];
            }
            continue;
        }
        if (b.size == 1) {
            const int i = b.start;
            double z = x[i] - g[i] / d - b.center[0];
            if (!(std::abs(z) > b.weight / d)) {
                state[i] = 1;
                fixed_step[i] = b.center[0] - x[i];
            } else {
                state[i] = 2;
                force[i] = b.weight * (z > 0 ? 1.0 : -1.0);
            }
            continue;
        }
        const int i = b.start;
        Vec2 z(x[i] - g[i] / d - b.center[0], x[i + 1] - g[i + 1] / d - b.center[1]);
        if (!(z.norm() > b.weight / d)) {
            state[i] = state[i + 1] = 1;
            fixed_step[i] = b.center[0] - x[i];
            fixed_step[i + 1] = b.center[1] - x[i + 1];
            continue;
        }
        Vec2 y(x[i] - b.center[0], x[i + 1] - b.center[1]);
        double r = std::max(y.norm(), z.norm() - b.weight / d);
        Vec2 nrm = y.norm() > 0 ? Vec2(y / y.norm()) : Vec2(z / z.norm());
        state[i] = state[i + 1] = 2;
        force[i] = b.weight * nrm[0];
        force[i + 1] = b.weight * nrm[1];
        // linearised force w (x - c)/|x - c| about the current direction
        Mat2 curv = (b.weight / r) * (Mat2::Identity() - nrm * nrm.transpose());
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c) extra.emplace_back(i + a, i + c, curv(a, c));
    }

    NewtonSystem sys;
    std::vector<int> map(n, -1);
    for (int i = 0; i < n; ++i)
        if (state[i] != 1) {
            map[i] = static_cast<int>(sys.free.size());
            sys.free.push_back(i);
        }
    const int m = static_cast<int>(sys.free.size());
    sys.rhs.resize(m);
    for (int k = 0; k < m; ++k) sys.rhs[k] = -(g[sys.free[k]] + force[sys.free[k]]);

    std::vector<Triplet> trip;
    trip.reserve(H.nonZeros() + extra.size());
    for (int col = 0; col < H.outerSize(); ++col)
        for (SpMat::InnerIterator it(H, col); it; ++it) {
            const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
            if (map[r] < 0) continue;
            if (map[c] >= 0) trip.emplace_back(map[r], map[c], it.value());
            else sys.rhs[map[r]] -= it.value() * fixed_step[c];
        }
    for (const auto& t : extra) trip.emplace_back(map[t.row()], map[t.col()], t.value());
    sys.matrix.resize(m, m);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.fixed_step = fixed_step;
    return sys;
}

bool solve_reduced(const SpMat& A, const Vec& b, bool symmetric_pd, Vec& out) {
    if (A.rows() == 0) {
        out.resize(0);
        return true;
    }
    if (symmetric_pd) {
        Eigen::SimplicialLDLT<SpMat> ldlt(A);
        if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all()) {
            out = ldlt.solve(b);
            if (out.allFinite()) return true;
        }
    }
    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) return false;
    out = lu.solve(b);
    return out.allFinite();
}

}  // namespace

double prox_block_value(const ProxBlock& b, const Vec& x) {
    if (b.kind == ProxBlock::Kind::Box) {
        double v = x[b.start];
        return (v < b.lo - 1e-15 || v > b.hi + 1e-15) ? kInf : 0.0;
    }
    if (b.size == 1) return b.weight * std::abs(x[b.start] - b.center[0]);
    return b.weight * Vec2(x[b.start] - b.center[0], x[b.start + 1] - b.center[1]).norm();
}

Vec composite_residual(const CompositeProblem& p, const Vec& x, const Vec& grad, const Vec& diag) {
    Vec r = grad;
    for (const auto& b : p.blocks) {
        const double d = block_metric(b, diag);
        double z[2], out[2];
        for (int k = 0; k < b.size; ++k) z[k] = x[b.start + k] - grad[b.start + k] / d;
        apply_prox(b, z, d, out);
        for (int k = 0; k < b.size; ++k) r[b.start + k] = (x[b.start + k] - out[k]) * d;
    }
    return r;
}

Vec solve_composite(const CompositeProblem& p, const Vec& x0, SolveReport* report) {
    if (x0.size() != p.n) throw Error("solve_composite: start vector has wrong size");
    SolveReport local;
    SolveReport& rep = report ? *report : local;
    rep = SolveReport{};

    Vec x = x0;
    project_boxes(p, x);
    Vec g = p.smooth.gradient(x);
    SpMat H = p.smooth.hessian ? p.smooth.hessian(x) : SpMat();
    Vec diag = p.smooth.hessian ? hessian_diag(H) : Vec::Ones(p.n);
    const double target = p.tol * (1.0 + p.smooth.gradient(x0).lpNorm<Eigen::Infinity>());

    double phi = p.saddle ? 0.0 : objective(p, x);
    if (!p.saddle) rep.objective_history.push_back(phi);
    Vec r = composite_residual(p, x, g, diag);
    double res = r.lpNorm<Eigen::Infinity>();

    // accelerated proximal gradient state
    double L = p.smooth.hessian ? std::max(diag.cwiseAbs().maxCoeff(), 1e-300) : 1.0;
    bool use_newton = p.newton && static_cast<bool>(p.smooth.hessian);
    int newton_failures = 0;

    while (res > target) {
        if (rep.iterations >= p.max_iter)
            throw NonConvergenceError("solve_composite: iteration limit reached (residual " +
                                          std::to_string(res) + ", target " + std::to_string(target) + ")",
                                      res);
        ++rep.iterations;

        if (use_newton && newton_failures < 3) {
            NewtonSystem sys = build_newton_system(p, x, g, H);
            Vec dred;
            bool ok = solve_reduced(sys.matrix, sys.rhs, !p.saddle, dred);
            if (ok) {
                Vec dir = sys.fixed_step;
                for (std::size_t k = 0; k < sys.free.size(); ++k) dir[sys.free[k]] = dred[static_cast<int>(k)];
                double t = 1.0;
                bool accepted = false;
                for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
                    Vec xt = x + t * dir;
                    project_boxes(p, xt);
                    Vec gt = p.smooth.gradient(xt);
                    SpMat Ht = p.smooth.hessian(xt);
                    Vec dt = hessian_diag(Ht);
                    double rt = composite_residual(p, xt, gt, dt).lpNorm<Eigen::Infinity>();
                    bool good;
                    double phit = 0.0;
                    if (p.saddle) {
                        good = rt < (1.0 - 1e-4 * t) * res || rt <= target;
                    } else {
                        phit = objective(p, xt);
                        good = phit < phi || (phit <= phi + 1e-13 * (1.0 + std::abs(phi)) && rt < res);
                    }
                    if (good) {
                        x = std::move(xt);
                        g = std::move(gt);
                        H = std::move(Ht);
                        diag = std::move(dt);
                        res = rt;
                        if (!p.saddle) {
                            phi = phit;
                            rep.objective_history.push_back(phi);
                        }
                        accepted = true;
                        break;
                    }
                }
                if (accepted) {
                    ++rep.newton_steps;
                    newton_failures = 0;
                    continue;
                }
            }
            ++newton_failures;
            if (p.saddle)
                throw NonConvergenceError("solve_composite: Newton step failed on saddle problem", res);
        }

        // monotone accelerated proximal gradient; a burst of iterations
        // before Newton is retried
        Vec xk = x, xprev = x, y = x;
        double tk = 1.0;
        const int burst = use_newton ? 50 : p.max_iter;
        for (int it = 0; it < burst; ++it) {
            Vec gy = p.smooth.gradient(y);
            double fy = p.smooth.value(y);
            Vec z(p.n);
            for (int bt = 0; bt < 60; ++bt) {
                z = y - gy / L;
                for (const auto& b : p.blocks) {
                    double zz[2], out[2];
                    for (int k = 0; k < b.size; ++k) zz[k] = z[b.start + k];
                    apply_prox(b, zz, L, out);
                    for (int k = 0; k < b.size; ++k) z[b.start + k] = out[k];
                }
                Vec dz = z - y;
                double model = fy + gy.dot(dz) + 0.5 * L * dz.squaredNorm();
                if (p.smooth.value(z) <= model + 1e-14 * (1.0 + std::abs(fy))) break;
                L *= 2.0;
            }
            double phiz = objective(p, z);
            xprev = xk;
            if (phiz <= phi) {
                xk = z;
                phi = phiz;
            }
            rep.objective_history.push_back(phi);
            double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
            y = xk + (tk / tn) * (z - xk) + ((tk - 1.0) / tn) * (xk - xprev);
            tk = tn;
            ++rep.gradient_steps;
            ++rep.iterations;
            Vec gk = p.smooth.gradient(xk);
            Vec dk = p.smooth.hessian ? diag : Vec::Constant(p.n, L);
            res = composite_residual(p, xk, gk, dk).lpNorm<Eigen::Infinity>();
            if (res <= target) break;
            if (rep.iterations >= p.max_iter) break;
        }
        x = xk;
        g = p.smooth.gradient(x);
        if (p.smooth.hessian) {
            H = p.smooth.hessian(x);
            diag = hessian_diag(H);
        } else {
            diag = Vec::Constant(p.n, L);
        }
        res = composite_residual(p, x, g, diag).lpNorm<Eigen::Infinity>();
        newton_failures = std::max(0, newton_failures - 1);
    }
    rep.residual = res;
    rep.objective = p.saddle ? 0.0 : phi;
    return x;
}

Vec solve_spd(const SpMat& A, const Vec& b, const LinearSolveOptions& opt) {
    if (A.rows() != A.cols() || A.rows() != b.size()) throw MatrixError("solve_spd: dimension mismatch");
    if (A.rows() == 0) return Vec(0);
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw MatrixError("solve_spd: factorisation failed");
    const Vec& D = ldlt.vectorD();
    const double dmax = D.cwiseAbs().maxCoeff();
    for (int i = 0; i < D.size(); ++i)
        if (!(D[i] > 1e-14 * dmax)) throw MatrixError("solve_spd: non-positive pivot (matrix not SPD)");
    Vec x = ldlt.solve(b);
    const double bn = std::max(b.norm(), 1e-300);
    for (int refine = 0; refine < 3 && (A * x - b).norm() > opt.tol * bn; ++refine) x += ldlt.solve(b - A * x);
    if ((A * x - b).norm() <= opt.tol * bn || b.norm() == 0.0) return x;

    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(opt.tol);
    cg.setMaxIterations(opt.cg_max_iter);
    cg.compute(A);
    Vec y = cg.solveWithGuess(b, x);
    double rel = (A * y - b).norm() / bn;
    if (rel > opt.tol * 10) throw NonConvergenceError("solve_spd: CG fallback missed tolerance", rel);
    return y;
}

Vec solve_monotone_heat(const HeatSystem& sys, const Vec& vartheta_prev, double tau, const Vec& theta_guess,
                        double tol, HeatSolveReport* report) {
    const int n = static_cast<int>(sys.weight.size());
    HeatSolveReport local;
    HeatSolveReport& rep = report ? *report : local;
    rep = HeatSolveReport{};

    auto residual = [&](const Vec& th) {
        Vec r = sys.K * th - sys.source;
        for (int i = 0; i < n; ++i)
            r[i] += sys.weight[i] * (sys.capacity[i].content_ext(th[i]) - vartheta_prev[i]) / tau;
        return r;
    };
    Vec scale_vec = sys.weight.cwiseProduct(vartheta_prev) / tau;
    const double scale = 1.0 + sys.source.lpNorm<Eigen::Infinity>() + scale_vec.lpNorm<Eigen::Infinity>();

    Vec th = theta_guess;
    Vec r = residual(th);
    double rn = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 100 && rn > tol * scale; ++it) {
        ++rep.iterations;
        SpMat J = sys.K;
        for (int i = 0; i < n; ++i) {
            double c = th[i] >= 0 ? sys.capacity[i].capacity(th[i]) : sys.capacity[i].c0;
            J.coeffRef(i, i) += sys.weight[i] * c / tau;
        }
        Vec d;
        Eigen::SimplicialLDLT<SpMat> ldlt(J);
        if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all()) {
            d = ldlt.solve(-r);
        } else {
            rep.nonsymmetric_fallback = true;
            Eigen::SparseLU<SpMat> lu;
            lu.analyzePattern(J);
            lu.factorize(J);
            if (lu.info() != Eigen::Success) throw NonConvergenceError("heat Newton: singular Jacobian", rn);
            d = lu.solve(-r);
        }
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
            Vec trial = th + t * d;
            Vec rt = residual(trial);
            double rtn = rt.lpNorm<Eigen::Infinity>();
            if (rtn < (1.0 - 1e-4 * t) * rn || rtn <= tol * scale) {
                th = std::move(trial);
                r = std::move(rt);
                rn = rtn;
                accepted = true;
                break;
            }
        }
        if (!accepted) throw NonConvergenceError("heat Newton: stagnation", rn / scale);
    }
    rep.residual = rn / scale;
    if (rn > tol * scale) throw NonConvergenceError("heat Newton: iteration limit", rn / scale);
    return th;
}

}  // namespace adhesim
