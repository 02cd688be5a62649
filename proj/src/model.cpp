#include "adhesim/model.hpp"

#include "adhesim/keyvalue.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace adhesim {

PiecewiseLinear::PiecewiseLinear(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.empty() || xs_.size() != ys_.size())
        throw ModelError("table: breakpoint and value counts differ or are empty");
    for (std::size_t i = 1; i < xs_.size(); ++i)
        if (!(xs_[i] > xs_[i - 1])) throw ModelError("table: breakpoints must increase strictly");
}

PiecewiseLinear PiecewiseLinear::parse(const std::string& text) {
    std::vector<double> xs, ys;
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        auto colon = tok.find(':');
        if (colon == std::string::npos) throw ModelError("table entry '" + tok + "' is not x:y");
        try {
            xs.push_back(std::stod(tok.substr(0, colon)));
            ys.push_back(std::stod(tok.substr(colon + 1)));
        } catch (const std::exception&) {
            throw ModelError("table entry '" + tok + "' is not numeric");
        }
    }
    return PiecewiseLinear(xs, ys);
}

double PiecewiseLinear::operator()(double x) const {
    if (xs_.size() == 1 || x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    return (1.0 - w) * ys_[i - 1] + w * ys_[i];
}

double PiecewiseLinear::slope(double x) const {
    if (xs_.size() == 1 || x < xs_.front() || x > xs_.back()) return 0.0;
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    if (i == xs_.size()) i = xs_.size() - 1;
    return (ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]);
}

double PiecewiseLinear::min_value() const { return *std::min_element(ys_.begin(), ys_.end()); }

std::vector<double> PiecewiseLinear::breakpoints_between(double a, double b) const {
    std::vector<double> out;
    double lo = std::min(a, b), hi = std::max(a, b);
    for (double x : xs_)
        if (x > lo && x < hi) out.push_back(x);
    if (a > b) std::reverse(out.begin(), out.end());
    return out;
}

double Capacity::content(double theta) const {
    if (theta < 0.0) throw DomainError("heat content: negative temperature");
    return c0 * theta + 0.5 * c1 * theta * theta;
}

double Capacity::inverse(double vartheta) const {
    if (vartheta < 0.0) throw DomainError("inverse heat content: negative content");
    if (vartheta == 0.0) return 0.0;
    // C is convex increasing, so Newton from the upper bound vartheta/c0
    // decreases monotonically onto the root.
    double theta = vartheta / c0;
    for (int it = 0; it < 200; ++it) {
        double r = content(theta) - vartheta;
        double step = r / capacity(theta);
        theta -= step;
        if (std::abs(step) <= 1e-16 * std::max(theta, 1e-300)) break;
    }
    return theta;
}

double heat_content(double theta, const Capacity& c) { return c.content(theta); }
double inverse_heat_content(double vartheta, const Capacity& c) { return c.inverse(vartheta); }

Eigen::Matrix3d BulkMaterial::elastic_voigt() const {
    Eigen::Matrix3d d;
    d << lambda + 2 * mu, lambda, 0, lambda, lambda + 2 * mu, 0, 0, 0, mu;
    return d;
}

Eigen::Matrix3d BulkMaterial::viscous_voigt() const {
    Eigen::Matrix3d d;
    d << lambda_v + 2 * mu_v, lambda_v, 0, lambda_v, lambda_v + 2 * mu_v, 0, 0, 0, mu_v;
    return d;
}

double InterfaceMaterial::transfer(int side, double jn, double alpha, double theta) const {
    double k = side == 1 ? k1 : k2;
    return k * k_alpha(alpha) * k_theta(theta) / (1.0 + std::max(jn, 0.0) / gap_length);
}

void validate(const MaterialSet& mat, bool poro_enabled) {
    for (int b = 0; b < 2; ++b) {
        const BulkMaterial& m = mat.bulk[b];
        std::string who = "bulk" + std::to_string(b + 1) + ": ";
        if (!(m.mu > 0) || !(m.lambda + m.mu > 0)) throw ModelError(who + "elasticity not positive definite");
        if (!(m.mu_v > 0) || !(m.lambda_v + m.mu_v > 0)) throw ModelError(who + "viscosity not positive definite");
        if (m.rho < 0) throw ModelError(who + "negative density");
        if (!(m.c_B.c0 > 0) || m.c_B.c1 < 0) throw ModelError(who + "heat capacity must be positive");
        Eigen::SelfAdjointEigenSolver<Mat2> es(m.K_B);
        if (!(es.eigenvalues().minCoeff() > 0) || (m.K_B - m.K_B.transpose()).norm() > 0)
            throw ModelError(who + "conductivity not symmetric positive definite");
        if (!(m.K_B_theta.min_value() > 0)) throw ModelError(who + "conductivity factor must be positive");
        if (poro_enabled && (!(m.M_B > 0) || !(m.K_chem > 0) || !(m.mob_B > 0) || m.kappa_cap < 0))
            throw ModelError(who + "poro moduli and mobility must be positive");
    }
    const InterfaceMaterial& a = mat.iface;
    if (a.kappa_N.min_value() < 0 || a.kappa_T.min_value() < 0) throw ModelError("interface: negative adhesive stiffness");
    if (!(a.kappa_C >= 0) || !(a.p >= 2)) throw ModelError("interface: normal compliance needs kappa_C >= 0, p >= 2");
    if (!(a.eps_dam > 0) || !(a.eps_heal > 0)) throw ModelError("interface: rate coefficients must be positive");
    if (a.frict.min_value() < 0 || a.frict_theta.min_value() < 0) throw ModelError("interface: negative friction");
    if (a.sigma_y.min_value() < 0 || a.sigma_y_theta.min_value() < 0) throw ModelError("interface: negative yield stress");
    if (a.d_N < 0 || a.d_T < 0 || a.d_theta.min_value() < 0) throw ModelError("interface: negative viscosity");
    if (!(a.kappa_H > 0) || !(a.kappa1 > 0) || !(a.kappa2 > 0))
        throw ModelError("interface: kappa_H, kappa1, kappa2 must be positive");
    if (!(a.c_A.c0 > 0) || a.c_A.c1 < 0) throw ModelError("interface: heat capacity must be positive");
    if (a.K_A < 0 || a.K_A_theta.min_value() < 0) throw ModelError("interface: negative conductivity");
    if (a.k1 < 0 || a.k2 < 0 || a.k_alpha.min_value() < 0 || a.k_theta.min_value() < 0)
        throw ModelError("interface: negative transfer coefficient");
    if (!(a.gap_length > 0)) throw ModelError("interface: gap_length must be positive");
    if (poro_enabled && (!(a.M_A > 0) || !(a.K_chem_A > 0) || a.mob_A < 0 || a.m_transfer < 0 || a.kappa3 < 0))
        throw ModelError("interface: poro moduli must be positive and mobilities non-negative");
}

namespace {

struct Dim {
    double l, t, s, th;
};

// Reads scalars and tables from one section, scaling by the unit system and
// rejecting keys it does not know.
class SectionReader {
public:
    SectionReader(const KeyValueFile& f, std::string sec, const UnitSystem& u)
        : f_(f), sec_(std::move(sec)), u_(u) {}

    void scalar(const std::string& key, double& out, Dim d) {
        used_.insert(key);
        if (f_.has(sec_, key)) out = f_.get_double(sec_, key) / u_.scale(d.l, d.t, d.s, d.th);
    }
    void plain(const std::string& key, double& out) { scalar(key, out, {0, 0, 0, 0}); }
    void flag(const std::string& key, bool& out) {
        used_.insert(key);
        out = f_.get_bool(sec_, key, out);
    }
    bool table(const std::string& key, PiecewiseLinear& out, Dim x, Dim y) {
        used_.insert(key);
        if (!f_.has(sec_, key)) return false;
        PiecewiseLinear raw;
        try {
            raw = PiecewiseLinear::parse(f_.get_string(sec_, key));
        } catch (const ModelError& e) {
            f_.fail(sec_, key, e.what());
        }
        std::vector<double> xs = raw.xs(), ys = raw.ys();
        for (double& v : xs) v /= u_.scale(x.l, x.t, x.s, x.th);
        for (double& v : ys) v /= u_.scale(y.l, y.t, y.s, y.th);
        out = PiecewiseLinear(xs, ys);
        return true;
    }
    void finish() const {
        for (const auto& k : f_.keys(sec_))
            if (!used_.count(k)) f_.fail(sec_, k, "unknown key");
    }

private:
    const KeyValueFile& f_;
    std::string sec_;
    const UnitSystem& u_;
    std::set<std::string> used_;
};

constexpr Dim kNone{0, 0, 0, 0};
constexpr Dim kTemp{0, 0, 0, 1};

void read_bulk(SectionReader& r, BulkMaterial& m) {
    r.scalar("lambda", m.lambda, {0, 0, 1, 0});
    r.scalar("mu", m.mu, {0, 0, 1, 0});
    r.scalar("lambda_v", m.lambda_v, {0, 1, 1, 0});
    r.scalar("mu_v", m.mu_v, {0, 1, 1, 0});
    r.scalar("eps_th", m.eps_th, {0, 0, 0, -1});
    r.scalar("rho", m.rho, {-2, 2, 1, 0});
    r.scalar("theta_R", m.theta_R, kTemp);
    r.scalar("c_B0", m.c_B.c0, {0, 0, 1, -1});
    r.scalar("c_B1", m.c_B.c1, {0, 0, 1, -2});
    double k = m.K_B(0, 0), kxy = m.K_B(0, 1), kyy = m.K_B(1, 1);
    double kiso = std::nan("");
    r.scalar("K_B", kiso, {2, -1, 1, -1});
    if (!std::isnan(kiso)) k = kyy = kiso, kxy = 0.0;
    r.scalar("K_B_xx", k, {2, -1, 1, -1});
    r.scalar("K_B_xy", kxy, {2, -1, 1, -1});
    r.scalar("K_B_yy", kyy, {2, -1, 1, -1});
    m.K_B << k, kxy, kxy, kyy;
    r.table("K_B.theta_table", m.K_B_theta, kTemp, kNone);
    r.scalar("M_B", m.M_B, {0, 0, 1, 0});
    r.plain("beta_B", m.beta_B);
    r.scalar("K_chem", m.K_chem, {0, 0, 1, 0});
    r.plain("zeta_eq", m.zeta_eq);
    r.scalar("kappa_cap", m.kappa_cap, {2, 0, 1, 0});
    r.scalar("mob_B", m.mob_B, {2, -1, -1, 0});
}

void read_interface(SectionReader& r, InterfaceMaterial& a) {
    const Dim stiff{-1, 0, 1, 0}, energy{1, 0, 1, 0};
    double k = std::nan("");
    r.scalar("kappa_N", k, stiff);
    if (!std::isnan(k)) a.kappa_N = PiecewiseLinear::linear01(0.0, k);
    r.table("kappa_N.table", a.kappa_N, kNone, stiff);
    k = std::nan("");
    r.scalar("kappa_T", k, stiff);
    if (!std::isnan(k)) a.kappa_T = PiecewiseLinear::linear01(0.0, k);
    r.table("kappa_T.table", a.kappa_T, kNone, stiff);
    r.plain("p", a.p);
    r.scalar("kappa_C", a.kappa_C, {1.0 - a.p, 0, 1, 0});
    double g = std::nan("");
    r.scalar("G_C", g, energy);
    if (!std::isnan(g)) a.a0 = PiecewiseLinear::linear01(0.0, -g);
    r.table("a0.table", a.a0, kNone, energy);
    double b = std::nan("");
    r.scalar("b", b, {1, 0, 1, -1});
    if (!std::isnan(b)) a.b0 = PiecewiseLinear::linear01(0.0, b);
    r.table("b0.table", a.b0, kNone, {1, 0, 1, -1});
    r.scalar("eps_dam", a.eps_dam, {1, 1, 1, 0});
    r.scalar("eps_heal", a.eps_heal, {-1, -1, -1, 0});
    r.flag("healing", a.healing);
    double f0 = std::nan("");
    r.plain("f0", f0);
    if (!std::isnan(f0)) a.frict = PiecewiseLinear::linear01(f0, 0.0);
    r.table("frict.table", a.frict, kNone, kNone);
    r.table("frict.theta_table", a.frict_theta, kTemp, kNone);
    double sy = std::nan("");
    r.scalar("sigma_y", sy, {0, 0, 1, 0});
    if (!std::isnan(sy)) a.sigma_y = PiecewiseLinear::constant(sy);
    r.table("sigma_y.table", a.sigma_y, kNone, {0, 0, 1, 0});
    r.table("sigma_y.theta_table", a.sigma_y_theta, kTemp, kNone);
    r.scalar("d_N", a.d_N, {-1, 1, 1, 0});
    r.scalar("d_T", a.d_T, {-1, 1, 1, 0});
    r.table("d.theta_table", a.d_theta, kTemp, kNone);
    r.scalar("kappa_H", a.kappa_H, stiff);
    r.scalar("kappa1", a.kappa1, energy);
    r.scalar("kappa2", a.kappa2, {3, 0, 1, 0});
    r.scalar("c_A0", a.c_A.c0, {1, 0, 1, -1});
    r.scalar("c_A1", a.c_A.c1, {1, 0, 1, -2});
    r.scalar("K_A", a.K_A, {3, -1, 1, -1});
    r.table("K_A.theta_table", a.K_A_theta, kTemp, kNone);
    r.scalar("k1", a.k1, {1, -1, 1, -1});
    r.scalar("k2", a.k2, {1, -1, 1, -1});
    r.scalar("gap_length", a.gap_length, {1, 0, 0, 0});
    r.table("k.alpha_table", a.k_alpha, kNone, kNone);
    r.table("k.theta_table", a.k_theta, kTemp, kNone);
    r.scalar("M_A", a.M_A, stiff);
    r.plain("beta_A", a.beta_A);
    r.scalar("K_chem_A", a.K_chem_A, stiff);
    r.scalar("zeta_eq_A", a.zeta_eq_A, {1, 0, 0, 0});
    r.scalar("kappa3", a.kappa3, energy);
    r.scalar("mob_A", a.mob_A, {3, -1, -1, 0});
    r.scalar("m_transfer", a.m_transfer, {1, -1, -1, 0});
}

}  // namespace

MaterialSet parse_materials(const KeyValueFile& f, const UnitSystem& u) {
    MaterialSet mat;
    if (f.has_section("bulk")) {
        for (auto& b : mat.bulk) {
            SectionReader r(f, "bulk", u);
            read_bulk(r, b);
            r.finish();
        }
    }
    for (int b = 0; b < 2; ++b) {
        std::string sec = "bulk" + std::to_string(b + 1);
        if (!f.has_section(sec)) continue;
        SectionReader r(f, sec, u);
        read_bulk(r, mat.bulk[b]);
        r.finish();
    }
    if (f.has_section("interface")) {
        SectionReader r(f, "interface", u);
        read_interface(r, mat.iface);
        r.finish();
    }
    if (!f.keys("").empty()) f.fail("", f.keys("").front(), "key outside any section");
    return mat;
}

MaterialSet load_material_file(const std::string& path, const UnitSystem& units) {
    return parse_materials(KeyValueFile::load(path), units);
}

}  // namespace adhesim
