#include "adhesim/poro.hpp"

namespace adhesim {

namespace {

std::vector<int> node_labels(const DiscreteOperators& ops) {
    std::vector<int> label(ops.n_nodes, 1);
    for (const auto& el : ops.elements)
        for (int v : el.v) label[v] = el.label;
    return label;
}

}  // namespace

PoroOperators assemble_poro(const DiscreteOperators& ops, const MaterialSet& mat) {
    PoroOperators P;
    P.n_dofs = ops.n_dofs;
    P.n_iface = ops.n_iface;
    P.n_nodes = ops.n_nodes;
    const int nd = ops.n_dofs, ni = ops.n_iface, nn = ops.n_nodes;
    const int off_pi = nd, off_zA = nd + ni, off_zB = nd + 2 * ni;
    const InterfaceMaterial& a = mat.iface;
    const std::vector<int> label = node_labels(ops);

    std::vector<Triplet> td;
    std::vector<double> w, c;
    int row = 0;
    for (int e = 0; e < ops.n_elem; ++e) {
        const ElementData& el = ops.elements[e];
        const BulkMaterial& m = mat.body(el.label);
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k)
                for (int comp = 0; comp < 2; ++comp)
                    td.emplace_back(row, 2 * el.v[k] + comp, m.beta_B * el.grad(comp, k));
            td.emplace_back(row, off_zB + el.v[i], -1.0);
            w.push_back(el.area / 3.0 * m.M_B);
            c.push_back(0.0);
            ++row;
        }
    }
    for (int i = 0; i < nn; ++i) {
        const BulkMaterial& m = mat.body(label[i]);
        td.emplace_back(row, off_zB + i, 1.0);
        w.push_back(ops.bulk_lumped[i] * m.K_chem);
        c.push_back(m.zeta_eq);
        ++row;
    }
    using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
    const RowMat jumps[2] = {RowMat(ops.N_jump), RowMat(ops.T_jump)};
    for (int i = 0; i < ni; ++i) {
        for (const RowMat& J : jumps)
            for (RowMat::InnerIterator it(J, i); it; ++it) td.emplace_back(row, it.col(), a.beta_A * it.value());
        td.emplace_back(row, off_pi + i, -a.beta_A);
        td.emplace_back(row, off_zA + i, -1.0);
        w.push_back(ops.Mi_lumped[i] * a.M_A);
        c.push_back(0.0);
        ++row;
        td.emplace_back(row, off_zA + i, 1.0);
        w.push_back(ops.Mi_lumped[i] * a.K_chem_A);
        c.push_back(a.zeta_eq_A);
        ++row;
    }
    P.D.resize(row, P.nz());
    P.D.setFromTriplets(td.begin(), td.end());
    P.w = Eigen::Map<Vec>(w.data(), row);
    P.c = Eigen::Map<Vec>(c.data(), row);

    std::vector<Triplet> ts;
    SpMat Sa = a.kappa3 * ops.S_lb;
    for (int col = 0; col < Sa.outerSize(); ++col)
        for (SpMat::InnerIterator it(Sa, col); it; ++it) ts.emplace_back(it.row(), it.col(), it.value());
    for (const auto& el : ops.elements) {
        const double k = mat.body(el.label).kappa_cap;
        if (k == 0.0) continue;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                ts.emplace_back(ni + el.v[i], ni + el.v[j], k * el.area * el.grad.col(i).dot(el.grad.col(j)));
    }
    P.S.resize(ni + nn, ni + nn);
    P.S.setFromTriplets(ts.begin(), ts.end());

    SpMat DtW = P.D.transpose() * P.w.asDiagonal();
    P.Q = DtW * P.D;
    std::vector<Triplet> tq;
    for (int col = 0; col < P.S.outerSize(); ++col)
        for (SpMat::InnerIterator it(P.S, col); it; ++it)
            tq.emplace_back(off_zA + it.row(), off_zA + it.col(), it.value());
    SpMat Sz(P.nz(), P.nz());
    Sz.setFromTriplets(tq.begin(), tq.end());
    P.Q += Sz;
    P.q = DtW * P.c;
    P.constant = 0.5 * P.c.dot(P.w.cwiseProduct(P.c));

    // mobility weights on the rows of the heat gradient operator
    std::vector<Triplet> tm;
    for (int s = 0; s < ops.n_seg; ++s) tm.emplace_back(s, s, ops.imesh.lengths[s] * a.mob_A);
    for (int i = 0; i < ni; ++i)
        for (int side = 1; side <= 2; ++side) {
            int r = ops.G_row_transfer(side, i);
            tm.emplace_back(r, r, ops.Mi_lumped[i] * a.m_transfer);
        }
    for (int e = 0; e < ops.n_elem; ++e) {
        const double mob = mat.body(ops.elements[e].label).mob_B;
        int r = ops.G_row_bulk(e);
        tm.emplace_back(r, r, ops.elements[e].area * mob);
        tm.emplace_back(r + 1, r + 1, ops.elements[e].area * mob);
    }
    const int rows = static_cast<int>(ops.G_heat.rows());
    P.mobility.resize(rows, rows);
    P.mobility.setFromTriplets(tm.begin(), tm.end());
    P.L = SpMat(ops.G_heat.transpose()) * P.mobility * ops.G_heat;
    P.content_weight.resize(ni + nn);
    P.content_weight << ops.Mi_lumped, ops.bulk_lumped;
    return P;
}

Vec stack_poro_variables(const SystemState& s) {
    Vec z(s.u.size() + s.pi.size() + s.zeta_A.size() + s.zeta_B.size());
    z << s.u, s.pi, s.zeta_A, s.zeta_B;
    return z;
}

double poro_energy(const PoroOperators& P, const SystemState& s) {
    if (!s.poro()) return 0.0;
    Vec z = stack_poro_variables(s);
    Vec r = P.D * z - P.c;
    Vec zeta = z.tail(P.n_content());
    return 0.5 * r.dot(P.w.cwiseProduct(r)) + 0.5 * zeta.dot(P.S * zeta);
}

std::pair<Vec, Vec> chemical_potentials(const SystemState& s, const PoroOperators& P) {
    if (!s.poro()) throw ConfigError("chemical potentials requested but the poro extension is not enabled");
    Vec z = stack_poro_variables(s);
    Vec g = (P.Q * z - P.q).tail(P.n_content());
    Vec mu = g.cwiseQuotient(P.content_weight);
    return {mu.head(P.n_iface), mu.tail(P.n_nodes)};
}

std::pair<Vec, Vec> chemical_potentials(const SystemState& s, const DiscreteOperators& ops, const MaterialSet& mat) {
    if (!s.poro()) throw ConfigError("chemical potentials requested but the poro extension is not enabled");
    return chemical_potentials(s, assemble_poro(ops, mat));
}

std::vector<Eigen::Vector3d> poro_stress_extension(const SystemState& s, const DiscreteOperators& ops,
                                                   const MaterialSet& mat) {
    std::vector<Eigen::Vector3d> out(ops.n_elem, Eigen::Vector3d::Zero());
    if (!s.poro()) return out;
    for (int e = 0; e < ops.n_elem; ++e) {
        const ElementData& el = ops.elements[e];
        const BulkMaterial& m = mat.body(el.label);
        Eigen::Matrix<double, 6, 1> ue;
        for (int i = 0; i < 3; ++i) ue.segment<2>(2 * i) = s.u.segment<2>(2 * el.v[i]);
        Eigen::Vector3d eps = el.B * ue;
        const double tr = eps[0] + eps[1];
        double p = 0.0;
        for (int v : el.v) p += m.M_B * m.beta_B * (m.beta_B * tr - s.zeta_B[v]) / 3.0;
        out[e] = Eigen::Vector3d(p, p, 0.0);
    }
    return out;
}

double poro_mass(const DiscreteOperators& ops, const SystemState& s) {
    if (!s.poro()) return 0.0;
    return ops.Mi_lumped.dot(s.zeta_A) + ops.bulk_lumped.dot(s.zeta_B);
}

double diffusion_dissipation(const PoroOperators& P, const Vec& mu) {
    if (mu.size() == 0) return 0.0;
    return mu.dot(P.L * mu);
}

}  // namespace adhesim
