#pragma once

#include "adhesim/assembly.hpp"
#include "adhesim/state.hpp"

#include <utility>
#include <vector>

namespace adhesim {

// Diffusant unknowns z = (u, pi, zeta_A, zeta_B).  The poro free energy is
//   1/2 (D z - c)^T diag(w) (D z - c) + 1/2 zeta^T S zeta
// with vertex quadrature for the Biot and content terms.
struct PoroOperators {
    int n_dofs = 0, n_iface = 0, n_nodes = 0;
    SpMat D;
    Vec w, c;
    SpMat S;           // capillarity on (zeta_A, zeta_B)
    SpMat Q;           // D^T W D + S, size of z
    Vec q;             // D^T W c
    double constant = 0.0;  // 1/2 c^T W c
    SpMat mobility;    // weights of G_heat rows for the diffusion operator
    SpMat L;           // G^T mobility G on (mu_A, mu_B)
    Vec content_weight;

    int nz() const { return n_dofs + 2 * n_iface + n_nodes; }
    int zeta_offset() const { return n_dofs + n_iface; }
    int n_content() const { return n_iface + n_nodes; }
};

PoroOperators assemble_poro(const DiscreteOperators& ops, const MaterialSet& mat);

Vec stack_poro_variables(const SystemState& s);

double poro_energy(const PoroOperators& P, const SystemState& s);

// Nodal chemical potentials (mu_A, mu_B): derivative of the free energy in the
// contents divided by the lumped content weights.
std::pair<Vec, Vec> chemical_potentials(const SystemState& s, const PoroOperators& P);
std::pair<Vec, Vec> chemical_potentials(const SystemState& s, const DiscreteOperators& ops, const MaterialSet& mat);

// Extra bulk stress per element (Voigt xx, yy, xy), the derivative of the
// bulk poro energy in the strain.
std::vector<Eigen::Vector3d> poro_stress_extension(const SystemState& s, const DiscreteOperators& ops,
                                                   const MaterialSet& mat);

// Lumped total diffusant content.
double poro_mass(const DiscreteOperators& ops, const SystemState& s);

// Diffusion dissipation rate mu^T L mu.
double diffusion_dissipation(const PoroOperators& P, const Vec& mu);

}  // namespace adhesim
