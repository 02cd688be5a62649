#pragma once

#include "adhesim/geometry.hpp"
#include "adhesim/model.hpp"
#include "adhesim/solvers.hpp"
#include "adhesim/state.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace adhesim {

struct ElementData {
    std::array<int, 3> v{};
    int label = 1;
    double area = 0.0;
    Eigen::Matrix<double, 2, 3> grad;  // basis gradients
    Eigen::Matrix<double, 3, 6> B;     // Voigt strain [exx, eyy, 2exy]
};

// Heat and diffusion unknowns are stacked as (interface nodes, bulk nodes).
// G_heat rows: surface gradient per segment, side-1 trace minus interface,
// side-2 trace minus interface, bulk gradient (x, y) per element.
struct DiscreteOperators {
    TwoBodyMesh mesh;
    InterfaceMesh imesh;
    JumpMaps jumps;
    int n_nodes = 0, n_dofs = 0, n_iface = 0, n_seg = 0, n_elem = 0;
    std::vector<ElementData> elements;

    SpMat M_mass, M_lumped, K_elast, K_visc;
    SpMat B_thermal;   // n_nodes x n_dofs, (B u)_i = int phi_i B:e(u)
    SpMat strain;      // 3 n_elem x n_dofs
    SpMat divergence;  // n_elem x n_dofs
    SpMat E_jump;      // jump, 2 nI x n_dofs
    SpMat N_jump;      // normal jump, nI x n_dofs
    SpMat T_jump;      // scalar tangential jump, nI x n_dofs
    SpMat surface_grad;
    SpMat S_lb;        // unit Laplace-Beltrami stiffness
    SpMat S_pi, S_alpha;
    Vec Mi_lumped;     // interface lumped mass
    Vec bulk_lumped;   // bulk lumped area per node
    SpMat G_heat;
    SpMat pair_transform;  // u = T y, y holds (jn, jt) at side-1 slots of pairs
    std::vector<char> dirichlet_dof;
    std::vector<int> pair_of_node;  // interface index for side-1/side-2 nodes, -1 otherwise

    int heat_size() const { return n_iface + n_nodes; }
    int G_row_transfer(int side, int i) const { return n_seg + (side - 1) * n_iface + i; }
    int G_row_bulk(int e) const { return n_seg + 2 * n_iface + 2 * e; }
    int jn_index(int i) const { return 2 * mesh.node_pairs[i][0]; }
    int jt_index(int i) const { return 2 * mesh.node_pairs[i][0] + 1; }
};

DiscreteOperators assemble_all(const TwoBodyMesh& mesh, const MaterialSet& mat);

// Three-point Gauss rule on [0, 1].
inline constexpr std::array<double, 3> kGaussX{0.1127016653792583, 0.5, 0.8872983346207417};
inline constexpr std::array<double, 3> kGaussW{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

// Sampled function of time, linearly interpolated; a single sample is constant.
template <int N>
struct TimeSeries {
    using Value = Eigen::Matrix<double, N, 1>;
    std::vector<double> t;
    std::vector<Value> values;

    bool empty() const { return t.empty(); }
    Value operator()(double time) const;
    Value slope(double time) const;
    std::vector<double> breakpoints() const { return t; }
};

using ScalarSeries = TimeSeries<1>;
using VectorSeries = TimeSeries<2>;

struct EdgeWindow {
    double x_min = -1e300, x_max = 1e300;
    bool contains(double x) const { return x >= x_min && x <= x_max; }
};

struct LoadSet {
    VectorSeries body_force;  // force density in both bodies
    VectorSeries traction;    // on Neumann edges within traction_window
    EdgeWindow traction_window;
    VectorSeries dirichlet;   // uniform displacement of Dirichlet nodes
    ScalarSeries heat_flux;   // >= 0, on edges tagged heat_flux_tag within heat_window
    EdgeTag heat_flux_tag = EdgeTag::Neumann;
    bool heat_flux_all_edges = false;
    EdgeWindow heat_window;
};

void validate(const LoadSet& loads);

// Consistent P1 load vector of body forces and tractions at time t.
Vec assemble_load_vector(double t, const LoadSet& loads, const DiscreteOperators& ops);

// Load dual vector of the homogeneous problem at time t: the consistent load
// shifted by the Dirichlet lift, zero on constrained dofs.
Vec assemble_F(double t, const LoadSet& loads, const DiscreteOperators& ops, const MaterialSet& mat);

// Nodal Dirichlet lift at time t (zero away from Dirichlet nodes).
Vec dirichlet_lift(double t, const LoadSet& loads, const DiscreteOperators& ops);

// Time-averaged regularised boundary flux (1/tau) int h/(1 + tau eps_h h) dt
// integrated against the bulk heat test functions.
Vec assemble_heat_flux(double t0, double t1, double eps_h, const LoadSet& loads, const DiscreteOperators& ops);

// Block-diagonal weight of G_heat for the conduction/transfer operator.
SpMat heat_weights(const DiscreteOperators& ops, const MaterialSet& mat, const Vec& theta_A, const Vec& theta_B,
                   const Vec& jn, const Vec& alpha);

struct RegularisedSources {
    Vec interface;   // nI, already multiplied by lumped weights
    Vec bulk;        // n_nodes, includes the boundary flux
    Vec boundary;    // n_nodes, boundary flux part of bulk
    Vec adiabatic;   // heat_size, coefficient of theta_k (moved to the matrix)
    double friction = 0, yield = 0, damage = 0, adhesive = 0, viscous = 0, diffusion = 0, external = 0;
};

struct HeatStepInput {
    const SystemState* prev = nullptr;
    const SystemState* next = nullptr;  // u, pi, alpha of step k
    const FrozenCoefficients* frozen = nullptr;
    const StepRates* rates = nullptr;
    const RegularisationSet* reg = nullptr;
    const LoadSet* loads = nullptr;
    double tau = 0.0;
    bool b_coupling = false;
    const SpMat* diffusion_weights = nullptr;  // mobility weights when diffusion runs
};

RegularisedSources heat_sources(const DiscreteOperators& ops, const MaterialSet& mat, const HeatStepInput& in);

// Monolithic heat step system: weights, capacities, matrix including the
// implicit adiabatic diagonal, and explicit sources.
HeatSystem assemble_heat_step_matrix(const DiscreteOperators& ops, const MaterialSet& mat, const HeatStepInput& in,
                                     RegularisedSources* sources_out = nullptr);

void write_triplets(std::ostream& os, const SpMat& A);
SpMat read_triplets(std::istream& is);

}  // namespace adhesim
