#pragma once

#include "adhesim/types.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace adhesim {

enum class EdgeTag { Dirichlet, Neumann, Free };

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    EdgeTag tag = EdgeTag::Free;
};

// Two bodies meeting along a polyline.  Interface nodes are doubled: each
// interface point owns one bulk node per side, stored in node_pairs as
// (side1, side2).  interface_edges index into node_pairs.
struct TwoBodyMesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> labels;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::array<int, 2>> interface_edges;
    std::vector<std::array<int, 2>> node_pairs;
    std::vector<Vec2> normal_n2;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_dofs() const { return 2 * num_nodes(); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_interface() const { return static_cast<int>(node_pairs.size()); }
};

struct InterfaceMesh {
    std::vector<std::array<int, 2>> segments;
    Vec lengths;
    Vec arclength;
    Vec lumped;  // row-sum interface mass
};

// Tangent used for the scalar tangential jump: n2 rotated by +90 degrees.
inline Vec2 tangent_of(const Vec2& n2) { return Vec2(-n2.y(), n2.x()); }

// Lower body is side 1 (clamped bottom), upper body is side 2 (top loaded).
// n2 = (0,-1) is the outward normal of the upper body on the interface.
TwoBodyMesh build_rect_two_body(double width, double height_each, int nx, int ny);

void validate(const TwoBodyMesh& mesh);

InterfaceMesh interface_mesh(const TwoBodyMesh& mesh);

struct JumpMaps {
    SpMat trace1;            // 2nI x 2N
    SpMat trace2;            // 2nI x 2N
    SpMat jump;              // trace1 - trace2
    SpMat normal_jump;       // nI x 2N, jump . n2
    SpMat tangential_jump;   // 2nI x 2N, jump - (jump . n2) n2
    SpMat tangential_scalar; // nI x 2N, jump . t
    SpMat normal_lift;       // 2nI x nI, scalar -> scalar * n2
};

JumpMaps jump_maps(const TwoBodyMesh& mesh);

// Piecewise constant arclength derivative, one row per segment.
SpMat surface_gradient(const InterfaceMesh& imesh);

// G^T diag(weight * length) G.
SpMat laplace_beltrami(const InterfaceMesh& imesh, double weight = 1.0);

void write_mesh(std::ostream& os, const TwoBodyMesh& mesh);
TwoBodyMesh read_mesh(std::istream& is);
TwoBodyMesh load_mesh_file(const std::string& path);

const char* to_string(EdgeTag tag);

}  // namespace adhesim
