#include "adhesim/geometry.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace adhesim {

TwoBodyMesh build_rect_two_body(double width, double height_each, int nx, int ny) {
    if (!(width > 0) || !(height_each > 0) || nx < 1 || ny < 1)
        throw GeometryError("build_rect_two_body: dimensions and cell counts must be positive");

    TwoBodyMesh m;
    const int per_body = (nx + 1) * (ny + 1);
    auto id = [&](int body, int i, int j) { return body * per_body + j * (nx + 1) + i; };

    for (int body = 0; body < 2; ++body)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i)
                m.nodes.emplace_back(width * i / nx, height_each * (body + double(j) / ny));

    for (int body = 0; body < 2; ++body)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                int n00 = id(body, i, j), n10 = id(body, i + 1, j);
                int n01 = id(body, i, j + 1), n11 = id(body, i + 1, j + 1);
                m.triangles.push_back({n00, n10, n11});
                m.triangles.push_back({n00, n11, n01});
                m.labels.push_back(body + 1);
                m.labels.push_back(body + 1);
            }

    for (int i = 0; i < nx; ++i) {
        m.boundary_edges.push_back({id(0, i, 0), id(0, i + 1, 0), EdgeTag::Dirichlet});
        m.boundary_edges.push_back({id(1, i + 1, ny), id(1, i, ny), EdgeTag::Neumann});
    }
    for (int body = 0; body < 2; ++body)
        for (int j = 0; j < ny; ++j) {
            m.boundary_edges.push_back({id(body, nx, j), id(body, nx, j + 1), EdgeTag::Free});
            m.boundary_edges.push_back({id(body, 0, j + 1), id(body, 0, j), EdgeTag::Free});
        }

    for (int i = 0; i <= nx; ++i) {
        m.node_pairs.push_back({id(0, i, ny), id(1, i, 0)});
        m.normal_n2.emplace_back(0.0, -1.0);
    }
    for (int i = 0; i < nx; ++i) m.interface_edges.push_back({i, i + 1});
    return m;
}

void validate(const TwoBodyMesh& m) {
    const int n = m.num_nodes();
    if (m.labels.size() != m.triangles.size())
        throw GeometryError("mesh: one label per triangle required");
    if (m.normal_n2.size() != m.node_pairs.size())
        throw GeometryError("mesh: one normal per interface pair required");
    if (m.node_pairs.empty()) throw GeometryError("mesh: empty interface");

    std::vector<int> owner(n, 0);
    for (std::size_t e = 0; e < m.triangles.size(); ++e) {
        int lab = m.labels[e];
        if (lab != 1 && lab != 2) throw GeometryError("mesh: triangle label must be 1 or 2");
        for (int v : m.triangles[e]) {
            if (v < 0 || v >= n) throw GeometryError("mesh: triangle index out of range");
            if (owner[v] != 0 && owner[v] != lab)
                throw GeometryError("mesh: node " + std::to_string(v) + " shared by both bodies");
            owner[v] = lab;
        }
    }

    std::vector<int> seen(n, 0);
    for (std::size_t p = 0; p < m.node_pairs.size(); ++p) {
        auto [a, b] = m.node_pairs[p];
        if (a < 0 || a >= n || b < 0 || b >= n) throw GeometryError("mesh: pair index out of range");
        if (seen[a]++ || seen[b]++) throw GeometryError("mesh: node appears in more than one pair");
        if (owner[a] != 1 || owner[b] != 2)
            throw GeometryError("mesh: pair " + std::to_string(p) + " must be (side1, side2)");
        if (m.nodes[a] != m.nodes[b])
            throw GeometryError("mesh: paired nodes differ in position at pair " + std::to_string(p));
        if (std::abs(m.normal_n2[p].norm() - 1.0) > 1e-12)
            throw GeometryError("mesh: interface normal not unit length");
    }

    const int ni = m.num_interface();
    std::vector<int> degree(ni, 0);
    for (auto [p, q] : m.interface_edges) {
        if (p < 0 || p >= ni || q < 0 || q >= ni || p == q)
            throw GeometryError("mesh: bad interface segment");
        ++degree[p];
        ++degree[q];
    }
    int ends = 0;
    for (int d : degree) {
        if (d == 1) ++ends;
        else if (d != 2) throw GeometryError("mesh: interface is not a simple polyline");
    }
    if (ends != 2 || static_cast<int>(m.interface_edges.size()) != ni - 1)
        throw GeometryError("mesh: interface must be one open polyline");

    for (const auto& e : m.boundary_edges)
        if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n)
            throw GeometryError("mesh: boundary edge index out of range");
    for (const auto& e : m.boundary_edges)
        if (e.tag == EdgeTag::Dirichlet && (seen[e.a] || seen[e.b]))
            throw GeometryError("mesh: Dirichlet boundary touches the interface");
}

InterfaceMesh interface_mesh(const TwoBodyMesh& m) {
    const int ni = m.num_interface();
    InterfaceMesh im;
    im.segments = m.interface_edges;
    const int ns = static_cast<int>(im.segments.size());
    im.lengths.resize(ns);
    im.lumped = Vec::Zero(ni);
    for (int s = 0; s < ns; ++s) {
        auto [p, q] = im.segments[s];
        double len = (m.nodes[m.node_pairs[q][0]] - m.nodes[m.node_pairs[p][0]]).norm();
        if (!(len > 0)) throw GeometryError("interface segment " + std::to_string(s) + " has zero length");
        im.lengths[s] = len;
        im.lumped[p] += 0.5 * len;
        im.lumped[q] += 0.5 * len;
    }

    // walk the chain from one endpoint
    std::vector<std::vector<std::pair<int, int>>> adj(ni);
    for (int s = 0; s < ns; ++s) {
        adj[im.segments[s][0]].push_back({im.segments[s][1], s});
        adj[im.segments[s][1]].push_back({im.segments[s][0], s});
    }
    int start = 0;
    for (int i = 0; i < ni; ++i)
        if (adj[i].size() == 1) { start = i; break; }
    im.arclength = Vec::Zero(ni);
    int prev = -1, cur = start;
    for (int k = 1; k < ni; ++k) {
        for (auto [nb, s] : adj[cur]) {
            if (nb == prev) continue;
            im.arclength[nb] = im.arclength[cur] + im.lengths[s];
            prev = cur;
            cur = nb;
            break;
        }
    }
    return im;
}

JumpMaps jump_maps(const TwoBodyMesh& m) {
    const int ni = m.num_interface(), nd = m.num_dofs();
    std::vector<Triplet> t1, t2, tn, tt, tts, nl;
    for (int p = 0; p < ni; ++p) {
        auto [a, b] = m.node_pairs[p];
        const Vec2& n = m.normal_n2[p];
        const Vec2 t = tangent_of(n);
        for (int c = 0; c < 2; ++c) {
            t1.emplace_back(2 * p + c, 2 * a + c, 1.0);
            t2.emplace_back(2 * p + c, 2 * b + c, 1.0);
            tn.emplace_back(p, 2 * a + c, n[c]);
            tn.emplace_back(p, 2 * b + c, -n[c]);
            tts.emplace_back(p, 2 * a + c, t[c]);
            tts.emplace_back(p, 2 * b + c, -t[c]);
            nl.emplace_back(2 * p + c, p, n[c]);
            // (I - n n^T) applied to the jump
            for (int d = 0; d < 2; ++d) {
                double proj = (c == d ? 1.0 : 0.0) - n[c] * n[d];
                if (proj == 0.0) continue;
                tt.emplace_back(2 * p + c, 2 * a + d, proj);
                tt.emplace_back(2 * p + c, 2 * b + d, -proj);
            }
        }
    }
    JumpMaps j;
    j.trace1.resize(2 * ni, nd);
    j.trace2.resize(2 * ni, nd);
    j.normal_jump.resize(ni, nd);
    j.tangential_jump.resize(2 * ni, nd);
    j.tangential_scalar.resize(ni, nd);
    j.normal_lift.resize(2 * ni, ni);
    j.trace1.setFromTriplets(t1.begin(), t1.end());
    j.trace2.setFromTriplets(t2.begin(), t2.end());
    j.normal_jump.setFromTriplets(tn.begin(), tn.end());
    j.tangential_jump.setFromTriplets(tt.begin(), tt.end());
    j.tangential_scalar.setFromTriplets(tts.begin(), tts.end());
    j.normal_lift.setFromTriplets(nl.begin(), nl.end());
    j.jump = j.trace1 - j.trace2;
    return j;
}

SpMat surface_gradient(const InterfaceMesh& im) {
    const int ns = static_cast<int>(im.segments.size());
    SpMat g(ns, im.lumped.size());
    std::vector<Triplet> t;
    for (int s = 0; s < ns; ++s) {
        t.emplace_back(s, im.segments[s][0], -1.0 / im.lengths[s]);
        t.emplace_back(s, im.segments[s][1], 1.0 / im.lengths[s]);
    }
    g.setFromTriplets(t.begin(), t.end());
    return g;
}

SpMat laplace_beltrami(const InterfaceMesh& im, double weight) {
    SpMat g = surface_gradient(im);
    Vec w = weight * im.lengths;
    SpMat s = SpMat(g.transpose()) * w.asDiagonal() * g;
    return s;
}

const char* to_string(EdgeTag tag) {
    switch (tag) {
        case EdgeTag::Dirichlet: return "dirichlet";
        case EdgeTag::Neumann: return "neumann";
        default: return "free";
    }
}

static EdgeTag parse_tag(const std::string& s) {
    if (s == "dirichlet") return EdgeTag::Dirichlet;
    if (s == "neumann") return EdgeTag::Neumann;
    if (s == "free") return EdgeTag::Free;
    throw GeometryError("mesh file: unknown edge tag '" + s + "'");
}

void write_mesh(std::ostream& os, const TwoBodyMesh& m) {
    os << "adhesim-mesh 1\n" << std::setprecision(17);
    os << "nodes " << m.nodes.size() << "\n";
    for (const auto& x : m.nodes) os << x.x() << " " << x.y() << "\n";
    os << "triangles " << m.triangles.size() << "\n";
    for (std::size_t e = 0; e < m.triangles.size(); ++e)
        os << m.triangles[e][0] << " " << m.triangles[e][1] << " " << m.triangles[e][2] << " "
           << m.labels[e] << "\n";
    os << "edges " << m.boundary_edges.size() << "\n";
    for (const auto& e : m.boundary_edges) os << e.a << " " << e.b << " " << to_string(e.tag) << "\n";
    os << "pairs " << m.node_pairs.size() << "\n";
    for (std::size_t p = 0; p < m.node_pairs.size(); ++p)
        os << m.node_pairs[p][0] << " " << m.node_pairs[p][1] << " " << m.normal_n2[p].x() << " "
           << m.normal_n2[p].y() << "\n";
    os << "segments " << m.interface_edges.size() << "\n";
    for (auto [p, q] : m.interface_edges) os << p << " " << q << "\n";
}

TwoBodyMesh read_mesh(std::istream& is) {
    std::string word;
    int version = 0;
    if (!(is >> word >> version) || word != "adhesim-mesh")
        throw GeometryError("mesh file: missing 'adhesim-mesh' header");
    auto section = [&](const char* name) {
        std::size_t count = 0;
        if (!(is >> word >> count) || word != name)
            throw GeometryError(std::string("mesh file: expected section '") + name + "'");
        return count;
    };
    auto fail = [](const char* what) { throw GeometryError(std::string("mesh file: truncated ") + what); };

    TwoBodyMesh m;
    std::size_t n = section("nodes");
    m.nodes.resize(n);
    for (auto& x : m.nodes)
        if (!(is >> x.x() >> x.y())) fail("node list");
    n = section("triangles");
    m.triangles.resize(n);
    m.labels.resize(n);
    for (std::size_t e = 0; e < n; ++e)
        if (!(is >> m.triangles[e][0] >> m.triangles[e][1] >> m.triangles[e][2] >> m.labels[e]))
            fail("triangle list");
    n = section("edges");
    m.boundary_edges.resize(n);
    for (auto& e : m.boundary_edges) {
        std::string tag;
        if (!(is >> e.a >> e.b >> tag)) fail("edge list");
        e.tag = parse_tag(tag);
    }
    n = section("pairs");
    m.node_pairs.resize(n);
    m.normal_n2.resize(n);
    for (std::size_t p = 0; p < n; ++p)
        if (!(is >> m.node_pairs[p][0] >> m.node_pairs[p][1] >> m.normal_n2[p].x() >> m.normal_n2[p].y()))
            fail("pair list");
    n = section("segments");
    m.interface_edges.resize(n);
    for (auto& s : m.interface_edges)
        if (!(is >> s[0] >> s[1])) fail("segment list");
    validate(m);
    return m;
}

TwoBodyMesh load_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GeometryError("cannot open mesh file " + path);
    return read_mesh(in);
}

}  // namespace adhesim
