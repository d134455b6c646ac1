#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pottspair {

// An edge of an embedded graph together with the dual edge crossing it.
// The primal edge {v1,v2} and its dual {u1,u2} share one index, so a subset
// of E and a subset of E* are both bitsets over the same index range.
//
// Orientation convention: face u1 lies to the LEFT of the dart v1 -> v2.
// On the torus, the winding tags count seam crossings of the two darts:
// (pwx,pwy) for v1 -> v2 across the vertical / horizontal cut, (dwx,dwy)
// for u1 -> u2. All tags are zero on genus-0 graphs.
struct Quad {
    int v1 = -1, v2 = -1;  // primal endpoints (vertices)
    int u1 = -1, u2 = -1;  // dual endpoints (faces)
    int8_t pwx = 0, pwy = 0;
    int8_t dwx = 0, dwy = 0;
};

enum class Side : uint8_t { primal, dual };

inline Side flip(Side s) { return s == Side::primal ? Side::dual : Side::primal; }

// Subset of E (side == primal) or of E* (side == dual), as a bitset over the
// shared edge indices. complement() implements the dagger map xi -> E*\xi*,
// i.e. flips every bit and the side.
class EdgeSet {
public:
    EdgeSet() = default;
    EdgeSet(Side side, int n_edges)
        : side_(side), n_(n_edges), w_((n_edges + 63) / 64, 0) {}

    static EdgeSet full(Side side, int n_edges);
    static EdgeSet from_mask(Side side, int n_edges, uint64_t mask);

    Side side() const { return side_; }
    int universe() const { return n_; }

    bool has(int e) const { return (w_[e >> 6] >> (e & 63)) & 1; }
    void set(int e) { w_[e >> 6] |= uint64_t(1) << (e & 63); }
    void reset(int e) { w_[e >> 6] &= ~(uint64_t(1) << (e & 63)); }
    void assign(int e, bool on) { on ? set(e) : reset(e); }

    int count() const;
    bool empty() const;
    bool subset_of(const EdgeSet& o) const;
    bool intersects(const EdgeSet& o) const;
    EdgeSet complement() const;
    EdgeSet operator|(const EdgeSet& o) const;
    EdgeSet operator&(const EdgeSet& o) const;
    EdgeSet minus(const EdgeSet& o) const;
    bool operator==(const EdgeSet& o) const;

    std::vector<int> elements() const;
    const std::vector<uint64_t>& words() const { return w_; }

private:
    Side side_ = Side::primal;
    int n_ = 0;
    std::vector<uint64_t> w_;
};

// Union-find with iterative path halving and union by size.
class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n), size_(n, 1), count_(n) {
        for (int i = 0; i < n; ++i) parent_[i] = i;
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        --count_;
        return true;
    }
    int count() const { return count_; }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
    int count_;
};

// Partition of the vertices (side == primal) or faces (side == dual) into the
// connected components of an edge subset, isolated cells included. Roots are
// fully resolved at construction, so lookups are plain reads and the object
// can be shared across threads.
struct ClusterPartition {
    Side side = Side::primal;
    int n_cells = 0;
    int k = 0;                // number of components, isolated cells included
    std::vector<int> root;    // representative cell per cell

    int find(int x) const { return root[x]; }
    bool same(int a, int b) const { return root[a] == root[b]; }

    // Dense component ids in [0, k), in order of first appearance.
    std::vector<int> dense_ids() const;
    // Cells grouped by component, components ordered by smallest member.
    std::vector<std::vector<int>> components() const;
};

// A graph 2-cell-embedded in the sphere (with a marked outer face) or in the
// torus, stored as a quad list plus counterclockwise edge rotations at each
// vertex. finalize() derives the corner tables and face walks and verifies
// the embedding (face closure, Euler count, seam-tag consistency).
//
// A corner is a wedge at a vertex between two rotation-consecutive edges:
// corner (v, k) sits between rotation[v][k] and rotation[v][k+1], and its
// face equals the left face of the dart leaving v along rotation[v][k].
// Corners double as the edges of the medial graph.
struct EmbeddedGraph {
    enum class Topology { genus0, torus };

    Topology topology = Topology::genus0;
    int n_vertices = 0;
    int n_faces = 0;
    int outer_face = -1;  // required for genus0, stays -1 on the torus
    std::vector<Quad> quads;
    std::vector<std::vector<int>> vertex_rotation;  // ccw edge ids per vertex

    // Derived by finalize():
    std::vector<std::vector<int>> face_rotation;  // edge ids along face walks
    std::vector<int> corner_offset;               // corner id = offset[v] + k
    std::vector<int> corner_face_;                // face per corner id
    std::vector<int> slot_v1_, slot_v2_;          // rotation slot of e at v1/v2
    std::vector<int> face_corner_;                // one corner id per face

    int n_edges() const { return static_cast<int>(quads.size()); }
    int n_corners() const { return 2 * n_edges(); }
    int degree(int v) const { return static_cast<int>(vertex_rotation[v].size()); }

    int corner_id(int v, int k) const { return corner_offset[v] + k; }
    int corner_vertex(int c) const;
    int corner_slot(int c) const { return c - corner_offset[corner_vertex(c)]; }
    int corner_face(int c) const { return corner_face_[c]; }

    int other_vertex(int e, int v) const {
        return quads[e].v1 == v ? quads[e].v2 : quads[e].v1;
    }
    int other_face(int e, int u) const {
        return quads[e].u1 == u ? quads[e].u2 : quads[e].u1;
    }
    // Face to the left of the dart leaving `v` along edge `e`.
    int left_face(int e, int v) const {
        return quads[e].v1 == v ? quads[e].u1 : quads[e].u2;
    }
    int slot_of(int e, int v) const {
        return quads[e].v1 == v ? slot_v1_[e] : slot_v2_[e];
    }
    // The corner at `v` hugging edge `e` on the side of face `u`.
    int corner_beside(int v, int e, int u) const;

    void finalize();
    std::string dump() const;  // one line per edge: "index v1 v2 u1 u2"
};

EmbeddedGraph build_box(int n);    // 2n x 2n grid, one outer face
EmbeddedGraph build_torus(int n);  // n x n torus, n >= 2
EmbeddedGraph build_prism();       // triangular prism: 6/9/5, 3-regular

// Medial graph of a genus-0 graph: one 4-valent vertex per edge of g (same
// index), one edge per corner of g (same id), faces indexed as
// [0, nV) for vertex-type faces and [nV, nV+nU) for face-type faces.
EmbeddedGraph medial(const EmbeddedGraph& g);

ClusterPartition clusters(const EmbeddedGraph& g, const EdgeSet& s);

// Homology class of an edge subset on the torus: 0 if every component is
// contractible, 1 if non-contractible cycles exist and are all parallel,
// 2 otherwise. Computed as the rank of the seam-winding vectors of a cycle
// basis of (cells, s).
int torus_delta(const EmbeddedGraph& g, const EdgeSet& s);

// Whether the cluster of `s` rooted at cluster_root separates faces x1 and x2
// on a genus-0 graph. The obstacle is the union of the cluster's embedded
// edge curves: dual curves run face center -> edge midpoint -> face center
// and block passage along the crossed primal edge, primal curves run
// vertex -> vertex and block passage around their endpoints. For a dual-side
// cluster, a face that the cluster touches counts as separated from
// everything ("membership clause"); the primal-side variant has no such
// clause. Implemented as a flood fill over corners.
bool disconnects(const EmbeddedGraph& g, const EdgeSet& s,
                 const ClusterPartition& cp, int cluster_root, int x1, int x2);

}  // namespace pottspair
