#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "pottspair/lattice.hpp"

using namespace pottspair;

namespace {

int component_count(const EmbeddedGraph& g, const EdgeSet& s) {
    return clusters(g, s).k;
}

// Homology class recomputed from component counts alone, with no seam tags:
// on the torus, k(complement) = k(s) + |s| - delta(s) - |V| + 1.
int delta_from_components(const EmbeddedGraph& g, const EdgeSet& s) {
    return component_count(g, s) + s.count() - g.n_vertices + 1 -
           component_count(g, s.complement());
}

}  // namespace

TEST_CASE("box builder: sizes, outer face, Euler count") {
    for (int n : {1, 2, 3}) {
        EmbeddedGraph g = build_box(n);
        int N = 2 * n;
        CHECK(g.n_vertices == N * N);
        CHECK(g.n_edges() == 2 * N * (N - 1));
        CHECK(g.n_faces == (N - 1) * (N - 1) + 1);
        CHECK(g.n_vertices - g.n_edges() + g.n_faces == 2);
        CHECK(g.outer_face == g.n_faces - 1);
    }
    EmbeddedGraph g1 = build_box(1);
    CHECK(g1.n_vertices == 4);
    CHECK(g1.n_edges() == 4);
    CHECK(g1.n_faces == 2);
    EmbeddedGraph g2 = build_box(2);
    CHECK(g2.n_vertices == 16);
    CHECK(g2.n_edges() == 24);
    CHECK(g2.n_faces == 10);
    EmbeddedGraph g3 = build_box(3);
    CHECK(g3.n_vertices == 36);
    CHECK(g3.n_edges() == 60);
    CHECK(g3.n_faces == 26);
    CHECK_THROWS_AS(build_box(0), std::invalid_argument);
}

TEST_CASE("torus builder: sizes and Euler count") {
    EmbeddedGraph t2 = build_torus(2);
    CHECK(t2.n_vertices == 4);
    CHECK(t2.n_edges() == 8);
    CHECK(t2.n_faces == 4);
    CHECK(t2.n_vertices - t2.n_edges() + t2.n_faces == 0);
    CHECK(t2.outer_face == -1);
    EmbeddedGraph t3 = build_torus(3);
    CHECK(t3.n_vertices == 9);
    CHECK(t3.n_edges() == 18);
    CHECK(t3.n_faces == 9);
    CHECK_THROWS_AS(build_torus(1), std::invalid_argument);

    // Every primal edge has a well-formed crossing dual edge and the pairing
    // is an involution (shared index; dagger twice restores the set).
    for (const Quad& q : t2.quads) {
        CHECK(q.u1 != q.u2);
        CHECK(q.v1 != q.v2);
    }
    EdgeSet s = EdgeSet::from_mask(Side::primal, 8, 0b10110100);
    CHECK(s.complement().complement() == s);
    CHECK(s.complement().side() == Side::dual);
}

TEST_CASE("prism builder: 3-regular, 6/9/5") {
    EmbeddedGraph p = build_prism();
    CHECK(p.n_vertices == 6);
    CHECK(p.n_edges() == 9);
    CHECK(p.n_faces == 5);
    for (int v = 0; v < 6; ++v) CHECK(p.degree(v) == 3);
    CHECK(p.face_rotation[p.outer_face].size() == 3);
    int quads = 0, triangles = 0;
    for (int u = 0; u < p.n_faces; ++u) {
        if (p.face_rotation[u].size() == 4) ++quads;
        if (p.face_rotation[u].size() == 3) ++triangles;
    }
    CHECK(quads == 3);
    CHECK(triangles == 2);
}

TEST_CASE("edge set algebra") {
    EdgeSet a(Side::primal, 70);
    a.set(0);
    a.set(63);
    a.set(64);
    CHECK(a.count() == 3);
    CHECK(a.has(63));
    CHECK(!a.has(1));
    EdgeSet c = a.complement();
    CHECK(c.count() == 67);
    CHECK(c.side() == Side::dual);
    CHECK(!c.has(64));
    CHECK(c.has(69));
    CHECK((a.complement().complement() == a));
    CHECK(a.count() + a.complement().count() == 70);

    EdgeSet b(Side::primal, 70);
    b.set(0);
    CHECK(b.subset_of(a));
    CHECK(!a.subset_of(b));
    CHECK(a.intersects(b));
    CHECK((a.minus(b)).count() == 2);
    CHECK(((a | b) == a));
    CHECK(((a & b) == b));
    CHECK(a.elements() == std::vector<int>{0, 63, 64});
}

TEST_CASE("clusters count isolated cells") {
    EmbeddedGraph g = build_box(1);
    CHECK(component_count(g, EdgeSet(Side::primal, 4)) == 4);
    CHECK(component_count(g, EdgeSet::full(Side::primal, 4)) == 1);
    CHECK(component_count(g, EdgeSet(Side::dual, 4)) == 2);

    ClusterPartition cp = clusters(g, EdgeSet::from_mask(Side::primal, 4, 0b0001));
    CHECK(cp.k == 3);
    CHECK(cp.same(g.quads[0].v1, g.quads[0].v2));
    auto comps = cp.components();
    CHECK(comps.size() == 3);
}

TEST_CASE("genus-0 component identity over all box(1) subsets") {
    EmbeddedGraph g = build_box(1);
    for (uint64_t m = 0; m < 16; ++m) {
        EdgeSet w = EdgeSet::from_mask(Side::primal, 4, m);
        int k = component_count(g, w);
        int kd = component_count(g, w.complement());
        CHECK(kd == k + w.count() - g.n_vertices + 1);
    }
}

TEST_CASE("torus homology class: frozen small cases") {
    EmbeddedGraph t = build_torus(2);
    auto delta = [&](uint64_t m) {
        return torus_delta(t, EdgeSet::from_mask(Side::primal, 8, m));
    };
    // Edge ids: horizontal h(x,y) = 2y + x, vertical t(x,y) = 4 + 2y + x.
    CHECK(delta(0) == 0);
    CHECK(delta(0b00000011) == 1);   // horizontal ring through (0,0),(1,0)
    CHECK(delta(0b01010000) == 1);   // vertical ring through (0,0),(0,1)
    CHECK(delta(0b00110000) == 0);   // two parallel single edges: no cycle
    CHECK(delta(0b00110101) == 0);   // boundary of face (0,0): contractible
    CHECK(delta(0b11111111) == 2);
    // Staircase h(0,0), t(1,0), h(1,1), t(0,1): winds once in each direction.
    uint64_t stair = (1u << 0) | (1u << 5) | (1u << 3) | (1u << 6);
    CHECK(delta(stair) == 1);
    CHECK(delta(stair | 0b11) == 2);  // plus a horizontal ring

    EmbeddedGraph box = build_box(1);
    CHECK_THROWS_AS(torus_delta(box, EdgeSet(Side::primal, 4)), std::invalid_argument);
}

TEST_CASE("torus identities over all 256 subsets of T_2") {
    EmbeddedGraph t = build_torus(2);
    for (uint64_t m = 0; m < 256; ++m) {
        EdgeSet w = EdgeSet::from_mask(Side::primal, 8, m);
        int d = torus_delta(t, w);
        int dd = torus_delta(t, w.complement());
        CHECK(d + dd == 2);
        CHECK(d == delta_from_components(t, w));
        CHECK(component_count(t, w.complement()) ==
              component_count(t, w) + w.count() - d - t.n_vertices + 1);
    }
}

TEST_CASE("torus identities on random subsets of T_3") {
    EmbeddedGraph t = build_torus(3);
    std::mt19937_64 rng(20260814);
    std::uniform_int_distribution<uint64_t> dist(0, (uint64_t(1) << 18) - 1);
    for (int i = 0; i < 10000; ++i) {
        EdgeSet w = EdgeSet::from_mask(Side::primal, 18, dist(rng));
        int d = torus_delta(t, w);
        CHECK(d + torus_delta(t, w.complement()) == 2);
        CHECK(component_count(t, w.complement()) ==
              component_count(t, w) + w.count() - d - t.n_vertices + 1);
    }
}

TEST_CASE("disconnection by a dual ring around the center face") {
    EmbeddedGraph g = build_box(2);
    // Face ids f(x,y) = 3y + x for x,y in 0..2; outer face is 9. The dual
    // ring around the center face 4 crosses these primal edges.
    const int ring[] = {13, 14, 5, 8, 22, 21, 6, 3};
    EdgeSet cyc(Side::dual, g.n_edges());
    for (int e : ring) cyc.set(e);
    ClusterPartition cp = clusters(g, cyc);
    int root = cp.find(0);  // face 0 lies on the ring
    CHECK(cp.find(4) != root);

    CHECK(disconnects(g, cyc, cp, root, 4, 9));
    CHECK(disconnects(g, cyc, cp, root, 9, 4));  // symmetric
    CHECK(disconnects(g, cyc, cp, root, 4, 8));  // 8 is on the ring: membership
    CHECK(!disconnects(g, cyc, cp, root, 4, 4));

    // Removing one ring edge leaves a tree: passage squeezes through the gap
    // between the two cluster faces beside the missing dual edge.
    EdgeSet tree = cyc;
    tree.reset(13);
    ClusterPartition cpt = clusters(g, tree);
    int troot = cpt.find(0);
    CHECK(!disconnects(g, tree, cpt, troot, 4, 9));
    CHECK(disconnects(g, tree, cpt, troot, 0, 4));  // membership clause
}

TEST_CASE("disconnection: singleton dual cluster separates by membership") {
    EmbeddedGraph g = build_box(2);
    EdgeSet none(Side::dual, g.n_edges());
    ClusterPartition cp = clusters(g, none);
    for (int u = 0; u < g.n_faces - 1; ++u) {
        CHECK(disconnects(g, none, cp, cp.find(u), u, g.outer_face));
        if (u != 4) CHECK(!disconnects(g, none, cp, cp.find(4), u, g.outer_face));
    }
}

TEST_CASE("disconnection by a primal cycle (no membership clause)") {
    EmbeddedGraph g = build_box(2);
    // Primal boundary cycle of the center face 4.
    EdgeSet cyc(Side::primal, g.n_edges());
    for (int e : {4, 7, 17, 18}) cyc.set(e);
    ClusterPartition cp = clusters(g, cyc);
    int root = cp.find(g.quads[4].v1);
    CHECK(disconnects(g, cyc, cp, root, 4, 9));
    CHECK(disconnects(g, cyc, cp, root, 9, 4));
    // Faces adjacent to the cycle but outside it are not separated from outer.
    CHECK(!disconnects(g, cyc, cp, root, 1, 9));
    CHECK(!disconnects(g, cyc, cp, root, 3, 5));

    // A primal tree separates nothing.
    EdgeSet tree = cyc;
    tree.reset(18);
    ClusterPartition cpt = clusters(g, tree);
    int troot = cpt.find(g.quads[4].v1);
    CHECK(!disconnects(g, tree, cpt, troot, 4, 9));
    CHECK(!disconnects(g, tree, cpt, troot, 4, 1));
}

TEST_CASE("medial graph: 4-regular, doubled square, face correspondence") {
    for (int n : {1, 2, 3}) {
        EmbeddedGraph g = build_box(n);
        EmbeddedGraph m = medial(g);
        CHECK(m.n_vertices == g.n_edges());
        CHECK(m.n_edges() == 2 * g.n_edges());
        CHECK(m.n_faces == g.n_vertices + g.n_faces);
        for (int v = 0; v < m.n_vertices; ++v) CHECK(m.degree(v) == 4);
        // Every medial edge separates a vertex-type face from a face-type face.
        for (const Quad& q : m.quads) {
            CHECK(q.u1 < g.n_vertices);
            CHECK(q.u2 >= g.n_vertices);
        }
        CHECK(m.outer_face == g.n_vertices + g.outer_face);
    }
    EmbeddedGraph m1 = medial(build_box(1));
    CHECK(m1.n_vertices == 4);
    CHECK(m1.n_edges() == 8);
    CHECK(m1.n_faces == 6);
    EmbeddedGraph m2 = medial(build_box(2));
    CHECK(m2.n_vertices == 24);

    EmbeddedGraph mp = medial(build_prism());
    CHECK(mp.n_vertices == 9);
    CHECK(mp.n_faces == 11);

    CHECK_THROWS_AS(medial(build_torus(2)), std::invalid_argument);
}

TEST_CASE("corner tables are consistent with quads") {
    for (const EmbeddedGraph& g : {build_box(2), build_prism()}) {
        for (int v = 0; v < g.n_vertices; ++v)
            for (int k = 0; k < g.degree(v); ++k) {
                int c = g.corner_id(v, k);
                CHECK(g.corner_vertex(c) == v);
                CHECK(g.corner_slot(c) == k);
                CHECK(g.corner_face(c) == g.left_face(g.vertex_rotation[v][k], v));
            }
        // corner_beside finds the corner hugging an edge on a given side.
        for (int e = 0; e < g.n_edges(); ++e) {
            const Quad& q = g.quads[e];
            for (int u : {q.u1, q.u2})
                for (int v : {q.v1, q.v2}) CHECK(g.corner_face(g.corner_beside(v, e, u)) == u);
        }
    }
}

TEST_CASE("debug dump: one line per edge, index v1 v2 u1 u2") {
    EmbeddedGraph g = build_box(1);
    CHECK(g.dump() == "0 0 1 0 1\n1 2 3 1 0\n2 0 2 1 0\n3 1 3 0 1\n");
}
