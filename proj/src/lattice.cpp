#include "pottspair/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pottspair {

// ---------------------------------------------------------------------------
// EdgeSet

EdgeSet EdgeSet::full(Side side, int n_edges) {
    EdgeSet s(side, n_edges);
    for (size_t i = 0; i < s.w_.size(); ++i) s.w_[i] = ~uint64_t(0);
    if (n_edges & 63) s.w_.back() = (uint64_t(1) << (n_edges & 63)) - 1;
    return s;
}

EdgeSet EdgeSet::from_mask(Side side, int n_edges, uint64_t mask) {
    if (n_edges > 64) throw std::invalid_argument("from_mask: more than 64 edges");
    EdgeSet s(side, n_edges);
    if (n_edges > 0) s.w_[0] = mask & (n_edges == 64 ? ~uint64_t(0) : (uint64_t(1) << n_edges) - 1);
    return s;
}

int EdgeSet::count() const {
    int c = 0;
    for (uint64_t w : w_) c += std::popcount(w);
    return c;
}

bool EdgeSet::empty() const {
    for (uint64_t w : w_)
        if (w) return false;
    return true;
}

bool EdgeSet::subset_of(const EdgeSet& o) const {
    assert(n_ == o.n_ && side_ == o.side_);
    for (size_t i = 0; i < w_.size(); ++i)
        if (w_[i] & ~o.w_[i]) return false;
    return true;
}

bool EdgeSet::intersects(const EdgeSet& o) const {
    assert(n_ == o.n_ && side_ == o.side_);
    for (size_t i = 0; i < w_.size(); ++i)
        if (w_[i] & o.w_[i]) return true;
    return false;
}

EdgeSet EdgeSet::complement() const {
    EdgeSet s(flip(side_), n_);
    for (size_t i = 0; i < w_.size(); ++i) s.w_[i] = ~w_[i];
    if (n_ & 63) s.w_.back() &= (uint64_t(1) << (n_ & 63)) - 1;
    return s;
}

EdgeSet EdgeSet::operator|(const EdgeSet& o) const {
    assert(n_ == o.n_ && side_ == o.side_);
    EdgeSet s(side_, n_);
    for (size_t i = 0; i < w_.size(); ++i) s.w_[i] = w_[i] | o.w_[i];
    return s;
}

EdgeSet EdgeSet::operator&(const EdgeSet& o) const {
    assert(n_ == o.n_ && side_ == o.side_);
    EdgeSet s(side_, n_);
    for (size_t i = 0; i < w_.size(); ++i) s.w_[i] = w_[i] & o.w_[i];
    return s;
}

EdgeSet EdgeSet::minus(const EdgeSet& o) const {
    assert(n_ == o.n_ && side_ == o.side_);
    EdgeSet s(side_, n_);
    for (size_t i = 0; i < w_.size(); ++i) s.w_[i] = w_[i] & ~o.w_[i];
    return s;
}

bool EdgeSet::operator==(const EdgeSet& o) const {
    return side_ == o.side_ && n_ == o.n_ && w_ == o.w_;
}

std::vector<int> EdgeSet::elements() const {
    std::vector<int> out;
    out.reserve(count());
    for (size_t i = 0; i < w_.size(); ++i) {
        uint64_t w = w_[i];
        while (w) {
            out.push_back(static_cast<int>(i) * 64 + std::countr_zero(w));
            w &= w - 1;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// ClusterPartition

std::vector<int> ClusterPartition::dense_ids() const {
    std::vector<int> id(n_cells, -1);
    int next = 0;
    for (int c = 0; c < n_cells; ++c) {
        int r = root[c];
        if (id[r] < 0) id[r] = next++;
    }
    std::vector<int> out(n_cells);
    for (int c = 0; c < n_cells; ++c) out[c] = id[root[c]];
    return out;
}

std::vector<std::vector<int>> ClusterPartition::components() const {
    std::vector<int> ids = dense_ids();
    std::vector<std::vector<int>> comps(k);
    for (int c = 0; c < n_cells; ++c) comps[ids[c]].push_back(c);
    return comps;
}

// ---------------------------------------------------------------------------
// EmbeddedGraph

int EmbeddedGraph::corner_vertex(int c) const {
    // corner_offset is sorted; find the last offset <= c.
    int lo = 0, hi = n_vertices - 1;
    while (lo < hi) {
        int mid = (lo + hi + 1) / 2;
        if (corner_offset[mid] <= c) lo = mid;
        else hi = mid - 1;
    }
    return lo;
}

int EmbeddedGraph::corner_beside(int v, int e, int u) const {
    int d = degree(v);
    int s = slot_of(e, v);
    if (left_face(e, v) == u) return corner_id(v, s);
    int c = corner_id(v, (s + d - 1) % d);
    assert(corner_face_[c] == u);
    return c;
}

void EmbeddedGraph::finalize() {
    const int nE = n_edges();
    if (n_vertices <= 0 || n_faces <= 0 || nE <= 0)
        throw std::logic_error("embedded graph: empty");
    if (topology == Topology::genus0) {
        if (outer_face < 0 || outer_face >= n_faces)
            throw std::logic_error("embedded graph: genus-0 graph needs an outer face");
        if (n_vertices - nE + n_faces != 2)
            throw std::logic_error("embedded graph: Euler count is not 2");
    } else {
        if (outer_face != -1)
            throw std::logic_error("embedded graph: torus has no outer face");
        if (n_vertices - nE + n_faces != 0)
            throw std::logic_error("embedded graph: Euler count is not 0");
    }
    for (const Quad& q : quads) {
        if (q.v1 < 0 || q.v1 >= n_vertices || q.v2 < 0 || q.v2 >= n_vertices ||
            q.u1 < 0 || q.u1 >= n_faces || q.u2 < 0 || q.u2 >= n_faces)
            throw std::logic_error("embedded graph: quad endpoint out of range");
        if (q.v1 == q.v2 || q.u1 == q.u2)
            throw std::logic_error("embedded graph: loops and bridges not supported");
        if (topology == Topology::genus0 && (q.pwx || q.pwy || q.dwx || q.dwy))
            throw std::logic_error("embedded graph: seam tags on a genus-0 graph");
    }

    // Rotation slots; every edge must appear exactly once at each endpoint.
    slot_v1_.assign(nE, -1);
    slot_v2_.assign(nE, -1);
    if (static_cast<int>(vertex_rotation.size()) != n_vertices)
        throw std::logic_error("embedded graph: rotation table size mismatch");
    for (int v = 0; v < n_vertices; ++v) {
        const auto& rot = vertex_rotation[v];
        if (rot.size() < 2)
            throw std::logic_error("embedded graph: vertex of degree < 2");
        for (int k = 0; k < static_cast<int>(rot.size()); ++k) {
            int e = rot[k];
            if (e < 0 || e >= nE) throw std::logic_error("embedded graph: bad rotation entry");
            int& slot = quads[e].v1 == v   ? slot_v1_[e]
                        : quads[e].v2 == v ? slot_v2_[e]
                                           : slot_v1_[e];
            if (quads[e].v1 != v && quads[e].v2 != v)
                throw std::logic_error("embedded graph: rotation lists a non-incident edge");
            if (slot != -1) throw std::logic_error("embedded graph: duplicate rotation entry");
            slot = k;
        }
    }
    for (int e = 0; e < nE; ++e)
        if (slot_v1_[e] < 0 || slot_v2_[e] < 0)
            throw std::logic_error("embedded graph: edge missing from a rotation");

    // Corner tables. The face of corner (v, k) is the left face of the dart
    // leaving v along rotation[v][k].
    corner_offset.assign(n_vertices, 0);
    int off = 0;
    for (int v = 0; v < n_vertices; ++v) {
        corner_offset[v] = off;
        off += degree(v);
    }
    if (off != n_corners()) throw std::logic_error("embedded graph: degree sum != 2|E|");
    corner_face_.assign(n_corners(), -1);
    for (int v = 0; v < n_vertices; ++v)
        for (int k = 0; k < degree(v); ++k)
            corner_face_[corner_id(v, k)] = left_face(vertex_rotation[v][k], v);

    // Face walks. A dart is (edge, direction); the walk of the face left of a
    // dart turns at each head vertex onto the next clockwise edge. Every dart
    // must be used exactly once and every walk must stay on one face.
    face_rotation.assign(n_faces, {});
    std::vector<char> seen(2 * nE, 0);
    int walks = 0;
    for (int start = 0; start < 2 * nE; ++start) {
        if (seen[start]) continue;
        ++walks;
        int e0 = start >> 1, dir0 = start & 1;
        int face = dir0 == 0 ? quads[e0].u1 : quads[e0].u2;
        if (!face_rotation[face].empty())
            throw std::logic_error("embedded graph: face traced by two separate walks");
        int e = e0, dir = dir0;
        int wx = 0, wy = 0;  // accumulated primal seam crossings along the walk
        do {
            int d = (e << 1) | dir;
            if (seen[d]) throw std::logic_error("embedded graph: dart revisited");
            seen[d] = 1;
            face_rotation[face].push_back(e);
            int lf = dir == 0 ? quads[e].u1 : quads[e].u2;
            if (lf != face) throw std::logic_error("embedded graph: face walk left its face");
            wx += dir == 0 ? quads[e].pwx : -quads[e].pwx;
            wy += dir == 0 ? quads[e].pwy : -quads[e].pwy;
            int head = dir == 0 ? quads[e].v2 : quads[e].v1;
            int deg = degree(head);
            int next = vertex_rotation[head][(slot_of(e, head) + deg - 1) % deg];
            dir = quads[next].v1 == head ? 0 : 1;
            e = next;
        } while (!(e == e0 && dir == dir0));
        if (wx != 0 || wy != 0)
            throw std::logic_error("embedded graph: face boundary winds around a seam");
    }
    if (walks != n_faces) throw std::logic_error("embedded graph: face count mismatch");

    // The walked edge multiset of each face must match the quads.
    {
        std::vector<std::vector<int>> from_quads(n_faces);
        for (int e = 0; e < nE; ++e) {
            from_quads[quads[e].u1].push_back(e);
            from_quads[quads[e].u2].push_back(e);
        }
        for (int u = 0; u < n_faces; ++u) {
            std::vector<int> walked = face_rotation[u];
            std::sort(walked.begin(), walked.end());
            std::sort(from_quads[u].begin(), from_quads[u].end());
            if (walked != from_quads[u])
                throw std::logic_error("embedded graph: face boundary mismatch");
        }
    }

    face_corner_.assign(n_faces, -1);
    for (int c = 0; c < n_corners(); ++c)
        if (face_corner_[corner_face_[c]] < 0) face_corner_[corner_face_[c]] = c;
    for (int u = 0; u < n_faces; ++u)
        if (face_corner_[u] < 0) throw std::logic_error("embedded graph: face without corners");
}

std::string EmbeddedGraph::dump() const {
    std::ostringstream os;
    for (int e = 0; e < n_edges(); ++e)
        os << e << ' ' << quads[e].v1 << ' ' << quads[e].v2 << ' ' << quads[e].u1 << ' '
           << quads[e].u2 << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Builders

EmbeddedGraph build_box(int n) {
    if (n < 1) throw std::invalid_argument("build_box: n must be >= 1");
    const int N = 2 * n;  // vertices per side
    EmbeddedGraph g;
    g.topology = EmbeddedGraph::Topology::genus0;
    g.n_vertices = N * N;
    g.n_faces = (N - 1) * (N - 1) + 1;
    g.outer_face = (N - 1) * (N - 1);

    auto vid = [N](int x, int y) { return y * N + x; };
    auto fid = [N, &g](int x, int y) {
        // Inner face with lower-left vertex (x, y); anything outside is outer.
        if (x < 0 || y < 0 || x > N - 2 || y > N - 2) return g.outer_face;
        return y * (N - 1) + x;
    };
    auto hid = [N](int x, int y) { return y * (N - 1) + x; };
    auto tid = [N](int x, int y) { return N * (N - 1) + y * N + x; };

    g.quads.resize(2 * N * (N - 1));
    for (int y = 0; y < N; ++y)
        for (int x = 0; x + 1 < N; ++x)
            g.quads[hid(x, y)] = {vid(x, y), vid(x + 1, y), fid(x, y), fid(x, y - 1)};
    for (int y = 0; y + 1 < N; ++y)
        for (int x = 0; x < N; ++x)
            g.quads[tid(x, y)] = {vid(x, y), vid(x, y + 1), fid(x - 1, y), fid(x, y)};

    g.vertex_rotation.resize(g.n_vertices);
    for (int y = 0; y < N; ++y)
        for (int x = 0; x < N; ++x) {
            auto& rot = g.vertex_rotation[vid(x, y)];
            if (x + 1 < N) rot.push_back(hid(x, y));      // east
            if (y + 1 < N) rot.push_back(tid(x, y));      // north
            if (x > 0) rot.push_back(hid(x - 1, y));      // west
            if (y > 0) rot.push_back(tid(x, y - 1));      // south
        }
    g.finalize();
    return g;
}

EmbeddedGraph build_torus(int n) {
    if (n < 2) throw std::invalid_argument("build_torus: n must be >= 2");
    EmbeddedGraph g;
    g.topology = EmbeddedGraph::Topology::torus;
    g.n_vertices = n * n;
    g.n_faces = n * n;

    auto vid = [n](int x, int y) { return ((y + n) % n) * n + (x + n) % n; };
    auto fid = vid;  // face (x, y) has lower-left vertex (x, y)
    auto hid = [n](int x, int y) { return y * n + x; };
    auto tid = [n](int x, int y) { return n * n + y * n + x; };

    g.quads.resize(2 * n * n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            Quad h{vid(x, y), vid(x + 1, y), fid(x, y), fid(x, y - 1)};
            h.pwx = static_cast<int8_t>(x == n - 1 ? 1 : 0);
            h.dwy = static_cast<int8_t>(y == 0 ? -1 : 0);
            g.quads[hid(x, y)] = h;
            Quad t{vid(x, y), vid(x, y + 1), fid(x - 1, y), fid(x, y)};
            t.pwy = static_cast<int8_t>(y == n - 1 ? 1 : 0);
            t.dwx = static_cast<int8_t>(x == 0 ? 1 : 0);
            g.quads[tid(x, y)] = t;
        }

    g.vertex_rotation.resize(g.n_vertices);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            g.vertex_rotation[vid(x, y)] = {
                hid(x, y),                    // east
                tid(x, y),                    // north
                hid((x + n - 1) % n, y),      // west
                tid(x, (y + n - 1) % n),      // south
            };
    g.finalize();
    return g;
}

EmbeddedGraph build_prism() {
    // Two concentric triangles 0-1-2 (outer) and 3-4-5 (inner) joined by
    // spokes; faces: 0 = outside, 1 = inner triangle, 2..4 = the three quads.
    EmbeddedGraph g;
    g.topology = EmbeddedGraph::Topology::genus0;
    g.n_vertices = 6;
    g.n_faces = 5;
    g.outer_face = 0;
    g.quads = {
        {0, 1, 2, 0},  // e0
        {1, 2, 3, 0},  // e1
        {2, 0, 4, 0},  // e2
        {3, 4, 1, 2},  // e3
        {4, 5, 1, 3},  // e4
        {5, 3, 1, 4},  // e5
        {0, 3, 4, 2},  // e6
        {1, 4, 2, 3},  // e7
        {2, 5, 3, 4},  // e8
    };
    g.vertex_rotation = {
        {0, 6, 2},  // at 0
        {1, 7, 0},  // at 1
        {2, 8, 1},  // at 2
        {6, 3, 5},  // at 3
        {4, 3, 7},  // at 4
        {5, 4, 8},  // at 5
    };
    g.finalize();
    return g;
}

EmbeddedGraph medial(const EmbeddedGraph& g) {
    if (g.topology != EmbeddedGraph::Topology::genus0)
        throw std::invalid_argument("medial: genus-0 input required");
    EmbeddedGraph m;
    m.topology = EmbeddedGraph::Topology::genus0;
    m.n_vertices = g.n_edges();
    m.n_faces = g.n_vertices + g.n_faces;
    m.outer_face = g.n_vertices + g.outer_face;

    // One medial edge per corner of g, same id. The corner (v, k) between
    // edges e = rot[v][k] and e' = rot[v][k+1] becomes the medial edge
    // m_e -> m_e' with the vertex-type face of v on its left.
    m.quads.resize(g.n_corners());
    for (int v = 0; v < g.n_vertices; ++v) {
        int d = g.degree(v);
        for (int k = 0; k < d; ++k) {
            int c = g.corner_id(v, k);
            m.quads[c] = {g.vertex_rotation[v][k], g.vertex_rotation[v][(k + 1) % d], v,
                          g.n_vertices + g.corner_face(c)};
        }
    }

    // Rotation at the medial vertex over edge e = (v1 -> v2, u1 left):
    // counterclockwise the four medial edges pass, in order, through the
    // corners (v1 side of u1), (v1 side of u2), (v2 side of u2), (v2 side of u1).
    m.vertex_rotation.resize(m.n_vertices);
    for (int e = 0; e < g.n_edges(); ++e) {
        const Quad& q = g.quads[e];
        int d1 = g.degree(q.v1), d2 = g.degree(q.v2);
        int i1 = g.slot_of(e, q.v1), i2 = g.slot_of(e, q.v2);
        m.vertex_rotation[e] = {
            g.corner_id(q.v1, i1),
            g.corner_id(q.v1, (i1 + d1 - 1) % d1),
            g.corner_id(q.v2, i2),
            g.corner_id(q.v2, (i2 + d2 - 1) % d2),
        };
    }
    m.finalize();
    return m;
}

// ---------------------------------------------------------------------------
// Clusters, homology, disconnection

ClusterPartition clusters(const EmbeddedGraph& g, const EdgeSet& s) {
    assert(s.universe() == g.n_edges());
    const bool primal = s.side() == Side::primal;
    const int n = primal ? g.n_vertices : g.n_faces;
    UnionFind uf(n);
    for (int e : s.elements()) {
        const Quad& q = g.quads[e];
        if (primal) uf.unite(q.v1, q.v2);
        else uf.unite(q.u1, q.u2);
    }
    ClusterPartition cp;
    cp.side = s.side();
    cp.n_cells = n;
    cp.k = uf.count();
    cp.root.resize(n);
    for (int c = 0; c < n; ++c) cp.root[c] = uf.find(c);
    return cp;
}

int torus_delta(const EmbeddedGraph& g, const EdgeSet& s) {
    if (g.topology != EmbeddedGraph::Topology::torus)
        throw std::invalid_argument("torus_delta: torus input required");
    const bool primal = s.side() == Side::primal;
    const int n = primal ? g.n_vertices : g.n_faces;

    // Spanning forest of (cells, s) with an integer seam-winding offset W per
    // cell; each non-forest edge closes a cycle of winding W(a) + tag - W(b).
    std::vector<int64_t> Wx(n, 0), Wy(n, 0);
    std::vector<int> state(n, 0);  // 0 unvisited, 1 visited
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (edge, other cell)
    for (int e : s.elements()) {
        const Quad& q = g.quads[e];
        int a = primal ? q.v1 : q.u1;
        int b = primal ? q.v2 : q.u2;
        adj[a].push_back({e, b});
        adj[b].push_back({e, a});
    }
    auto tag = [&](int e, int from) -> std::pair<int, int> {
        const Quad& q = g.quads[e];
        int tx = primal ? q.pwx : q.dwx;
        int ty = primal ? q.pwy : q.dwy;
        int tail = primal ? q.v1 : q.u1;
        if (from == tail) return {tx, ty};
        return {-tx, -ty};
    };

    std::vector<std::pair<int64_t, int64_t>> cycles;
    std::vector<int> stack;
    std::vector<char> edge_used(g.n_edges(), 0);
    for (int s0 = 0; s0 < n; ++s0) {
        if (state[s0]) continue;
        state[s0] = 1;
        stack.push_back(s0);
        while (!stack.empty()) {
            int a = stack.back();
            stack.pop_back();
            for (auto [e, b] : adj[a]) {
                auto [tx, ty] = tag(e, a);
                if (!state[b]) {
                    state[b] = 1;
                    edge_used[e] = 1;
                    Wx[b] = Wx[a] + tx;
                    Wy[b] = Wy[a] + ty;
                    stack.push_back(b);
                } else if (!edge_used[e]) {
                    edge_used[e] = 1;
                    cycles.push_back({Wx[a] + tx - Wx[b], Wy[a] + ty - Wy[b]});
                }
            }
        }
    }

    // Rank over Q of the winding vectors.
    int64_t px = 0, py = 0;
    bool have = false;
    for (auto [cx, cy] : cycles) {
        if (cx == 0 && cy == 0) continue;
        if (!have) {
            px = cx;
            py = cy;
            have = true;
        } else if (px * cy - py * cx != 0) {
            return 2;
        }
    }
    return have ? 1 : 0;
}

bool disconnects(const EmbeddedGraph& g, const EdgeSet& s, const ClusterPartition& cp,
                 int cluster_root, int x1, int x2) {
    if (g.topology != EmbeddedGraph::Topology::genus0)
        throw std::invalid_argument("disconnects: genus-0 input required");
    assert(cp.side == s.side() && cp.find(cluster_root) == cluster_root);
    const bool dual = s.side() == Side::dual;

    if (dual && (cp.find(x1) == cluster_root || cp.find(x2) == cluster_root)) return true;
    if (x1 == x2) return false;

    auto cluster_edge = [&](int e) {
        if (!s.has(e)) return false;
        int a = dual ? g.quads[e].u1 : g.quads[e].v1;
        return cp.find(a) == cluster_root;
    };

    // Flood fill over corners. Moving around a vertex crosses one primal
    // edge; moving along an edge inside a face crosses the dual edge.
    std::vector<char> seen(g.n_corners(), 0);
    std::vector<int> stack;
    stack.push_back(g.face_corner_[x1]);
    seen[stack.back()] = 1;
    while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        if (g.corner_face(c) == x2) return false;
        int v = g.corner_vertex(c);
        int k = g.corner_slot(c);
        int d = g.degree(v);
        auto visit = [&](int nc) {
            if (!seen[nc]) {
                seen[nc] = 1;
                stack.push_back(nc);
            }
        };
        // Around the vertex, across rotation[v][k] and rotation[v][k+1].
        int ea = g.vertex_rotation[v][k];
        int eb = g.vertex_rotation[v][(k + 1) % d];
        if (dual || !cluster_edge(ea)) visit(g.corner_id(v, (k + d - 1) % d));
        if (dual || !cluster_edge(eb)) visit(g.corner_id(v, (k + 1) % d));
        // Along the same two edges inside the corner's face.
        int u = g.corner_face(c);
        if (!dual || !cluster_edge(ea)) visit(g.corner_beside(g.other_vertex(ea, v), ea, u));
        if (!dual || !cluster_edge(eb)) visit(g.corner_beside(g.other_vertex(eb, v), eb, u));
    }
    return true;
}

}  // namespace pottspair
