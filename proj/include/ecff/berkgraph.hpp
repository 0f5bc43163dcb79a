#pragma once

// Finite metrized graphs Gamma = Sigma + (trees hanging off it) inside the
// Berkovich analytification at one place, and functions on them that are
// piecewise polynomial in the arc-length parameter.

#include "rational.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace ecff {

// ---------------------------------------------------------------------------
// Polynomials with rational coefficients (low degree first)

using QPoly = std::vector<Rational>;

inline Rational qpoly_eval(const QPoly& f, const Rational& x)
{
    Rational r = 0;
    for (size_t i = f.size(); i-- > 0;) r = r * x + f[i];
    return r;
}

inline QPoly qpoly_mul(const QPoly& a, const QPoly& b)
{
    if (a.empty() || b.empty()) return {};
    QPoly r(a.size() + b.size() - 1, Rational(0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline QPoly qpoly_add(const QPoly& a, const QPoly& b)
{
    QPoly r(std::max(a.size(), b.size()), Rational(0));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

inline QPoly qpoly_scale(QPoly a, const Rational& c)
{
    for (auto& x : a) x *= c;
    return a;
}

inline QPoly qpoly_deriv(const QPoly& f)
{
    QPoly r;
    for (size_t i = 1; i < f.size(); ++i) r.push_back(f[i] * Rational((long)i));
    return r;
}

// Integral of f over [a, b].
inline Rational qpoly_integral(const QPoly& f, const Rational& a, const Rational& b)
{
    Rational r = 0, pa = a, pb = b;
    for (size_t i = 0; i < f.size(); ++i) {
        r += f[i] * (pb - pa) / Rational((long)(i + 1));
        pa *= a;
        pb *= b;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Piecewise polynomials on [0, L]; a piece is written in the global coordinate.

struct PiecewisePoly {
    std::vector<Rational> bp;  // 0 = bp[0] < ... < bp.back() = L (a single 0 when L = 0)
    std::vector<QPoly> poly;   // poly[i] lives on [bp[i], bp[i+1]]

    Rational length() const { return bp.back(); }

    static PiecewisePoly constant(const Rational& L, const Rational& c)
    {
        PiecewisePoly f;
        f.bp = {Rational(0)};
        if (L > 0) f.bp.push_back(L);
        f.poly = {QPoly{c}};
        return f;
    }

    size_t piece(const Rational& x) const
    {
        if (poly.size() == 1) return 0;
        auto it = std::upper_bound(bp.begin(), bp.end(), x);
        size_t i = (size_t)std::max<long>(0, (long)(it - bp.begin()) - 1);
        return std::min(i, poly.size() - 1);
    }

    // Value at x using the piece to the right of x (the last piece at L).
    Rational operator()(const Rational& x) const { return qpoly_eval(poly[piece(x)], x); }

    PiecewisePoly derivative() const
    {
        PiecewisePoly d = *this;
        for (auto& p : d.poly) p = qpoly_deriv(p);
        return d;
    }

    Rational integral() const
    {
        Rational r = 0;
        for (size_t i = 0; i + 1 < bp.size(); ++i) r += qpoly_integral(poly[i], bp[i], bp[i + 1]);
        return r;
    }

    // Restate on a finer set of breakpoints containing the current ones.
    PiecewisePoly refined(const std::vector<Rational>& pts) const
    {
        std::vector<Rational> all = bp;
        for (auto& x : pts)
            if (x > 0 && x < length()) all.push_back(x);
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        PiecewisePoly r;
        r.bp = all;
        for (size_t i = 0; i + 1 < all.size(); ++i) r.poly.push_back(poly[piece((all[i] + all[i + 1]) / 2)]);
        if (all.size() == 1) r.poly = poly;
        return r;
    }

    template <class Op>
    static PiecewisePoly combine(const PiecewisePoly& a, const PiecewisePoly& b, Op op)
    {
        if (a.length() != b.length()) throw std::invalid_argument("piecewise functions on different intervals");
        PiecewisePoly A = a.refined(b.bp), B = b.refined(a.bp);
        for (size_t i = 0; i < A.poly.size(); ++i) A.poly[i] = op(A.poly[i], B.poly[i]);
        return A;
    }

    friend PiecewisePoly operator*(const PiecewisePoly& a, const PiecewisePoly& b) { return combine(a, b, qpoly_mul); }
    friend PiecewisePoly operator+(const PiecewisePoly& a, const PiecewisePoly& b) { return combine(a, b, qpoly_add); }

    PiecewisePoly scaled(const Rational& c) const
    {
        PiecewisePoly r = *this;
        for (auto& p : r.poly) p = qpoly_scale(p, c);
        return r;
    }

    // Largest jump between adjacent pieces (0 for a continuous function).
    Rational max_jump() const
    {
        Rational m = 0;
        for (size_t i = 1; i < poly.size(); ++i) {
            Rational d = qpoly_eval(poly[i], bp[i]) - qpoly_eval(poly[i - 1], bp[i]);
            if (d < 0) d = -d;
            if (d > m) m = d;
        }
        return m;
    }
};

// ---------------------------------------------------------------------------
// The graph

// A point of Gamma: on the skeleton at position t in [0, ell) when edge < 0,
// otherwise at distance t in (0, len] from the skeleton end of the edge.
struct GraphPoint {
    int edge = -1;
    Rational t = 0;
    friend bool operator==(const GraphPoint& a, const GraphPoint& b) { return a.edge == b.edge && a.t == b.t; }
};

// One anchor of the tree part: a point kappa at depth m above sigma = r_Sigma.
struct Anchor {
    Rational sigma = 0;
    Rational depth = 0;
};

struct MetrizedGraph {
    struct Edge {
        int parent = -1;     // -1: the edge starts on the skeleton at `root`
        Rational root = 0;   // skeleton position of the component
        Rational depth0 = 0; // distance from the skeleton to the start of the edge
        Rational len = 0;
    };

    Rational ell = 0;
    std::vector<Edge> edges;
    std::vector<Anchor> anchors;
    std::vector<GraphPoint> anchor_point;  // each anchor sits on the skeleton or at the end of an edge

    Rational tree_length() const
    {
        Rational s = 0;
        for (auto& e : edges) s += e.len;
        return s;
    }

    // ell_0: the greatest distance from Sigma of a point of Gamma.
    Rational ell0() const
    {
        Rational m = 0;
        for (auto& e : edges) m = max_q(m, e.depth0 + e.len);
        return m;
    }

    Rational depth(const GraphPoint& p) const { return p.edge < 0 ? Rational(0) : edges[(size_t)p.edge].depth0 + p.t; }

    Rational sigma_of(const GraphPoint& p) const
    {
        if (p.edge < 0) return p.t;
        int e = p.edge;
        while (edges[(size_t)e].parent >= 0) e = edges[(size_t)e].parent;
        return edges[(size_t)e].root;
    }

    bool is_ancestor(int anc, int e) const
    {
        for (; e >= 0; e = edges[(size_t)e].parent)
            if (e == anc) return true;
        return false;
    }

    // Point at depth d on the path from the skeleton to anchor a.
    GraphPoint on_anchor_path(size_t a, const Rational& d) const
    {
        const GraphPoint& end = anchor_point[a];
        if (d <= 0 || end.edge < 0) return {-1, anchors[a].sigma};
        if (d > depth(end)) throw std::invalid_argument("depth beyond the anchor");
        int e = end.edge;
        while (edges[(size_t)e].depth0 >= d) e = edges[(size_t)e].parent;
        return {e, d - edges[(size_t)e].depth0};
    }

    // Deepest common point of the paths to anchors a and b (depth only).
    Rational meet_depth(size_t a, size_t b) const
    {
        int ea = anchor_point[a].edge, eb = anchor_point[b].edge;
        if (ea < 0 || eb < 0) return 0;
        Rational best = 0;
        for (int e = ea; e >= 0; e = edges[(size_t)e].parent)
            if (is_ancestor(e, eb)) {
                best = edges[(size_t)e].depth0 + edges[(size_t)e].len;
                break;
            }
        // a shallower anchor may end inside a shared edge
        return std::min({best, depth(anchor_point[a]), depth(anchor_point[b])});
    }

    // Split edge e at local position t (0 < t < len); returns the lower half.
    int split(int e, const Rational& t)
    {
        Edge lower = edges[(size_t)e];
        Edge upper = lower;
        lower.len = t;
        upper.parent = e;
        upper.depth0 = lower.depth0 + t;
        upper.len = edges[(size_t)e].len - t;
        int ue = (int)edges.size();
        edges[(size_t)e] = lower;
        edges.push_back(upper);
        for (size_t i = 0; i + 1 < edges.size(); ++i)
            if (edges[i].parent == e && (int)i != ue) edges[i].parent = ue;
        for (auto& p : anchor_point)
            if (p.edge == e && p.t > t) p = {ue, p.t - t};
        return e;
    }

    // Make p the end of an edge (or a skeleton point); returns the edge.
    int make_node(const GraphPoint& p)
    {
        if (p.edge < 0) return -1;
        if (p.t == edges[(size_t)p.edge].len) return p.edge;
        return split(p.edge, p.t);
    }
};

// Build Gamma from anchors and the pairwise values i(kappa-sources): the paths
// to anchors a and b share exactly min(i(a,b), m_a, m_b).
inline MetrizedGraph span_tree(const Rational& ell, const std::vector<Anchor>& anchors,
                               const std::vector<std::vector<ExtQ>>& i_pairs)
{
    MetrizedGraph G;
    G.ell = ell;
    size_t n = anchors.size();
    auto shared = [&](size_t a, size_t b) -> Rational {
        const ExtQ& x = i_pairs[a][b];
        Rational m = std::min(anchors[a].depth, anchors[b].depth);
        if (!x.is_inf() && x.value() < m) m = x.value();
        if (m > 0 && anchors[a].sigma != anchors[b].sigma)
            throw std::invalid_argument("anchors in one component with different skeleton positions");
        return std::max(m, Rational(0));
    };
    for (size_t a = 0; a < n; ++a) {
        if (anchors[a].depth < 0) throw std::invalid_argument("negative anchor depth");
        G.anchors.push_back(anchors[a]);
        G.anchor_point.push_back({-1, anchors[a].sigma});
        if (anchors[a].depth == 0) continue;
        Rational best = 0;
        size_t bstar = a;
        for (size_t b = 0; b < a; ++b) {
            Rational s = shared(a, b);
            if (s > best) {
                best = s;
                bstar = b;
            }
        }
        if (best == 0) {
            G.edges.push_back({-1, anchors[a].sigma, Rational(0), anchors[a].depth});
            G.anchor_point[a] = {(int)G.edges.size() - 1, anchors[a].depth};
            continue;
        }
        int node = G.make_node(G.on_anchor_path(bstar, best));
        if (best == anchors[a].depth) {
            G.anchor_point[a] = {node, G.edges[(size_t)node].len};
            continue;
        }
        // the new anchor leaves b's path at depth `best`
        G.edges.push_back({node, Rational(0), best, anchors[a].depth - best});
        G.anchor_point[a] = {(int)G.edges.size() - 1, anchors[a].depth - best};
    }
    for (size_t a = 0; a < n; ++a)
        for (size_t b = 0; b < a; ++b)
            if (G.meet_depth(a, b) != shared(a, b))
                throw std::invalid_argument("pairwise values are not ultrametric");
    return G;
}

// r_Gamma(P) from r_Sigma(P) and the values i(P, source of anchor a).
inline GraphPoint retract(const MetrizedGraph& G, const Rational& sigma, const std::vector<ExtQ>& i_to_anchor)
{
    Rational best = 0;
    size_t astar = 0;
    for (size_t a = 0; a < G.anchors.size(); ++a) {
        Rational d = G.anchors[a].depth;
        const ExtQ& x = i_to_anchor[a];
        if (!x.is_inf() && x.value() < d) d = x.value();
        if (d > best) {
            if (G.anchors[a].sigma != sigma) throw std::invalid_argument("point meets a component off its retraction");
            best = d;
            astar = a;
        }
    }
    if (best == 0) return {-1, G.ell > 0 ? mod_q(sigma, G.ell) : Rational(0)};
    return G.on_anchor_path(astar, best);
}

// ---------------------------------------------------------------------------
// Functions on Gamma

struct GraphFunction {
    PiecewisePoly sigma;              // on [0, ell], periodic
    std::vector<PiecewisePoly> edge;  // on [0, len_e]

    Rational operator()(const GraphPoint& p) const
    {
        if (p.edge < 0) return sigma(p.t);
        return edge[(size_t)p.edge](p.t);
    }

    GraphFunction derivative() const
    {
        GraphFunction d;
        d.sigma = sigma.derivative();
        for (auto& e : edge) d.edge.push_back(e.derivative());
        return d;
    }

    // Integral against arc length on Gamma.
    Rational integral() const
    {
        Rational r = sigma.integral();
        for (auto& e : edge) r += e.integral();
        return r;
    }

    Rational integral_sigma() const { return sigma.integral(); }
    Rational integral_tree() const { return integral() - sigma.integral(); }

    friend GraphFunction operator*(const GraphFunction& a, const GraphFunction& b)
    {
        GraphFunction r;
        r.sigma = a.sigma * b.sigma;
        for (size_t i = 0; i < a.edge.size(); ++i) r.edge.push_back(a.edge[i] * b.edge[i]);
        return r;
    }
};

// Integral of F against the probability measure mu on Sigma (uniform, or the
// point mass when Sigma is a point).
inline Rational mu_integral(const MetrizedGraph& G, const GraphFunction& F)
{
    if (G.ell == 0) return F.sigma(Rational(0));
    return F.sigma.integral() / G.ell;
}

inline Rational l2_inner(const GraphFunction& a, const GraphFunction& b) { return (a * b).integral(); }

// ||F'||^2 over Gamma, and separately over Sigma and the tree part.
struct DirichletNorm {
    Rational total, sigma, tree;
};

inline DirichletNorm dirichlet_norm(const GraphFunction& F)
{
    GraphFunction d = F.derivative();
    GraphFunction sq = d * d;
    DirichletNorm n;
    n.sigma = sq.integral_sigma();
    n.tree = sq.integral_tree();
    n.total = n.sigma + n.tree;
    return n;
}

// G(x) = -(1/N) sum Psi_ell(p_n - x) on [0, ell): piecewise linear with jumps
// of 1/N at the points p_n.
inline PiecewisePoly g_sigma(const std::vector<Rational>& p, const Rational& ell)
{
    if (ell <= 0) return PiecewisePoly::constant(Rational(0), Rational(0));
    std::vector<Rational> bp = {Rational(0), ell};
    for (auto& x : p) bp.push_back(mod_q(x, ell));
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    PiecewisePoly g;
    g.bp = bp;
    Rational N((long)p.size());
    for (size_t i = 0; i + 1 < bp.size(); ++i) {
        Rational mid = (bp[i] + bp[i + 1]) / 2;
        Rational c = 0, slope = 0;
        for (auto& x : p) {
            // frac((x - y)/ell) = (x - y)/ell + [y > x] near y = mid
            Rational xm = mod_q(x, ell);
            c += xm / ell + (mid > xm ? Rational(1) : Rational(0)) - Rational(1, 2);
            slope -= 1 / ell;
        }
        g.poly.push_back(QPoly{-c / N, -slope / N});
    }
    return g;
}

// On the tree part G = (1/N) sum over n of the indicator of [sigma_n, r_Gamma(P_n)].
inline std::vector<PiecewisePoly> g_segments(const MetrizedGraph& G, const std::vector<GraphPoint>& r)
{
    std::vector<PiecewisePoly> out;
    Rational N((long)r.size());
    for (size_t e = 0; e < G.edges.size(); ++e) {
        const Rational& len = G.edges[e].len;
        Rational full = 0;
        std::vector<Rational> partial;
        for (auto& p : r) {
            if (p.edge < 0) continue;
            if (p.edge == (int)e) partial.push_back(p.t);
            else if (G.is_ancestor((int)e, p.edge)) full += 1;
        }
        std::vector<Rational> bp = {Rational(0), len};
        for (auto& t : partial) bp.push_back(t);
        std::sort(bp.begin(), bp.end());
        bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
        PiecewisePoly f;
        f.bp = bp;
        for (size_t i = 0; i + 1 < bp.size(); ++i) {
            Rational c = full;
            for (auto& t : partial)
                if (t >= bp[i + 1]) c += 1;
            f.poly.push_back(QPoly{c / N});
        }
        out.push_back(f);
    }
    return out;
}

inline GraphFunction g_function(const MetrizedGraph& G, const std::vector<GraphPoint>& r)
{
    GraphFunction g;
    std::vector<Rational> s;
    for (auto& p : r) s.push_back(G.sigma_of(p));
    g.sigma = g_sigma(s, G.ell);
    g.edge = g_segments(G, r);
    return g;
}

// j(x, R) = (ell/2) Phi((x - r)/ell) on [0, ell) as a piecewise quadratic in x.
inline PiecewisePoly j_profile(const Rational& r, const Rational& ell)
{
    if (ell <= 0) return PiecewisePoly::constant(Rational(0), Rational(0));
    Rational rm = mod_q(r, ell);
    PiecewisePoly f;
    f.bp = {Rational(0)};
    if (rm > 0) f.bp.push_back(rm);
    f.bp.push_back(ell);
    for (size_t i = 0; i + 1 < f.bp.size(); ++i) {
        Rational mid = (f.bp[i] + f.bp[i + 1]) / 2;
        // w = x/ell + c0 is the fractional part on this piece
        Rational c0 = (mid < rm ? Rational(1) : Rational(0)) - rm / ell;
        // Phi(w) = w^2 - w + 1/6
        QPoly w = {c0, 1 / ell};
        QPoly phi = qpoly_add(qpoly_add(qpoly_mul(w, w), qpoly_scale(w, Rational(-1))), QPoly{Rational(1, 6)});
        f.poly.push_back(qpoly_scale(phi, ell / 2));
    }
    return f;
}

inline Rational j_value(const Rational& x, const Rational& r, const Rational& ell)
{
    if (ell <= 0) return 0;
    return ell / 2 * bernoulli_phi((x - r) / ell);
}

// The truncated Neron test function (1/|R|) sum_R (j(x, R) + min(i(x, R), m))
// on a graph spanned by one anchor of depth m per point R.
inline GraphFunction neron_test_function(const MetrizedGraph& G, const std::vector<Rational>& r_of)
{
    size_t n = G.anchors.size();
    if (r_of.size() != n) throw std::invalid_argument("one retraction value per anchor");
    Rational Q((long)n);
    GraphFunction g;
    g.sigma = PiecewisePoly::constant(G.ell, Rational(0));
    for (size_t a = 0; a < n; ++a) g.sigma = g.sigma + j_profile(r_of[a], G.ell).scaled(1 / Q);
    for (size_t e = 0; e < G.edges.size(); ++e) {
        const auto& E = G.edges[e];
        Rational root = G.sigma_of({(int)e, E.len});
        Rational c = 0, slope = 0;
        for (size_t a = 0; a < n; ++a) {
            c += j_value(root, r_of[a], G.ell);
            int ae = G.anchor_point[a].edge;
            if (ae < 0) continue;
            if (G.is_ancestor((int)e, ae)) {
                c += E.depth0;
                slope += 1;
                continue;
            }
            // meet depth of this edge's path with the anchor's path
            for (int f = E.parent; f >= 0; f = G.edges[(size_t)f].parent)
                if (G.is_ancestor(f, ae)) {
                    c += G.edges[(size_t)f].depth0 + G.edges[(size_t)f].len;
                    break;
                }
        }
        PiecewisePoly p = PiecewisePoly::constant(E.len, c / Q);
        p.poly[0].push_back(slope / Q);
        g.edge.push_back(p);
    }
    return g;
}

// A random continuous function on Gamma, piecewise quadratic with small
// rational coefficients; used by the property checks.
inline GraphFunction random_test_function(const MetrizedGraph& G, std::mt19937_64& rng, int pieces = 3)
{
    auto rnd = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
    auto rq = [&]() { return make_q(rnd(-12, 12), rnd(1, 4)); };
    // piece through (a, fa), (b, fb) plus a bump k (x - a)(x - b)
    auto piece = [](const Rational& a, const Rational& fa, const Rational& b, const Rational& fb, const Rational& k) {
        Rational s = (fb - fa) / (b - a);
        QPoly lin = {fa - s * a, s};
        QPoly bump = qpoly_scale(qpoly_mul(QPoly{-a, 1}, QPoly{-b, 1}), k);
        return qpoly_add(lin, bump);
    };
    GraphFunction F;
    if (G.ell > 0) {
        std::vector<Rational> bp = {Rational(0), G.ell};
        for (auto& e : G.edges)
            if (e.parent < 0) bp.push_back(mod_q(e.root, G.ell));
        for (int i = 0; i < pieces; ++i) bp.push_back(G.ell * make_q(rnd(1, 15), 16));
        std::sort(bp.begin(), bp.end());
        bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
        std::vector<Rational> val;
        for (size_t i = 0; i + 1 < bp.size(); ++i) val.push_back(rq());
        val.push_back(val[0]);
        F.sigma.bp = bp;
        for (size_t i = 0; i + 1 < bp.size(); ++i) F.sigma.poly.push_back(piece(bp[i], val[i], bp[i + 1], val[i + 1], rq()));
    } else {
        F.sigma = PiecewisePoly::constant(Rational(0), rq());
    }
    F.edge.resize(G.edges.size());
    // parents precede children only after a split, so resolve start values lazily
    std::vector<int> done(G.edges.size(), 0);
    std::vector<Rational> end_val(G.edges.size());
    std::function<void(size_t)> build = [&](size_t e) {
        if (done[e]) return;
        const auto& E = G.edges[e];
        Rational start;
        if (E.parent < 0) start = F.sigma(G.ell > 0 ? mod_q(E.root, G.ell) : Rational(0));
        else {
            build((size_t)E.parent);
            start = end_val[(size_t)E.parent];
        }
        Rational mid = E.len * make_q(rnd(1, 3), 4);
        Rational vm = rq(), ve = rq();
        PiecewisePoly p;
        p.bp = {Rational(0), mid, E.len};
        p.poly = {piece(Rational(0), start, mid, vm, rq()), piece(mid, vm, E.len, ve, rq())};
        F.edge[e] = p;
        end_val[e] = ve;
        done[e] = 1;
    };
    for (size_t e = 0; e < G.edges.size(); ++e) build(e);
    return F;
}

}  // namespace ecff
