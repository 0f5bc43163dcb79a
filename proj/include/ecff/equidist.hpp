#pragma once

// Local discrepancy of finite point sets and exact checks of the local and
// global equidistribution inequalities.

#include "berkgraph.hpp"
#include "heights.hpp"

#include <map>

namespace ecff {

struct IdentityCheck {
    Rational lhs = 0, rhs = 0;
    bool holds() const { return lhs == rhs; }
};

// lhs_sq <= rhs_sq, both sides squared so no square roots are taken.
struct InequalityReport {
    Rational lhs_sq = 0, rhs_sq = 0;
    std::vector<std::pair<std::string, Rational>> terms;
    bool holds() const { return lhs_sq <= rhs_sq; }
    Rational slack() const { return rhs_sq - lhs_sq; }
};

inline void require_distinct(const std::vector<Point>& Z)
{
    if (Z.empty()) throw std::invalid_argument("empty point set");
    for (size_t a = 0; a < Z.size(); ++a)
        for (size_t b = 0; b < a; ++b)
            if (Z[a] == Z[b]) throw std::invalid_argument("duplicate point in Z");
}

struct Discrepancy {
    LogQ D = 0;
    LogQ i_part = 0, j_part = 0;  // filled when `split` is set
    bool split = false;
};

// D(Z) = (1/N^2) sum_{m != n} lambda(P_m - P_n) + ell/(12N), with the split
// (1/N^2) sum_{m != n} i + (1/N^2) sum_{m, n} j.
inline Discrepancy discrepancy(const Curve& E, const std::vector<Point>& Z, const Place& v, bool split = true)
{
    require_distinct(Z);
    auto red = classify_reduction(E, v, false);
    Rational N((long)Z.size());
    Discrepancy d;
    for (size_t a = 0; a < Z.size(); ++a)
        for (size_t b = 0; b < Z.size(); ++b)
            if (a != b) d.D += lambda_v_pair(E, Z[a], Z[b], v);
    d.D = d.D / (N * N) + red.ell() / (12 * N);
    d.split = split && red.type != RedType::AdditivePotMult;
    if (d.split) {
        std::vector<LogQ> r;
        for (auto& P : Z) r.push_back(retraction(E, P, v));
        LogQ ell = red.ell();
        for (size_t a = 0; a < Z.size(); ++a)
            for (size_t b = 0; b < Z.size(); ++b) {
                if (a != b) d.i_part += i_v(E, Z[a], Z[b], v).value();
                d.j_part += j_value(r[a], r[b], ell);
            }
        d.i_part /= N * N;
        d.j_part /= N * N;
    }
    return d;
}

// The same for symbolic torsion classes at a multiplicative place, by the
// pairwise sum.
inline Discrepancy discrepancy_torsion(const std::vector<TorsionClass>& Z, const LogQ& ell)
{
    Rational N((long)Z.size());
    Discrepancy d;
    d.split = true;
    for (size_t a = 0; a < Z.size(); ++a)
        for (size_t b = 0; b < Z.size(); ++b) {
            if (a != b) d.D += lambda_between_torsion(Z[a], Z[b], ell);
            d.j_part += j_value(ell * Z[a].b_over_n, ell * Z[b].b_over_n, ell);
        }
    // distinct classes on one component differ by a root of unity: i = 0
    d.D = d.D / (N * N) + ell / (12 * N);
    d.j_part /= N * N;
    return d;
}

// ---------------------------------------------------------------------------
// Lemma-level identities on Sigma

struct G1G2Report {
    IdentityCheck g1, g2;
    bool holds() const { return g1.holds() && g2.holds(); }
};

// (1/N) sum F(p_n) - (1/ell) int F = int F' G, and
// int G^2 = ell/(2N^2) sum_{i,j} Phi_ell(p_i - p_j).
inline G1G2Report verify_lemma_g1_g2(const PiecewisePoly& F, const std::vector<Rational>& p, const Rational& ell)
{
    if (ell <= 0) throw std::invalid_argument("the skeleton must have positive length");
    Rational N((long)p.size());
    PiecewisePoly G = g_sigma(p, ell);
    G1G2Report r;
    for (auto& x : p) r.g1.lhs += F(mod_q(x, ell));
    r.g1.lhs = r.g1.lhs / N - F.integral() / ell;
    r.g1.rhs = (F.derivative() * G).integral();
    r.g2.lhs = (G * G).integral();
    for (auto& a : p)
        for (auto& b : p) r.g2.rhs += bernoulli_phi((a - b) / ell);
    r.g2.rhs *= ell / (2 * N * N);
    return r;
}

// ---------------------------------------------------------------------------
// The local inequality on a graph

struct LocalInequality {
    InequalityReport main;      // LHS^2 <= ||F'||^2 (D + ell0/N)
    IdentityCheck fg;           // (1/N) sum F(P_n) - int F dmu = int F' G
    InequalityReport g_bound;   // ||G||^2 <= D + ell0/N (not squared)
    bool holds() const { return main.holds() && fg.holds() && g_bound.holds(); }
};

// Z is given by its retractions to Gamma; D is its discrepancy at the place.
inline LocalInequality verify_local_inequality(const MetrizedGraph& G, const GraphFunction& F,
                                               const std::vector<GraphPoint>& r, const LogQ& D)
{
    if (r.empty()) throw std::invalid_argument("empty point set");
    Rational N((long)r.size());
    LocalInequality rep;
    Rational avg = 0;
    for (auto& x : r) avg += F(x);
    Rational lhs = avg / N - mu_integral(G, F);
    GraphFunction g = g_function(G, r);
    GraphFunction dF = F.derivative();
    rep.fg.lhs = lhs;
    rep.fg.rhs = l2_inner(dF, g);
    Rational dn = l2_inner(dF, dF);
    Rational budget = D + G.ell0() / N;
    rep.main.lhs_sq = lhs * lhs;
    rep.main.rhs_sq = dn * budget;
    rep.main.terms = {{"dirichlet", dn}, {"D", D}, {"ell0", G.ell0()}, {"N", N}};
    rep.g_bound.lhs_sq = l2_inner(g, g);
    rep.g_bound.rhs_sq = budget;
    return rep;
}

// Gamma for a point set on a curve: anchors at the given points and depths,
// plus the retractions of Z.
struct LocalGraph {
    MetrizedGraph G;
    std::vector<GraphPoint> r;
};

inline LocalGraph build_local_graph(const Curve& E, const Place& v, const std::vector<Point>& anchors,
                                    const std::vector<Rational>& depth, const std::vector<Point>& Z)
{
    auto red = classify_reduction(E, v, false);
    LogQ ell = red.ell();
    std::vector<Anchor> A;
    for (size_t a = 0; a < anchors.size(); ++a) A.push_back({retraction(E, anchors[a], v), depth[a]});
    std::vector<std::vector<ExtQ>> I(anchors.size(), std::vector<ExtQ>(anchors.size(), ExtQ::inf()));
    for (size_t a = 0; a < anchors.size(); ++a)
        for (size_t b = 0; b < a; ++b) I[a][b] = I[b][a] = i_v(E, anchors[a], anchors[b], v);
    LocalGraph L;
    L.G = span_tree(ell, A, I);
    for (auto& P : Z) {
        std::vector<ExtQ> ip;
        for (auto& R : anchors) ip.push_back(i_v(E, P, R, v));
        L.r.push_back(retract(L.G, retraction(E, P, v), ip));
    }
    return L;
}

// ---------------------------------------------------------------------------
// Global

inline LogQ height_of_set(const Curve& E, const std::vector<Point>& Z)
{
    LogQ h = 0;
    for (auto& P : Z) h += canonical_height(E, P);
    return h / Rational((long)Z.size());
}

struct PlaceBound {
    Place v;
    LogQ D;
    LogQ bound;  // 4 h(Z) + h(j)/(12N)
    bool holds() const { return D <= bound; }
};

struct GlobalReport {
    IdentityCheck identity;  // sum_v D_v = (1/N^2) sum_{m != n} h(P_m - P_n) + h(j)/(12N)
    std::vector<PlaceBound> places;
    LogQ hZ = 0, hj = 0;
    bool holds() const
    {
        if (!identity.holds()) return false;
        for (auto& p : places)
            if (!p.holds()) return false;
        return true;
    }
};

// Places where some D_v(Z) can be nonzero.
inline std::vector<Place> discrepancy_support(const Curve& E, const std::vector<Point>& Z)
{
    auto S = E.bad_support();
    for (size_t a = 0; a < Z.size(); ++a)
        for (size_t b = 0; b < Z.size(); ++b)
            if (a != b) merge_places(S, height_support(E, E.sub(Z[a], Z[b])));
    return S;
}

inline GlobalReport verify_global_inequality(const Curve& E, const std::vector<Point>& Z)
{
    require_distinct(Z);
    Rational N((long)Z.size());
    GlobalReport rep;
    rep.hZ = height_of_set(E, Z);
    rep.hj = weil_height(E.j);
    for (size_t a = 0; a < Z.size(); ++a)
        for (size_t b = 0; b < Z.size(); ++b)
            if (a != b) rep.identity.rhs += canonical_height(E, E.sub(Z[a], Z[b]));
    rep.identity.rhs = rep.identity.rhs / (N * N) + rep.hj / (12 * N);
    LogQ bound = 4 * rep.hZ + rep.hj / (12 * N);
    for (auto& v : discrepancy_support(E, Z)) {
        LogQ D = discrepancy(E, Z, v, false).D;
        rep.identity.lhs += D;
        rep.places.push_back({v, D, bound});
    }
    return rep;
}

// The full global inequality at one place for a test function on Gamma:
// LHS^2 <= ||F'||^2 (4 h(Z) + h(j)/(12N) + ell0/N).
inline InequalityReport verify_global_equidistribution(const MetrizedGraph& G, const GraphFunction& F,
                                         const std::vector<GraphPoint>& r, const LogQ& hZ, const LogQ& hj)
{
    Rational N((long)r.size());
    Rational avg = 0;
    for (auto& x : r) avg += F(x);
    Rational lhs = avg / N - mu_integral(G, F);
    GraphFunction dF = F.derivative();
    Rational dn = l2_inner(dF, dF);
    InequalityReport rep;
    rep.lhs_sq = lhs * lhs;
    rep.rhs_sq = dn * (4 * hZ + hj / (12 * N) + G.ell0() / N);
    rep.terms = {{"dirichlet", dn}, {"hZ", hZ}, {"hj", hj}, {"ell0", G.ell0()}, {"N", N}};
    return rep;
}

// Symbolic E[n] at a multiplicative place: D_v = ell/(12 n^2) against the
// global bound h(j)/(12 n^2).
struct TorsionDiscrepancy {
    long n = 0;
    LogQ D = 0, closed_form = 0, bound = 0;
    bool holds() const { return D == closed_form && D <= bound; }
    LogQ slack() const { return bound - D; }
};

inline TorsionDiscrepancy torsion_discrepancy(long n, const LogQ& ell, const LogQ& hj, const Fq* base)
{
    TorsionDiscrepancy t;
    t.n = n;
    t.D = discrepancy_torsion(torsion_classes(n, base), ell).D;
    t.closed_form = ell / (12 * Rational(n * n));
    t.bound = hj / (12 * Rational(n * n));
    return t;
}

}  // namespace ecff
