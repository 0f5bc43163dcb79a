#pragma once

// Verification suites shared by the command-line tool and the acceptance
// driver. Every check is an exact identity or inequality between rationals.

#include "io.hpp"

#include <chrono>
#include <set>

namespace ecff {

struct Check {
    std::string id;
    bool ok = true;
    json detail = json::object();
};

struct SuiteReport {
    std::string suite;
    uint64_t seed = 0;
    std::vector<Check> checks;
    std::vector<std::string> notes;

    void add(std::string id, bool ok, json detail = json::object())
    {
        checks.push_back({std::move(id), ok, std::move(detail)});
    }
    size_t failures() const
    {
        size_t n = 0;
        for (auto& c : checks) n += !c.ok;
        return n;
    }
    bool passed() const { return !checks.empty() && failures() == 0; }

    json to_json() const
    {
        json cs = json::array();
        for (auto& c : checks) cs.push_back({{"id", c.id}, {"ok", c.ok}, {"detail", c.detail}});
        return {{"suite", suite},
                {"seed", seed},
                {"passed", passed()},
                {"checks", checks.size()},
                {"failures", failures()},
                {"notes", notes},
                {"results", cs}};
    }
};

struct SuiteOptions {
    uint64_t seed = 1;
    long cases = 0;         // 0: the suite's default
    long order_bound = 30;  // torsion enumeration
    int max_degree = 6;     // constant extensions searched
    long precision = 0;     // Tate round trips; 0: default
};

namespace detail {

inline long pick(std::mt19937_64& rng, long n) { return (long)(rng() % (uint64_t)n); }

inline long cases_or(const SuiteOptions& o, long d) { return o.cases > 0 ? o.cases : d; }

// Small combinations sum a_i g_i (|a_i| <= box), distinct and nonzero, in a
// seeded order.
inline std::vector<Point> point_pool(const Curve& E, const std::vector<Point>& gens, size_t want,
                                     std::mt19937_64& rng)
{
    if (gens.empty()) throw InputError("the curve spec lists no points");
    std::vector<Point> out;
    for (int box = 1; box <= 8 && out.size() < 2 * want; ++box) {
        out.clear();
        std::vector<int> a(gens.size(), -box);
        for (;;) {
            Point P;
            for (size_t i = 0; i < gens.size(); ++i) P = E.add(P, E.mul(a[i], gens[i]));
            if (!P.inf && std::find(out.begin(), out.end(), P) == out.end()) out.push_back(P);
            size_t i = 0;
            while (i < a.size() && a[i] == box) a[i++] = -box;
            if (i == a.size()) break;
            ++a[i];
        }
    }
    // prefer points of small height, then shuffle within that prefix
    std::stable_sort(out.begin(), out.end(), [](const Point& P, const Point& Q) {
        return weil_height(P) < weil_height(Q);
    });
    if (out.size() > 2 * want) out.resize(2 * want);
    std::shuffle(out.begin(), out.end(), rng);
    if (out.size() > want) out.resize(want);
    return out;
}

inline RatFunc random_ratfunc(const Fq* F, std::mt19937_64& rng, int maxdeg)
{
    auto poly = [&](bool monic) {
        int d = (int)pick(rng, maxdeg + 1);
        std::vector<uint32_t> c;
        for (int i = 0; i <= d; ++i) c.push_back((uint32_t)pick(rng, F->q));
        if (monic) c.back() = 1;
        if (!monic && c.back() == 0) c.back() = 1;
        return Poly(F, c);
    };
    Poly n = poly(false), d = poly(true);
    return RatFunc(n, d);
}

inline json place_list(const std::vector<Place>& S)
{
    json j = json::array();
    for (auto& v : S) j.push_back(v.to_string());
    return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// lambda = i + j at every support place, for all ordered pairs of a sample.

inline SuiteReport suite_prop22(const CurveSpec& C, const SuiteOptions& o)
{
    SuiteReport rep;
    rep.suite = "prop22";
    rep.seed = o.seed;
    std::mt19937_64 rng(o.seed);
    const Curve& E = C.E;
    auto Z = detail::point_pool(E, C.points, (size_t)detail::cases_or(o, 12), rng);
    Place good = good_small_place(E);
    long skipped = 0;
    for (size_t a = 0; a < Z.size(); ++a)
        for (size_t b = 0; b < Z.size(); ++b) {
            if (a == b) continue;
            Point R = E.sub(Z[a], Z[b]);
            auto places = height_support(E, R);
            merge_places(places, {good});
            for (auto& v : places) {
                try {
                    LogQ lam = lambda_v(E, R, v);
                    ExtQ i = i_v(E, Z[a], Z[b], v);
                    LogQ j = j_v(E, Z[a], Z[b], v);
                    bool ok = !i.is_inf() && lam == i.value() + j;
                    rep.add("pair " + std::to_string(a) + "," + std::to_string(b) + " at " + v.to_string(), ok,
                            {{"lambda", to_json(lam)}, {"i", to_json(i)}, {"j", to_json(j)}});
                } catch (const UnsupportedError&) {
                    ++skipped;
                }
            }
        }
    if (skipped) rep.notes.push_back(std::to_string(skipped) + " (pair, place) instances out of scope (additive, potentially multiplicative)");
    return rep;
}

// ---------------------------------------------------------------------------
// h(nP) = n^2 h(P), the parallelogram law, and the place-by-place sum.

inline SuiteReport suite_heights(const CurveSpec& C, const SuiteOptions& o)
{
    SuiteReport rep;
    rep.suite = "heights";
    rep.seed = o.seed;
    std::mt19937_64 rng(o.seed);
    const Curve& E = C.E;
    for (size_t g = 0; g < C.points.size(); ++g) {
        const Point& P = C.points[g];
        LogQ h = canonical_height(E, P);
        rep.add("by places, generator " + std::to_string(g), h == canonical_height_by_places(E, P), {{"h", to_json(h)}});
        for (long n = 2; n <= 6; ++n) {
            LogQ hn = canonical_height(E, E.mul(n, P));
            rep.add("h(" + std::to_string(n) + "P), generator " + std::to_string(g), hn == Rational(n * n) * h,
                    {{"h(nP)", to_json(hn)}, {"n^2 h(P)", to_json(Rational(n * n) * h)}});
        }
    }
    auto pool = detail::point_pool(E, C.points, 24, rng);
    long n = detail::cases_or(o, 100);
    for (long k = 0; k < n; ++k) {
        const Point& P = pool[(size_t)detail::pick(rng, (long)pool.size())];
        const Point& Q = pool[(size_t)detail::pick(rng, (long)pool.size())];
        LogQ lhs = canonical_height(E, E.add(P, Q)) + canonical_height(E, E.sub(P, Q));
        LogQ rhs = 2 * canonical_height(E, P) + 2 * canonical_height(E, Q);
        rep.add("parallelogram " + std::to_string(k), lhs == rhs, {{"lhs", to_json(lhs)}, {"rhs", to_json(rhs)}});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// (G1), (G2) on the skeleton circle.

inline SuiteReport suite_lemma32(const SuiteOptions& o)
{
    SuiteReport rep;
    rep.suite = "lemma32";
    rep.seed = o.seed;
    std::mt19937_64 rng(o.seed);
    long n = detail::cases_or(o, 100);
    for (long k = 0; k < n; ++k) {
        Rational ell = make_q(detail::pick(rng, 12) + 1, detail::pick(rng, 3) + 1);
        MetrizedGraph G;
        G.ell = ell;
        auto F = random_test_function(G, rng);
        std::vector<Rational> p;
        long N = detail::pick(rng, 6) + 1;
        for (long i = 0; i < N; ++i) p.push_back(ell * make_q(detail::pick(rng, 17), 16));
        auto r = verify_lemma_g1_g2(F.sigma, p, ell);
        rep.add("case " + std::to_string(k), r.holds(),
                {{"ell", to_json(ell)},
                 {"N", N},
                 {"g1", {to_json(r.g1.lhs), to_json(r.g1.rhs)}},
                 {"g2", {to_json(r.g2.lhs), to_json(r.g2.rhs)}}});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The local inequality on random graphs and test functions.

inline SuiteReport suite_thm33(const CurveSpec& C, const SuiteOptions& o)
{
    SuiteReport rep;
    rep.suite = "thm33";
    rep.seed = o.seed;
    std::mt19937_64 rng(o.seed);
    const Curve& E = C.E;
    auto pool = detail::point_pool(E, C.points, 16, rng);
    std::vector<Place> places;
    for (auto& v : E.bad_support())
        if (classify_reduction(E, v).type != RedType::AdditivePotMult) places.push_back(v);
    places.push_back(good_small_place(E));
    long n = detail::cases_or(o, 100);
    for (long k = 0; k < n; ++k) {
        const Place& v = places[(size_t)detail::pick(rng, (long)places.size())];
        std::shuffle(pool.begin(), pool.end(), rng);
        long N = detail::pick(rng, 5) + 2;
        long na = detail::pick(rng, 3);
        std::vector<Point> Z(pool.begin(), pool.begin() + N);
        std::vector<Point> A(pool.begin() + N, pool.begin() + N + na);
        std::vector<Rational> depth;
        for (long i = 0; i < na; ++i) depth.push_back(make_q(detail::pick(rng, 6) + 1, detail::pick(rng, 2) + 1));
        if (na && detail::pick(rng, 2)) A[0] = Z[0];
        auto LG = build_local_graph(E, v, A, depth, Z);
        auto D = discrepancy(E, Z, v);
        auto F = random_test_function(LG.G, rng);
        auto r = verify_local_inequality(LG.G, F, LG.r, D.D);
        bool split = D.D == D.i_part + D.j_part;
        rep.add("case " + std::to_string(k) + " at " + v.to_string(), r.holds() && split,
                {{"N", N},
                 {"lhs_sq", to_json(r.main.lhs_sq)},
                 {"rhs_sq", to_json(r.main.rhs_sq)},
                 {"fg_identity", r.fg.holds()},
                 {"g_bound", r.g_bound.holds()},
                 {"D", to_json(D.D)},
                 {"D_i", to_json(D.i_part)},
                 {"D_j", to_json(D.j_part)}});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Global identity and per-place bound.

inline SuiteReport suite_thm45(const CurveSpec& C, const SuiteOptions& o)
{
    SuiteReport rep;
    rep.suite = "thm45";
    rep.seed = o.seed;
    std::mt19937_64 rng(o.seed);
    const Curve& E = C.E;
    auto pool = detail::point_pool(E, C.points, 8, rng);
    for (long N : {2L, 4L, 8L}) {
        if ((size_t)N > pool.size()) {
            rep.notes.push_back("pool too small for |Z| = " + std::to_string(N));
            continue;
        }
        std::vector<Point> Z(pool.begin(), pool.begin() + N);
        auto g = verify_global_inequality(E, Z);
        rep.add("identity |Z|=" + std::to_string(N), g.identity.holds(),
                {{"sum_D", to_json(g.identity.lhs)}, {"rhs", to_json(g.identity.rhs)}});
        for (auto& p : g.places)
            rep.add("bound |Z|=" + std::to_string(N) + " at " + p.v.to_string(), p.holds(),
                    {{"D", to_json(p.D)}, {"bound", to_json(p.bound)}});
    }
    return rep;
}

// D_v(E[n]) = ell/(12 n^2) at every place with ell > 0.
inline SuiteReport suite_torsion_discrepancy(const CurveSpec& C, const SuiteOptions& o)
{
    SuiteReport rep;
    rep.suite = "torsion";
    rep.seed = o.seed;
    const Curve& E = C.E;
    LogQ hj = weil_height(E.j);
    for (auto& v : E.bad_support()) {
        auto R = classify_reduction(E, v);
        if (!R.multiplicative()) continue;
        LogQ ell = R.ell();
        for (long n : {2L, 3L, 4L, 6L}) {
            if (n % (long)E.F->p == 0) continue;
            auto T = torsion_discrepancy(n, ell, hj, E.F);
            bool slack = T.slack() == (hj - ell) / (12 * Rational(n * n));
            rep.add("E[" + std::to_string(n) + "] at " + v.to_string(), T.holds() && slack,
                    {{"D", to_json(T.D)}, {"closed_form", to_json(T.closed_form)}, {"bound", to_json(T.bound)},
                     {"slack", to_json(T.slack())}});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// ||G'||^2 <= ell/12 + m for the truncated Neron function.

namespace detail {

// Anchors with ultrametric pairwise values from random digit strings.
struct RandomAnchors {
    std::vector<Rational> r;
    std::vector<std::vector<ExtQ>> I;
};

inline RandomAnchors random_anchors(std::mt19937_64& rng, const Rational& ell, long n)
{
    RandomAnchors A;
    std::vector<std::vector<int>> digits;
    Rational step = make_q(1, pick(rng, 3) + 1);
    long comps = pick(rng, 3) + 1;
    std::vector<Rational> comp_r;
    for (long c = 0; c < comps; ++c)
        comp_r.push_back(ell > 0 ? ell * make_q(pick(rng, 8), 8) : Rational(0));
    std::vector<long> comp;
    for (long a = 0; a < n; ++a) {
        comp.push_back(pick(rng, comps));
        A.r.push_back(comp_r[(size_t)comp.back()]);
        std::vector<int> d;
        for (int k = 0; k < 6; ++k) d.push_back((int)pick(rng, 2));
        digits.push_back(d);
    }
    A.I.assign((size_t)n, std::vector<ExtQ>((size_t)n, ExtQ::inf()));
    for (long a = 0; a < n; ++a)
        for (long b = 0; b < a; ++b) {
            Rational v = 0;
            if (A.r[(size_t)a] == A.r[(size_t)b]) {
                int k = 0;
                while (k < 6 && digits[(size_t)a][(size_t)k] == digits[(size_t)b][(size_t)k]) ++k;
                v = step * (k + 1);
            }
            A.I[(size_t)a][(size_t)b] = A.I[(size_t)b][(size_t)a] = ExtQ::of(v);
        }
    return A;
}

struct GPrimeCase {
    Rational ell, m;
    DirichletNorm norm;
    bool sigma_ok = false, tree_ok = false, total_ok = false;
};

inline GPrimeCase gprime_case(const Rational& ell, const Rational& m, const RandomAnchors& A)
{
    GPrimeCase c;
    c.ell = ell;
    c.m = m;
    std::vector<Anchor> anchors;
    for (auto& r : A.r) anchors.push_back({r, m});
    MetrizedGraph G = span_tree(ell, anchors, A.I);
    GraphFunction g = neron_test_function(G, A.r);
    c.norm = dirichlet_norm(g);
    c.sigma_ok = c.norm.sigma <= ell / 12;
    c.tree_ok = c.norm.tree <= m;
    c.total_ok = c.norm.total <= ell / 12 + m;
    return c;
}

}  // namespace detail

inline SuiteReport suite_lemma52(const CurveSpec* C, const SuiteOptions& o)
{
    SuiteReport rep;
    rep.suite = "lemma52";
    rep.seed = o.seed;
    std::mt19937_64 rng(o.seed);
    std::vector<Rational> ells;
    if (C)
        for (auto& v : C->E.bad_support()) ells.push_back(classify_reduction(C->E, v).ell());
    if (ells.empty()) ells = {Rational(0), Rational(1), Rational(3)};
    long n = detail::cases_or(o, 20);
    for (long k = 0; k < n; ++k) {
        Rational ell = ells[(size_t)detail::pick(rng, (long)ells.size())];
        Rational m = make_q(detail::pick(rng, 12), detail::pick(rng, 3) + 1);
        auto A = detail::random_anchors(rng, ell, detail::pick(rng, 4) + 1);
        auto c = detail::gprime_case(ell, m, A);
        rep.add("case " + std::to_string(k), c.sigma_ok && c.tree_ok && c.total_ok,
                {{"ell", to_json(ell)},
                 {"m", to_json(m)},
                 {"anchors", A.r.size()},
                 {"norm_sigma", to_json(c.norm.sigma)},
                 {"norm_tree", to_json(c.norm.tree)},
                 {"norm_total", to_json(c.norm.total)},
                 {"bound", to_json(ell / 12 + m)}});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Nearest torsion: closed form against the brute-force oracle.

inline SuiteReport suite_nearest(const CurveSpec& C, const SuiteOptions& o)
{
    SuiteReport rep;
    rep.suite = "nearest";
    rep.seed = o.seed;
    const Curve& E = C.E;
    std::vector<Point> Qs;
    if (C.Q) Qs.push_back(*C.Q);
    for (auto& P : C.points)
        if (std::find(Qs.begin(), Qs.end(), P) == Qs.end() && !is_torsion(E, P).torsion) Qs.push_back(P);
    if (Qs.empty()) throw InputError("nearest: the curve spec has no nontorsion point");
    // bad places plus the good places of degree 1
    std::vector<Place> places = E.bad_support();
    for (uint32_t c = 0; c < E.F->q; ++c) merge_places(places, {Place::finite(Poly(E.F, {E.F->neg(c), 1}))});
    long p = (long)E.F->p;
    for (auto& v : places) {
        auto R = classify_reduction(E, v);
        std::vector<std::pair<std::string, Point>> pts;
        for (size_t i = 0; i < Qs.size(); ++i) pts.push_back({"Q" + std::to_string(i), Qs[i]});
        try {
            // deeper points: n0 Q lies in the kernel (or identity component), p n0 Q deeper still
            auto nt = nearest_torsion(E, Qs[0], v);
            if (!nt.torsion && nt.n0 <= 12) {
                Point R1 = E.mul(nt.n0, Qs[0]);
                pts.push_back({std::to_string(nt.n0) + "Q0", R1});
                if (nt.n0 * p <= 25) pts.push_back({std::to_string(nt.n0 * p) + "Q0", E.mul(p, R1)});
            }
        } catch (const std::exception&) {
        }
        for (auto& [name, Q] : pts) {
            try {
                auto nt = nearest_torsion(E, Q, v);
                if (R.type == RedType::AdditivePotGood) {
                    rep.add(name + " at " + v.to_string() + " (closed form only)", nt.m >= 0,
                            {{"m", to_json(nt.m)}, {"n0", nt.n0}, {"method", nt.method}});
                    continue;
                }
                auto bf = nearest_torsion_brute(E, Q, v, 4 * nt.n0);
                bool ok = bf.m == nt.m;
                json d = {{"m", to_json(nt.m)},     {"brute", to_json(bf.m)},      {"n0", nt.n0},
                          {"e", nt.e},               {"method", nt.method},        {"candidates", bf.candidates},
                          {"order_bound", bf.order_bound}, {"supersingular", nt.supersingular},
                          {"deg", v.deg}};
                rep.add(name + " at " + v.to_string(), ok, d);
            } catch (const UnsupportedError& e) {
                rep.notes.push_back(name + " at " + v.to_string() + ": " + e.what());
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The S-integral torsion bound on a configuration.

inline SuiteReport suite_thm53(const CurveSpec& C, const SuiteOptions& o)
{
    SuiteReport rep;
    rep.suite = "thm53";
    rep.seed = o.seed;
    SIntConfig cfg = sint_config(C);
    auto b = bir_bound(cfg);
    json mv = json::array();
    for (auto& m : b.m)
        mv.push_back({{"place", m.v.to_string()}, {"m", to_json(m.m)}, {"n0", m.n0}, {"method", m.method},
                      {"supersingular", m.supersingular}});
    auto Z = enumerate_sintegral_torsion(cfg, o.order_bound, o.max_degree);
    Rational count((long)Z.points.size());
    rep.add("count <= bound", count <= b.value,
            {{"count", Z.points.size()}, {"torsion_found", Z.all.points.size()}, {"bound", to_json(b.value)},
             {"h_Q", to_json(b.hQ)}, {"h_j", to_json(b.hj)}, {"sum_m", to_json(b.sum_m)}, {"m_v", mv},
             {"S", detail::place_list(cfg.S)}, {"certificate", Z.all.certificate}});
    for (auto& [i, w] : Z.rejected)
        rep.notes.push_back("torsion point " + std::to_string(i) + " meets Q at " + w.to_string());
    // order_bound = 1 leaves at most O, and raising the bound never loses points
    auto Z1 = enumerate_sintegral_torsion(cfg, 1, o.max_degree);
    bool only_O = Z1.points.size() <= 1 && (Z1.points.empty() || Z1.points[0].P.inf);
    rep.add("order bound 1", only_O && Z1.points.size() <= Z.points.size(), {{"count", Z1.points.size()}});
    if (!Z.points.empty()) {
        auto cl = verify_truncation_claims(cfg, Z.points);
        for (auto& pc : cl.places) {
            json d = {{"Lambda", to_json(pc.Lambda)}, {"in_S", pc.in_S}};
            if (pc.in_S) {
                d["m"] = to_json(pc.m.m);
                d["ell"] = to_json(pc.ell);
                d["galois"] = pc.galois.holds();
                d["agree_on_torsion"] = pc.agree_on_torsion;
                d["mu_zero"] = pc.mu_zero.holds();
                d["gprime_bound"] = pc.gprime_bound;
                d["norm_sigma"] = to_json(pc.norm.sigma);
                d["norm_tree"] = to_json(pc.norm.tree);
                d["equidistribution"] = pc.equidistribution.holds();
                d["claim2_lhs_sq"] = to_json(pc.claim2.lhs_sq);
                d["claim2_rhs_sq"] = to_json(pc.claim2.rhs_sq);
                d["claim2_slack"] = to_json(pc.claim2.slack());
            }
            rep.add(std::string(pc.in_S ? "claim 2" : "claim 1") + " at " + pc.v.to_string(), pc.holds(), d);
        }
        rep.add("sum of Lambda_v = h(Q)", cl.height.holds(),
                {{"sum", to_json(cl.height.lhs)}, {"h_Q", to_json(cl.height.rhs)}});
        rep.add("assembled bound", cl.assembled.holds(),
                {{"lhs_sq", to_json(cl.assembled.lhs_sq)}, {"rhs_sq", to_json(cl.assembled.rhs_sq)}});
    } else {
        rep.notes.push_back("no S-integral torsion found; the claims are vacuous");
    }
    auto Z0 = enumerate_sintegral_torsion(SIntConfig{cfg.E, {}, cfg.Q}, o.order_bound, o.max_degree);
    rep.add("S empty: no S-integral torsion", Z0.points.empty(), {{"count", Z0.points.size()}});
    return rep;
}

// ---------------------------------------------------------------------------
// Infrastructure: product formula, associativity, Tate round trips.

inline SuiteReport suite_infra(const CurveSpec& C, const SuiteOptions& o)
{
    SuiteReport rep;
    rep.suite = "infra";
    rep.seed = o.seed;
    std::mt19937_64 rng(o.seed);
    const Curve& E = C.E;
    const Fq* F = E.F;
    long n = detail::cases_or(o, 1000);
    long bad = 0;
    for (long k = 0; k < n; ++k) {
        RatFunc f = detail::random_ratfunc(F, rng, 6);
        if (f.is_zero()) continue;
        long s = 0;
        for (auto& v : support(f)) s += vdeg(f, v);
        bool ok = s == 0 && weil_height(f) == weil_height_local(f);
        if (!ok) {
            ++bad;
            rep.add("product formula " + std::to_string(k), false, {{"f", f.to_string()}, {"sum", s}});
        }
    }
    rep.add("product formula on " + std::to_string(n) + " elements", bad == 0, {{"failures", bad}});
    auto pool = detail::point_pool(E, C.points, 12, rng);
    pool.push_back(Point());
    long fails = 0;
    for (int k = 0; k < 200; ++k) {
        const Point& P = pool[(size_t)detail::pick(rng, (long)pool.size())];
        const Point& Q = pool[(size_t)detail::pick(rng, (long)pool.size())];
        const Point& R = pool[(size_t)detail::pick(rng, (long)pool.size())];
        if (!(E.add(E.add(P, Q), R) == E.add(P, E.add(Q, R)))) ++fails;
    }
    rep.add("associativity on 200 triples", fails == 0, {{"failures", fails}});
    long prec = o.precision > 0 ? o.precision : 24;
    for (auto& v : E.bad_support()) {
        auto R = classify_reduction(E, v);
        if (!R.multiplicative()) continue;
        long W = prec + 2 * R.N;
        auto ctx = tate_context(E, R, W);
        Series jq = j_of_q(ctx->q, W);
        Series je = ctx->L->expand(E.j, W);
        Series d = jq - je;
        long reached = d.is_zero() ? d.prec : d.val;
        rep.add("j(q) round trip at " + v.to_string(), reached - jq.val >= prec,
                {{"relative_precision", reached - jq.val}, {"declared", prec}});
        for (size_t i = 0; i < std::min<size_t>(pool.size(), 4); ++i) {
            if (pool[i].inf) continue;
            auto T = u_from_point(E, pool[i], v, prec);
            auto xy = tate_xy(*ctx, T.u.truncated(std::min(T.u.prec, W)));
            auto [xq, yq] = tate_coords(E, *ctx, pool[i], W);
            Series dx = xy.X - xq, dy = xy.Y - yq;
            long ax = dx.is_zero() ? dx.prec : dx.val, ay = dy.is_zero() ? dy.prec : dy.val;
            long base = std::min(0L, xq.is_zero() ? 0L : xq.val);
            bool ok = T.u.rel_prec() >= prec && ax - base >= prec / 2 && ay - base >= prec / 2;
            rep.add("u round trip, point " + std::to_string(i) + " at " + v.to_string(), ok,
                    {{"u_rel_prec", T.u.rel_prec()}, {"x_agree_to", ax}, {"y_agree_to", ay}, {"declared", prec}});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names = {"prop22", "heights", "lemma32", "thm33",   "thm45",
                                                   "torsion", "lemma52", "nearest", "thm53", "infra"};
    return names;
}

// Suites other than lemma32 (and lemma52, optionally) need a curve.
inline SuiteReport run_suite(const std::string& name, const CurveSpec* C, const SuiteOptions& o)
{
    auto need = [&]() -> const CurveSpec& {
        if (!C) throw InputError("suite " + name + " needs --input");
        return *C;
    };
    if (name == "prop22") return suite_prop22(need(), o);
    if (name == "heights") return suite_heights(need(), o);
    if (name == "lemma32") return suite_lemma32(o);
    if (name == "thm33") return suite_thm33(need(), o);
    if (name == "thm45") return suite_thm45(need(), o);
    if (name == "torsion") return suite_torsion_discrepancy(need(), o);
    if (name == "lemma52") return suite_lemma52(C, o);
    if (name == "nearest") return suite_nearest(need(), o);
    if (name == "thm53") return suite_thm53(need(), o);
    if (name == "infra") return suite_infra(need(), o);
    throw InputError("unknown suite \"" + name + "\"");
}

}  // namespace ecff
