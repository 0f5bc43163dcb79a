#pragma once

// S-integrality of points with respect to a point Q, the distance m_v(Q)
// from Q to the nearest torsion point, enumeration of S-integral torsion over
// constant extensions, and the truncation claims behind the counting bound.

#include "equidist.hpp"

#include <numeric>

namespace ecff {

// ---------------------------------------------------------------------------
// Meeting on the model

// Whether P and Q reduce to the same point of the minimal model at v.
inline bool meets_at(const Curve& E, const Point& P, const Point& Q, const Place& v)
{
    if (P == Q) return true;
    ReductionData R;
    R.v = v;
    R.k = local_scaling(E, v).k;
    auto in_kernel = [&](const Point& X) {
        if (X.inf) return true;
        RatFunc Xm = minimal_coords(E, R, X).first;
        return !Xm.is_zero() && ord_at(Xm, v) < 0;
    };
    bool kp = in_kernel(P), kq = in_kernel(Q);
    if (kp || kq) return kp && kq;
    auto [XP, YP] = minimal_coords(E, R, P);
    auto [XQ, YQ] = minimal_coords(E, R, Q);
    ExtQ ox = ord_ext(XP - XQ, v), oy = ord_ext(YP - YQ, v);
    return (ox.is_inf() || ox.value() > 0) && (oy.is_inf() || oy.value() > 0);
}

struct SIntegrality {
    bool integral = true;
    std::optional<Place> place;  // a place outside S where the points meet
    size_t which = 0;            // index into the Q orbit
};

// P is S-integral with respect to the orbit Qs when it meets no point of Qs
// at any place outside S. All points and places live over the field of E.
inline SIntegrality is_s_integral(const Curve& E, const Point& P, const std::vector<Point>& Qs,
                                  const std::vector<Place>& S)
{
    SIntegrality res;
    for (size_t j = 0; j < Qs.size(); ++j) {
        const Point& Q = Qs[j];
        std::vector<Place> cand = E.bad_support();
        if (P == Q) cand.push_back(Place::infinity(E.F));
        for (const Point* X : {&P, &Q})
            if (!X->inf) merge_places(cand, places_of(X->x.den));
        if (!P.inf && !Q.inf) {
            RatFunc dx = P.x - Q.x, dy = P.y - Q.y;
            if (!dx.is_zero()) merge_places(cand, places_of(dx.num));
            if (!dy.is_zero()) merge_places(cand, places_of(dy.num));
        }
        std::sort(cand.begin(), cand.end());
        if (P == Q) {
            // meeting everywhere; report the first place outside S
            for (uint32_t c = 0; c <= E.F->q; ++c) {
                Place v = c == E.F->q ? Place::infinity(E.F) : Place::finite(Poly(E.F, {E.F->neg(c), 1}));
                if (std::find(S.begin(), S.end(), v) == S.end()) return {false, v, j};
            }
            return {false, std::nullopt, j};
        }
        for (auto& v : cand) {
            if (std::find(S.begin(), S.end(), v) != S.end()) continue;
            if (meets_at(E, P, Q, v)) return {false, v, j};
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Series machinery for torsion lifting

namespace detail {

template <class T>
struct Dual {
    T v, d;
    friend Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
    friend Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
    friend Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.v * b.d + a.d * b.v}; }
    Dual operator-() const { return {-v, -d}; }
};

template <class T>
Dual<T> konst(const Dual<T>& like, long long n)
{
    return {ecff::konst(like.v, n), ecff::konst(like.v, 0)};
}

// Polynomials in one variable with series coefficients.
struct XPoly {
    std::vector<Series> c;
    Series zero;

    Series at(size_t i) const { return i < c.size() ? c[i] : zero; }

    friend XPoly operator+(const XPoly& a, const XPoly& b) { return combine(a, b, false); }
    friend XPoly operator-(const XPoly& a, const XPoly& b) { return combine(a, b, true); }
    friend XPoly operator*(const XPoly& a, const XPoly& b)
    {
        XPoly r{{}, a.zero};
        if (a.c.empty() || b.c.empty()) return r;
        r.c.assign(a.c.size() + b.c.size() - 1, a.zero);
        for (size_t i = 0; i < a.c.size(); ++i) {
            if (a.c[i].is_zero()) continue;
            for (size_t j = 0; j < b.c.size(); ++j)
                if (!b.c[j].is_zero()) r.c[i + j] = r.c[i + j] + a.c[i] * b.c[j];
        }
        return r;
    }

private:
    static XPoly combine(const XPoly& a, const XPoly& b, bool neg)
    {
        XPoly r{{}, a.zero};
        size_t n = std::max(a.c.size(), b.c.size());
        for (size_t i = 0; i < n; ++i) r.c.push_back(neg ? a.at(i) - b.at(i) : a.at(i) + b.at(i));
        return r;
    }
};

inline XPoly konst(const XPoly& like, long long n) { return XPoly{{ecff::konst(like.zero, n)}, like.zero}; }

inline Series eval_horner(const std::vector<Series>& f, const Series& x, const Series& zero)
{
    Series r = zero;
    for (size_t i = f.size(); i-- > 0;) r = r * x + f[i];
    return r;
}

// The p-th root of a series: coefficients c -> c^(1/p), exponents divided by
// p (so the ramification index is multiplied by p).
inline Series pth_root(const Series& s)
{
    const Fq* F = s.F;
    Series r = s.mapped([&](uint32_t c) { return F->pow(c, (long long)(F->q / F->p)); });
    r.ram = s.ram * (int)F->p;
    return r;
}

// The same series with the smallest ramification index that holds it.
inline Series reduce_ram(Series s)
{
    long p = (long)s.F->p;
    while (s.ram % p == 0) {
        bool ok = s.is_zero() || s.val % p == 0;
        for (size_t i = 0; ok && i < s.c.size(); ++i)
            if (s.c[i] && (s.val + (long)i) % p) ok = false;
        if (!ok) break;
        std::vector<uint32_t> c;
        long v = s.is_zero() ? 0 : s.val;
        for (long e = v; e < s.prec; e += p) c.push_back(s.coeff(e));
        long pr = s.prec / p;
        s = Series(s.F, s.is_zero() ? pr : v / p, pr, std::move(c), s.ram / (int)p);
    }
    return s;
}

}  // namespace detail

// The minimal short model Y^2 = X^3 + A X + B at v, expanded in the
// uniformizer to absolute precision W.
struct LocalShortModel {
    ReductionData red;
    const LocalField* L = nullptr;
    long W = 0;
    Series A, B;
};

inline LocalShortModel local_short_model(const Curve& E, const Place& v, long W, int extra = 1)
{
    LocalShortModel M;
    M.red = classify_reduction(E, v);
    M.L = &local_field(v, extra);
    M.W = W;
    const Fq* F = E.F;
    RatFunc A = -(RatFunc::from_int(F, 27) * E.c4) / pi_power(v, 4 * M.red.k);
    RatFunc B = -(RatFunc::from_int(F, 54) * E.c6) / pi_power(v, 6 * M.red.k);
    auto ex = [&](const RatFunc& a) {
        if (a.is_zero()) return Series::zero(M.L->F, W);
        return M.L->expand_abs(a, W);
    };
    M.A = ex(A);
    M.B = ex(B);
    return M;
}

struct SeriesPoint {
    Series X, Y;
};

// A point of E(K) in minimal short coordinates at v.
inline SeriesPoint expand_point(const Curve& E, const LocalShortModel& M, const Point& P)
{
    auto [X, Y] = minimal_coords(E, M.red, P);
    auto ex = [&](const RatFunc& a) {
        if (a.is_zero()) return Series::zero(M.L->F, M.W);
        long o = ord_at(a, M.red.v);
        return M.L->expand(a, std::max(1L, M.W - std::min(o, 0L)));
    };
    return {ex(X), ex(Y)};
}

namespace detail {

inline Series series_const(const LocalShortModel& M, uint32_t c, long W) { return Series::constant(M.L->F, c, W); }

// Newton iteration x <- x - f(x)/f'(x) from the residue x0 (a simple root
// modulo pi).
template <class Eval>
Series newton_lift(const LocalShortModel& M, uint32_t x0, long W, Eval&& eval)
{
    Series x = series_const(M, x0, W);
    for (int it = 0; it < 64; ++it) {
        auto [f, df] = eval(x);
        if (f.is_zero()) return x;
        if (df.is_zero() || df.val != 0) throw std::logic_error("Newton lift at a multiple root");
        Series step = (f / df).truncated(W);
        x = (x - step).truncated(W);
        if (step.is_zero()) return x;
    }
    throw PrecisionError("Newton lift did not converge");
}

inline Series y_from_x(const LocalShortModel& M, const Series& X, uint32_t ybar)
{
    if (ybar == 0) {
        Series rhs = X * X * X + M.A * X + M.B;
        if (!rhs.is_zero()) throw std::logic_error("lifted 2-torsion point has Y != 0");
        return Series::zero(M.L->F, X.prec);
    }
    Series rhs = X * X * X + M.A * X + M.B;
    auto r = rhs.sqrt();
    if (!r) throw std::logic_error("no square root for the lifted Y");
    if (r->lead() != ybar) r = -*r;
    if (r->lead() != ybar) throw std::logic_error("lifted Y has the wrong residue");
    return *r;
}

// Chord through two points with distinct X residues.
inline SeriesPoint chord_add(const SeriesPoint& P, const SeriesPoint& Q)
{
    Series lam = (Q.Y - P.Y) / (Q.X - P.X);
    Series X3 = lam * lam - P.X - Q.X;
    Series Y3 = lam * (P.X - X3) - P.Y;
    return {X3, Y3};
}

inline SeriesPoint series_double(const LocalShortModel& M, const SeriesPoint& P)
{
    const Fq* F = P.X.F;
    Series den = P.Y.scaled_int(2);
    if (den.is_zero()) throw PrecisionError("doubling a point with Y indistinguishable from 0");
    Series lam = (P.X * P.X * Series::constant(F, F->from_int(3), P.X.prec) + M.A) / den;
    Series X3 = lam * lam - P.X.scaled_int(2);
    return {X3, lam * (P.X - X3) - P.Y};
}

// n P for n >= 1 on the minimal short model; the partial sums must be
// distinct non-identity points (true for n P with P of infinite order).
inline SeriesPoint series_mul(const LocalShortModel& M, long n, const SeriesPoint& P)
{
    std::optional<SeriesPoint> R;
    SeriesPoint B = P;
    while (n) {
        if (n & 1) {
            if (!R) R = B;
            else {
                if ((R->X - B.X).is_zero()) throw PrecisionError("chord through points agreeing to precision");
                R = chord_add(*R, B);
            }
        }
        n >>= 1;
        if (n) B = series_double(M, B);
    }
    return *R;
}

inline WCoeffs<FqElem> short_residue_curve(const LocalShortModel& M)
{
    const Fq* G = M.L->F;
    auto res = [&](const Series& s) { return s.is_zero() || s.val > 0 ? 0u : s.coeff(0); };
    FqElem z(G, 0);
    return {z, z, z, FqElem(G, res(M.A)), FqElem(G, res(M.B))};
}

}  // namespace detail

// The torsion point of order n (p^2 not dividing n) reducing to the residue
// point (xb, yb) of the minimal model at a good place. Series carry absolute
// precision M.W.
inline SeriesPoint lift_torsion(const LocalShortModel& M, uint32_t xb, uint32_t yb, long n)
{
    const Fq* F = M.L->F;
    long p = (long)F->p;
    long W = M.W;
    if (n % (p * p) == 0) throw UnsupportedError("lifting torsion of order divisible by p^2");
    if (n % p == 0) {
        long np = n / p;
        auto C = detail::short_residue_curve(M);
        auto Pb = GPoint<FqElem>::affine(FqElem(F, xb), FqElem(F, yb));
        // split into the p-part and the prime-to-p part
        long alpha = 0;
        for (long a = 0; a < n; a += p)
            if (a % np == 1 % np) {
                alpha = a;
                break;
            }
        auto P1 = scalar_mul(C, alpha, Pb);
        auto P2 = scalar_mul(C, 1 - alpha, Pb);
        // p-torsion: f_p(X) = H(X^p), lift a root of H and take p-th roots
        long Wp = p * W + p;
        LocalShortModel Mp = M;
        Mp.W = Wp;
        Mp.A = M.A.padded(std::max(Wp, M.A.prec));
        Mp.B = M.B.padded(std::max(Wp, M.B.prec));
        if (M.A.prec < Wp || M.B.prec < Wp) throw std::invalid_argument("model precision below p W");
        Series zero = Series::zero(F, Wp);
        auto K = [&](const Series& s) { return detail::XPoly{{s}, zero}; };
        detail::XPoly X{{zero, Series::constant(F, 1, Wp)}, zero};
        DivisionPolys<detail::XPoly> D(K(zero), K(Mp.A.scaled_int(2)), K(Mp.B.scaled_int(4)), K(-(Mp.A * Mp.A)), X);
        const auto& fp = D.f(p);
        std::vector<Series> H;
        for (size_t i = 0; i < fp.c.size(); ++i) {
            if (i % (size_t)p == 0) H.push_back(fp.c[i]);
            else if (!fp.c[i].is_zero()) throw std::logic_error("f_p is not a polynomial in X^p");
        }
        std::vector<Series> dH;
        for (size_t i = 1; i < H.size(); ++i) dH.push_back(H[i].scaled_int((long long)i));
        Series Yp = detail::newton_lift(Mp, F->pow(P2.x.v, p), Wp, [&](const Series& y) {
            return std::make_pair(detail::eval_horner(H, y, zero), detail::eval_horner(dH, y, zero));
        });
        // x of the p-torsion point is the p-th root of Y: in general only in
        // the inseparable extension with pi^(1/p)
        Series Xt = detail::pth_root(Yp);
        LocalShortModel Mr = M;
        Mr.A = M.A.with_ram(p);
        Mr.B = M.B.with_ram(p);
        SeriesPoint T2{Xt, detail::y_from_x(Mr, Xt, P2.y.v)};
        if (np == 1) return T2;
        SeriesPoint T1 = lift_torsion(M, P1.x.v, P1.y.v, np);
        T1 = {T1.X.with_ram(p), T1.Y.with_ram(p)};
        return detail::chord_add(T1, T2);
    }
    if (n == 2) {
        Series X = detail::newton_lift(M, xb, W, [&](const Series& x) {
            Series f = x * x * x + M.A * x + M.B;
            Series df = x * x * Series::constant(F, F->from_int(3), W) + M.A;
            return std::make_pair(f, df);
        });
        return {X, Series::zero(F, W)};
    }
    using DS = detail::Dual<Series>;
    Series zero = Series::zero(F, W), one = Series::constant(F, 1, W);
    Series X = detail::newton_lift(M, xb, W, [&](const Series& x) {
        auto K = [&](const Series& s) { return DS{s, zero}; };
        DivisionPolys<DS> D(K(zero), K(M.A.scaled_int(2)), K(M.B.scaled_int(4)), K(-(M.A * M.A)), DS{x, one});
        const DS& f = D.f(n);
        return std::make_pair(f.v, f.d);
    });
    return {X, detail::y_from_x(M, X, yb)};
}

// -log d_v(Q, T) at a good place from minimal short coordinates. Throws
// PrecisionError when the working precision cannot separate the points.
inline LogQ minus_log_distance(const LocalShortModel& M, SeriesPoint Q, SeriesPoint T)
{
    int r = std::lcm(Q.X.ram, T.X.ram);
    Q = {Q.X.with_ram(r), Q.Y.with_ram(r)};
    T = {T.X.with_ram(r), T.Y.with_ram(r)};
    Series dx = Q.X - T.X;
    if (dx.is_zero()) throw PrecisionError("points agree to the working precision");
    Series lam = (Q.Y + T.Y) / dx;
    Series XR = lam * lam - Q.X - T.X;
    // X(Q - T) = 0 is a resolved answer once its precision is positive
    if (XR.prec <= 0 && XR.is_zero()) throw PrecisionError("difference not resolved");
    if (XR.is_zero() || XR.val >= 0) return 0;
    return LogQ((long)M.red.v.deg) * make_q(-XR.val, 2L * r);
}

// All points of the reduced minimal model over the residue field.
inline std::vector<GPoint<FqElem>> residue_points(const LocalShortModel& M)
{
    const Fq* G = M.L->F;
    auto C = detail::short_residue_curve(M);
    std::vector<GPoint<FqElem>> out{GPoint<FqElem>::identity()};
    for (uint32_t x = 0; x < G->q; ++x) {
        FqElem X(G, x);
        FqElem f = (X * X + C.a4) * X + C.a6;
        if (f.is_zero()) {
            out.push_back(GPoint<FqElem>::affine(X, f));
            continue;
        }
        auto r = G->sqrt(f.v);
        if (!r) continue;
        out.push_back(GPoint<FqElem>::affine(X, FqElem(G, *r)));
        out.push_back(GPoint<FqElem>::affine(X, FqElem(G, G->neg(*r))));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Nearest torsion

struct NearestTorsion {
    Place v;
    bool torsion = false;     // Q torsion: M_v = 0, m_v infinite
    LogQ m = 0;               // m_v(Q) = -log M_v(Q)
    long n0 = 0;              // order of the reduction data of Q
    int e = 0;                // p-exponent of n0
    LogQ d_n0 = 0;            // -log d_v(n0 Q, O)
    std::string method;       // "closed-form" or "brute-force"
    bool supersingular = false;
    std::string note;
};

namespace detail {

inline int p_exponent(long n, long p)
{
    int e = 0;
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

inline long ipow(long b, int e)
{
    long r = 1;
    while (e--) r *= b;
    return r;
}

// The reduced curve over the residue field of the semistable model at a
// potentially good additive place (or the ordinary reduced curve), and the
// image of Q on it.
struct ResidueData {
    ReductionData R;  // with A, B of the reduced semistable model
    GPoint<FqElem> Qb;
};

inline uint32_t scaled_residue(const LocalField& L, const RatFunc& a, const Rational& s)
{
    // residue of a * pi^(-s), for ord a >= s (0 when ord a > s)
    if (a.is_zero()) return 0;
    long o = ord_at(a, L.v);
    if (Rational(o) < s) throw std::logic_error("scaled residue of a non-integral element");
    if (Rational(o) > s) return 0;
    return L.expand(a, 1).c[0];
}

inline ResidueData residue_data(const Curve& E, const Point& Q, const Place& v)
{
    ResidueData D;
    LocalModel M = local_model(E, v);
    M.red = classify_reduction(E, v);
    D.R = M.red;
    if (M.red.type == RedType::AdditivePotGood) {
        const Fq* F = E.F;
        RatFunc A = -(RatFunc::from_int(F, 27) * E.c4) / pi_power(v, 4 * M.red.k);
        RatFunc B = -(RatFunc::from_int(F, 54) * E.c6) / pi_power(v, 6 * M.red.k);
        D.R.A = scaled_residue(*M.red.L, A, 4 * M.e);
        D.R.B = scaled_residue(*M.red.L, B, 6 * M.e);
    }
    auto lp = local_point(E, M, Q);
    if (lp.kind == LocalPoint::Kernel) return D;
    const Fq* G = M.red.L->F;
    D.Qb = GPoint<FqElem>::affine(FqElem(G, scaled_residue(*M.red.L, lp.X, 2 * M.e)),
                                  FqElem(G, scaled_residue(*M.red.L, lp.Y, 3 * M.e)));
    return D;
}

}  // namespace detail

struct BruteForceTorsion {
    LogQ m = 0;
    long order_bound = 0;
    long candidates = 0;        // torsion points (or classes) examined
    long frontier_skipped = 0;  // orders divisible by p^2, not lifted
};

// Brute-force oracle: max over torsion T of order <= B of -log d_v(Q, T), at
// good places (residue points over k_v, Hensel-lifted) and multiplicative
// places (Tate classes zeta q^(b/n) whose leading coefficient lies in the
// residue field of the Tate model; the others are at distance 1).
inline BruteForceTorsion nearest_torsion_brute(const Curve& E, const Point& Q, const Place& v, long B)
{
    BruteForceTorsion out;
    out.order_bound = B;
    auto red = classify_reduction(E, v);
    const Fq* K = E.F;
    long p = (long)K->p;
    if (red.good()) {
        for (long W = 48;; W *= 2) {
            if (W > 4096) throw PrecisionError("brute force: precision limit");
            LocalShortModel M = local_short_model(E, v, W * p + p + 8);
            M.W = W;
            auto C = detail::short_residue_curve(M);
            auto pts = residue_points(M);
            uint64_t Ng = pts.size();
            SeriesPoint Qs = expand_point(E, M, Q);
            BruteForceTorsion r;
            r.order_bound = B;
            bool retry = false;
            for (auto& T : pts) {
                long n = (long)point_order(C, T, Ng);
                if (n > B) continue;
                if (T.inf) {
                    ++r.candidates;
                    r.m = max_q(r.m, d_v(E, Q, Point(), v).is_inf() ? LogQ(0) : d_v(E, Q, Point(), v).value());
                    continue;
                }
                if (n % (p * p) == 0) {
                    ++r.frontier_skipped;
                    continue;
                }
                ++r.candidates;
                SeriesPoint Ts = lift_torsion(M, T.x.v, T.y.v, n);
                try {
                    r.m = max_q(r.m, minus_log_distance(M, Qs, Ts));
                } catch (const PrecisionError&) {
                    retry = true;
                    break;
                }
            }
            if (!retry) return r;
        }
    }
    if (red.multiplicative()) {
        long N = red.N;
        for (long prec = 64;; prec *= 2) {
            if (prec > 4096) throw PrecisionError("brute force: precision limit");
            auto T = u_from_point(E, Q, v, prec);
            auto Cx = tate_context(E, red, prec + 2 * N + 8);
            const Fq* F = Cx->L->F;
            Series w = Cx->q.shifted(-N);
            Series uq = T.unit_part.truncated(T.unit_part.val + prec);
            BruteForceTorsion r;
            r.order_bound = B;
            bool retry = false;
            LogQ deg((long)v.deg);
            for (long n = 1; n <= B && !retry; ++n) {
                // classes on the component of Q: b / n = a / N
                if ((T.a * n) % N) continue;
                long b = T.a * n / N;
                int k = detail::p_exponent(n, p);
                long np = n / detail::ipow(p, k);
                long pk = detail::ipow(p, k);
                // (u/pi^a)/rho - 1 with rho^(p^k) = rho' has 1/p^k the
                // valuation of (u/pi^a)^(p^k)/rho' - 1
                Series up = uq.pow(pk);
                Series target = w.truncated(up.prec).pow(b);
                uint32_t w0 = target.lead(), c0 = 0;
                for (uint32_t c = 1; c < F->q && !c0; ++c)
                    if (F->pow(c, np) == w0) c0 = c;
                if (!c0) continue;  // no class with leading term in the residue field
                // rho'^np = w^b with leading term c0; the other roots are zeta rho'
                Series rho = Series::constant(F, c0, up.prec);
                for (int it = 0; it < 64 && np > 1; ++it) {
                    Series f = rho.pow(np) - target;
                    if (f.is_zero()) break;
                    Series step = f / rho.pow(np - 1).scaled_int(np);
                    rho = (rho - step).truncated(up.prec);
                    if (step.is_zero()) break;
                }
                Series base = up / rho;
                Series one = Series::constant(F, 1, base.prec);
                for (uint32_t z = 1; z < F->q; ++z) {
                    if (F->pow(z, np) != 1) continue;
                    ++r.candidates;
                    Series ratio = base.scaled(F->inv(z)) - one;
                    if (ratio.is_zero()) {
                        retry = true;
                        break;
                    }
                    r.m = max_q(r.m, deg * make_q(ratio.val, pk));
                }
            }
            if (!retry) return r;
        }
    }
    throw UnsupportedError("brute-force nearest torsion at " + to_string(red.type) + " reduction");
}

// m_v(Q) in closed form. With n0 the order of the reduction data of Q and
// p^e its p-part, the nearest torsion point T shares the reduction of Q and
// n0 (Q - T) = n0 Q, so -log d(Q, T) = -log d(n0 Q, O) / p^e. At good places
// n0 is the order of the residue point; at potentially good additive places
// the same on the semistable model; at multiplicative places it is the
// component order times the order of the leading unit of u(c Q).
// Supersingular places use the brute-force oracle with bound 4 n0.
inline NearestTorsion nearest_torsion(const Curve& E, const Point& Q, const Place& v)
{
    NearestTorsion out;
    out.v = v;
    if (is_torsion(E, Q).torsion) {
        out.torsion = true;
        out.method = "torsion";
        return out;
    }
    auto red = classify_reduction(E, v);
    long p = (long)E.F->p;
    if (red.type == RedType::AdditivePotMult)
        throw UnsupportedError("nearest torsion at an additive potentially multiplicative place");
    long n0 = 0;
    LogQ deg((long)v.deg);
    if (red.multiplicative()) {
        // u(n Q) = U^n w^(-a n / N) for n a multiple of c, with U = u / pi^a
        // and q = pi^N w
        long N = red.N;
        for (long prec = 64;; prec *= 2) {
            if (prec > 8192) throw PrecisionError("nearest torsion: precision limit");
            auto T = u_from_point(E, Q, v, prec);
            auto Cx = tate_context(E, red, prec + 2 * N + 8);
            const Fq* F = Cx->L->F;
            Series U = T.unit_part.truncated(T.unit_part.val + prec);
            Series w = Cx->q.shifted(-N).truncated(prec);
            long c = N / std::gcd(T.a, N);
            long ac = T.a * c / N;
            uint32_t w0 = F->mul(F->pow(U.lead(), c), F->inv(F->pow(w.lead(), ac)));
            long o = 1;
            for (uint32_t x = w0; x != 1; x = F->mul(x, w0)) ++o;
            n0 = c * o;
            Series un = U.pow(n0) / w.pow(T.a * n0 / N);
            Series V = un - Series::constant(F, 1, un.prec);
            if (V.is_zero()) continue;
            out.d_n0 = deg * Rational(V.val);
            break;
        }
    } else {
        auto D = detail::residue_data(E, Q, v);
        uint64_t Ng = residue_group_order(D.R);
        n0 = (long)point_order(residue_curve(D.R), D.Qb, Ng);
        if (red.good()) {
            uint64_t qv = D.R.L->F->q;
            long a = (long)qv + 1 - (long)Ng;
            if (a % p == 0) {
                out.supersingular = true;
                out.n0 = n0;
                auto B = nearest_torsion_brute(E, Q, v, 4 * n0);
                out.m = B.m;
                out.method = "brute-force";
                out.note = "supersingular: brute force over torsion of order <= 4 n0";
                return out;
            }
        }
        // n0 Q lies in the kernel of reduction of the semistable model
        Rational e = local_model(E, v).e;
        for (long W = 32;; W *= 2) {
            if (W > 8192) throw PrecisionError("nearest torsion: precision limit");
            LocalShortModel M = local_short_model(E, v, W);
            try {
                SeriesPoint R = detail::series_mul(M, n0, expand_point(E, M, Q));
                if (R.X.is_zero() || R.X.prec <= 0) continue;
                if (Rational(R.X.val) >= 2 * e) throw std::logic_error("n0 Q outside the kernel of reduction");
                out.d_n0 = deg * (make_q(-R.X.val, 2) + e);
                break;
            } catch (const PrecisionError&) {
            }
        }
    }
    out.n0 = n0;
    out.e = detail::p_exponent(n0, p);
    out.m = out.d_n0 / Rational(detail::ipow(p, out.e));
    out.method = "closed-form";
    return out;
}

// ---------------------------------------------------------------------------
// Configurations and the counting bound

struct SIntConfig {
    Curve E;
    std::vector<Place> S;
    Point Q;
};

// Checks the hypotheses: coefficients S-integral, good reduction of the
// equation outside S, and h(Q) > 0. Returns h(Q).
inline LogQ validate_config(const SIntConfig& C)
{
    const Curve& E = C.E;
    auto inS = [&](const Place& v) { return std::find(C.S.begin(), C.S.end(), v) != C.S.end(); };
    for (auto& v : E.bad_support()) {
        if (inS(v)) continue;
        for (const RatFunc* c : {&E.a.a1, &E.a.a2, &E.a.a3, &E.a.a4, &E.a.a6})
            if (!c->is_zero() && ord_at(*c, v) < 0)
                throw std::invalid_argument("coefficients not integral at " + v.to_string() + " outside S");
        if (ord_at(E.disc, v) != 0) throw std::invalid_argument("|disc| != 1 at " + v.to_string() + " outside S");
    }
    if (!E.contains(C.Q)) throw std::invalid_argument("Q is not on the curve");
    LogQ h = canonical_height(E, C.Q);
    if (h <= 0) throw std::invalid_argument("Q must have positive canonical height");
    return h;
}

struct BirBound {
    LogQ hQ = 0, hj = 0, sum_m = 0;
    std::vector<NearestTorsion> m;
    Rational value = 0;  // (|S| h(j)/12 + sum m_v)^2 / h(Q)^2
};

inline BirBound bir_bound(const SIntConfig& C)
{
    BirBound b;
    b.hQ = validate_config(C);
    b.hj = weil_height(C.E.j);
    for (auto& v : C.S) {
        b.m.push_back(nearest_torsion(C.E, C.Q, v));
        if (b.m.back().torsion) throw std::logic_error("Q is torsion");
        b.sum_m += b.m.back().m;
    }
    Rational s = Rational((long)C.S.size()) * b.hj / 12 + b.sum_m;
    b.value = s * s / (b.hQ * b.hQ);
    return b;
}

// ---------------------------------------------------------------------------
// Torsion over constant extensions

struct ExtPoint {
    int m = 1;               // F_{q^m} is the field of definition
    ConstantExtension X;
    Point P;                 // on E lifted to F_{q^m}(t)
    long order = 1;
};

struct TorsionEnumeration {
    std::vector<ExtPoint> points;
    long order_bound = 0;
    int max_degree = 0;
    int degrees_searched = 0;
    long frontier_skipped = 0;
    long inseparable = 0;  // residue points whose torsion lift is not over F_{q^m}((pi))
    std::vector<std::string> certificate;
};

namespace detail {

// Smallest m' | m with every coefficient of the point in F_{q^m'}.
inline int field_of_definition(const Point& P, const ConstantExtension& X)
{
    if (P.inf) return 1;
    const Fq* F = X.ext;
    uint32_t q = X.base->q;
    auto fixed = [&](uint32_t c, int d) { return F->pow(c, (long long)std::pow((double)q, d)) == c; };
    for (int d = 1; d <= X.m; ++d) {
        if (X.m % d) continue;
        bool ok = true;
        for (const Poly* f : {&P.x.num, &P.x.den, &P.y.num, &P.y.den})
            for (auto c : f->c)
                if (!fixed(c, d)) ok = false;
        if (ok) return d;
    }
    return X.m;
}

// Lower bound for ord_v x_s of a torsion point: torsion never meets the
// kernel of reduction on a semistable model.
inline long xs_lower_bound(const Curve& E, const Place& v)
{
    LocalScaling S = local_scaling(E, v);
    if (S.N == 0 || S.ord_j >= 0) return S.N == 0 ? 2 * S.k : -floor_div(-(long)ord_at(E.disc, v), 6);
    if (S.c4_unit) return 2 * S.k;
    // additive, potentially multiplicative: through the twist by a uniformizer
    const Fq* F = E.F;
    RatFunc d = pi_power(v, 1);
    RatFunc a4 = -(RatFunc::from_int(F, 27) * E.c4 * d * d);
    RatFunc a6 = -(RatFunc::from_int(F, 54) * E.c6 * d * d * d);
    RatFunc z(F);
    Curve T(z, z, z, a4, a6);
    return 2 * local_scaling(T, v).k - 1;
}

inline Poly pow_poly(const Poly& f, long k)
{
    Poly r = Poly::one(f.F);
    for (long i = 0; i < k; ++i) r = r * f;
    return r;
}

}  // namespace detail

// All torsion points of order <= B defined over F_{q^m}(t), 1 <= m <= max_m,
// each listed once over its field of definition. At a good degree-1 place w
// of F_{q^m}(t) torsion injects into the residue group; each residue point
// of order <= B is lifted to w-adic series, x_s = A / B' is reconstructed
// from the denominator bounds at the bad places, and the candidate is checked
// exactly. Orders divisible by p^2 are not lifted and are counted in the
// frontier.
inline TorsionEnumeration enumerate_torsion(const Curve& E, long B, int max_m)
{
    TorsionEnumeration out;
    out.order_bound = B;
    out.max_degree = max_m;
    const Fq* K = E.F;
    long p = (long)K->p;
    for (int m = 1; m <= max_m; ++m) {
        uint64_t qm = 1;
        for (int i = 0; i < m; ++i) qm *= K->q;
        if (qm > kMaxFieldSize) {
            out.certificate.push_back("degree " + std::to_string(m) + " and above not searched: field cap");
            break;
        }
        out.degrees_searched = m;
        ConstantExtension X = constant_extend(K, m);
        Curve EL = E.lifted(X);
        const Fq* F = X.ext;
        // denominator bound and degree bound for A
        Poly Bden = Poly::one(F);
        long b_inf = 0;
        for (auto& v : EL.bad_support()) {
            long b = detail::xs_lower_bound(EL, v);
            if (v.inf) b_inf = b;
            else if (b < 0) Bden = Bden * detail::pow_poly(v.P, -b);
        }
        long Dmax = Bden.deg() - b_inf;
        Place w = good_small_place(EL, 1);
        long W = std::max(Dmax, 0L) + 10;
        LocalShortModel M = local_short_model(EL, w, p * W + p + 8);
        M.W = W;
        auto C = detail::short_residue_curve(M);
        auto pts = residue_points(M);
        uint64_t Ng = pts.size();
        uint64_t g = 1;
        for (long n = 2; n <= B; ++n) g = std::lcm(g, (uint64_t)n);
        g = std::gcd(g, Ng);
        Series Bs = M.L->expand(Bden, W);
        uint32_t c0 = M.L->alpha;
        RatFunc twelve = RatFunc::from_int(F, 12), two = RatFunc::from_int(F, 2);
        RatFunc sa = -(EL.c4 / RatFunc::from_int(F, 48)), sb = -(EL.c6 / RatFunc::from_int(F, 864));
        std::vector<uint32_t> done_x;
        long found_m = 0;
        for (auto& T : pts) {
            if (!scalar_mul(C, (long long)g, T).inf) continue;
            long n = (long)point_order(C, T, Ng);
            if (n > B) continue;
            if (T.inf) {
                if (m == 1) {
                    out.points.push_back({1, X, Point(), 1});
                    ++found_m;
                }
                continue;
            }
            if (n % (p * p) == 0) {
                ++out.frontier_skipped;
                continue;
            }
            if (std::find(done_x.begin(), done_x.end(), T.x.v) != done_x.end()) continue;
            done_x.push_back(T.x.v);
            SeriesPoint Ts = lift_torsion(M, T.x.v, T.y.v, n);
            Ts.X = detail::reduce_ram(Ts.X);
            if (Ts.X.ram != 1) {
                ++out.inseparable;
                continue;
            }
            // x_s = X / 36 at a good place of an integral model (k = 0)
            if (M.red.k != 0) throw std::logic_error("reconstruction place has a non-minimal model");
            Series xs = Ts.X.scaled(F->inv(F->from_int(36)));
            Series s = xs * Bs;
            if (Dmax < 0 && !s.is_zero()) continue;
            bool ok = true;
            for (long i = std::max(Dmax + 1, 0L); i < s.prec; ++i)
                if (s.coeff(i)) ok = false;
            if (!ok) continue;
            // A(t) = sum s_i (t - c0)^i
            Poly A(F), shift = Poly(F, {F->neg(c0), 1}), pw = Poly::one(F);
            for (long i = 0; i <= Dmax; ++i) {
                A = A + pw.scaled(s.coeff(i));
                pw = pw * shift;
            }
            RatFunc x_s(A, Bden);
            RatFunc rhs = x_s * x_s * x_s + sa * x_s + sb;
            std::optional<RatFunc> ys;
            if (rhs.is_zero()) ys = RatFunc(F);
            else {
                auto rn = poly_sqrt(rhs.num), rd = poly_sqrt(rhs.den);
                if (rn && rd) ys = RatFunc(*rn, *rd);
            }
            if (!ys) continue;
            RatFunc x = x_s - EL.b2 / twelve;
            for (int sgn = 0; sgn < 2; ++sgn) {
                RatFunc y_s = sgn ? -*ys : *ys;
                if (sgn && ys->is_zero()) break;
                RatFunc y = y_s - (EL.a.a1 * x + EL.a.a3) / two;
                Point P = Point::affine(x, y);
                if (!EL.contains(P)) throw std::logic_error("reconstructed point not on the curve");
                if (!EL.mul(n, P).inf) continue;
                if (detail::field_of_definition(P, X) != m) continue;
                out.points.push_back({m, X, P, n});
                ++found_m;
            }
        }
        out.certificate.push_back("F_q^" + std::to_string(m) + ": " + std::to_string(found_m) +
                                  " new torsion points of order <= " + std::to_string(B) + " via place " +
                                  w.to_string());
    }
    if (out.frontier_skipped)
        out.certificate.push_back(std::to_string(out.frontier_skipped) +
                                  " residue points of order divisible by p^2 not lifted (search frontier)");
    return out;
}

struct SIntTorsion {
    TorsionEnumeration all;
    std::vector<ExtPoint> points;  // the S-integral ones
    std::vector<std::pair<size_t, Place>> rejected;  // index into all.points, meeting place
};

inline std::vector<Place> places_above_all(const ConstantExtension& X, const std::vector<Place>& S)
{
    std::vector<Place> out;
    for (auto& v : S) merge_places(out, X.places_above(v));
    return out;
}

inline SIntTorsion enumerate_sintegral_torsion(const SIntConfig& C, long B, int max_m = 6)
{
    SIntTorsion out;
    out.all = enumerate_torsion(C.E, B, max_m);
    for (size_t i = 0; i < out.all.points.size(); ++i) {
        const auto& T = out.all.points[i];
        Curve EL = C.E.lifted(T.X);
        auto r = is_s_integral(EL, T.P, {C.E.lift_point(T.X, C.Q)}, places_above_all(T.X, C.S));
        if (r.integral) out.points.push_back(T);
        else out.rejected.push_back({i, r.place ? *r.place : Place::infinity(T.X.ext)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lambda_v and the truncation claims

namespace detail {

// The place of K below a place w of F_{q^m}(t).
inline Place place_below(const Place& w, const ConstantExtension& X)
{
    if (w.inf) return Place::infinity(X.base);
    const Fq* F = X.ext;
    uint32_t q = X.base->q;
    Poly N = Poly::one(F), g = w.P;
    std::vector<Poly> seen;
    while (std::find(seen.begin(), seen.end(), g) == seen.end()) {
        seen.push_back(g);
        N = N * g;
        std::vector<uint32_t> c = g.c;
        for (auto& x : c) x = F->pow(x, q);
        g = Poly(F, c);
    }
    std::map<uint32_t, uint32_t> inv;
    for (uint32_t a = 0; a < X.base->q; ++a) inv[(*X.emb)(a)] = a;
    std::vector<uint32_t> c;
    for (auto x : N.c) {
        auto it = inv.find(x);
        if (it == inv.end()) throw std::logic_error("norm polynomial not over the base field");
        c.push_back(it->second);
    }
    return Place::finite(Poly(X.base, c));
}

}  // namespace detail

// Lambda_v(Z, {Q}) = (1/|Z|) sum_P sum_{w | v} lambda_w(P - Q), the sum over
// places w of the field of P with its own degrees.
inline LogQ lambda_v_average(const SIntConfig& C, const std::vector<ExtPoint>& Z, const Place& v)
{
    if (Z.empty()) throw std::invalid_argument("empty torsion set");
    LogQ s = 0;
    for (auto& T : Z) {
        Curve EL = C.E.lifted(T.X);
        Point QL = C.E.lift_point(T.X, C.Q);
        if (T.P == QL) throw std::invalid_argument("Z meets the orbit of Q");
        Point R = EL.sub(T.P, QL);
        for (auto& w : T.X.places_above(v)) s += lambda_v(EL, R, w);
    }
    return s / Rational((long)Z.size());
}

// Places of K where some Lambda_v can be nonzero.
inline std::vector<Place> lambda_support(const SIntConfig& C, const std::vector<ExtPoint>& Z)
{
    std::vector<Place> out = C.E.bad_support();
    merge_places(out, C.S);
    for (auto& T : Z) {
        Curve EL = C.E.lifted(T.X);
        Point R = EL.sub(T.P, C.E.lift_point(T.X, C.Q));
        for (auto& w : height_support(EL, R)) merge_places(out, {detail::place_below(w, T.X)});
    }
    return out;
}

struct PlaceClaim {
    Place v;
    bool in_S = false;
    LogQ Lambda = 0;
    // outside S
    bool claim1 = true;  // Lambda_v = 0
    // inside S
    NearestTorsion m;
    IdentityCheck galois;        // Lambda_v = average over Z at one place w | v
    bool agree_on_torsion = true;  // G_v(P) = lambda_v(P - Q) for every P in Z
    IdentityCheck mu_zero;       // integral of G_v against mu is 0
    DirichletNorm norm;          // of G_v on Gamma_v
    LogQ ell = 0;
    bool gprime_bound = true;    // norm.sigma <= ell/12, norm.tree <= m
    InequalityReport equidistribution;  // equidistribution step with h(Z) = 0
    InequalityReport claim2;     // Lambda^2 <= (h(j)/12 + m)^2 / |Z| (when Lambda >= 0)
    bool holds() const
    {
        if (!in_S) return claim1;
        return galois.holds() && agree_on_torsion && mu_zero.holds() && gprime_bound && equidistribution.holds() && claim2.holds();
    }
};

struct ClaimsReport {
    std::vector<PlaceClaim> places;
    IdentityCheck height;      // sum_v Lambda_v = h(Q)
    InequalityReport assembled;  // h(Q)^2 |Z| <= (|S| h(j)/12 + sum m_v)^2
    bool holds() const
    {
        for (auto& p : places)
            if (!p.holds()) return false;
        return height.holds() && assembled.holds();
    }
};

inline ClaimsReport verify_truncation_claims(const SIntConfig& C, const std::vector<ExtPoint>& Z)
{
    if (Z.empty()) throw std::invalid_argument("empty torsion set");
    ClaimsReport rep;
    LogQ hQ = validate_config(C);
    LogQ hj = weil_height(C.E.j);
    Rational N((long)Z.size());
    LogQ sum_m = 0;
    for (auto& v : lambda_support(C, Z)) {
        PlaceClaim pc;
        pc.v = v;
        pc.in_S = std::find(C.S.begin(), C.S.end(), v) != C.S.end();
        pc.Lambda = lambda_v_average(C, Z, v);
        rep.height.lhs += pc.Lambda;
        if (!pc.in_S) {
            pc.claim1 = pc.Lambda == 0;
            rep.places.push_back(pc);
            continue;
        }
        pc.m = nearest_torsion(C.E, C.Q, v);
        LogQ m = pc.m.m;
        auto red = classify_reduction(C.E, v);
        pc.ell = red.ell();
        LogQ rQ = retraction(C.E, C.Q, v);
        MetrizedGraph G = span_tree(pc.ell, {Anchor{rQ, m}}, {{ExtQ::inf()}});
        GraphFunction Gv = neron_test_function(G, {rQ});
        std::vector<GraphPoint> rZ;
        for (auto& T : Z) {
            Curve EL = C.E.lifted(T.X);
            Point QL = C.E.lift_point(T.X, C.Q);
            auto above = T.X.places_above(v);
            const Place& w = above.front();
            Rational g = make_q(v.deg, w.deg);
            // K_v normalization: lambda_v(eps(P) - eps(Q)) = g lambda_w
            LogQ lam = g * lambda_v(EL, EL.sub(T.P, QL), w);
            ExtQ iw = i_v(EL, T.P, QL, w);
            LogQ i = iw.is_inf() ? LogQ(0) : g * iw.value();
            LogQ rP = g * retraction(EL, T.P, w);
            pc.galois.rhs += lam;
            LogQ Gval = j_value(rP, rQ, pc.ell) + (i < m ? i : m);
            if (Gval != lam) pc.agree_on_torsion = false;
            GraphPoint x = retract(G, rP, {iw.is_inf() ? ExtQ::inf() : ExtQ::of(i)});
            if (Gv(x) != Gval) pc.agree_on_torsion = false;
            rZ.push_back(x);
        }
        pc.galois.lhs = pc.Lambda;
        pc.galois.rhs /= N;
        pc.mu_zero.lhs = mu_integral(G, Gv);
        pc.mu_zero.rhs = 0;
        pc.norm = dirichlet_norm(Gv);
        pc.gprime_bound = pc.norm.sigma <= pc.ell / 12 && pc.norm.tree <= m;
        pc.equidistribution = verify_global_equidistribution(G, Gv, rZ, LogQ(0), hj);
        Rational bound = hj / 12 + m;
        pc.claim2.lhs_sq = pc.Lambda >= 0 ? pc.Lambda * pc.Lambda : Rational(0);
        pc.claim2.rhs_sq = bound * bound / N;
        pc.claim2.terms = {{"Lambda", pc.Lambda}, {"m", m}, {"hj", hj}, {"Z", N}};
        rep.places.push_back(pc);
    }
    for (auto& v : C.S) sum_m += nearest_torsion(C.E, C.Q, v).m;
    rep.height.rhs = hQ;
    Rational s = Rational((long)C.S.size()) * hj / 12 + sum_m;
    rep.assembled.lhs_sq = hQ * hQ * N;
    rep.assembled.rhs_sq = s * s;
    rep.assembled.terms = {{"hQ", hQ}, {"hj", hj}, {"sum_m", sum_m}, {"Z", N}};
    return rep;
}

}  // namespace ecff
