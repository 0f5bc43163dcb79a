#pragma once

// Local heights: the Neron function lambda_v, its splitting into the
// reduction part i_v and the skeleton part j_v, the chordal metric d_v, and
// the canonical height as a sum over places.

#include "tate.hpp"

namespace ecff {

inline ExtQ ord_ext(const RatFunc& a, const Place& v)
{
    if (a.is_zero()) return ExtQ::inf();
    return ExtQ::of(Rational(ord_at(a, v)));
}

// Coordinates with good (or semistable) reduction: the minimal short model,
// rescaled over a ramified extension at potentially good additive places so
// that X' = X_m pi^(-2e), Y' = Y_m pi^(-3e), z' = z_m pi^e.
struct LocalModel {
    ReductionData red;
    Rational e = 0;
};

inline LocalModel local_model(const Curve& E, const Place& v)
{
    LocalModel M;
    M.red = classify_reduction(E, v, false);
    if (M.red.type == RedType::AdditivePotGood) M.e = make_q(M.red.N, 12);
    return M;
}

// Position of a point relative to the reduction at v.
struct LocalPoint {
    enum Kind { Kernel, Smooth, Node } kind = Kernel;
    RatFunc X, Y, z;  // minimal coordinates; z = -X/Y
};

inline LocalPoint local_point(const Curve& E, const LocalModel& M, const Point& P)
{
    LocalPoint L;
    L.z = RatFunc(E.F);
    if (P.inf) return L;
    auto [X, Y] = minimal_coords(E, M.red, P);
    L.X = X;
    L.Y = Y;
    if (!X.is_zero() && Rational(ord_at(X, M.red.v)) < 2 * M.e) {
        L.z = -(X / Y);
        return L;
    }
    L.kind = LocalPoint::Smooth;
    if (M.red.multiplicative() && reduce_point(E, M.red, P).kind == ResiduePoint::Singular)
        L.kind = LocalPoint::Node;
    return L;
}

namespace detail {

inline void require_semistable_or_good(const LocalModel& M, const char* what)
{
    if (M.red.type == RedType::AdditivePotMult)
        throw UnsupportedError(std::string(what) + " at an additive potentially multiplicative place");
}

// ord(u(P)/u(Q) - 1), raising the precision until the difference is seen.
inline long tate_ratio_ord(const Curve& E, const Point& P, const Point& Q, const Place& v)
{
    long N = classify_reduction(E, v).N;
    for (long prec = 4 * N + 8; prec <= 4096; prec *= 2) {
        auto a = u_from_point(E, P, v, prec), b = u_from_point(E, Q, v, prec);
        if (a.a != b.a) throw std::logic_error("tate_ratio_ord: different retractions");
        Series r = a.u / b.u - Series::constant(a.u.F, 1, a.u.prec);
        if (!r.is_zero()) return r.val;
    }
    throw PrecisionError("Tate parameters agree beyond the working precision");
}

// ord(u(R) - 1) for R reducing into the identity component.
inline long tate_unit_ord(const Curve& E, const Point& R, const Place& v)
{
    long N = classify_reduction(E, v).N;
    for (long prec = 4 * N + 8; prec <= 4096; prec *= 2) {
        auto T = u_from_point(E, R, v, prec);
        if (T.a != 0) throw std::logic_error("tate_unit_ord: point off the identity component");
        Series r = T.u - Series::constant(T.u.F, 1, T.u.prec);
        if (!r.is_zero()) return r.val;
    }
    throw PrecisionError("Tate parameter indistinguishable from 1");
}

// lambda at a multiplicative place from x_s alone: with x_q the Tate-model
// coordinate, points in the kernel have ord x_q < 0, points on the node have
// 0 < ord x_q <= N/2, everything else has ord x_q = 0.
inline LogQ lambda_mult_from_x(const Curve& E, const ReductionData& R, const RatFunc& xs)
{
    long N = R.N;
    LogQ ell = R.ell(), deg((long)R.v.deg);
    long oxs = xs.is_zero() ? 1L << 30 : ord_at(xs, R.v);
    if (oxs < 2 * R.k) return deg * (2 * R.k - oxs) / 2 + ell / 12;
    for (long W = 2 * N + 16; W <= 4096; W *= 2) {
        auto C = tate_context(E, R, W);
        const Fq* F = C->L->F;
        Series X = xs.is_zero() ? Series::zero(F, W) : C->L->expand(xs, W - oxs + 4 * std::abs(R.k) + 8);
        Series xq = X / C->iso2 - Series::constant(F, F->inv(F->from_int(12)), W);
        if (xq.is_zero()) continue;
        if (xq.val < 0) return deg * (-xq.val) / 2 + ell / 12;
        if (xq.val == 0) return ell / 12;
        // at a = N/2 the two leading terms of x_q may cancel
        long a = std::min(xq.val, N / 2);
        if (2 * xq.val > N && N % 2) throw std::logic_error("x_q valuation beyond N/2");
        return ell / 2 * bernoulli_phi(make_q(a, N));
    }
    throw PrecisionError("x_q indistinguishable from zero");
}

}  // namespace detail

// -log d_v(P, Q), computed through the group law: positive only when P - Q
// lies in the kernel of reduction.
inline ExtQ d_v(const Curve& E, const Point& P, const Point& Q, const Place& v)
{
    Point R = E.sub(P, Q);
    if (R.inf) return ExtQ::inf();
    auto M = local_model(E, v);
    detail::require_semistable_or_good(M, "d_v");
    auto L = local_point(E, M, R);
    if (L.kind != LocalPoint::Kernel) return ExtQ::of(0);
    return ExtQ::of(Rational((long)v.deg) * (Rational(ord_at(L.z, v)) + M.e));
}

// i_v(P, Q) from the coordinates of P and Q separately.
inline ExtQ i_v(const Curve& E, const Point& P, const Point& Q, const Place& v)
{
    if (P == Q) return ExtQ::inf();
    auto M = local_model(E, v);
    detail::require_semistable_or_good(M, "i_v");
    auto a = local_point(E, M, P), b = local_point(E, M, Q);
    if (a.kind != b.kind) return ExtQ::of(0);
    Rational deg((long)v.deg);
    switch (a.kind) {
    case LocalPoint::Kernel:
        return ExtQ::of(deg * (Rational(ord_at(a.z - b.z, v)) + M.e));
    case LocalPoint::Smooth: {
        RatFunc dX = a.X - b.X, dY = a.Y - b.Y;
        ExtQ ox = ord_ext(dX, v), oy = ord_ext(dY, v);
        Rational sx = ox.is_inf() ? Rational(1) : ox.value() - 2 * M.e;
        Rational sy = oy.is_inf() ? Rational(1) : oy.value() - 3 * M.e;
        if (sx <= 0 || sy <= 0) return ExtQ::of(0);
        // X' - X'(P) is a local parameter unless the reduction has Y' = 0
        bool y_unit = !a.Y.is_zero() && Rational(ord_at(a.Y, v)) == 3 * M.e;
        if (y_unit && ox.is_inf()) throw std::logic_error("i_v: equal X with nonzero Y residue");
        if (!y_unit && oy.is_inf()) throw std::logic_error("i_v: equal Y at a 2-torsion residue");
        return ExtQ::of(deg * (y_unit ? sx : sy));
    }
    case LocalPoint::Node: {
        if (u_from_point(E, P, v).a != u_from_point(E, Q, v).a) return ExtQ::of(0);
        return ExtQ::of(deg * Rational(detail::tate_ratio_ord(E, P, Q, v)));
    }
    }
    return ExtQ::of(0);
}

inline LogQ retraction(const Curve& E, const Point& P, const Place& v)
{
    auto R = classify_reduction(E, v, false);
    if (!R.multiplicative()) return 0;
    return r_sigma(E, P, v);
}

// j_v(P, Q) = (ell/2) Phi((r(P) - r(Q)) / ell); zero when ell = 0.
inline LogQ j_v(const Curve& E, const Point& P, const Point& Q, const Place& v)
{
    auto R = classify_reduction(E, v, false);
    if (!R.multiplicative()) {
        if (R.type == RedType::AdditivePotMult) throw UnsupportedError("j_v at an additive potentially multiplicative place");
        return 0;
    }
    LogQ ell = R.ell();
    return ell / 2 * bernoulli_phi((r_sigma(E, P, v) - r_sigma(E, Q, v)) / ell);
}

// lambda_v(R) for R != O.
inline LogQ lambda_v(const Curve& E, const Point& R, const Place& v)
{
    if (R.inf) throw std::domain_error("lambda_v(O) is infinite");
    LogQ deg((long)v.deg);
    if (local_scaling(E, v).N == 0) {
        // good reduction: no residue field needed
        RatFunc xs = E.xs(R);
        if (xs.is_zero()) return 0;
        LogQ v6 = LogQ(ord_at(E.disc, v)) / 6 - ord_at(xs, v);
        return v6 > 0 ? deg * v6 / 2 : LogQ(0);
    }
    auto red = classify_reduction(E, v);
    if (red.multiplicative()) {
        auto T = u_from_point(E, R, v);
        LogQ ell = red.ell();
        if (T.a != 0) return ell / 2 * bernoulli_phi(T.s / ell);
        return ell / 12 + deg * Rational(detail::tate_unit_ord(E, R, v));
    }
    if (red.type == RedType::AdditivePotMult) {
        // the twist by a uniformizer is multiplicative and isomorphic over C_v
        const Fq* F = E.F;
        RatFunc d = pi_power(v, 1), z(F);
        RatFunc a4 = -(RatFunc::from_int(F, 27) * E.c4 * d * d);
        RatFunc a6 = -(RatFunc::from_int(F, 54) * E.c6 * d * d * d);
        Curve T(z, z, z, a4, a6);
        auto tr = classify_reduction(T, v);
        if (!tr.multiplicative()) throw UnsupportedError("twist by a uniformizer is not multiplicative");
        return detail::lambda_mult_from_x(T, tr, RatFunc::from_int(F, 36) * d * E.xs(R));
    }
    RatFunc xs = E.xs(R);
    if (xs.is_zero()) return 0;
    LogQ v6 = LogQ(ord_at(E.disc, v)) / 6 - ord_at(xs, v);
    return v6 > 0 ? deg * v6 / 2 : LogQ(0);
}

// Same quantity at a multiplicative place from the x-coordinate alone.
inline LogQ lambda_v_from_x(const Curve& E, const Point& R, const Place& v)
{
    auto red = classify_reduction(E, v);
    if (!red.multiplicative()) return lambda_v(E, R, v);
    return detail::lambda_mult_from_x(E, red, E.xs(R));
}

// lambda_v(P - Q) for P != Q.
inline LogQ lambda_v_pair(const Curve& E, const Point& P, const Point& Q, const Place& v)
{
    return lambda_v(E, E.sub(P, Q), v);
}

// Canonical height: outside the bad support lambda_v = deg(v)/2 max(0, -ord x),
// so those places together contribute half the degree of the denominator of x
// once the bad places are stripped from it.
inline LogQ canonical_height(const Curve& E, const Point& P)
{
    if (P.inf) return 0;
    auto B = E.bad_support();
    Poly den = P.x.den;
    for (auto& v : B) {
        if (v.inf) continue;
        Poly rest(den.F);
        strip_place(den, v.P, &rest);
        den = rest;
    }
    LogQ h = make_q(den.deg(), 2);
    for (auto& v : B) h += lambda_v(E, P, v);
    return h;
}

// Places where lambda_v(P) can be nonzero.
inline std::vector<Place> height_support(const Curve& E, const Point& P)
{
    auto S = E.bad_support();
    if (!P.inf) merge_places(S, places_of(P.x.den));
    return S;
}

// The same height summed place by place after factoring the denominator.
inline LogQ canonical_height_by_places(const Curve& E, const Point& P)
{
    if (P.inf) return 0;
    LogQ h = 0;
    for (auto& v : height_support(E, P)) h += lambda_v(E, P, v);
    return h;
}

inline LogQ weil_height(const Point& P) { return P.inf ? LogQ(0) : weil_height(P.x); }

}  // namespace ecff
