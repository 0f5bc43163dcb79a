#pragma once

// Weierstrass curves over F_q(t): invariants, group law, division
// polynomials, reduction at a place, residue-point orders, torsion test.

#include "funcfield.hpp"

#include <map>

namespace ecff {

struct SingularCurveError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Integer constants in the ring of a sample value.
inline RatFunc konst(const RatFunc& like, long long n) { return RatFunc::from_int(like.field(), n); }
inline FqElem konst(const FqElem& like, long long n) { return like.constant(n); }
inline Series konst(const Series& like, long long n)
{
    return Series::constant(like.F, like.F->from_int(n), std::max(like.prec, like.rel_prec()), like.ram);
}

inline bool is_zero(const RatFunc& a) { return a.is_zero(); }
inline bool is_zero(const FqElem& a) { return a.is_zero(); }

template <class T>
struct WCoeffs {
    T a1, a2, a3, a4, a6;
};

template <class T>
struct GPoint {
    bool inf = true;
    T x, y;

    static GPoint identity() { return GPoint(); }
    static GPoint affine(T x_, T y_)
    {
        GPoint P;
        P.inf = false;
        P.x = std::move(x_);
        P.y = std::move(y_);
        return P;
    }
    friend bool operator==(const GPoint& a, const GPoint& b)
    {
        if (a.inf || b.inf) return a.inf == b.inf;
        return a.x == b.x && a.y == b.y;
    }
    friend bool operator!=(const GPoint& a, const GPoint& b) { return !(a == b); }
};

template <class T>
bool on_curve(const WCoeffs<T>& E, const GPoint<T>& P)
{
    if (P.inf) return true;
    const T &x = P.x, &y = P.y;
    T lhs = y * y + E.a1 * x * y + E.a3 * y;
    T rhs = ((x + E.a2) * x + E.a4) * x + E.a6;
    return is_zero(lhs - rhs);
}

template <class T>
GPoint<T> negate(const WCoeffs<T>& E, const GPoint<T>& P)
{
    if (P.inf) return P;
    return GPoint<T>::affine(P.x, -P.y - E.a1 * P.x - E.a3);
}

template <class T>
GPoint<T> add(const WCoeffs<T>& E, const GPoint<T>& P, const GPoint<T>& Q)
{
    if (P.inf) return Q;
    if (Q.inf) return P;
    T lam, nu;
    if (P.x == Q.x) {
        if (is_zero(P.y + Q.y + E.a1 * Q.x + E.a3)) return GPoint<T>::identity();
        const T& x = P.x;
        const T& y = P.y;
        T den = konst(x, 2) * y + E.a1 * x + E.a3;
        lam = (konst(x, 3) * x * x + konst(x, 2) * E.a2 * x + E.a4 - E.a1 * y) / den;
        nu = (-(x * x * x) + E.a4 * x + konst(x, 2) * E.a6 - E.a3 * y) / den;
    } else {
        T dx = Q.x - P.x;
        lam = (Q.y - P.y) / dx;
        nu = (P.y * Q.x - Q.y * P.x) / dx;
    }
    T x3 = lam * lam + E.a1 * lam - E.a2 - P.x - Q.x;
    T y3 = -(lam + E.a1) * x3 - nu - E.a3;
    return GPoint<T>::affine(std::move(x3), std::move(y3));
}

template <class T>
GPoint<T> sub(const WCoeffs<T>& E, const GPoint<T>& P, const GPoint<T>& Q)
{
    return add(E, P, negate(E, Q));
}

template <class T>
GPoint<T> scalar_mul(const WCoeffs<T>& E, long long n, const GPoint<T>& P)
{
    if (n < 0) return scalar_mul(E, -n, negate(E, P));
    GPoint<T> R, B = P;
    while (n) {
        if (n & 1) R = add(E, R, B);
        n >>= 1;
        if (n) B = add(E, B, B);
    }
    return R;
}

// f_n = psi_n for odd n and psi_n / psi_2 for even n, evaluated at x over any
// commutative ring T; F = psi_2^2 = 4x^3 + b2 x^2 + 2 b4 x + b6.
template <class T>
class DivisionPolys {
public:
    DivisionPolys(T b2, T b4, T b6, T b8, T x) : b2_(b2), b4_(b4), b6_(b6), b8_(b8), x_(x)
    {
        T two = konst(x, 2);
        F_ = ((konst(x, 4) * x + b2) * x + two * b4) * x + b6;
        F2_ = F_ * F_;
    }

    const T& F() const { return F_; }

    const T& f(long n)
    {
        if (n < 0) throw std::invalid_argument("negative division polynomial index");
        auto it = memo_.find(n);
        if (it != memo_.end()) return it->second;
        const T& x = x_;
        T r;
        if (n == 0) r = konst(x, 0);
        else if (n == 1 || n == 2) r = konst(x, 1);
        else if (n == 3) {
            T x2 = x * x;
            r = konst(x, 3) * x2 * x2 + b2_ * x2 * x + konst(x, 3) * b4_ * x2 + konst(x, 3) * b6_ * x + b8_;
        } else if (n == 4) {
            T x2 = x * x, x3 = x2 * x;
            r = konst(x, 2) * x3 * x3 + b2_ * x3 * x2 + konst(x, 5) * b4_ * x2 * x2 + konst(x, 10) * b6_ * x3 +
                konst(x, 10) * b8_ * x2 + (b2_ * b8_ - b4_ * b6_) * x + (b4_ * b8_ - b6_ * b6_);
        } else if (n % 2) {
            long m = (n - 1) / 2;
            T a = f(m + 2), b = f(m), c = f(m - 1), d = f(m + 1);
            T first = a * b * b * b, second = c * d * d * d;
            r = (m % 2 == 0) ? F2_ * first - second : first - F2_ * second;
        } else {
            long m = n / 2;
            T a = f(m + 2), b = f(m - 1), c = f(m - 2), d = f(m + 1), e = f(m);
            r = e * (a * b * b - c * d * d);
        }
        return memo_.emplace(n, std::move(r)).first->second;
    }

    // psi_n^2 as a polynomial expression (always a function of x).
    T psi_sq(long n)
    {
        const T& v = f(n);
        return n % 2 ? v * v : v * v * F_;
    }

private:
    T b2_, b4_, b6_, b8_, x_;
    T F_, F2_;
    std::map<long, T> memo_;
};

// ---------------------------------------------------------------------------

using Point = GPoint<RatFunc>;

struct Curve {
    const Fq* F = nullptr;
    WCoeffs<RatFunc> a;
    RatFunc b2, b4, b6, b8, c4, c6, disc, j;

    Curve() = default;
    Curve(const RatFunc& a1, const RatFunc& a2, const RatFunc& a3, const RatFunc& a4, const RatFunc& a6)
    {
        F = a1.field();
        a = {a1, a2, a3, a4, a6};
        if (F->p < 5) throw UnsupportedError("characteristic must be >= 5");
        auto k = [&](long long n) { return RatFunc::from_int(F, n); };
        b2 = a1 * a1 + k(4) * a2;
        b4 = k(2) * a4 + a1 * a3;
        b6 = a3 * a3 + k(4) * a6;
        b8 = a1 * a1 * a6 + k(4) * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        c4 = b2 * b2 - k(24) * b4;
        c6 = -(b2 * b2 * b2) + k(36) * b2 * b4 - k(216) * b6;
        disc = -(b2 * b2 * b8) - k(8) * b4 * b4 * b4 - k(27) * b6 * b6 + k(9) * b2 * b4 * b6;
        if (disc.is_zero()) throw SingularCurveError("singular Weierstrass equation (discriminant 0)");
        j = c4 * c4 * c4 / disc;
    }

    Curve lifted(const ConstantExtension& X) const
    {
        return Curve(X.lift(a.a1), X.lift(a.a2), X.lift(a.a3), X.lift(a.a4), X.lift(a.a6));
    }

    bool contains(const Point& P) const { return on_curve(a, P); }
    Point neg(const Point& P) const { return negate(a, P); }
    Point add(const Point& P, const Point& Q) const { return ecff::add(a, P, Q); }
    Point sub(const Point& P, const Point& Q) const { return ecff::sub(a, P, Q); }
    Point mul(long long n, const Point& P) const { return scalar_mul(a, n, P); }

    Point point(const RatFunc& x, const RatFunc& y) const
    {
        Point P = Point::affine(x, y);
        if (!contains(P)) throw std::invalid_argument("point is not on the curve");
        return P;
    }

    Point lift_point(const ConstantExtension& X, const Point& P) const
    {
        if (P.inf) return P;
        return Point::affine(X.lift(P.x), X.lift(P.y));
    }

    // x + b2/12 and y + (a1 x + a3)/2: coordinates on y^2 = x^3 - c4/48 x - c6/864.
    RatFunc xs(const Point& P) const { return P.x + b2 / RatFunc::from_int(F, 12); }
    RatFunc ys(const Point& P) const { return P.y + (a.a1 * P.x + a.a3) / RatFunc::from_int(F, 2); }

    // z = -x/y, the formal-group parameter at O.
    RatFunc z(const Point& P) const
    {
        if (P.inf) return RatFunc(F);
        return -(P.x / P.y);
    }

    // Places where the model or the curve is bad: infinity, zeros and poles of
    // the discriminant, and poles of the coefficients.
    std::vector<Place> bad_support() const
    {
        std::vector<Place> out = places_of(disc.num);
        merge_places(out, places_of(disc.den));
        for (const RatFunc* c : {&a.a1, &a.a2, &a.a3, &a.a4, &a.a6}) merge_places(out, places_of(c->den));
        merge_places(out, {Place::infinity(F)});
        return out;
    }

    std::string to_string() const
    {
        std::string s = "y^2";
        auto term = [&](const RatFunc& c, const std::string& mon, std::string& side) {
            if (c.is_zero()) return;
            side += " + ";
            if (!(c.is_constant() && c.num.c[0] == 1)) side += "(" + c.to_string() + ")" + (mon.empty() ? "" : "*");
            else if (mon.empty()) side += "1";
            side += mon;
        };
        term(a.a1, "x*y", s);
        term(a.a3, "y", s);
        std::string r = "x^3";
        term(a.a2, "x^2", r);
        term(a.a4, "x", r);
        term(a.a6, "", r);
        return s + " = " + r;
    }
};

// ---------------------------------------------------------------------------
// Reduction

enum class RedType { Good, SplitMult, NonsplitMult, AdditivePotGood, AdditivePotMult };

inline std::string to_string(RedType t)
{
    switch (t) {
    case RedType::Good: return "Good";
    case RedType::SplitMult: return "SplitMult";
    case RedType::NonsplitMult: return "NonsplitMult";
    case RedType::AdditivePotGood: return "AdditivePotGood";
    case RedType::AdditivePotMult: return "AdditivePotMult";
    }
    return "?";
}

// x = u^2 x' + r, y = u^3 y' + s u^2 x' + t, taking the given model to the
// minimal short model Y^2 = X^3 + A X + B at v.
struct MinimalTransform {
    RatFunc u, r, s, t;
};

struct ReductionData {
    Place v;
    RedType type = RedType::Good;
    long k = 0;          // scaling exponent: minimal X = 36 x_s / pi^(2k)
    long N = 0;          // ord of the minimal discriminant
    long ord_j = 0;
    MinimalTransform transform;
    const LocalField* L = nullptr;  // residue field for the reduced curve
    uint32_t A = 0, B = 0;          // reduced short model Y^2 = X^3 + A X + B

    bool multiplicative() const { return type == RedType::SplitMult || type == RedType::NonsplitMult; }
    bool good() const { return type == RedType::Good; }
    LogQ ell() const { return LogQ(std::max(0L, -ord_j) * (long)v.deg); }
};

// pi^k as an element of K (P^k, or t^-k at infinity).
inline RatFunc pi_power(const Place& v, long k)
{
    const Fq* F = v.field();
    RatFunc base = v.inf ? RatFunc::t(F).inverse() : RatFunc(v.P);
    return base.pow(k);
}

inline long floor_div(long a, long b)
{
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// The valuation data of the minimal model at v, which needs no residue field.
struct LocalScaling {
    long k = 0, N = 0, ord_j = 0;
    bool c4_unit = false;  // ord of the minimal c4 is 0
};

inline LocalScaling local_scaling(const Curve& E, const Place& v)
{
    const long BIG = 1L << 40;
    LocalScaling S;
    long oc4 = E.c4.is_zero() ? BIG : ord_at(E.c4, v);
    long oc6 = E.c6.is_zero() ? BIG : ord_at(E.c6, v);
    long od = ord_at(E.disc, v);
    S.k = std::min(floor_div(oc4, 4), floor_div(oc6, 6));
    S.N = od - 12 * S.k;
    S.ord_j = E.j.is_zero() ? BIG : ord_at(E.j, v);
    S.c4_unit = oc4 - 4 * S.k == 0;
    return S;
}

// Without `with_residue`, good places skip the residue field (L stays null).
inline ReductionData classify_reduction(const Curve& E, const Place& v, bool with_residue = true)
{
    ReductionData R;
    R.v = v;
    LocalScaling sc = local_scaling(E, v);
    R.k = sc.k;
    R.N = sc.N;
    R.ord_j = sc.ord_j;
    const Fq* F = E.F;
    RatFunc u = pi_power(v, R.k) / RatFunc::from_int(F, 6);
    RatFunc r = -(E.b2 / RatFunc::from_int(F, 12));
    RatFunc s = -(E.a.a1 / RatFunc::from_int(F, 2));
    RatFunc t = -(E.a.a1 * r + E.a.a3) / RatFunc::from_int(F, 2);
    R.transform = {u, r, s, t};
    if (!with_residue && R.N == 0) return R;
    R.L = &local_field(v);
    RatFunc Am = -(RatFunc::from_int(F, 27) * E.c4) / pi_power(v, 4 * R.k);
    RatFunc Bm = -(RatFunc::from_int(F, 54) * E.c6) / pi_power(v, 6 * R.k);
    R.A = R.L->residue(Am);
    R.B = R.L->residue(Bm);
    if (R.N == 0) {
        R.type = RedType::Good;
    } else if (R.ord_j < 0) {
        if (!sc.c4_unit) {
            R.type = RedType::AdditivePotMult;
        } else {
            // node at X0 = -3B/(2A); tangent slopes are the square roots of 3 X0
            const Fq* G = R.L->F;
            uint32_t X0 = G->div(G->neg(G->mul(G->from_int(3), R.B)), G->mul(G->from_int(2), R.A));
            bool split = G->is_square(G->mul(G->from_int(3), X0));
            R.type = split ? RedType::SplitMult : RedType::NonsplitMult;
        }
    } else {
        R.type = RedType::AdditivePotGood;
    }
    return R;
}

// Minimal short-model coordinates at v.
inline std::pair<RatFunc, RatFunc> minimal_coords(const Curve& E, const ReductionData& R, const Point& P)
{
    const Fq* F = E.F;
    RatFunc X = (RatFunc::from_int(F, 36) * P.x + RatFunc::from_int(F, 3) * E.b2) / pi_power(R.v, 2 * R.k);
    RatFunc Y = RatFunc::from_int(F, 108) * (RatFunc::from_int(F, 2) * P.y + E.a.a1 * P.x + E.a.a3) /
                pi_power(R.v, 3 * R.k);
    return {X, Y};
}

struct ResiduePoint {
    enum Kind { Identity, Affine, Singular } kind = Identity;
    uint32_t x = 0, y = 0;
    friend bool operator==(const ResiduePoint& a, const ResiduePoint& b)
    {
        return a.kind == b.kind && (a.kind != Affine || (a.x == b.x && a.y == b.y));
    }
    friend bool operator!=(const ResiduePoint& a, const ResiduePoint& b) { return !(a == b); }
};

inline ResiduePoint reduce_point(const Curve& E, const ReductionData& R, const Point& P)
{
    ResiduePoint out;
    if (P.inf) return out;
    auto [X, Y] = minimal_coords(E, R, P);
    if (!X.is_zero() && ord_at(X, R.v) < 0) return out;
    const Fq* G = R.L->F;
    out.x = R.L->residue(X);
    out.y = R.L->residue(Y);
    out.kind = ResiduePoint::Affine;
    if (R.type != RedType::Good && out.y == 0 &&
        G->add(G->mul(G->from_int(3), G->mul(out.x, out.x)), R.A) == 0)
        out.kind = ResiduePoint::Singular;
    return out;
}

inline WCoeffs<FqElem> residue_curve(const ReductionData& R)
{
    const Fq* G = R.L->F;
    FqElem z(G, 0);
    return {z, z, z, FqElem(G, R.A), FqElem(G, R.B)};
}

inline GPoint<FqElem> as_group_point(const ReductionData& R, const ResiduePoint& P)
{
    if (P.kind == ResiduePoint::Singular) throw std::domain_error("singular residue point");
    if (P.kind == ResiduePoint::Identity) return {};
    return GPoint<FqElem>::affine(FqElem(R.L->F, P.x), FqElem(R.L->F, P.y));
}

// Number of nonsingular points (with O) of the reduced curve over its
// residue field, by direct count.
inline uint64_t residue_group_order(const ReductionData& R)
{
    const Fq* G = R.L->F;
    uint64_t n = 1;
    for (uint32_t x = 0; x < G->q; ++x) {
        uint32_t f = G->add(G->mul(G->add(G->mul(x, x), R.A), x), R.B);
        if (f == 0) {
            bool sing = G->add(G->mul(G->from_int(3), G->mul(x, x)), R.A) == 0;
            if (!sing) n += 1;
        } else if (G->is_square(f)) {
            n += 2;
        }
    }
    return n;
}

inline uint64_t point_order(const WCoeffs<FqElem>& C, const GPoint<FqElem>& P, uint64_t group_order)
{
    if (P.inf) return 1;
    uint64_t n = group_order;
    for (auto r : detail::prime_factors(group_order)) {
        while (n % r == 0 && scalar_mul(C, (long long)(n / r), P).inf) n /= r;
    }
    if (!scalar_mul(C, (long long)n, P).inf) throw std::logic_error("point order does not divide group order");
    return n;
}

inline uint64_t reduced_point_order(const ReductionData& R, const ResiduePoint& P)
{
    if (P.kind == ResiduePoint::Identity) return 1;
    auto C = residue_curve(R);
    return point_order(C, as_group_point(R, P), residue_group_order(R));
}

// A good place of degree 1 (smallest), falling back to the smallest good
// place of degree 2.
inline Place good_small_place(const Curve& E, int max_deg = 2)
{
    const Fq* F = E.F;
    auto bad = E.bad_support();
    for (int d = 1; d <= max_deg; ++d) {
        std::vector<Place> cands;
        if (d == 1) {
            for (uint32_t c = 0; c < F->q; ++c) cands.push_back(Place::finite(Poly(F, {F->neg(c), 1})));
        } else {
            for (uint32_t c0 = 0; c0 < F->q; ++c0)
                for (uint32_t c1 = 0; c1 < F->q; ++c1) {
                    Poly P(F, {c0, c1, 1});
                    if (is_irreducible(P)) cands.push_back(Place::finite(P));
                }
        }
        std::sort(cands.begin(), cands.end());
        for (auto& v : cands) {
            if (std::find(bad.begin(), bad.end(), v) != bad.end()) continue;
            return v;
        }
    }
    throw std::runtime_error("no good place of small degree");
}

struct TorsionResult {
    bool torsion = false;
    long order = 0;       // when torsion
    uint64_t bound = 0;   // the reduction order that bounds any torsion order
};

// Torsion injects into the residue group at a good place, so P is torsion
// iff n0 P = O where n0 is the order of its reduction.
inline TorsionResult is_torsion(const Curve& E, const Point& P)
{
    TorsionResult res;
    if (P.inf) {
        res.torsion = true;
        res.order = 1;
        res.bound = 1;
        return res;
    }
    Place v = good_small_place(E);
    auto R = classify_reduction(E, v);
    auto Pb = reduce_point(E, R, P);
    uint64_t n0 = reduced_point_order(R, Pb);
    res.bound = n0;
    if (!E.mul((long long)n0, P).inf) return res;
    long n = (long)n0;
    for (auto r : detail::prime_factors(n0))
        while (n % (long)r == 0 && E.mul(n / (long)r, P).inf) n /= (long)r;
    res.torsion = true;
    res.order = n;
    return res;
}

}  // namespace ecff
