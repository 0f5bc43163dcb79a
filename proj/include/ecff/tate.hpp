#pragma once

// Tate uniformization at a multiplicative place: the parameter q from j,
// u(P) from coordinates, the retraction r(P) = -log|u(P)|, and symbolic
// torsion classes zeta * q^(b/n).

#include "elliptic.hpp"

namespace ecff {

// ---------------------------------------------------------------------------
// Classical q-expansions, coefficients reduced mod p.

namespace detail {

inline uint64_t sigma_mod(uint64_t n, int k, uint64_t m)
{
    uint64_t s = 0;
    for (uint64_t d = 1; d <= n; ++d) {
        if (n % d) continue;
        uint64_t t = 1;
        for (int i = 0; i < k; ++i) t = (unsigned __int128)t * (d % m) % m;
        s = (s + t) % m;
    }
    return s;
}

}  // namespace detail

// Series in the abstract variable q over F_p, to absolute precision M.
struct TateSeries {
    const Fq* Fp = nullptr;
    long M = 0;
    Series a4, a6, s1, c4, c6, disc, h;  // h = 1/j = disc / c4^3 = q + O(q^2)
};

inline TateSeries tate_series(uint32_t p, long M)
{
    TateSeries T;
    T.Fp = field(p, 1);
    T.M = M;
    const Fq* F = T.Fp;
    std::vector<uint32_t> a4(M, 0), a6(M, 0), s1(M, 0);
    uint64_t m12 = 12ull * p;
    for (long n = 1; n < M; ++n) {
        uint64_t s3 = detail::sigma_mod(n, 3, m12), s5 = detail::sigma_mod(n, 5, m12);
        a4[n] = F->from_int(-5 * (long long)(s3 % p));
        uint64_t num = (5 * s3 + 7 * s5) % m12;
        if (num % 12) throw std::logic_error("a6 coefficient not integral");
        a6[n] = F->from_int(-(long long)(num / 12 % p));
        s1[n] = (uint32_t)(detail::sigma_mod(n, 1, p));
    }
    T.a4 = Series(F, 0, M, a4);
    T.a6 = Series(F, 0, M, a6);
    T.s1 = Series(F, 0, M, s1);
    auto k = [&](long long n) { return Series::constant(F, F->from_int(n), M); };
    T.c4 = k(1) - k(48) * T.a4;
    T.c6 = k(-1) + k(72) * T.a4 - k(864) * T.a6;
    T.disc = -T.a6 + T.a4 * T.a4 - k(64) * T.a4 * T.a4 * T.a4 - k(432) * T.a6 * T.a6 + k(72) * T.a4 * T.a6;
    T.h = (T.disc / (T.c4 * T.c4 * T.c4)).truncated(M);
    return T;
}

inline std::vector<uint32_t> coeff_vector(const Series& s, long M)
{
    std::vector<uint32_t> v((size_t)M, 0);
    for (long i = std::max(0L, s.val); i < std::min(M, s.prec); ++i) v[(size_t)i] = s.coeff(i);
    return v;
}

// Compositional inverse of h: the series Q(eta) with h(Q(eta)) = eta.
inline Series tate_reversion(const TateSeries& T)
{
    const Fq* F = T.Fp;
    long M = T.M;
    auto hc = coeff_vector(T.h, M);
    std::vector<uint32_t> dh((size_t)M, 0);
    for (long i = 1; i < M; ++i) dh[(size_t)(i - 1)] = F->mul(hc[(size_t)i], F->from_int(i));
    Series eta = Series::monomial(F, 1, 1, M);
    Series Q = eta;
    for (int it = 0; it < 64; ++it) {
        Series val = compose(hc, Q, M) - eta;
        if (val.is_zero()) break;
        Series der = compose(dh, Q, M);
        Q = (Q - val / der).truncated(M);
    }
    return Q;
}

// ---------------------------------------------------------------------------

struct Skeleton {
    LogQ ell = 0;
};

inline Skeleton skeleton(const Curve& E, const Place& v)
{
    Skeleton S;
    S.ell = E.j.is_zero() ? LogQ(0) : log_plus(E.j, v);
    return S;
}

// Local data for the Tate isomorphism E ~ E_q over K_v (or its unramified
// quadratic extension at non-split places), at absolute precision W.
struct TateContext {
    const LocalField* L = nullptr;
    ReductionData red;
    long N = 0;
    long W = 0;
    Series q, a4q, s1q;
    Series iso2, iso;  // iso^2 = c6 c4(q) / (c4 c6(q)); X = iso^2 X_q, Y = iso^3 Y_q
};

inline TateContext build_tate_context(const Curve& E, const ReductionData& R, long W)
{
    if (!R.multiplicative()) throw std::invalid_argument("Tate uniformization needs a multiplicative place");
    TateContext C;
    C.red = R;
    C.N = R.N;
    C.W = W;
    C.L = &local_field(R.v, R.type == RedType::NonsplitMult ? 2 : 1);
    const LocalField& L = *C.L;
    const Fq* F = L.F;
    long N = R.N;
    long M = W / N + 3;
    TateSeries T = tate_series(F->p, M);
    Series Qrev = tate_reversion(T);
    // eta = 1/j to absolute precision W
    Series eta = L.expand(E.j.inverse(), W - N);
    if (eta.val != N) throw std::logic_error("valuation of 1/j differs from N");
    // coefficients of the abstract series lie in F_p, a subfield of F
    C.q = compose(coeff_vector(Qrev, M), eta, W);
    C.a4q = compose(coeff_vector(T.a4, M), C.q, W);
    C.s1q = compose(coeff_vector(T.s1, M), C.q, W);
    Series c4q = compose(coeff_vector(T.c4, M), C.q, W);
    Series c6q = compose(coeff_vector(T.c6, M), C.q, W);
    long rel = W + 4 * std::abs(R.k) + 8;
    Series c4 = L.expand(E.c4, rel), c6 = L.expand(E.c6, rel);
    C.iso2 = (c6 * c4q) / (c4 * c6q);
    auto r = C.iso2.sqrt();
    if (!r) throw std::logic_error("Tate isomorphism not defined over the local field (non-split?)");
    Series r2 = -*r;
    C.iso = r->lead() <= r2.lead() ? *r : r2;
    return C;
}

namespace detail {
struct TateRegistry {
    std::mutex mu;
    std::map<std::string, std::shared_ptr<const TateContext>> m;
};
inline TateRegistry& tate_registry()
{
    static TateRegistry r;
    return r;
}
}  // namespace detail

inline std::shared_ptr<const TateContext> tate_context(const Curve& E, const ReductionData& R, long W)
{
    std::string key = E.c4.to_string() + "|" + E.c6.to_string() + "|" + std::to_string(E.F->p) + "^" +
                      std::to_string(E.F->D) + ":" + std::to_string((uintptr_t)E.F) + "|" + R.v.to_string() +
                      "|" + std::to_string(W);
    auto& G = detail::tate_registry();
    {
        std::lock_guard<std::mutex> lk(G.mu);
        auto it = G.m.find(key);
        if (it != G.m.end()) return it->second;
    }
    auto C = std::make_shared<const TateContext>(build_tate_context(E, R, W));
    std::lock_guard<std::mutex> lk(G.mu);
    auto& slot = G.m[key];
    if (!slot) slot = C;
    return slot;
}

// j(q) = 1/q + 744 + ... evaluated on a series q.
inline Series j_of_q(const Series& q, long W)
{
    long N = q.valuation();
    long M = W / N + 4;
    TateSeries T = tate_series(q.F->p, M);
    Series h = compose(coeff_vector(T.h, M), q, W + 2 * N);
    return h.inverse();
}

inline Series q_from_j(const Curve& E, const Place& v, long prec)
{
    auto R = classify_reduction(E, v);
    if (!R.multiplicative()) throw std::invalid_argument("q_from_j needs a multiplicative place");
    return tate_context(E, R, prec)->q;
}

// X(u,q), Y(u,q) on y^2 + xy = x^3 + a4(q) x + a6(q).
struct TateXY {
    Series X, Y;
};

inline TateXY tate_xy(const TateContext& C, const Series& u)
{
    const Fq* F = u.F;
    long W = u.prec;
    Series one = Series::constant(F, 1, W + 4 * C.N + 8);
    Series X = u / ((one - u) * (one - u));
    Series Y = (u * u) / ((one - u) * (one - u) * (one - u));
    Series uinv = u.inverse();
    Series qm = C.q;
    for (int m = 1; m < 100000; ++m) {
        Series a = qm * u, w = qm * uinv;
        long va = a.is_zero() ? a.prec : a.val, vw = w.is_zero() ? w.prec : w.val;
        if (va >= W && vw >= W) break;
        Series oa = one - a, ow = one - w;
        Series oa2 = oa * oa, ow2 = ow * ow;
        X = X + a / oa2 + w / ow2;
        Y = Y + (a * a) / (oa2 * oa) - w / (ow2 * ow);
        qm = qm * C.q;
    }
    X = X - C.s1q.scaled_int(2);
    Y = Y + C.s1q;
    return {X, Y};
}

struct TateParameter {
    Place v;
    long a = 0;        // ord_pi(u), in [0, N)
    long N = 0;
    LogQ s = 0;        // deg(v) * a, the retraction value in [0, ell)
    LogQ ell = 0;
    Series u;          // the parameter itself
    Series unit_part;  // u / pi^a
};

inline std::pair<Series, Series> tate_coords(const Curve& E, const TateContext& C, const Point& P, long W)
{
    const LocalField& L = *C.L;
    const Fq* F = L.F;
    RatFunc xs = E.xs(P), ys = E.ys(P);
    auto ex = [&](const RatFunc& a) {
        if (a.is_zero()) return Series::zero(F, W);
        long o = ord_at(a, C.red.v);
        return L.expand(a, std::max(1L, W - o + 4 * std::abs(C.red.k) + 8));
    };
    Series i2 = C.iso2, i3 = C.iso2 * C.iso;
    Series Xq = ex(xs) / i2, Yq = ex(ys) / i3;
    uint32_t inv12 = F->inv(F->from_int(12)), inv2 = F->inv(F->from_int(2));
    Series xq = Xq - Series::constant(F, inv12, W + 8);
    Series yq = Yq - xq.scaled(inv2);
    return {xq.truncated(W), yq.truncated(W)};
}

namespace detail {

// Newton on X(u) + lam Y(u) = x + lam y from the starting value u0.
inline std::optional<Series> tate_newton(const TateContext& C, Series u, const Series& x, const Series& y, long W,
                                         long target)
{
    const Fq* F = u.F;
    for (int it = 0; it < 80; ++it) {
        u = u.truncated(W);
        TateXY t = tate_xy(C, u);
        Series dx = t.X - x, dy = t.Y - y;
        bool okx = dx.is_zero() || dx.val >= target, oky = dy.is_zero() || dy.val >= target;
        if (okx && oky && std::min(dx.prec, dy.prec) >= target) return u;
        Series dX = t.X + t.Y.scaled_int(2);
        Series dY = t.X * t.X * Series::constant(F, F->from_int(3), W + 8) + C.a4q - t.Y;
        long vX = dX.is_zero() ? dX.prec : dX.val, vY = dY.is_zero() ? dY.prec : dY.val;
        bool lam = vY < vX;
        Series f = lam ? dx + dy : dx;
        Series d = (lam ? dX + dY : dX) / u;
        if (d.is_zero()) return std::nullopt;
        if (f.is_zero()) {
            // converged in f but the other coordinate disagrees: wrong branch
            return std::nullopt;
        }
        Series step = f / d;
        if (step.is_zero() && !(okx && oky)) return std::nullopt;
        u = u - step;
    }
    return std::nullopt;
}

}  // namespace detail

// Tate parameter of P != O at a multiplicative place, with u known to
// relative precision at least `prec`.
inline TateParameter u_from_point(const Curve& E, const Point& P, const Place& v, long prec = 0)
{
    if (P.inf) throw std::invalid_argument("u_from_point of the identity");
    auto R = classify_reduction(E, v);
    if (!R.multiplicative()) throw std::invalid_argument("u_from_point needs a multiplicative place");
    if (prec <= 0) prec = 4 * R.N + 8;
    for (long W = prec + 2 * R.N + 8; W <= 64 * (prec + 2 * R.N + 8); W *= 2) {
        auto C = tate_context(E, R, W);
        const Fq* F = C->L->F;
        long N = R.N;
        auto [xq, yq] = tate_coords(E, *C, P, W);
        if (xq.is_zero() && yq.is_zero()) continue;
        std::vector<std::pair<long, Series>> cands;
        Series one = Series::constant(F, 1, W);
        // x_q = 0 exactly only happens on the node, at u = +-sqrt(q) up to units
        long vx = xq.is_zero() ? N : xq.val, vy = yq.val;
        if (vx < 0) {
            cands.push_back({0, one - xq / yq});
        } else if (vx == 0 || vy == 0) {
            cands.push_back({0, yq / (xq + yq)});
        } else if (2 * vx < N) {
            cands.push_back({vx, xq});
            cands.push_back({N - vx, C->q / xq});
        } else {
            long h = N / 2;
            uint32_t xc = xq.coeff(h), qc = C->q.coeff(N);
            // c^2 - xc c + qc = 0
            for (uint32_t c = 1; c < F->q; ++c)
                if (F->add(F->sub(F->mul(c, c), F->mul(xc, c)), qc) == 0)
                    cands.push_back({h, Series::monomial(F, c, h, W)});
        }
        long target = std::min(xq.prec, yq.prec) - 2 * N - 8 - 2 * std::max(0L, -vx);
        if (target <= std::max(0L, vx)) continue;
        for (auto& [a, u0] : cands) {
            auto u = detail::tate_newton(*C, u0.truncated(W), xq, yq, W, target);
            if (!u) continue;
            if (u->is_zero() || u->val != a) continue;
            if (u->rel_prec() < prec) break;
            TateParameter T;
            T.v = v;
            T.a = a;
            T.N = N;
            T.s = LogQ(a * (long)v.deg);
            T.ell = LogQ(N * (long)v.deg);
            T.u = *u;
            T.unit_part = u->shifted(-a);
            return T;
        }
    }
    throw PrecisionError("u_from_point did not converge");
}

// r(P) = -log|u(P)| in [0, ell); r(O) = 0.
inline LogQ r_sigma(const Curve& E, const Point& P, const Place& v)
{
    if (P.inf) return 0;
    return u_from_point(E, P, v).s;
}

// ---------------------------------------------------------------------------
// Symbolic torsion of K_v^x / q^Z

struct TorsionClass {
    Rational b_over_n;
    uint32_t zeta = 1;
    const Fq* F = nullptr;  // contains mu_n

    friend bool operator==(const TorsionClass& a, const TorsionClass& b)
    {
        return a.b_over_n == b.b_over_n && a.zeta == b.zeta;
    }
};

// All n^2 classes zeta * q^(b/n) of E[n], with zeta in the smallest extension
// of F_q containing mu_n.
inline std::vector<TorsionClass> torsion_classes(long n, const Fq* base)
{
    if (n < 1) throw std::invalid_argument("torsion order must be positive");
    if (n % (long)base->p == 0) throw std::invalid_argument("torsion order divisible by the characteristic");
    int m = 1;
    uint64_t qm = base->q;
    while ((qm - 1) % (uint64_t)n) {
        ++m;
        qm *= base->q;
        if (qm > kMaxFieldSize) throw UnsupportedError("mu_n needs a constant field beyond the table cap");
    }
    const Fq* F = m == 1 ? base : field(base->p, base->D * m);
    uint32_t z = *F->root_of_unity((uint64_t)n);
    std::vector<uint32_t> mu;
    for (long i = 0; i < n; ++i) mu.push_back(F->pow(z, i));
    std::sort(mu.begin(), mu.end());
    std::vector<TorsionClass> out;
    for (long b = 0; b < n; ++b)
        for (auto zz : mu) out.push_back({Rational(b, n), zz, F});
    for (auto& t : out) t.b_over_n.canonicalize();
    return out;
}

// lambda_v of the difference of two torsion classes.
inline LogQ lambda_between_torsion(const TorsionClass& T1, const TorsionClass& T2, const LogQ& ell)
{
    Rational db = frac_q(T1.b_over_n - T2.b_over_n);
    if (db != 0) return ell / 2 * bernoulli_phi(db);
    if (T1.zeta == T2.zeta) throw std::domain_error("lambda of identical torsion classes is infinite");
    return ell / 12;
}

}  // namespace ecff
