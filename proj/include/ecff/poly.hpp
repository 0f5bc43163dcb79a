#pragma once

// Dense univariate polynomials in t over a finite field, with factorization
// (square-free, distinct-degree, equal-degree splitting).

#include "fq.hpp"

#include <random>
#include <utility>

namespace ecff {

class Poly {
public:
    const Fq* F = nullptr;
    std::vector<uint32_t> c;  // low degree first, trimmed

    Poly() = default;
    explicit Poly(const Fq* f) : F(f) {}
    Poly(const Fq* f, std::vector<uint32_t> coeffs) : F(f), c(std::move(coeffs)) { trim(); }

    static Poly constant(const Fq* f, uint32_t a) { return Poly(f, {a}); }
    static Poly one(const Fq* f) { return Poly(f, {1}); }
    static Poly t(const Fq* f) { return Poly(f, {0, 1}); }
    static Poly monomial(const Fq* f, uint32_t a, size_t k)
    {
        std::vector<uint32_t> v(k + 1, 0);
        v[k] = a;
        return Poly(f, std::move(v));
    }

    void trim()
    {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }

    bool is_zero() const { return c.empty(); }
    int deg() const { return c.empty() ? -1 : (int)c.size() - 1; }
    uint32_t lead() const { return c.empty() ? 0 : c.back(); }
    uint32_t coeff(size_t i) const { return i < c.size() ? c[i] : 0; }
    bool is_one() const { return c.size() == 1 && c[0] == 1; }
    bool is_constant() const { return c.size() <= 1; }

    Poly monic() const
    {
        if (is_zero()) return *this;
        uint32_t li = F->inv(lead());
        Poly r = *this;
        for (auto& x : r.c) x = F->mul(x, li);
        return r;
    }

    Poly scaled(uint32_t a) const
    {
        Poly r = *this;
        for (auto& x : r.c) x = F->mul(x, a);
        r.trim();
        return r;
    }

    friend Poly operator+(const Poly& a, const Poly& b)
    {
        const Fq* F = a.F ? a.F : b.F;
        Poly r(F);
        r.c.resize(std::max(a.c.size(), b.c.size()), 0);
        for (size_t i = 0; i < r.c.size(); ++i) r.c[i] = F->add(a.coeff(i), b.coeff(i));
        r.trim();
        return r;
    }

    Poly operator-() const
    {
        Poly r = *this;
        for (auto& x : r.c) x = F->neg(x);
        return r;
    }

    friend Poly operator-(const Poly& a, const Poly& b)
    {
        const Fq* F = a.F ? a.F : b.F;
        Poly r(F);
        r.c.resize(std::max(a.c.size(), b.c.size()), 0);
        for (size_t i = 0; i < r.c.size(); ++i) r.c[i] = F->sub(a.coeff(i), b.coeff(i));
        r.trim();
        return r;
    }

    friend Poly operator*(const Poly& a, const Poly& b)
    {
        if (a.is_zero() || b.is_zero()) return Poly(a.F ? a.F : b.F);
        const Fq* F = a.F;
        std::vector<uint32_t> r(a.c.size() + b.c.size() - 1, 0);
        if (F->D == 1) {
            // accumulate in 64 bits, reduce late
            uint64_t p = F->p;
            std::vector<uint64_t> acc(r.size(), 0);
            uint64_t limit = ~0ull / 2 - p * p;
            for (size_t i = 0; i < a.c.size(); ++i) {
                uint64_t ai = a.c[i];
                if (!ai) continue;
                for (size_t j = 0; j < b.c.size(); ++j) {
                    uint64_t& s = acc[i + j];
                    s += ai * b.c[j];
                    if (s > limit) s %= p;
                }
            }
            for (size_t k = 0; k < r.size(); ++k) r[k] = (uint32_t)(acc[k] % p);
        } else {
            for (size_t i = 0; i < a.c.size(); ++i) {
                if (!a.c[i]) continue;
                for (size_t j = 0; j < b.c.size(); ++j)
                    r[i + j] = F->add(r[i + j], F->mul(a.c[i], b.c[j]));
            }
        }
        return Poly(F, std::move(r));
    }

    Poly& operator+=(const Poly& b) { return *this = *this + b; }
    Poly& operator-=(const Poly& b) { return *this = *this - b; }
    Poly& operator*=(const Poly& b) { return *this = *this * b; }

    friend bool operator==(const Poly& a, const Poly& b) { return a.c == b.c; }
    friend bool operator!=(const Poly& a, const Poly& b) { return a.c != b.c; }
    // degree first, then coefficients from the top
    friend bool operator<(const Poly& a, const Poly& b)
    {
        if (a.deg() != b.deg()) return a.deg() < b.deg();
        for (int i = a.deg(); i >= 0; --i)
            if (a.c[i] != b.c[i]) return a.c[i] < b.c[i];
        return false;
    }

    // Quotient and remainder.
    static std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b)
    {
        if (b.is_zero()) throw std::domain_error("polynomial division by zero");
        const Fq* F = b.F;
        if (a.deg() < b.deg()) return {Poly(F), a};
        std::vector<uint32_t> r = a.c, qv(a.c.size() - b.c.size() + 1, 0);
        uint32_t li = F->inv(b.lead());
        size_t db = b.c.size() - 1;
        for (size_t k = qv.size(); k-- > 0;) {
            uint32_t coef = F->mul(r[k + db], li);
            qv[k] = coef;
            if (!coef) continue;
            for (size_t i = 0; i <= db; ++i) r[k + i] = F->sub(r[k + i], F->mul(coef, b.c[i]));
        }
        r.resize(db);
        return {Poly(F, std::move(qv)), Poly(F, std::move(r))};
    }

    friend Poly operator/(const Poly& a, const Poly& b) { return divmod(a, b).first; }
    friend Poly operator%(const Poly& a, const Poly& b) { return divmod(a, b).second; }

    uint32_t eval(uint32_t x) const
    {
        uint32_t v = 0;
        for (size_t i = c.size(); i-- > 0;) v = F->add(F->mul(v, x), c[i]);
        return v;
    }

    Poly derivative() const
    {
        Poly r(F);
        if (c.size() <= 1) return r;
        r.c.resize(c.size() - 1);
        for (size_t i = 1; i < c.size(); ++i) r.c[i - 1] = F->mul(c[i], F->from_int((long long)i));
        r.trim();
        return r;
    }

    Poly pow(unsigned long long e) const
    {
        Poly r = one(F), b = *this;
        while (e) {
            if (e & 1) r = r * b;
            e >>= 1;
            if (e) b = b * b;
        }
        return r;
    }

    Poly mulmod(const Poly& b, const Poly& m) const { return (*this * b) % m; }

    Poly powmod(unsigned long long e, const Poly& m) const
    {
        Poly r = one(F) % m, b = *this % m;
        while (e) {
            if (e & 1) r = r.mulmod(b, m);
            e >>= 1;
            if (e) b = b.mulmod(b, m);
        }
        return r;
    }

    // Coefficient map through a field embedding.
    Poly mapped(const Embedding& E) const
    {
        Poly r(E.dst);
        r.c.reserve(c.size());
        for (auto x : c) r.c.push_back(E(x));
        r.trim();
        return r;
    }

    std::string to_string(const std::string& var = "t") const
    {
        if (is_zero()) return "0";
        std::string s;
        for (int i = deg(); i >= 0; --i) {
            uint32_t a = c[i];
            if (!a) continue;
            std::string cs = F->to_string(a);
            bool compound = cs.find('+') != std::string::npos;
            if (!s.empty()) s += "+";
            if (i == 0) {
                s += cs;
                continue;
            }
            if (a != 1) s += (compound ? "(" + cs + ")" : cs) + "*";
            s += var;
            if (i > 1) s += "^" + std::to_string(i);
        }
        return s;
    }
};

inline Poly gcd(Poly a, Poly b)
{
    while (!b.is_zero()) {
        Poly r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

// Extended gcd: returns (g, s, u) with s*a + u*b = g monic.
inline std::tuple<Poly, Poly, Poly> xgcd(const Poly& a, const Poly& b)
{
    const Fq* F = a.F ? a.F : b.F;
    Poly r0 = a, r1 = b, s0 = Poly::one(F), s1(F), u0(F), u1 = Poly::one(F);
    while (!r1.is_zero()) {
        auto [qq, rr] = Poly::divmod(r0, r1);
        r0 = std::move(r1); r1 = std::move(rr);
        Poly ns = s0 - qq * s1; s0 = std::move(s1); s1 = std::move(ns);
        Poly nu = u0 - qq * u1; u0 = std::move(u1); u1 = std::move(nu);
    }
    if (r0.is_zero()) return {r0, s0, u0};
    uint32_t li = F->inv(r0.lead());
    return {r0.scaled(li), s0.scaled(li), u0.scaled(li)};
}

namespace detail {

// p-th root of a polynomial in t^p.
inline Poly pth_root(const Poly& f)
{
    const Fq* F = f.F;
    Poly r(F);
    r.c.resize(f.c.size() / F->p + 1, 0);
    for (size_t i = 0; i < f.c.size(); i += F->p) r.c[i / F->p] = F->frobenius(f.c[i], F->D - 1);
    r.trim();
    return r;
}

// Square-free decomposition of a monic polynomial: list of (g_i, i) with f = prod g_i^i.
inline std::vector<std::pair<Poly, int>> squarefree(const Poly& f)
{
    std::vector<std::pair<Poly, int>> out;
    const Fq* F = f.F;
    if (f.deg() <= 0) return out;
    Poly df = f.derivative();
    if (df.is_zero()) {
        for (auto& [g, m] : squarefree(pth_root(f))) out.push_back({g, m * (int)F->p});
        return out;
    }
    Poly c = gcd(f, df);
    Poly w = f / c;
    int i = 1;
    while (!w.is_one()) {
        Poly y = gcd(w, c);
        Poly z = w / y;
        if (z.deg() > 0) out.push_back({z.monic(), i});
        ++i;
        w = y;
        c = c / y;
    }
    if (!c.is_one() && c.deg() > 0) {
        for (auto& [g, m] : squarefree(pth_root(c.monic()))) out.push_back({g, m * (int)F->p});
    }
    return out;
}

inline std::vector<std::pair<Poly, int>> distinct_degree(Poly f)
{
    std::vector<std::pair<Poly, int>> out;
    Poly x = Poly::t(f.F);
    Poly h = x % f;
    int i = 0;
    while (f.deg() >= 2 * (i + 1)) {
        ++i;
        h = h.powmod(f.F->q, f);
        Poly g = gcd(f, h - x);
        if (g.deg() > 0) {
            out.push_back({g, i});
            f = f / g;
            h = h % f;
        }
    }
    if (f.deg() > 0) out.push_back({f.monic(), f.deg()});
    return out;
}

inline void equal_degree(const Poly& f, int d, std::mt19937_64& rng, std::vector<Poly>& out)
{
    if (f.deg() == d) {
        out.push_back(f.monic());
        return;
    }
    const Fq* F = f.F;
    std::uniform_int_distribution<uint32_t> U(0, F->q - 1);
    for (;;) {
        Poly a(F);
        a.c.resize(f.deg());
        for (auto& x : a.c) x = U(rng);
        a.trim();
        if (a.deg() < 1) continue;
        // a^((q^d - 1)/2) = (a * a^q * ... * a^(q^(d-1)))^((q-1)/2)
        Poly nrm = Poly::one(F), cur = a % f;
        for (int k = 0; k < d; ++k) {
            nrm = nrm.mulmod(cur, f);
            if (k + 1 < d) cur = cur.powmod(F->q, f);
        }
        Poly b = nrm.powmod((F->q - 1) / 2, f) - Poly::one(F);
        Poly g = gcd(f, b);
        if (g.deg() > 0 && g.deg() < f.deg()) {
            equal_degree(g, d, rng, out);
            equal_degree(f / g, d, rng, out);
            return;
        }
    }
}

}  // namespace detail

// Factorization into monic irreducibles with multiplicities, sorted.
inline std::vector<std::pair<Poly, int>> factor_poly(const Poly& f)
{
    if (f.is_zero()) throw std::invalid_argument("factor_poly: zero polynomial");
    std::vector<std::pair<Poly, int>> out;
    std::mt19937_64 rng(0x5eed);
    for (auto& [g, m] : detail::squarefree(f.monic())) {
        for (auto& [h, d] : detail::distinct_degree(g)) {
            std::vector<Poly> parts;
            detail::equal_degree(h, d, rng, parts);
            for (auto& u : parts) out.push_back({u, m});
        }
    }
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.first < b.first; });
    // merge equal factors (possible across square-free layers only in theory)
    std::vector<std::pair<Poly, int>> merged;
    for (auto& e : out) {
        if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
        else merged.push_back(e);
    }
    return merged;
}

inline bool is_irreducible(const Poly& f)
{
    if (f.deg() < 1) return false;
    auto fs = factor_poly(f);
    return fs.size() == 1 && fs[0].second == 1;
}

// Roots in the coefficient field, sorted.
inline std::vector<uint32_t> roots(const Poly& f)
{
    std::vector<uint32_t> out;
    for (auto& [g, m] : factor_poly(f))
        if (g.deg() == 1) out.push_back(g.F->neg(g.c[0]));
    std::sort(out.begin(), out.end());
    return out;
}

// Exact square root of a polynomial, if it is a square.
inline std::optional<Poly> poly_sqrt(const Poly& f)
{
    if (f.is_zero()) return f;
    if (f.deg() % 2) return std::nullopt;
    const Fq* F = f.F;
    auto lr = F->sqrt(f.lead());
    if (!lr) return std::nullopt;
    // work with reversed coefficients: g(s) = s^deg f(1/s), constant term lead
    int n = f.deg(), h = n / 2;
    std::vector<uint32_t> rev(f.c.rbegin(), f.c.rend());
    std::vector<uint32_t> r(h + 1, 0);
    r[0] = *lr;
    uint32_t inv2r0 = F->inv(F->mul(F->from_int(2), r[0]));
    for (int k = 1; k <= h; ++k) {
        uint32_t s = rev[k];
        for (int i = 1; i < k; ++i) s = F->sub(s, F->mul(r[i], r[k - i]));
        r[k] = F->mul(s, inv2r0);
    }
    Poly cand(F, std::vector<uint32_t>(r.rbegin(), r.rend()));
    if (cand * cand == f) return cand;
    return std::nullopt;
}

}  // namespace ecff
