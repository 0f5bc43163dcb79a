#pragma once

// Finite fields F_{p^D}. Elements are packed integers sum c_i p^i in [0, p^D)
// (c_i the coefficients in the generator `a` of the defining modulus). Fields
// are interned in a process-wide registry and never freed, so raw pointers to
// them are stable.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecff {

struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Field size cap for the log/Zech tables.
constexpr uint64_t kMaxFieldSize = 1u << 21;

namespace detail {

inline bool is_prime(uint64_t n)
{
    if (n < 2) return false;
    for (uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::vector<uint64_t> prime_factors(uint64_t n)
{
    std::vector<uint64_t> out;
    for (uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            out.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

// Dense polynomials over F_p as coefficient vectors, low degree first.
using PPoly = std::vector<uint32_t>;

inline void trim(PPoly& f)
{
    while (!f.empty() && f.back() == 0) f.pop_back();
}

inline uint32_t inv_mod(uint32_t a, uint32_t p)
{
    int64_t t = 0, nt = 1, r = p, nr = a % p;
    while (nr) {
        int64_t q = r / nr;
        t -= q * nt; std::swap(t, nt);
        r -= q * nr; std::swap(r, nr);
    }
    if (r != 1) throw std::domain_error("not invertible mod p");
    return static_cast<uint32_t>((t % (int64_t)p + p) % p);
}

inline PPoly pmod(PPoly a, const PPoly& m, uint32_t p)
{
    trim(a);
    size_t dm = m.size() - 1;
    uint32_t li = inv_mod(m.back(), p);
    while (a.size() >= m.size()) {
        uint64_t c = (uint64_t)a.back() * li % p;
        size_t sh = a.size() - 1 - dm;
        for (size_t i = 0; i <= dm; ++i)
            a[sh + i] = (uint32_t)((a[sh + i] + (uint64_t)(p - m[i]) * c) % p);
        trim(a);
    }
    return a;
}

inline PPoly pmulmod(const PPoly& a, const PPoly& b, const PPoly& m, uint32_t p)
{
    if (a.empty() || b.empty()) return {};
    PPoly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = (uint32_t)((r[i + j] + (uint64_t)a[i] * b[j]) % p);
    return pmod(std::move(r), m, p);
}

inline PPoly ppowmod(PPoly a, uint64_t e, const PPoly& m, uint32_t p)
{
    PPoly r{1};
    a = pmod(a, m, p);
    while (e) {
        if (e & 1) r = pmulmod(r, a, m, p);
        a = pmulmod(a, a, m, p);
        e >>= 1;
    }
    return r;
}

inline PPoly pgcd(PPoly a, PPoly b, uint32_t p)
{
    trim(a); trim(b);
    while (!b.empty()) {
        PPoly r = pmod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        uint32_t li = inv_mod(a.back(), p);
        for (auto& c : a) c = (uint32_t)((uint64_t)c * li % p);
    }
    return a;
}

inline PPoly psub(PPoly a, const PPoly& b, uint32_t p)
{
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (size_t i = 0; i < b.size(); ++i) a[i] = (a[i] + p - b[i]) % p;
    trim(a);
    return a;
}

// Rabin irreducibility test for monic f of degree n over F_p.
inline bool irreducible_fp(const PPoly& f, uint32_t p)
{
    size_t n = f.size() - 1;
    if (n == 0) return false;
    if (n == 1) return true;
    PPoly x{0, 1};
    for (uint64_t r : prime_factors(n)) {
        uint64_t k = n / r;
        PPoly h = x;
        for (uint64_t i = 0; i < k; ++i) h = ppowmod(h, p, f, p);
        PPoly g = pgcd(f, psub(h, x, p), p);
        if (g.size() != 1) return false;
    }
    PPoly h = x;
    for (uint64_t i = 0; i < n; ++i) h = ppowmod(h, p, f, p);
    return psub(h, x, p).empty();
}

}  // namespace detail

class Fq {
public:
    uint32_t p = 0;
    int D = 0;
    uint32_t q = 0;
    detail::PPoly modulus;  // monic, degree D, over F_p
    uint32_t gen = 0;       // multiplicative generator (packed)

    Fq(uint32_t p_, detail::PPoly mod) : p(p_), D((int)mod.size() - 1), modulus(std::move(mod))
    {
        uint64_t size = 1;
        for (int i = 0; i < D; ++i) size *= p;
        if (size > kMaxFieldSize)
            throw UnsupportedError("finite field of size " + std::to_string(size) +
                                   " exceeds the table cap");
        q = (uint32_t)size;
        build_tables();
    }

    uint32_t zero() const { return 0; }
    uint32_t one() const { return 1; }

    uint32_t from_int(long long n) const
    {
        long long r = n % (long long)p;
        if (r < 0) r += p;
        return (uint32_t)r;
    }

    uint32_t add(uint32_t a, uint32_t b) const
    {
        if (D == 1) {
            uint32_t s = a + b;
            return s >= p ? s - p : s;
        }
        if (a == 0) return b;
        if (b == 0) return a;
        uint32_t la = log_[a], lb = log_[b];
        uint32_t d = lb >= la ? lb - la : lb + (q - 1) - la;
        int32_t z = zech_[d];
        if (z < 0) return 0;
        uint32_t k = la + (uint32_t)z;
        if (k >= q - 1) k -= q - 1;
        return exp_[k];
    }

    uint32_t neg(uint32_t a) const
    {
        if (a == 0) return 0;
        if (D == 1) return p - a;
        uint32_t k = log_[a] + (q - 1) / 2;
        if (k >= q - 1) k -= q - 1;
        return exp_[k];
    }

    uint32_t sub(uint32_t a, uint32_t b) const { return add(a, neg(b)); }

    uint32_t mul(uint32_t a, uint32_t b) const
    {
        if (a == 0 || b == 0) return 0;
        if (D == 1) return (uint32_t)((uint64_t)a * b % p);
        uint32_t k = log_[a] + log_[b];
        if (k >= q - 1) k -= q - 1;
        return exp_[k];
    }

    uint32_t inv(uint32_t a) const
    {
        if (a == 0) throw std::domain_error("division by zero in finite field");
        uint32_t la = log_[a];
        return exp_[la == 0 ? 0 : q - 1 - la];
    }

    uint32_t div(uint32_t a, uint32_t b) const { return mul(a, inv(b)); }

    uint32_t pow(uint32_t a, long long e) const
    {
        if (e == 0) return 1;
        if (a == 0) {
            if (e < 0) throw std::domain_error("zero to negative power");
            return 0;
        }
        long long m = (long long)(q - 1);
        long long k = ((long long)log_[a] * (e % m)) % m;
        if (k < 0) k += m;
        return exp_[(size_t)k];
    }

    uint32_t log(uint32_t a) const
    {
        if (a == 0) throw std::domain_error("log of zero");
        return log_[a];
    }

    uint32_t exp(uint64_t k) const { return exp_[k % (q - 1)]; }

    // Multiplicative order of a nonzero element.
    uint64_t order(uint32_t a) const
    {
        uint64_t m = q - 1;
        uint64_t l = log(a);
        return m / std::gcd(m, l);
    }

    bool is_square(uint32_t a) const { return a == 0 || (log_[a] % 2) == 0; }

    std::optional<uint32_t> sqrt(uint32_t a) const
    {
        if (a == 0) return 0u;
        uint32_t l = log_[a];
        if (l % 2) return std::nullopt;
        uint32_t r1 = exp_[l / 2], r2 = neg(r1);
        return std::min(r1, r2);
    }

    // All n-th roots of a (sorted).
    std::vector<uint32_t> nth_roots(uint32_t a, uint64_t n) const
    {
        if (a == 0) return {0};
        uint64_t m = q - 1, l = log_[a], nm = n % m;
        uint64_t g = nm == 0 ? m : std::gcd(nm, m);
        if (l % g) return {};
        uint64_t mg = m / g, k0 = 0;
        if (mg > 1) {
            // k0 = (l/g) * (n/g)^{-1} mod m/g
            int64_t t = 0, nt = 1, r = (int64_t)mg, nr = (int64_t)((nm / g) % mg);
            while (nr) {
                int64_t qq = r / nr;
                t -= qq * nt; std::swap(t, nt);
                r -= qq * nr; std::swap(r, nr);
            }
            uint64_t invn = (uint64_t)((t % (int64_t)mg + (int64_t)mg) % (int64_t)mg);
            k0 = (unsigned __int128)(l / g) * invn % mg;
        }
        std::vector<uint32_t> out;
        for (uint64_t j = 0; j < g; ++j) out.push_back(exp_[(k0 + j * mg) % m]);
        std::sort(out.begin(), out.end());
        return out;
    }

    // Primitive n-th root of unity if n | q-1.
    std::optional<uint32_t> root_of_unity(uint64_t n) const
    {
        if ((q - 1) % n) return std::nullopt;
        return exp_[(q - 1) / n];
    }

    uint32_t frobenius(uint32_t a, int k = 1) const
    {
        uint64_t e = 1;
        for (int i = 0; i < k; ++i) e *= p;
        return pow(a, (long long)(e % (q - 1)));
    }

    std::vector<uint32_t> digits(uint32_t a) const
    {
        std::vector<uint32_t> d(D);
        for (int i = 0; i < D; ++i) { d[i] = a % p; a /= p; }
        return d;
    }

    uint32_t pack(const std::vector<uint32_t>& d) const
    {
        uint32_t v = 0;
        for (int i = (int)d.size() - 1; i >= 0; --i) v = v * p + d[i] % p;
        return v;
    }

    // Generator of the defining modulus (the symbol `a`).
    uint32_t alpha() const { return D == 1 ? 0 : p; }

    std::string to_string(uint32_t a) const
    {
        if (D == 1) return std::to_string(a);
        if (a == 0) return "0";
        auto d = digits(a);
        std::string s;
        for (int i = D - 1; i >= 0; --i) {
            if (d[i] == 0) continue;
            if (!s.empty()) s += "+";
            if (i == 0) s += std::to_string(d[i]);
            else {
                if (d[i] != 1) s += std::to_string(d[i]) + "*";
                s += i == 1 ? "a" : "a^" + std::to_string(i);
            }
        }
        return s;
    }

private:
    std::vector<uint32_t> exp_, log_;
    std::vector<int32_t> zech_;

    void build_tables()
    {
        using namespace detail;
        if (D == 1 && q > 1) {
            // find primitive root mod p
            auto fs = prime_factors(p - 1);
            for (uint32_t g = 1; g < p; ++g) {
                bool ok = true;
                for (auto r : fs) {
                    uint64_t x = 1, b = g, e = (p - 1) / r;
                    while (e) { if (e & 1) x = x * b % p; b = b * b % p; e >>= 1; }
                    if (x == 1) { ok = false; break; }
                }
                if (ok) { gen = g; break; }
            }
        } else {
            auto fs = prime_factors(q - 1);
            for (uint32_t g = 2; g < q; ++g) {
                PPoly gp = to_ppoly(g);
                bool ok = true;
                for (auto r : fs) {
                    PPoly x = ppowmod(gp, (q - 1) / r, modulus, p);
                    if (x.size() == 1 && x[0] == 1) { ok = false; break; }
                }
                if (ok) { gen = g; break; }
            }
        }
        exp_.assign(q - 1, 0);
        log_.assign(q, 0);
        PPoly cur{1};
        PPoly gp = to_ppoly(gen);
        for (uint32_t k = 0; k + 1 < q; ++k) {
            uint32_t v = from_ppoly(cur);
            exp_[k] = v;
            log_[v] = k;
            cur = pmulmod(cur, gp, modulus, p);
        }
        zech_.assign(q - 1, -1);
        if (D > 1) {
            for (uint32_t k = 0; k + 1 < q; ++k) {
                auto d = digits(exp_[k]);
                d[0] = (d[0] + 1) % p;
                uint32_t v = pack(d);
                zech_[k] = v == 0 ? -1 : (int32_t)log_[v];
            }
        }
    }

    detail::PPoly to_ppoly(uint32_t a) const
    {
        detail::PPoly r;
        for (int i = 0; i < D; ++i) { r.push_back(a % p); a /= p; }
        detail::trim(r);
        return r;
    }

    uint32_t from_ppoly(const detail::PPoly& f) const
    {
        uint32_t v = 0;
        for (int i = (int)f.size() - 1; i >= 0; --i) v = v * p + f[i];
        return v;
    }
};

// Field embedding src -> dst (src.D | dst.D), fixed by sending the generator of
// src's modulus to the smallest root of that modulus in dst.
struct Embedding {
    const Fq* src = nullptr;
    const Fq* dst = nullptr;
    std::vector<uint32_t> table;
    uint32_t operator()(uint32_t a) const { return table[a]; }
    bool identity() const { return src == dst; }
};

namespace detail {

struct Registry {
    std::mutex mu;
    std::map<std::pair<uint32_t, PPoly>, std::unique_ptr<Fq>> fields;
    std::map<std::pair<uint32_t, int>, const Fq*> canonical;
    std::map<std::pair<const Fq*, const Fq*>, std::unique_ptr<Embedding>> embeddings;
};

inline Registry& registry()
{
    static Registry r;
    return r;
}

inline const Fq* intern_locked(Registry& R, uint32_t p, const PPoly& mod)
{
    auto key = std::make_pair(p, mod);
    auto it = R.fields.find(key);
    if (it != R.fields.end()) return it->second.get();
    auto f = std::make_unique<Fq>(p, mod);
    const Fq* ptr = f.get();
    R.fields.emplace(key, std::move(f));
    return ptr;
}

}  // namespace detail

// Field with a caller-supplied modulus (must be monic irreducible over F_p).
inline const Fq* field_with_modulus(uint32_t p, std::vector<uint32_t> modulus)
{
    if (p < 5 || !detail::is_prime(p))
        throw UnsupportedError("characteristic must be a prime >= 5");
    for (auto& c : modulus) c %= p;
    detail::trim(modulus);
    if (modulus.size() < 2) throw std::invalid_argument("modulus must have degree >= 1");
    if (modulus.back() != 1) throw std::invalid_argument("modulus must be monic");
    if (!detail::irreducible_fp(modulus, p)) throw std::invalid_argument("modulus is not irreducible");
    auto& R = detail::registry();
    std::lock_guard<std::mutex> lk(R.mu);
    return detail::intern_locked(R, p, modulus);
}

// Canonical F_{p^D}: modulus is the smallest monic irreducible of degree D
// (for D = 1 the modulus is t).
inline const Fq* field(uint32_t p, int D)
{
    if (p < 5 || !detail::is_prime(p))
        throw UnsupportedError("characteristic must be a prime >= 5");
    if (D < 1) throw std::invalid_argument("field degree must be positive");
    auto& R = detail::registry();
    {
        std::lock_guard<std::mutex> lk(R.mu);
        auto it = R.canonical.find({p, D});
        if (it != R.canonical.end()) return it->second;
    }
    uint64_t size = 1;
    for (int i = 0; i < D; ++i) {
        size *= p;
        if (size > kMaxFieldSize)
            throw UnsupportedError("finite field F_" + std::to_string(p) + "^" + std::to_string(D) +
                                   " exceeds the table cap");
    }
    detail::PPoly mod;
    if (D == 1) mod = {0, 1};
    else {
        for (uint64_t idx = 0; idx < size; ++idx) {
            detail::PPoly f(D + 1);
            uint64_t v = idx;
            for (int i = 0; i < D; ++i) { f[i] = v % p; v /= p; }
            f[D] = 1;
            if (f[0] == 0) continue;
            if (detail::irreducible_fp(f, p)) { mod = f; break; }
        }
    }
    std::lock_guard<std::mutex> lk(R.mu);
    const Fq* F = detail::intern_locked(R, p, mod);
    R.canonical[{p, D}] = F;
    return F;
}

inline const Embedding& embedding(const Fq* src, const Fq* dst)
{
    auto& R = detail::registry();
    {
        std::lock_guard<std::mutex> lk(R.mu);
        auto it = R.embeddings.find({src, dst});
        if (it != R.embeddings.end()) return *it->second;
    }
    if (src->p != dst->p || dst->D % src->D != 0)
        throw std::invalid_argument("no embedding between these fields");
    auto E = std::make_unique<Embedding>();
    E->src = src;
    E->dst = dst;
    E->table.resize(src->q);
    if (src == dst || src->D == 1) {
        for (uint32_t a = 0; a < src->q; ++a) E->table[a] = a;
    } else {
        // candidates for a root: elements of the subfield of size src->q
        uint64_t step = (dst->q - 1) / (src->q - 1);
        uint32_t beta = 0;
        bool found = false;
        std::vector<uint32_t> roots;
        for (uint64_t k = 0; k + 1 < src->q; ++k) {
            uint32_t b = dst->exp(k * step);
            uint32_t v = 0;
            for (int i = (int)src->modulus.size() - 1; i >= 0; --i)
                v = dst->add(dst->mul(v, b), dst->from_int(src->modulus[i]));
            if (v == 0) roots.push_back(b);
        }
        if (!roots.empty()) { beta = *std::min_element(roots.begin(), roots.end()); found = true; }
        if (!found) throw std::logic_error("embedding root not found");
        for (uint32_t a = 0; a < src->q; ++a) {
            auto d = src->digits(a);
            uint32_t v = 0;
            for (int i = (int)d.size() - 1; i >= 0; --i) v = dst->add(dst->mul(v, beta), dst->from_int(d[i]));
            E->table[a] = v;
        }
    }
    std::lock_guard<std::mutex> lk(R.mu);
    auto& slot = R.embeddings[{src, dst}];
    if (!slot) slot = std::move(E);
    return *slot;
}

// Wrapper carrying its field, for generic code (group law, division
// polynomials) over residue fields.
struct FqElem {
    const Fq* F = nullptr;
    uint32_t v = 0;

    FqElem() = default;
    FqElem(const Fq* f, uint32_t x) : F(f), v(x) {}

    friend FqElem operator+(FqElem a, FqElem b) { return {a.F, a.F->add(a.v, b.v)}; }
    friend FqElem operator-(FqElem a, FqElem b) { return {a.F, a.F->sub(a.v, b.v)}; }
    friend FqElem operator*(FqElem a, FqElem b) { return {a.F, a.F->mul(a.v, b.v)}; }
    friend FqElem operator/(FqElem a, FqElem b) { return {a.F, a.F->div(a.v, b.v)}; }
    FqElem operator-() const { return {F, F->neg(v)}; }
    friend bool operator==(FqElem a, FqElem b) { return a.v == b.v; }
    friend bool operator!=(FqElem a, FqElem b) { return a.v != b.v; }
    bool is_zero() const { return v == 0; }
    FqElem scaled(long long n) const { return {F, F->mul(v, F->from_int(n))}; }
    FqElem constant(long long n) const { return {F, F->from_int(n)}; }
    FqElem inverse() const { return {F, F->inv(v)}; }
};

}  // namespace ecff
