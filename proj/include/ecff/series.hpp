#pragma once

// Truncated Laurent series over a finite field with absolute-precision
// tracking: a series with (val, prec) is known modulo pi^(prec/ram) and its
// coefficient vector covers exponents val .. prec-1 (in units of 1/ram).

#include "fq.hpp"

#include <climits>
#include <functional>
#include <sstream>

namespace ecff {

struct PrecisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Series {
public:
    const Fq* F = nullptr;
    int ram = 1;
    long val = 0;
    long prec = 0;
    std::vector<uint32_t> c;

    Series() = default;
    Series(const Fq* f, long v, long pr, std::vector<uint32_t> coeffs, int e = 1)
        : F(f), ram(e), val(v), prec(pr), c(std::move(coeffs))
    {
        if ((long)c.size() > prec - val) c.resize(std::max(0L, prec - val));
        normalize();
    }

    static Series zero(const Fq* f, long prec, int e = 1) { return Series(f, prec, prec, {}, e); }
    static Series constant(const Fq* f, uint32_t a, long prec, int e = 1)
    {
        if (prec <= 0) return zero(f, prec, e);
        return Series(f, 0, prec, {a}, e);
    }
    static Series monomial(const Fq* f, uint32_t a, long k, long prec, int e = 1)
    {
        if (prec <= k) return zero(f, prec, e);
        return Series(f, k, prec, {a}, e);
    }

    void normalize()
    {
        size_t z = 0;
        while (z < c.size() && c[z] == 0) ++z;
        if (z) {
            c.erase(c.begin(), c.begin() + (long)z);
            val += (long)z;
        }
        if (c.empty()) val = prec;
        c.resize(std::max(0L, prec - val), 0);
    }

    bool is_zero() const { return c.empty(); }
    long rel_prec() const { return prec - val; }

    long valuation() const
    {
        if (c.empty()) throw PrecisionError("series valuation not determined at this precision");
        return val;
    }

    uint32_t lead() const
    {
        if (c.empty()) throw PrecisionError("series leading term not determined");
        return c[0];
    }

    uint32_t coeff(long k) const
    {
        if (k >= prec) throw PrecisionError("coefficient beyond precision");
        if (k < val) return 0;
        return c[(size_t)(k - val)];
    }

    Series truncated(long p) const
    {
        Series r = *this;
        if (p < r.prec) {
            r.prec = p;
            if (r.val > p) r.val = p;
            r.c.resize(std::max(0L, p - r.val));
            r.normalize();
        }
        return r;
    }

    // Raise the precision to p, treating unknown coefficients as zero (used
    // by Newton iterations, which repair them on the next step).
    Series padded(long p) const
    {
        if (p <= prec) return truncated(p);
        Series r = *this;
        if (r.c.empty()) r.val = p;
        r.prec = p;
        r.c.resize((size_t)std::max(0L, p - r.val), 0);
        return r;
    }

    Series shifted(long k) const
    {
        Series r = *this;
        r.val += k;
        r.prec += k;
        return r;
    }

    friend Series operator+(const Series& a, const Series& b) { return combine(a, b, false); }
    friend Series operator-(const Series& a, const Series& b) { return combine(a, b, true); }

    Series operator-() const
    {
        Series r = *this;
        for (auto& x : r.c) x = F->neg(x);
        return r;
    }

    friend Series operator*(const Series& a, const Series& b)
    {
        check(a, b);
        const Fq* F = a.F;
        long v = a.val + b.val;
        long pr = std::min(a.prec + b.val, b.prec + a.val);
        long L = std::max(0L, pr - v);
        std::vector<uint32_t> r((size_t)L, 0);
        size_t la = std::min(a.c.size(), (size_t)L), lb = std::min(b.c.size(), (size_t)L);
        if (F->D == 1) {
            uint64_t p = F->p;
            std::vector<uint64_t> acc((size_t)L, 0);
            uint64_t limit = ~0ull / 2 - p * p;
            for (size_t i = 0; i < la; ++i) {
                uint64_t ai = a.c[i];
                if (!ai) continue;
                size_t jm = std::min(lb, (size_t)L - i);
                for (size_t j = 0; j < jm; ++j) {
                    uint64_t& s = acc[i + j];
                    s += ai * b.c[j];
                    if (s > limit) s %= p;
                }
            }
            for (size_t k = 0; k < (size_t)L; ++k) r[k] = (uint32_t)(acc[k] % p);
        } else {
            for (size_t i = 0; i < la; ++i) {
                if (!a.c[i]) continue;
                size_t jm = std::min(lb, (size_t)L - i);
                for (size_t j = 0; j < jm; ++j) r[i + j] = F->add(r[i + j], F->mul(a.c[i], b.c[j]));
            }
        }
        return Series(F, v, pr, std::move(r), a.ram);
    }

    Series inverse() const
    {
        if (c.empty()) throw PrecisionError("inverse of a series indistinguishable from zero");
        long L = prec - val;
        std::vector<uint32_t> d((size_t)L, 0);
        uint32_t i0 = F->inv(c[0]);
        d[0] = i0;
        for (long k = 1; k < L; ++k) {
            uint32_t s = 0;
            for (long i = 1; i <= k && i < (long)c.size(); ++i) s = F->add(s, F->mul(c[(size_t)i], d[(size_t)(k - i)]));
            d[(size_t)k] = F->neg(F->mul(s, i0));
        }
        return Series(F, -val, -val + L, std::move(d), ram);
    }

    friend Series operator/(const Series& a, const Series& b) { return a * b.inverse(); }

    Series scaled(uint32_t a) const
    {
        Series r = *this;
        for (auto& x : r.c) x = F->mul(x, a);
        r.normalize();
        return r;
    }

    Series scaled_int(long long n) const { return scaled(F->from_int(n)); }

    Series pow(long long n) const
    {
        if (n < 0) return inverse().pow(-n);
        Series r;
        Series b = *this;
        bool first = true;
        while (n) {
            if (n & 1) {
                if (first) { r = b; first = false; }
                else r = r * b;
            }
            n >>= 1;
            if (n) b = b * b;
        }
        if (first) return constant(F, 1, prec - val, ram);
        return r;
    }

    std::optional<Series> sqrt() const
    {
        if (c.empty()) return zero(F, prec / 2, ram);
        if (val % 2) return std::nullopt;
        auto r0 = F->sqrt(c[0]);
        if (!r0) return std::nullopt;
        long L = prec - val;
        std::vector<uint32_t> r((size_t)L, 0);
        r[0] = *r0;
        uint32_t inv2 = F->inv(F->mul(F->from_int(2), r[0]));
        for (long k = 1; k < L; ++k) {
            uint32_t s = c[(size_t)k];
            for (long i = 1; i < k; ++i) s = F->sub(s, F->mul(r[(size_t)i], r[(size_t)(k - i)]));
            r[(size_t)k] = F->mul(s, inv2);
        }
        return Series(F, val / 2, val / 2 + L, std::move(r), ram);
    }

    // Apply the field map coefficientwise (Frobenius, embeddings).
    Series mapped(const std::function<uint32_t(uint32_t)>& f, const Fq* G = nullptr) const
    {
        Series r = *this;
        if (G) r.F = G;
        for (auto& x : r.c) x = f(x);
        r.normalize();
        return r;
    }

    // Same element with ramification denominator e (a multiple of ram).
    Series with_ram(int e) const
    {
        if (e % ram) throw std::invalid_argument("ramification must be a multiple");
        int k = e / ram;
        Series r;
        r.F = F;
        r.ram = e;
        r.val = val * k;
        r.prec = prec * k;
        r.c.assign((size_t)(r.prec - r.val), 0);
        for (size_t i = 0; i < c.size(); ++i) r.c[i * k] = c[i];
        r.normalize();
        return r;
    }

    std::string to_string(const std::string& var = "pi") const
    {
        std::ostringstream os;
        bool any = false;
        for (size_t i = 0; i < c.size(); ++i) {
            if (!c[i]) continue;
            if (any) os << " + ";
            any = true;
            long e = val + (long)i;
            std::string cs = F->to_string(c[i]);
            if (cs.find('+') != std::string::npos) cs = "(" + cs + ")";
            os << cs;
            if (e != 0) {
                os << "*" << var << "^";
                if (ram == 1) os << e;
                else os << "(" << e << "/" << ram << ")";
            }
        }
        if (!any) os << "0";
        os << " + O(" << var << "^";
        if (ram == 1) os << prec;
        else os << "(" << prec << "/" << ram << ")";
        os << ")";
        return os.str();
    }

private:
    static void check(const Series& a, const Series& b)
    {
        if (a.F != b.F) throw std::invalid_argument("series over different fields");
        if (a.ram != b.ram) throw std::invalid_argument("series with different ramification");
    }

    static Series combine(const Series& a, const Series& b, bool negate_b)
    {
        check(a, b);
        const Fq* F = a.F;
        long pr = std::min(a.prec, b.prec);
        long v = std::min(a.val, b.val);
        if (v > pr) v = pr;
        std::vector<uint32_t> r((size_t)std::max(0L, pr - v), 0);
        for (size_t i = 0; i < a.c.size(); ++i) {
            long e = a.val + (long)i;
            if (e >= pr) break;
            r[(size_t)(e - v)] = a.c[i];
        }
        for (size_t i = 0; i < b.c.size(); ++i) {
            long e = b.val + (long)i;
            if (e >= pr) break;
            uint32_t x = negate_b ? F->neg(b.c[i]) : b.c[i];
            r[(size_t)(e - v)] = F->add(r[(size_t)(e - v)], x);
        }
        return Series(F, v, pr, std::move(r), a.ram);
    }
};

// Evaluate a power series with coefficients coeffs[k] (k >= 0) at s, where
// s has positive valuation; terms beyond the precision of the result are
// dropped automatically.
inline Series compose(const std::vector<uint32_t>& coeffs, const Series& s, long prec)
{
    if (!s.is_zero() && s.val <= 0) throw std::invalid_argument("compose needs positive valuation");
    const Fq* F = s.F;
    long sv = s.is_zero() ? s.prec : s.val;
    size_t n = coeffs.size();
    if (sv > 0) n = std::min(n, (size_t)(prec / sv + 2));
    Series r = Series::zero(F, prec, s.ram);
    for (size_t k = n; k-- > 0;) {
        r = r * s + Series::constant(F, coeffs[k], prec, s.ram);
        r = r.truncated(prec);
    }
    return r;
}

}  // namespace ecff
