#pragma once

// The rational function field K = F_q(t): elements, places, valuations,
// residues, local expansions and constant-field extensions.

#include "poly.hpp"
#include "rational.hpp"
#include "series.hpp"

#include <cctype>

namespace ecff {

class RatFunc {
public:
    Poly num, den;  // coprime, den monic

    RatFunc() = default;
    explicit RatFunc(const Fq* F) : num(F), den(Poly::one(F)) {}
    RatFunc(Poly n) : num(std::move(n)), den(Poly::one(num.F)) {}
    RatFunc(Poly n, Poly d) : num(std::move(n)), den(std::move(d)) { normalize(); }

    static RatFunc constant(const Fq* F, uint32_t a) { return RatFunc(Poly::constant(F, a)); }
    static RatFunc from_int(const Fq* F, long long n) { return constant(F, F->from_int(n)); }
    static RatFunc t(const Fq* F) { return RatFunc(Poly::t(F)); }

    const Fq* field() const { return num.F; }
    bool is_zero() const { return num.is_zero(); }
    bool is_constant() const { return num.is_constant() && den.is_constant(); }
    bool is_poly() const { return den.is_one(); }

    void normalize()
    {
        if (den.is_zero()) throw std::domain_error("rational function with zero denominator");
        if (num.is_zero()) {
            den = Poly::one(num.F);
            return;
        }
        Poly g = gcd(num, den);
        if (!g.is_one()) {
            num = num / g;
            den = den / g;
        }
        uint32_t l = den.lead();
        if (l != 1) {
            uint32_t li = num.F->inv(l);
            num = num.scaled(li);
            den = den.scaled(li);
        }
    }

    friend RatFunc operator+(const RatFunc& a, const RatFunc& b) { return sum(a, b, false); }
    friend RatFunc operator-(const RatFunc& a, const RatFunc& b) { return sum(a, b, true); }

    RatFunc operator-() const
    {
        RatFunc r = *this;
        r.num = -r.num;
        return r;
    }

    friend RatFunc operator*(const RatFunc& a, const RatFunc& b)
    {
        if (a.is_zero() || b.is_zero()) return RatFunc(a.field());
        if (a.is_poly() && b.is_poly()) return RatFunc(a.num * b.num);
        Poly g1 = gcd(a.num, b.den), g2 = gcd(b.num, a.den);
        RatFunc r;
        r.num = (a.num / g1) * (b.num / g2);
        r.den = (a.den / g2) * (b.den / g1);
        uint32_t l = r.den.lead();
        if (l != 1) {
            uint32_t li = r.num.F->inv(l);
            r.num = r.num.scaled(li);
            r.den = r.den.scaled(li);
        }
        return r;
    }

    RatFunc inverse() const
    {
        if (is_zero()) throw std::domain_error("inverse of zero rational function");
        RatFunc r;
        r.num = den;
        r.den = num;
        uint32_t l = r.den.lead();
        if (l != 1) {
            uint32_t li = r.num.F->inv(l);
            r.num = r.num.scaled(li);
            r.den = r.den.scaled(li);
        }
        return r;
    }

    friend RatFunc operator/(const RatFunc& a, const RatFunc& b) { return a * b.inverse(); }

    RatFunc scaled(long long n) const { return *this * from_int(field(), n); }

    RatFunc pow(long long e) const
    {
        if (e < 0) return inverse().pow(-e);
        RatFunc r;
        r.num = num.pow((unsigned long long)e);
        r.den = den.pow((unsigned long long)e);
        return r;
    }

    friend bool operator==(const RatFunc& a, const RatFunc& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(const RatFunc& a, const RatFunc& b) { return !(a == b); }

    RatFunc mapped(const Embedding& E) const
    {
        RatFunc r;
        r.num = num.mapped(E);
        r.den = den.mapped(E);
        return r;
    }

    // Coefficientwise map (e.g. Frobenius on constants).
    RatFunc mapped(const std::function<uint32_t(uint32_t)>& f) const
    {
        Poly n = num, d = den;
        for (auto& x : n.c) x = f(x);
        for (auto& x : d.c) x = f(x);
        n.trim();
        d.trim();
        return RatFunc(n, d);
    }

    std::string to_string() const
    {
        if (den.is_one()) return num.to_string();
        auto wrap = [](const Poly& f) {
            std::string s = f.to_string();
            bool plain = s == "t" || std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isdigit(ch); });
            return plain ? s : "(" + s + ")";
        };
        return wrap(num) + "/" + wrap(den);
    }

private:
    static RatFunc sum(const RatFunc& a, const RatFunc& b, bool negate)
    {
        Poly bn = negate ? -b.num : b.num;
        if (a.den == b.den) {
            if (a.den.is_one()) return RatFunc(a.num + bn);
            return RatFunc(a.num + bn, a.den);
        }
        if (a.den.is_one()) {
            RatFunc r;
            r.num = a.num * b.den + bn;
            r.den = b.den;
            return r;
        }
        if (b.den.is_one()) {
            RatFunc r;
            r.num = a.num + bn * a.den;
            r.den = a.den;
            return r;
        }
        Poly g = gcd(a.den, b.den);
        Poly ad = a.den / g, bd = b.den / g;
        Poly n = a.num * bd + bn * ad;
        Poly d = a.den * bd;
        Poly g2 = gcd(n, g);
        RatFunc r;
        if (n.is_zero()) return RatFunc(a.field());
        if (!g2.is_one()) {
            n = n / g2;
            d = d / g2;
        }
        r.num = n;
        r.den = d;
        return r;
    }
};

// ---------------------------------------------------------------------------
// Places

struct Place {
    bool inf = false;
    Poly P;       // monic irreducible (finite places)
    int deg = 1;  // over the constant field of P

    static Place infinity(const Fq* F)
    {
        Place v;
        v.inf = true;
        v.P = Poly(F);
        return v;
    }
    static Place finite(const Poly& P)
    {
        if (P.deg() < 1 || P.lead() != 1) throw std::invalid_argument("place polynomial must be monic of positive degree");
        Place v;
        v.P = P;
        v.deg = P.deg();
        return v;
    }

    const Fq* field() const { return P.F; }

    std::string to_string() const { return inf ? "inf" : "(" + P.to_string() + ")"; }

    friend bool operator==(const Place& a, const Place& b) { return a.inf == b.inf && (a.inf || a.P == b.P); }
    friend bool operator!=(const Place& a, const Place& b) { return !(a == b); }
    friend bool operator<(const Place& a, const Place& b)
    {
        if (a.inf != b.inf) return b.inf;  // finite places first
        if (a.inf) return false;
        return a.P < b.P;
    }
};

// Exponent of P in f (f != 0); returns f / P^k through `rest` if given.
inline int strip_place(const Poly& f, const Poly& P, Poly* rest = nullptr)
{
    if (f.is_zero()) throw std::domain_error("infinite valuation");
    int k = 0;
    Poly g = f;
    while (g.deg() >= P.deg()) {
        auto [qq, r] = Poly::divmod(g, P);
        if (!r.is_zero()) break;
        g = std::move(qq);
        ++k;
    }
    if (rest) *rest = std::move(g);
    return k;
}

inline int ord_at(const Poly& f, const Place& v)
{
    if (f.is_zero()) throw std::domain_error("infinite valuation");
    if (v.inf) return -f.deg();
    return strip_place(f, v.P);
}

inline int ord_at(const RatFunc& a, const Place& v)
{
    if (a.is_zero()) throw std::domain_error("infinite valuation");
    if (v.inf) return a.den.deg() - a.num.deg();
    return ord_at(a.num, v) - ord_at(a.den, v);
}

// v(a) = deg(v) * ord_v(a)
inline long vdeg(const RatFunc& a, const Place& v) { return (long)v.deg * ord_at(a, v); }

inline LogQ log_abs(const RatFunc& a, const Place& v) { return LogQ(-(long)v.deg * ord_at(a, v)); }

// log+|a|_v = max(0, log|a|_v); zero maps to 0.
inline LogQ log_plus(const RatFunc& a, const Place& v)
{
    if (a.is_zero()) return LogQ(0);
    return max_q(LogQ(0), log_abs(a, v));
}

inline std::vector<Place> places_of(const Poly& f)
{
    std::vector<Place> out;
    if (f.is_zero()) return out;
    for (auto& [g, m] : factor_poly(f)) out.push_back(Place::finite(g));
    return out;
}

// All places where a has a zero or a pole, plus infinity.
inline std::vector<Place> support(const RatFunc& a)
{
    std::vector<Place> out = places_of(a.num);
    for (auto& v : places_of(a.den)) out.push_back(v);
    out.push_back(Place::infinity(a.field()));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline void merge_places(std::vector<Place>& into, const std::vector<Place>& more)
{
    into.insert(into.end(), more.begin(), more.end());
    std::sort(into.begin(), into.end());
    into.erase(std::unique(into.begin(), into.end()), into.end());
}

// Weil height of an element of K: the degree of the map to P^1.
inline LogQ weil_height(const RatFunc& a)
{
    if (a.is_zero()) return LogQ(0);
    return LogQ(std::max(a.num.deg(), a.den.deg()));
}

// Sum over the support of log+|a|_v, the place-by-place form of the height.
inline LogQ weil_height_local(const RatFunc& a)
{
    LogQ s = 0;
    if (a.is_zero()) return s;
    for (auto& v : support(a)) s += log_plus(a, v);
    return s;
}

// ---------------------------------------------------------------------------
// Completions

// The completion K_v with constants enlarged to F (an unramified extension of
// K_v of degree `extra` over the residue field when extra > 1). Series are in
// the uniformizer pi = P(t), or 1/t at infinity. Instances are interned and
// live for the process.
class LocalField {
public:
    const Fq* K = nullptr;
    Place v;
    int extra = 1;
    const Fq* F = nullptr;
    const Embedding* emb = nullptr;
    uint32_t alpha = 0;  // image of t in the residue field (finite places)

    LocalField(const Place& pl, int ext) : K(pl.field()), v(pl), extra(ext)
    {
        if (pl.inf) K = pl.P.F;
        int k = pl.inf ? 1 : pl.deg;
        F = field(K->p, K->D * k * extra);
        emb = &embedding(K, F);
        if (!pl.inf) {
            auto rts = roots(pl.P.mapped(*emb));
            if (rts.empty()) throw std::logic_error("place polynomial has no root in its residue field");
            alpha = rts.front();
        }
    }

    int residue_degree() const { return F->D / K->D; }

    uint32_t embed(uint32_t c) const { return (*emb)(c); }

    // t as a series in pi at absolute precision W (finite places).
    Series t_series(long W) const
    {
        std::lock_guard<std::mutex> lk(mu_);
        if (tcache_.F && tcache_.prec >= W) return tcache_.truncated(W);
        Poly PF = v.P.mapped(*emb);
        Series pi = Series::monomial(F, 1, 1, W);
        Series T;
        if (v.P.deg() == 1) {
            T = pi;
        } else {
            Poly dP = PF.derivative();
            uint32_t d0 = dP.eval(alpha);
            T = pi.scaled(F->inv(d0));
            for (long cur = 2;; cur *= 2) {
                long w = std::min(cur + 1, W);
                T = T.padded(w);
                Series tt = Series::constant(F, alpha, w) + T;
                Series val = eval_poly(PF, tt, w) - pi.truncated(w);
                Series der = eval_poly(dP, tt, w);
                T = (T - val / der).truncated(w);
                if (w >= W) break;
            }
        }
        tcache_ = Series::constant(F, alpha, W) + T;
        return tcache_;
    }

    static Series eval_poly(const Poly& f, const Series& s, long W)
    {
        Series r = Series::zero(s.F, W);
        for (int i = f.deg(); i >= 0; --i) r = (r * s + Series::constant(s.F, f.c[(size_t)i], W)).truncated(W);
        return r;
    }

    // Expansion of a nonzero polynomial to relative precision rel.
    Series expand(const Poly& f, long rel) const
    {
        if (f.is_zero()) throw std::domain_error("expansion of zero");
        if (rel < 0) rel = 0;
        if (v.inf) {
            int n = f.deg();
            std::vector<uint32_t> rc;
            for (int i = 0; i <= n && i < rel; ++i) rc.push_back(embed(f.c[(size_t)(n - i)]));
            return Series(F, -n, -n + rel, std::move(rc));
        }
        Poly rest;
        int k = strip_place(f, v.P, &rest);
        Series ts = t_series(rel);
        Series s = eval_poly(rest.mapped(*emb), ts, rel);
        return s.shifted(k);
    }

    Series expand(const RatFunc& a, long rel) const
    {
        Series n = expand(a.num, rel), d = expand(a.den, rel);
        return n / d;
    }

    // Expansion to absolute precision prec (requires prec > ord).
    Series expand_abs(const RatFunc& a, long prec) const
    {
        long o = ord_at(a, v);
        if (prec <= o) throw std::invalid_argument("precision must exceed the valuation");
        return expand(a, prec - o);
    }

    uint32_t residue(const RatFunc& a) const
    {
        if (a.is_zero()) return 0;
        long o = ord_at(a, v);
        if (o < 0) throw std::domain_error("residue of an element with a pole");
        if (o > 0) return 0;
        return expand(a, 1).c[0];
    }

    // Residue of a unit power series given as num/den polynomials, without
    // any series work.
    uint32_t residue_poly(const Poly& f) const
    {
        if (v.inf) throw std::logic_error("residue_poly at infinity");
        return f.mapped(*emb).eval(alpha);
    }

private:
    mutable std::mutex mu_;
    mutable Series tcache_;
};

namespace detail {
struct LocalRegistry {
    std::mutex mu;
    std::map<std::tuple<const Fq*, bool, std::vector<uint32_t>, int>, std::unique_ptr<LocalField>> m;
};
inline LocalRegistry& local_registry()
{
    static LocalRegistry r;
    return r;
}
}  // namespace detail

inline const LocalField& local_field(const Place& v, int extra = 1)
{
    auto& R = detail::local_registry();
    auto key = std::make_tuple(v.P.F, v.inf, v.inf ? std::vector<uint32_t>{} : v.P.c, extra);
    {
        std::lock_guard<std::mutex> lk(R.mu);
        auto it = R.m.find(key);
        if (it != R.m.end()) return *it->second;
    }
    auto L = std::make_unique<LocalField>(v, extra);
    std::lock_guard<std::mutex> lk(R.mu);
    auto& slot = R.m[key];
    if (!slot) slot = std::move(L);
    return *slot;
}

inline Series laurent_expand(const RatFunc& a, const Place& v, long prec)
{
    if (a.is_zero()) throw std::domain_error("expansion of zero");
    return local_field(v).expand_abs(a, prec);
}

// Image of a in the residue field F_{q^deg(v)} (as given by local_field(v).F).
inline uint32_t residue(const RatFunc& a, const Place& v) { return local_field(v).residue(a); }

// ---------------------------------------------------------------------------
// Constant-field extensions

struct ConstantExtension {
    const Fq* base = nullptr;
    const Fq* ext = nullptr;
    const Embedding* emb = nullptr;
    int m = 1;

    RatFunc lift(const RatFunc& a) const { return a.mapped(*emb); }
    Poly lift(const Poly& f) const { return f.mapped(*emb); }

    // Places of F_{q^m}(t) above v, with degrees over the extended constants.
    std::vector<Place> places_above(const Place& v) const
    {
        if (v.inf) return {Place::infinity(ext)};
        return places_of(v.P.mapped(*emb));
    }

    // Residue degree f(w|v) = m deg(w) / deg(v); these sum to m over w | v.
    int residue_degree(const Place& w, const Place& v) const { return m * w.deg / v.deg; }
};

inline ConstantExtension constant_extend(const Fq* base, int m)
{
    if (m < 1) throw std::invalid_argument("extension degree must be positive");
    ConstantExtension E;
    E.base = base;
    E.m = m;
    E.ext = m == 1 ? base : field(base->p, base->D * m);
    E.emb = &embedding(base, E.ext);
    return E;
}

// ---------------------------------------------------------------------------
// Parsing "t^3+2*t+1", "(t^2+1)/(t+3)", with `a` the generator of F_q.

namespace detail {

class RatParser {
public:
    RatParser(const Fq* F, std::string s) : F_(F), s_(std::move(s)) {}

    RatFunc parse()
    {
        RatFunc r = expr();
        skip();
        if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return r;
    }

private:
    const Fq* F_;
    std::string s_;
    size_t i_ = 0;

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw std::invalid_argument("cannot parse \"" + s_ + "\": " + msg);
    }

    void skip()
    {
        while (i_ < s_.size() && std::isspace((unsigned char)s_[i_])) ++i_;
    }

    bool eat(char c)
    {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    RatFunc expr()
    {
        RatFunc r(F_);
        bool first = true;
        for (;;) {
            skip();
            bool neg = false;
            if (eat('-')) neg = true;
            else if (!first && !eat('+')) break;
            else if (first) eat('+');
            RatFunc tm = term();
            r = neg ? r - tm : r + tm;
            first = false;
            skip();
            if (i_ >= s_.size() || (s_[i_] != '+' && s_[i_] != '-')) break;
        }
        return r;
    }

    RatFunc term()
    {
        RatFunc r = factor();
        for (;;) {
            if (eat('*')) r = r * factor();
            else if (eat('/')) {
                RatFunc d = factor();
                if (d.is_zero()) fail("division by zero");
                r = r / d;
            } else break;
        }
        return r;
    }

    RatFunc factor()
    {
        RatFunc b = base();
        if (eat('^')) {
            skip();
            bool neg = eat('-');
            long long e = integer();
            if (neg) {
                if (b.is_zero()) fail("zero to a negative power");
                e = -e;
            }
            b = b.pow(e);
        }
        return b;
    }

    long long integer()
    {
        skip();
        size_t st = i_;
        long long v = 0;
        while (i_ < s_.size() && std::isdigit((unsigned char)s_[i_])) {
            v = v * 10 + (s_[i_] - '0');
            if (v > (1LL << 40)) fail("integer too large");
            ++i_;
        }
        if (st == i_) fail("expected an integer");
        return v;
    }

    RatFunc base()
    {
        skip();
        if (i_ >= s_.size()) fail("unexpected end of input");
        char c = s_[i_];
        if (c == '(') {
            ++i_;
            RatFunc r = expr();
            if (!eat(')')) fail("missing ')'");
            return r;
        }
        if (c == 't') {
            ++i_;
            return RatFunc::t(F_);
        }
        if (c == 'a') {
            ++i_;
            if (F_->D == 1) fail("symbol 'a' needs a constant field of degree > 1");
            return RatFunc::constant(F_, F_->alpha());
        }
        if (std::isdigit((unsigned char)c)) return RatFunc::from_int(F_, integer() % F_->p);
        if (c == '-') {
            ++i_;
            return -factor();
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

}  // namespace detail

inline RatFunc parse_ratfunc(const Fq* F, const std::string& s) { return detail::RatParser(F, s).parse(); }

inline Poly parse_poly(const Fq* F, const std::string& s)
{
    RatFunc r = parse_ratfunc(F, s);
    if (!r.is_poly()) throw std::invalid_argument("not a polynomial: " + s);
    return r.num;
}

inline Place parse_place(const Fq* F, const std::string& s)
{
    std::string t = s;
    t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char ch) { return std::isspace(ch); }), t.end());
    if (t == "inf") return Place::infinity(F);
    Poly P = parse_poly(F, t);
    if (P.lead() != 1 || !is_irreducible(P)) throw std::invalid_argument("place must be monic irreducible: " + s);
    return Place::finite(P);
}

}  // namespace ecff
