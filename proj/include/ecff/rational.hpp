#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>

namespace ecff {

using Rational = mpq_class;

// Logarithmic quantities: log|a|_v = -deg(v) * ord_v(a), so every one is an
// exact rational.
using LogQ = Rational;

inline Rational make_q(long num, long den = 1)
{
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rational& r)
{
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline Rational parse_rational(const std::string& s)
{
    Rational r;
    if (r.set_str(s, 10) != 0)
        throw std::invalid_argument("bad rational: " + s);
    r.canonicalize();
    return r;
}

inline mpz_class floor_q(const Rational& r)
{
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return q;
}

inline Rational frac_q(const Rational& r) { return r - Rational(floor_q(r)); }

// x mod m into [0, m) for m > 0.
inline Rational mod_q(const Rational& x, const Rational& m)
{
    Rational t = x / m;
    return x - Rational(floor_q(t)) * m;
}

inline Rational min_q(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max_q(const Rational& a, const Rational& b) { return a < b ? b : a; }

// Periodic Bernoulli functions.
inline Rational bernoulli_psi(const Rational& x) { return frac_q(x) - Rational(1, 2); }

inline Rational bernoulli_phi(const Rational& x)
{
    Rational f = frac_q(x);
    return f * f - f + Rational(1, 6);
}

// A rational or +infinity (used for i(P,P), lambda at coincident points).
struct ExtQ {
    std::optional<Rational> v;

    static ExtQ inf() { return {}; }
    static ExtQ of(Rational r) { return ExtQ{std::move(r)}; }
    bool is_inf() const { return !v.has_value(); }
    const Rational& value() const
    {
        if (!v) throw std::domain_error("infinite value");
        return *v;
    }
};

inline ExtQ min_ext(const ExtQ& a, const ExtQ& b)
{
    if (a.is_inf()) return b;
    if (b.is_inf()) return a;
    return ExtQ::of(min_q(*a.v, *b.v));
}

inline std::string to_string(const ExtQ& e) { return e.is_inf() ? "inf" : to_string(*e.v); }

}  // namespace ecff
