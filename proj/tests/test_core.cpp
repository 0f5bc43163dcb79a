// Finite fields, F_q(t), places and the Weierstrass layer.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ecff/io.hpp"

#include <random>

using namespace ecff;

namespace {

const Fq* F5() { return field(5, 1); }
RatFunc R5(const std::string& s) { return parse_ratfunc(F5(), s); }
Place P5(const std::string& s) { return parse_place(F5(), s); }

Curve nodal() { return Curve(R5("1"), R5("0"), R5("0"), R5("0"), R5("t")); }

Curve f7_mixed()
{
    auto F = field(7, 1);
    auto r = [&](const char* s) { return parse_ratfunc(F, s); };
    return Curve(r("0"), r("t+1"), r("0"), r("t^3"), r("0"));
}

// sum of deg(v) ord_v(a) over the finite places dividing num and den, plus infinity
long weighted_ord_sum(const RatFunc& a)
{
    long s = (long)a.den.deg() - (long)a.num.deg();
    for (auto& [P, e] : factor_poly(a.num)) s += (long)P.deg() * e;
    for (auto& [P, e] : factor_poly(a.den)) s -= (long)P.deg() * e;
    return s;
}

}  // namespace

TEST_CASE("factorization over F_5")
{
    auto f = factor_poly(parse_poly(F5(), "t^2"));
    REQUIRE(f.size() == 1);
    CHECK(f[0].first == parse_poly(F5(), "t"));
    CHECK(f[0].second == 2);

    f = factor_poly(parse_poly(F5(), "t^2+1"));
    REQUIRE(f.size() == 2);
    CHECK(f[0].first * f[1].first == parse_poly(F5(), "t^2+1"));
    CHECK(f[0].first.deg() == 1);
    CHECK(f[1].first.deg() == 1);
    // roots 2 and 3: t^2 + 1 = (t+2)(t+3)
    auto r = roots(parse_poly(F5(), "t^2+1"));
    std::sort(r.begin(), r.end());
    CHECK(r == std::vector<uint32_t>{2, 3});

    f = factor_poly(parse_poly(F5(), "t^2+2"));
    REQUIRE(f.size() == 1);
    CHECK(f[0].second == 1);
    CHECK(is_irreducible(parse_poly(F5(), "t^2+2")));
    for (uint32_t x = 0; x < 5; ++x) CHECK(parse_poly(F5(), "t^2+2").eval(x) != 0);
}

TEST_CASE("valuations and absolute values")
{
    CHECK(ord_at(R5("t^2*(t+1)"), P5("t")) == 2);
    CHECK(ord_at(R5("t^2+1"), Place::infinity(F5())) == -2);
    CHECK(ord_at(R5("1/(t+1)"), P5("t+1")) == -1);
    CHECK(log_abs(R5("t"), P5("t")) == -1);
    CHECK(log_abs(R5("t"), Place::infinity(F5())) == 1);

    RatFunc a = R5("(t^2+1)/(t^3+t+2)");
    LogQ sum = 0;
    for (auto& v : support(a)) sum += log_abs(a, v);
    CHECK(sum == 0);
    CHECK(weighted_ord_sum(a) == 0);
}

TEST_CASE("product formula on random elements")
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto rp = [&]() {
            std::vector<uint32_t> c(1 + rng() % 6);
            for (auto& x : c) x = (uint32_t)(rng() % 5);
            c.back() = 1 + (uint32_t)(rng() % 4);
            return Poly(F5(), c);
        };
        RatFunc a = RatFunc(rp()) / RatFunc(rp());
        long s = 0;
        for (auto& v : support(a)) s += vdeg(a, v);
        CHECK(s == 0);
        CHECK(weighted_ord_sum(a) == 0);
        CHECK(weil_height(a) == weil_height_local(a));
    }
}

TEST_CASE("residues")
{
    CHECK(residue(R5("t+3"), P5("t")) == 3);
    CHECK(residue(R5("1/(1-t)"), P5("t")) == 1);
    // (t^2+1)/(t+1) at t = 3: 10/4 = 0 in F_5
    CHECK(residue(R5("(t^2+1)/(t+1)"), P5("t+2")) == 0);
    CHECK_THROWS(residue(R5("1/t"), P5("t")));
}

TEST_CASE("Laurent expansions")
{
    Series s = laurent_expand(R5("1/(1-t)"), P5("t"), 3);
    CHECK(s.val == 0);
    CHECK(s.c == std::vector<uint32_t>{1, 1, 1});

    Series u = laurent_expand(R5("t"), Place::infinity(F5()), 2);
    CHECK(u.val == -1);
    CHECK(u.c[0] == 1);

    // rebuild the polynomial from the series and subtract
    RatFunc a = R5("(t+1)/(t+2)");
    Series e = laurent_expand(a, P5("t"), 6);
    REQUIRE(e.val >= 0);
    std::vector<uint32_t> coeffs((size_t)e.val, 0);
    coeffs.insert(coeffs.end(), e.c.begin(), e.c.end());
    coeffs.resize(6, 0);
    RatFunc diff = a - RatFunc(Poly(F5(), coeffs));
    CHECK(ord_at(diff, P5("t")) >= 6);
}

TEST_CASE("constant extensions")
{
    auto X1 = constant_extend(F5(), 1);
    CHECK(X1.ext == F5());
    CHECK(X1.places_above(P5("t^2+2")).size() == 1);

    auto X2 = constant_extend(F5(), 2);
    auto above = X2.places_above(P5("t^2+2"));
    REQUIRE(above.size() == 2);
    for (auto& w : above) CHECK(w.deg == 1);
    // local degree formula: the residue degrees above v add up to m
    for (auto v : {P5("t"), P5("t^2+2"), P5("t^3+t+1"), Place::infinity(F5())}) {
        long s = 0;
        for (auto& w : X2.places_above(v)) s += X2.residue_degree(w, v);
        CHECK(s == 2);
    }
}

TEST_CASE("invariants of y^2 + xy = x^3 + t")
{
    Curve E = nodal();
    CHECK(E.c4 == R5("1"));
    CHECK(E.disc == R5("4*t+3*t^2"));
    CHECK(E.j == R5("1/(4*t+3*t^2)"));
    CHECK(weil_height(E.j) == 2);

    Curve E0(R5("0"), R5("0"), R5("0"), R5("0"), R5("t+1"));
    CHECK(E0.c4.is_zero());
    CHECK(E0.j.is_zero());
}

TEST_CASE("1728 disc = c4^3 - c6^2 on random curves")
{
    std::mt19937_64 rng(3);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        std::vector<RatFunc> a;
        for (int k = 0; k < 5; ++k) {
            std::vector<uint32_t> c(1 + rng() % 4);
            for (auto& x : c) x = (uint32_t)(rng() % 5);
            a.push_back(RatFunc(Poly(F5(), c)));
        }
        try {
            Curve E(a[0], a[1], a[2], a[3], a[4]);
            CHECK(RatFunc::from_int(F5(), 1728) * E.disc == E.c4 * E.c4 * E.c4 - E.c6 * E.c6);
            ++checked;
        } catch (const SingularCurveError&) {
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("group law")
{
    Curve E = f7_mixed();
    auto F = E.F;
    Point P = E.point(parse_ratfunc(F, "t"), parse_ratfunc(F, "t^2+t"));
    Point T = E.point(parse_ratfunc(F, "0"), parse_ratfunc(F, "0"));
    Point O;
    CHECK(E.add(P, O) == P);
    CHECK(E.add(O, P) == P);
    CHECK(E.add(P, E.neg(P)).inf);

    // scalar multiplication against repeated addition
    Point acc;
    for (int n = 1; n <= 8; ++n) {
        acc = E.add(acc, P);
        CHECK(E.mul(n, P) == acc);
        CHECK(E.contains(acc));
    }
    CHECK(E.mul(6, P) == E.add(E.mul(2, P), E.mul(4, P)));
    CHECK(E.mul(-3, P) == E.neg(E.mul(3, P)));

    std::vector<Point> pool{P, T, E.add(P, T), E.mul(2, P), E.mul(-3, P), E.add(E.mul(2, P), T)};
    for (auto& a : pool)
        for (auto& b : pool)
            for (auto& c : pool) CHECK(E.add(E.add(a, b), c) == E.add(a, E.add(b, c)));
}

TEST_CASE("reduction types")
{
    Curve E = nodal();
    auto R = classify_reduction(E, P5("t"));
    CHECK(R.type == RedType::SplitMult);
    CHECK(R.N == 1);
    CHECK(classify_reduction(E, P5("t+4")).type == RedType::Good);
    auto Ri = classify_reduction(E, Place::infinity(F5()));
    CHECK(Ri.type == RedType::AdditivePotGood);
    CHECK(Ri.ord_j == 2);

    // residue-free scaling agrees with the full classification
    for (auto& v : E.bad_support()) {
        auto s = local_scaling(E, v);
        auto full = classify_reduction(E, v);
        CHECK(s.N == full.N);
        CHECK(s.k == full.k);
        CHECK(s.ord_j == full.ord_j);
    }

    // y^2 = x^3 + (t+1) x^2 + t^3 x at (t): node of y^2 = x^2 (x + 1), tangents y = +-x
    Curve G = f7_mixed();
    auto RG = classify_reduction(G, parse_place(G.F, "t"));
    CHECK(RG.type == RedType::SplitMult);
    CHECK(RG.N == 6);
}

TEST_CASE("reduction of points")
{
    Curve G = f7_mixed();
    auto R = classify_reduction(G, parse_place(G.F, "t"));
    CHECK(reduce_point(G, R, Point()).kind == ResiduePoint::Identity);
    Point T = G.point(parse_ratfunc(G.F, "0"), parse_ratfunc(G.F, "0"));
    CHECK(reduce_point(G, R, T).kind == ResiduePoint::Singular);

    // x with a double pole at a good place: the point lies in the kernel of reduction
    auto F = F5();
    Curve E(R5("0"), R5("t^2"), R5("0"), R5("t^2+2"), R5("0"));
    Point Q = E.point(R5("(2*t^2+4)/t^2"), R5("(t^4+t^2+3)/t^3"));
    auto Rt = classify_reduction(E, P5("t"));
    CHECK(Rt.type == RedType::Good);
    CHECK(reduce_point(E, Rt, Q).kind == ResiduePoint::Identity);
    (void)F;
}

TEST_CASE("residue group orders against a brute-force count")
{
    // the nodal curve at t = 1 reduces to y^2 + xy = x^3 + 1 over F_5
    Curve E = nodal();
    auto R = classify_reduction(E, P5("t+4"));
    uint64_t n = 1;
    for (uint32_t x = 0; x < 5; ++x)
        for (uint32_t y = 0; y < 5; ++y)
            if ((y * y + x * y) % 5 == (x * x * x + 1) % 5) ++n;
    CHECK(residue_group_order(R) == n);
    CHECK(n >= 6 - 2 * 2);
    CHECK(n <= 6 + 2 * 2 + 1);

    Curve G = f7_mixed();
    Place v = good_small_place(G);
    auto RG = classify_reduction(G, v);
    uint64_t N = residue_group_order(RG);
    Point P = G.point(parse_ratfunc(G.F, "t"), parse_ratfunc(G.F, "t^2+t"));
    auto Pb = reduce_point(G, RG, P);
    uint64_t o = reduced_point_order(RG, Pb);
    CHECK(N % o == 0);
    auto C = residue_curve(RG);
    auto g = as_group_point(RG, Pb);
    CHECK(scalar_mul(C, (long long)o, g).inf);
    for (uint64_t m = 1; m < o; ++m) CHECK_FALSE(scalar_mul(C, (long long)m, g).inf);
}

TEST_CASE("torsion detection")
{
    Curve G = f7_mixed();
    CHECK(is_torsion(G, Point()).order == 1);
    Point T = G.point(parse_ratfunc(G.F, "0"), parse_ratfunc(G.F, "0"));
    auto r = is_torsion(G, T);
    CHECK(r.torsion);
    CHECK(r.order == 2);
    Point P = G.point(parse_ratfunc(G.F, "t"), parse_ratfunc(G.F, "t^2+t"));
    CHECK_FALSE(is_torsion(G, P).torsion);
}

TEST_CASE("curve spec parsing")
{
    json good = {{"field", {{"p", 5}}}, {"a", {"1", "0", "0", "0", "t"}}, {"S", "bad"}};
    auto C = parse_curve_spec(good);
    CHECK(C.S->size() == 3);
    CHECK(C.E.disc == R5("4*t+3*t^2"));

    json sing = {{"field", {{"p", 5}}}, {"a", {"0", "0", "0", "0", "0"}}};
    CHECK_THROWS_AS(parse_curve_spec(sing), InputError);
    json ch3 = {{"field", {{"p", 3}}}, {"a", {"0", "0", "0", "1", "t"}}};
    CHECK_THROWS_AS(parse_curve_spec(ch3), UnsupportedError);
    json notprime = {{"field", {{"p", 9}}}, {"a", {"0", "0", "0", "1", "t"}}};
    CHECK_THROWS_AS(parse_curve_spec(notprime), InputError);
    json shortlist = {{"field", {{"p", 5}}}, {"a", {"0", "1", "t"}}};
    CHECK_THROWS_AS(parse_curve_spec(shortlist), InputError);
    json offcurve = {{"field", {{"p", 5}}}, {"a", {"1", "0", "0", "0", "t"}}, {"Q", {{"x", "t"}, {"y", "t"}}}};
    CHECK_THROWS_AS(parse_curve_spec(offcurve), InputError);
    json badexpr = {{"field", {{"p", 5}}}, {"a", {"1", "0", "0", "0", "t+*"}}};
    CHECK_THROWS_AS(parse_curve_spec(badexpr), InputError);

    CHECK(to_json(make_q(6, 1)) == "6/1");
    CHECK(to_json(Point()) == "O");
}
