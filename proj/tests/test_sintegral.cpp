// S-integrality, nearest torsion, the bound and the enumeration, and the suites.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ecff/suites.hpp"

using namespace ecff;

namespace {

const Fq* F5() { return field(5, 1); }
RatFunc R5(const std::string& s) { return parse_ratfunc(F5(), s); }

// y^2 = x^3 + t^2 x^2 + (t^2+2) x over F_5, S the bad places
struct Split5 {
    Curve E{R5("0"), R5("t^2"), R5("0"), R5("t^2+2"), R5("0")};
    Point Q = E.point(R5("(2*t^2+4)/t^2"), R5("(t^4+t^2+3)/t^3"));
    Point P = E.point(R5("3*t^2"), R5("t^3+4*t"));
    Point T = E.point(R5("0"), R5("0"));
    SIntConfig cfg() const { return {E, E.bad_support(), Q}; }
};

std::vector<Place> degree_one_places(const Fq* F)
{
    std::vector<Place> out;
    for (uint32_t c = 0; c < F->q; ++c) out.push_back(Place::finite(Poly(F, {F->neg(c), 1})));
    return out;
}

}  // namespace

TEST_CASE("meeting on the model")
{
    Split5 S;
    auto bad = S.E.bad_support();
    CHECK(meets_at(S.E, S.Q, S.Q, bad[0]));
    CHECK_FALSE(is_s_integral(S.E, S.Q, {S.Q}, bad).integral);

    // at good places meeting is equality of reductions
    for (auto& v : degree_one_places(F5())) {
        auto R = classify_reduction(S.E, v);
        if (!R.good()) continue;
        for (auto& X : {Point(), S.T, S.P, S.E.add(S.P, S.T)})
            CHECK(meets_at(S.E, X, S.Q, v) == (reduce_point(S.E, R, X) == reduce_point(S.E, R, S.Q)));
    }

    // whenever a point is rejected, the reported place is outside S and they meet there
    for (auto& X : {Point(), S.T, S.P}) {
        auto r = is_s_integral(S.E, X, {S.Q}, bad);
        if (r.integral) continue;
        REQUIRE(r.place);
        CHECK(std::find(bad.begin(), bad.end(), *r.place) == bad.end());
        CHECK(meets_at(S.E, X, S.Q, *r.place));
    }
    // O meets Q at (t), where x(Q) has a double pole and the reduction is good
    auto rO = is_s_integral(S.E, Point(), {S.Q}, bad);
    CHECK_FALSE(rO.integral);
    CHECK(*rO.place == parse_place(F5(), "t"));
}

TEST_CASE("nearest torsion: closed form against brute force")
{
    Split5 S;
    CHECK(nearest_torsion(S.E, S.T, S.E.bad_support()[0]).torsion);
    std::vector<Place> places = S.E.bad_support();
    merge_places(places, degree_one_places(F5()));
    for (auto& v : places)
        for (auto& X : {S.Q, S.P, S.E.mul(2, S.Q)}) {
            auto nt = nearest_torsion(S.E, X, v);
            auto bf = nearest_torsion_brute(S.E, X, v, 4 * nt.n0);
            CHECK(nt.m == bf.m);
            CHECK(nt.m >= 0);
        }
    // frozen after the comparison above
    CHECK(nearest_torsion(S.E, S.Q, parse_place(F5(), "t")).m == 1);
    CHECK(nearest_torsion(S.E, S.Q, parse_place(F5(), "t^2+2")).m == 4);
    CHECK(nearest_torsion(S.E, S.Q, Place::infinity(F5())).m == 4);
}

TEST_CASE("nearest torsion is the same at conjugate places")
{
    Split5 S;
    auto X = constant_extend(F5(), 2);
    Curve EL = S.E.lifted(X);
    Point QL = S.E.lift_point(X, S.Q);
    Place v = parse_place(F5(), "t^2+2");
    auto above = X.places_above(v);
    REQUIRE(above.size() == 2);
    auto a = nearest_torsion(EL, QL, above[0]), b = nearest_torsion(EL, QL, above[1]);
    CHECK(a.m == b.m);
    CHECK(a.n0 == b.n0);
}

TEST_CASE("configuration checks")
{
    Split5 S;
    CHECK(validate_config(S.cfg()) == canonical_height(S.E, S.Q));
    CHECK_THROWS(validate_config({S.E, {}, S.Q}));
    CHECK_THROWS(validate_config({S.E, S.E.bad_support(), S.T}));
}

TEST_CASE("the bound and the enumeration")
{
    Split5 S;
    auto C = S.cfg();
    auto b = bir_bound(C);

    // the bound recomputed from independently computed pieces
    LogQ h = canonical_height_by_places(S.E, S.Q);
    LogQ sum = 0;
    for (auto& v : C.S) sum += nearest_torsion_brute(S.E, S.Q, v, 4 * nearest_torsion(S.E, S.Q, v).n0).m;
    Rational s = Rational((long)C.S.size()) * weil_height(S.E.j) / 12 + sum;
    CHECK(b.value == s * s / (h * h));
    CHECK(b.hQ == 1);
    CHECK(b.value == 225);

    long prev = -1;
    for (long B : {1L, 2L, 6L, 30L}) {
        auto Z = enumerate_sintegral_torsion(C, B, B == 30 ? 6 : 2);
        long n = (long)Z.points.size();
        CHECK(Rational(n) <= b.value);
        CHECK(n >= prev);
        prev = n;
        if (B == 1) {
            for (auto& e : Z.points) CHECK(e.P.inf);
        }
    }

    // every enumerated torsion point stays off the kernel at good places
    auto all = enumerate_torsion(S.E, 12, 2);
    for (auto& e : all.points) {
        if (e.P.inf || e.m != 1) continue;
        for (auto& v : degree_one_places(F5())) {
            auto R = classify_reduction(S.E, v);
            if (R.good()) CHECK(reduce_point(S.E, R, e.P).kind != ResiduePoint::Identity);
        }
    }

    auto empty = enumerate_sintegral_torsion({S.E, {}, S.Q}, 30, 6);
    CHECK(empty.points.empty());
}

TEST_CASE("truncation claims")
{
    Split5 S;
    auto C = S.cfg();
    auto Z = enumerate_sintegral_torsion(C, 30, 6);
    REQUIRE_FALSE(Z.points.empty());
    auto rep = verify_truncation_claims(C, Z.points);
    CHECK(rep.holds());
    CHECK(rep.height.lhs == rep.height.rhs);
    CHECK(rep.height.rhs == canonical_height(S.E, S.Q));
    for (auto& p : rep.places) {
        if (!p.in_S) CHECK(p.Lambda == 0);
        else CHECK(p.claim2.holds());
    }
}

TEST_CASE("suites on a small curve")
{
    json spec = {{"name", "f5_split"},
                 {"field", {{"p", 5}}},
                 {"a", {"0", "t^2", "0", "t^2+2", "0"}},
                 {"points", {{{"x", "3*t^2"}, {"y", "t^3+4*t"}}}},
                 {"S", "bad"},
                 {"Q", {{"x", "(2*t^2+4)/t^2"}, {"y", "(t^4+t^2+3)/t^3"}}}};
    auto C = parse_curve_spec(spec);
    SuiteOptions o;
    o.cases = 5;
    for (auto& name : {"lemma32", "lemma52", "torsion", "thm53", "infra"}) {
        auto rep = run_suite(name, &C, o);
        CHECK_MESSAGE(rep.passed(), name);
        auto j = rep.to_json();
        CHECK(j["suite"] == name);
    }
    CHECK_THROWS_AS(run_suite("nope", &C, o), InputError);
    CHECK(run_suite("lemma32", nullptr, o).passed());
}
