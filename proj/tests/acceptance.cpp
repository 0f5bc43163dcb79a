// Acceptance run: one PASS/FAIL line per criterion. Every comparison is an
// exact rational identity or inequality; the only tolerance is the time budget.

#include "ecff/suites.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#ifndef ECFF_DATA_DIR
#define ECFF_DATA_DIR "data"
#endif

using namespace ecff;

namespace {

constexpr const char* kTolerance = "exact (zero)";
constexpr double kSecondsPerSuite = 60.0;

CurveSpec curve(const std::string& name) { return load_curve_spec(std::string(ECFF_DATA_DIR) + "/curves/" + name + ".json"); }

struct Outcome {
    bool ok = true;
    std::string detail;
};

// Runs a suite on each curve, timing each run separately.
Outcome suites(const std::string& name, const std::vector<std::string>& curves, const SuiteOptions& o = {})
{
    Outcome out;
    for (auto& c : curves) {
        auto t0 = std::chrono::steady_clock::now();
        SuiteReport rep;
        try {
            CurveSpec C = curve(c);
            rep = run_suite(name, &C, o);
        } catch (const std::exception& e) {
            out.ok = false;
            out.detail += " " + c + ": " + e.what();
            continue;
        }
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.ok = out.ok && rep.passed() && s <= kSecondsPerSuite;
        char buf[160];
        std::snprintf(buf, sizeof buf, " %s %zu/%zu %.1fs", c.c_str(), rep.checks.size() - rep.failures(),
                      rep.checks.size(), s);
        out.detail += buf;
        for (auto& c2 : rep.checks)
            if (!c2.ok) out.detail += " [failed: " + c2.id + "]";
    }
    return out;
}

Outcome lemma_suite(const std::string& name)
{
    Outcome out;
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport rep = run_suite(name, nullptr, {});
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.ok = rep.passed() && s <= kSecondsPerSuite;
    out.detail = " " + std::to_string(rep.checks.size() - rep.failures()) + "/" + std::to_string(rep.checks.size());
    return out;
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* what;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> all = {
        {1, "local height splits as i + j on 12-point samples over F_5(t) and F_7(t)",
         [] { return suites("prop22", {"f5_mixed", "f7_mixed"}); }},
        {2, "h(nP) = n^2 h(P) for n <= 6 and the parallelogram law on 100 pairs",
         [] { return suites("heights", {"f5_mixed"}); }},
        {3, "skeleton pairing identities on 100 random configurations", [] { return lemma_suite("lemma32"); }},
        {4, "local equidistribution inequality and its identities, 100 cases",
         [] { return suites("thm33", {"f5_mixed"}); }},
        {5, "D_v(E[n]) = ell_v/(12 n^2), n in {2,3,4,6}, slack (h(j) - ell_v)/(12 n^2)",
         [] { return suites("torsion", {"f5_mixed", "f7_mixed"}); }},
        {6, "global discrepancy identity and per-place bound, |Z| in {2,4,8}",
         [] { return suites("thm45", {"f5_mixed"}); }},
        {7, "||G'||^2 <= ell/12 + m for 20 truncated Neron functions", [] { return suites("lemma52", {"f5_mixed"}); }},
        {8, "nearest torsion closed form = brute force (orders <= 4 n0)",
         [] { return suites("nearest", {"f5_mixed", "f5_split", "f7_mixed"}); }},
        {9, "S-integral torsion count <= bound, claims per place, S empty gives no points",
         [] { return suites("thm53", {"f5_split", "f7_split"}); }},
        {10, "product formula (1000), associativity (200), Tate round trips", [] { return suites("infra", {"f5_mixed", "f5_split"}); }},
    };
    int failed = 0;
    for (auto& c : all) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string(" error: ") + e.what();
        }
        failed += !o.ok;
        std::printf("%s  criterion %2d  %s  [tolerance %s; budget %.0fs per suite]%s\n", o.ok ? "PASS" : "FAIL", c.id,
                    c.what, kTolerance, kSecondsPerSuite, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria pass\n", (int)all.size() - failed, all.size());
    return failed ? 1 : 0;
}
