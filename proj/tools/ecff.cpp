// ecff: analyze curves, run the verification suites, sweep parameter grids.
//
// Exit codes: 0 pass, 1 a check failed, 2 input error, 3 unsupported scope.

#include "ecff/suites.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

using namespace ecff;

namespace {

struct Output {
    std::string path;
    std::string format = "json";
};

void emit(const Output& o, const std::string& text)
{
    if (o.path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(o.path);
    if (!out) throw InputError("cannot write " + o.path);
    out << text;
}

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string r = "\"";
    for (char c : s) {
        if (c == '"') r += '"';
        r += c;
    }
    return r + "\"";
}

std::string csv_cell(const json& v)
{
    if (v.is_string()) return csv_escape(v.get<std::string>());
    return csv_escape(v.dump());
}

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<json>>& rows)
{
    std::ostringstream os;
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------

int cmd_analyze(const std::string& input, const Output& out)
{
    CurveSpec C = load_curve_spec(input);
    json rep = curve_summary(C.E);
    rep["name"] = C.name;
    json pts = json::array();
    for (auto& P : C.points) {
        auto T = is_torsion(C.E, P);
        pts.push_back({{"point", to_json(P)}, {"h", to_json(canonical_height(C.E, P))}, {"torsion", T.torsion}});
    }
    rep["points"] = pts;
    if (C.Q) rep["Q"] = {{"point", to_json(*C.Q)}, {"h", to_json(canonical_height(C.E, *C.Q))}};
    if (C.S) rep["S"] = detail::place_list(*C.S);
    if (out.format == "csv") {
        std::vector<std::vector<json>> rows;
        for (auto& p : rep["places"]) rows.push_back({p["place"], p["degree"], p["type"], p["ord_disc_min"], p["ord_j"], p["skeleton_length"]});
        emit(out, to_csv({"place", "degree", "type", "ord_disc_min", "ord_j", "skeleton_length"}, rows));
    } else {
        emit(out, rep.dump(2) + "\n");
    }
    return 0;
}

int cmd_verify(const std::string& suite, const std::string& input, const SuiteOptions& opt, const Output& out)
{
    auto& names = suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end()) throw InputError("unknown suite \"" + suite + "\"");
    std::optional<CurveSpec> C;
    if (!input.empty()) C = load_curve_spec(input);
    SuiteReport rep = run_suite(suite, C ? &*C : nullptr, opt);
    if (out.format == "csv") {
        std::vector<std::vector<json>> rows;
        for (auto& c : rep.checks) rows.push_back({rep.suite, c.id, c.ok, c.detail.dump()});
        emit(out, to_csv({"suite", "check", "ok", "detail"}, rows));
    } else {
        json j = rep.to_json();
        if (C) j["curve"] = C->name;
        emit(out, j.dump(2) + "\n");
    }
    std::cerr << rep.suite << ": " << rep.checks.size() - rep.failures() << "/" << rep.checks.size() << " checks pass\n";
    return rep.passed() ? 0 : 1;
}

// Grid files:
//   {"kind": "torsion", "curve": <curve spec> | "curve_file": path, "n": [2, 3, 4, 6]}
//   {"kind": "lemma52", "ell": "2", "m": ["0", "1/2", ...], "anchors": 3, "seed": 1}
int cmd_sweep(const std::string& input, const Output& out)
{
    json g = read_json_file(input);
    std::string kind = g.value("kind", std::string());
    std::vector<std::string> header;
    std::vector<std::vector<json>> rows;
    size_t failed = 0, total = 0;
    if (kind == "torsion") {
        header = {"place", "n", "ell", "D", "closed_form", "bound", "slack", "holds", "error"};
        std::vector<long> ns;
        for (auto& n : g.value("n", json::array())) ns.push_back(n.get<long>());
        if (!ns.empty()) {
            // curve_file is relative to the grid file
            auto curve_path = [&]() {
                std::filesystem::path f = g.at("curve_file").get<std::string>();
                return f.is_absolute() ? f : std::filesystem::path(input).parent_path() / f;
            };
            CurveSpec C = g.contains("curve") ? parse_curve_spec(g["curve"]) : load_curve_spec(curve_path().string());
            LogQ hj = weil_height(C.E.j);
            for (auto& v : C.E.bad_support()) {
                auto R = classify_reduction(C.E, v);
                if (!R.multiplicative()) continue;
                for (long n : ns) {
                    ++total;
                    try {
                        auto T = torsion_discrepancy(n, R.ell(), hj, C.E.F);
                        failed += !T.holds();
                        rows.push_back({v.to_string(), n, to_json(R.ell()), to_json(T.D), to_json(T.closed_form),
                                        to_json(T.bound), to_json(T.slack()), T.holds(), ""});
                    } catch (const std::exception& e) {
                        ++failed;
                        rows.push_back({v.to_string(), n, to_json(R.ell()), "", "", "", "", false, e.what()});
                    }
                }
            }
        }
    } else if (kind == "lemma52") {
        header = {"m", "ell", "norm_sigma", "norm_tree", "norm_total", "bound", "holds"};
        Rational ell = parse_rational(detail::need_string(g.value("ell", json("0"))));
        std::vector<Rational> ms;
        for (auto& m : g.value("m", json::array())) ms.push_back(parse_rational(detail::need_string(m)));
        std::sort(ms.begin(), ms.end());
        std::mt19937_64 rng(g.value("seed", 1ULL));
        auto A = detail::random_anchors(rng, ell, g.value("anchors", 1L));
        for (auto& m : ms) {
            ++total;
            auto c = detail::gprime_case(ell, m, A);
            bool ok = c.sigma_ok && c.tree_ok && c.total_ok;
            failed += !ok;
            rows.push_back({to_json(m), to_json(ell), to_json(c.norm.sigma), to_json(c.norm.tree),
                            to_json(c.norm.total), to_json(ell / 12 + m), ok});
        }
    } else {
        throw InputError("sweep kind must be \"torsion\" or \"lemma52\"");
    }
    if (out.format == "json") {
        json arr = json::array();
        for (auto& r : rows) {
            json o;
            for (size_t i = 0; i < header.size(); ++i) o[header[i]] = r[i];
            arr.push_back(o);
        }
        emit(out, json{{"kind", kind}, {"rows", arr}}.dump(2) + "\n");
    } else {
        emit(out, to_csv(header, rows));
    }
    return total > 0 && failed == total ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact heights, local discrepancy and S-integral torsion on elliptic curves over F_q(t)"};
    app.require_subcommand(1);
    std::string input;
    Output out;
    SuiteOptions opt;
    std::string suite;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--out", out.path, "Write the report here instead of stdout");
        c->add_option("--format", out.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };

    auto* analyze = app.add_subcommand("analyze", "Invariants, bad places, reduction types, h(j)");
    analyze->add_option("--input", input, "Curve spec (JSON)")->required();
    add_common(analyze);

    auto* verify = app.add_subcommand("verify", "Run a verification suite");
    verify->add_option("suite", suite, "prop22, heights, lemma32, thm33, thm45, torsion, lemma52, nearest, thm53, infra")
        ->required();
    verify->add_option("--input", input, "Curve spec (JSON)");
    verify->add_option("--seed", opt.seed, "Random seed");
    verify->add_option("--cases", opt.cases, "Number of random cases (suite default if 0)")->check(CLI::Range(0L, 100000L));
    verify->add_option("--precision", opt.precision, "Declared precision for Tate round trips")->check(CLI::Range(0L, 4096L));
    verify->add_option("--order-bound", opt.order_bound, "Torsion order bound")->check(CLI::Range(1L, 200L));
    verify->add_option("--max-degree", opt.max_degree, "Constant extensions searched")->check(CLI::Range(1, 12));
    add_common(verify);

    auto* sweep = app.add_subcommand("sweep", "Evaluate a parameter grid, one CSV row per configuration");
    sweep->add_option("--input", input, "Grid (JSON)")->required();
    sweep->add_option("--out", out.path, "Write the table here instead of stdout");
    sweep->add_option("--format", out.format, "csv or json")->check(CLI::IsMember({"json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (sweep->parsed() && sweep->get_option("--format")->count() == 0) out.format = "csv";

    try {
        if (analyze->parsed()) return cmd_analyze(input, out);
        if (verify->parsed()) return cmd_verify(suite, input, opt, out);
        if (sweep->parsed()) return cmd_sweep(input, out);
    } catch (const UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
