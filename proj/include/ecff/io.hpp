#pragma once

// JSON curve specifications and report serialization. Rationals are written
// as "num/den" strings so that reports round-trip exactly.

#include "sintegral.hpp"

#include <json.hpp>

#include <fstream>

namespace ecff {

using json = nlohmann::json;

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// {
//   "name": "...",
//   "field": {"p": 5, "degree": 1},
//   "a": ["a1", "a2", "a3", "a4", "a6"],          (strings in t, and 'a' for F_q's generator)
//   "points": [{"x": "...", "y": "..."}, ...],   (optional sample generators)
//   "S": ["t", "t+3", "inf"] | "bad",            (optional)
//   "Q": {"x": "...", "y": "..."}                (optional)
// }
struct CurveSpec {
    std::string name;
    const Fq* F = nullptr;
    Curve E;
    std::vector<Point> points;
    std::optional<std::vector<Place>> S;
    std::optional<Point> Q;
};

inline json to_json(const Rational& r) { return to_string(r); }
inline json to_json(const ExtQ& e) { return to_string(e); }
inline json to_json(const Place& v) { return v.to_string(); }

inline json to_json(const Point& P)
{
    if (P.inf) return "O";
    return json{{"x", P.x.to_string()}, {"y", P.y.to_string()}};
}

namespace detail {

inline const json& need(const json& j, const char* key)
{
    if (!j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

inline std::string need_string(const json& j)
{
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    throw InputError("expected a string or an integer, got " + j.dump());
}

inline Point parse_point(const Curve& E, const json& j)
{
    if (j.is_string() && j.get<std::string>() == "O") return Point();
    if (!j.is_object()) throw InputError("a point is {\"x\": ..., \"y\": ...} or \"O\"");
    RatFunc x = parse_ratfunc(E.F, need_string(need(j, "x")));
    RatFunc y = parse_ratfunc(E.F, need_string(need(j, "y")));
    Point P = Point::affine(x, y);
    if (!E.contains(P)) throw InputError("point (" + x.to_string() + ", " + y.to_string() + ") is not on the curve");
    return P;
}

}  // namespace detail

// Parse errors and singular curves raise InputError; characteristic 2 or 3
// raises UnsupportedError.
inline CurveSpec parse_curve_spec(const json& j)
{
    CurveSpec C;
    try {
        C.name = j.value("name", std::string("curve"));
        const json& f = detail::need(j, "field");
        long p = detail::need(f, "p").get<long>();
        int D = f.value("degree", 1);
        if (p < 2 || p > 65535 || !detail::is_prime((uint64_t)p)) throw InputError("field.p must be a prime below 2^16");
        if (D < 1) throw InputError("field.degree must be positive");
        if (p < 5) throw UnsupportedError("characteristic " + std::to_string(p) + " is out of scope (need p >= 5)");
        C.F = field((uint32_t)p, D);
        const json& a = detail::need(j, "a");
        if (!a.is_array() || a.size() != 5) throw InputError("\"a\" must list a1, a2, a3, a4, a6");
        std::vector<RatFunc> c;
        for (auto& s : a) c.push_back(parse_ratfunc(C.F, detail::need_string(s)));
        try {
            C.E = Curve(c[0], c[1], c[2], c[3], c[4]);
        } catch (const SingularCurveError& e) {
            throw InputError(e.what());
        }
        if (j.contains("points"))
            for (auto& P : j.at("points")) C.points.push_back(detail::parse_point(C.E, P));
        if (j.contains("S")) {
            const json& S = j.at("S");
            if (S.is_string() && S.get<std::string>() == "bad") {
                C.S = C.E.bad_support();
            } else if (S.is_array()) {
                std::vector<Place> out;
                for (auto& s : S) merge_places(out, {parse_place(C.F, detail::need_string(s))});
                C.S = out;
            } else {
                throw InputError("\"S\" must be \"bad\" or a list of places");
            }
        }
        if (j.contains("Q")) C.Q = detail::parse_point(C.E, j.at("Q"));
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed curve spec: ") + e.what());
    } catch (const UnsupportedError&) {
        throw;
    } catch (const InputError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    return C;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline CurveSpec load_curve_spec(const std::string& path) { return parse_curve_spec(read_json_file(path)); }

inline SIntConfig sint_config(const CurveSpec& C)
{
    if (!C.S || !C.Q) throw InputError("the curve spec needs \"S\" and \"Q\"");
    return SIntConfig{C.E, *C.S, *C.Q};
}

inline json curve_summary(const Curve& E)
{
    json places = json::array();
    for (auto& v : E.bad_support()) {
        auto R = classify_reduction(E, v);
        places.push_back({{"place", to_json(v)},
                          {"degree", v.deg},
                          {"type", to_string(R.type)},
                          {"ord_disc_min", R.N},
                          {"ord_j", E.j.is_zero() ? json(nullptr) : json(R.ord_j)},
                          {"skeleton_length", to_json(R.ell())}});
    }
    return {{"curve", E.to_string()},
            {"field", {{"p", E.F->p}, {"degree", E.F->D}}},
            {"disc", E.disc.to_string()},
            {"j", E.j.to_string()},
            {"h_j", to_json(weil_height(E.j))},
            {"places", places}};
}

}  // namespace ecff
