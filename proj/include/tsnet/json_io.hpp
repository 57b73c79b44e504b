#pragma once

// JSON encodings of time scales, domains, coefficient fields, wave fields and
// quaternions. Quaternion coefficients are always ordered (w, x, y, z) on
// {1, e1, e2, e3}.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsnet/backlund.hpp"
#include "tsnet/error.hpp"
#include "tsnet/lax_pair.hpp"
#include "tsnet/quaternion.hpp"
#include "tsnet/timescale.hpp"

namespace tsnet::io {

using nlohmann::json;

inline json to_json(const TimeScale& ts) { return json(std::vector<double>(ts.points().begin(), ts.points().end())); }

inline json to_json(const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }

/// [[re, im] x 4] on (1, e1, e2, e3).
inline json to_json(const CQuat& a) {
    json out = json::array();
    for (const cplx& c : a.coeffs()) out.push_back(json::array({c.real(), c.imag()}));
    return out;
}

inline json to_json(const GridDomain& d) { return {{"t1", to_json(d.t1())}, {"t2", to_json(d.t2())}}; }

template <typename V, typename F>
json grid_to_json(const GridFunction<V>& f, F&& encode) {
    json rows = json::array();
    for (std::size_t i = 0; i < f.n1(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < f.n2(); ++j) row.push_back(encode(f(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json to_json(const CoefficientField& cf) {
    auto plain = [](double v) { return json(v); };
    return {{"domain", to_json(cf.domain())},
            {"a", grid_to_json(cf.a, plain)}, {"b", grid_to_json(cf.b, plain)},
            {"c", grid_to_json(cf.c, plain)}, {"h", grid_to_json(cf.h, plain)},
            {"p", grid_to_json(cf.p, plain)}, {"q", grid_to_json(cf.q, plain)},
            {"r", grid_to_json(cf.r, plain)}, {"s", grid_to_json(cf.s, plain)}};
}

inline json to_json(const WaveField& wf) {
    auto enc = [](const CQuat& a) { return to_json(a); };
    return {{"lambda", json::array({wf.lambda.real(), wf.lambda.imag()})},
            {"domain", to_json(wf.domain())},
            {"psi", grid_to_json(wf.psi, enc)},
            {"psi_lambda", grid_to_json(wf.psi_lambda, enc)}};
}

inline json to_json(const DarbouxParams& p) { return {{"kappa", p.kappa}, {"phases", json::array({p.chi1, p.chi2})}}; }

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

inline std::size_t count(const json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(where, "expected a non-negative integer");
    return j.get<std::size_t>();
}

inline const json& member(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing field '") + key + "'");
    return obj.at(key);
}

/// Wraps construction failures so the message names the offending config path.
template <typename F>
auto construct(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ConstructionError& e) {
        fail(where, e.what());
    }
}

}  // namespace detail

inline TimeScale timescale_from_json(const json& j, const std::string& where = "timescale") {
    if (!j.is_array()) detail::fail(where, "expected an array of numbers");
    std::vector<double> pts;
    for (std::size_t k = 0; k < j.size(); ++k) pts.push_back(detail::number(j[k], where + "[" + std::to_string(k) + "]"));
    return detail::construct(where, [&] { return TimeScale(std::move(pts)); });
}

/// One of {"uniform": {t0, step, n}}, {"interval": {a, b, n}}, {"cantor": {level, a, b}},
/// {"union": [spec, ...]} or {"explicit": [t, ...]}.
inline TimeScale parse_timescale_spec(const json& j, const std::string& where = "timescale") {
    if (!j.is_object() || j.size() != 1) {
        detail::fail(where, "expected an object with exactly one of uniform, interval, cantor, union, explicit");
    }
    const auto& [kind, body] = *j.items().begin();
    const std::string at = where + "." + kind;
    if (kind == "uniform") {
        const double t0 = detail::number(detail::member(body, "t0", at), at + ".t0");
        const double step = detail::number(detail::member(body, "step", at), at + ".step");
        const std::size_t n = detail::count(detail::member(body, "n", at), at + ".n");
        return detail::construct(at, [&] { return TimeScale::uniform(t0, step, n); });
    }
    if (kind == "interval") {
        const double a = detail::number(detail::member(body, "a", at), at + ".a");
        const double b = detail::number(detail::member(body, "b", at), at + ".b");
        const std::size_t n = detail::count(detail::member(body, "n", at), at + ".n");
        return detail::construct(at, [&] { return TimeScale::interval(a, b, n); });
    }
    if (kind == "cantor") {
        const auto level = detail::count(detail::member(body, "level", at), at + ".level");
        const double a = detail::number(detail::member(body, "a", at), at + ".a");
        const double b = detail::number(detail::member(body, "b", at), at + ".b");
        return detail::construct(at, [&] { return TimeScale::cantor(static_cast<int>(level), a, b); });
    }
    if (kind == "union") {
        if (!body.is_array() || body.empty()) detail::fail(at, "expected a nonempty array of time-scale specs");
        std::vector<TimeScale> parts;
        for (std::size_t k = 0; k < body.size(); ++k) parts.push_back(parse_timescale_spec(body[k], at + "[" + std::to_string(k) + "]"));
        return detail::construct(at, [&] { return TimeScale::merge(parts); });
    }
    if (kind == "explicit") return timescale_from_json(body, at);
    detail::fail(where, "unknown time-scale kind '" + kind + "'");
}

inline DomainPtr domain_from_json(const json& j, const std::string& where = "domain") {
    return make_domain(timescale_from_json(detail::member(j, "t1", where), where + ".t1"),
                       timescale_from_json(detail::member(j, "t2", where), where + ".t2"));
}

inline CoefficientField coefficients_from_json(const json& j, const std::string& where = "field") {
    CoefficientField cf(domain_from_json(detail::member(j, "domain", where), where + ".domain"));
    const auto& d = cf.domain();
    auto load = [&](const char* key, GridFunction<double>& g) {
        const std::string at = where + "." + key;
        const json& rows = detail::member(j, key, where);
        if (!rows.is_array() || rows.size() != d.n1()) detail::fail(at, "expected " + std::to_string(d.n1()) + " rows");
        for (std::size_t i = 0; i < d.n1(); ++i) {
            if (!rows[i].is_array() || rows[i].size() != d.n2()) {
                detail::fail(at + "[" + std::to_string(i) + "]", "expected " + std::to_string(d.n2()) + " values");
            }
            for (std::size_t jj = 0; jj < d.n2(); ++jj) g(i, jj) = detail::number(rows[i][jj], at);
        }
    };
    load("a", cf.a); load("b", cf.b); load("c", cf.c); load("h", cf.h);
    load("p", cf.p); load("q", cf.q); load("r", cf.r); load("s", cf.s);
    detail::construct(where, [&] { cf.validate(); return 0; });
    return cf;
}

inline DarbouxParams darboux_from_json(const json& j, const std::string& where = "darboux") {
    DarbouxParams p;
    p.kappa = detail::number(detail::member(j, "kappa", where), where + ".kappa");
    if (j.contains("phases")) {
        const json& ph = j.at("phases");
        if (!ph.is_array() || ph.size() != 2) detail::fail(where + ".phases", "expected [chi1, chi2]");
        p.chi1 = detail::number(ph[0], where + ".phases[0]");
        p.chi2 = detail::number(ph[1], where + ".phases[1]");
    }
    return p;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

/// Creates the parent directory of path if needed.
inline void ensure_parent(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
}

inline void write_json_file(const std::string& path, const json& j) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace tsnet::io
