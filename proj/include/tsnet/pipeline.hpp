#pragma once

// Configuration-driven pipeline: build the grid, seed coefficients, run the
// Darboux chain, verify every surface and field, export artifacts.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tsnet/backlund.hpp"
#include "tsnet/error.hpp"
#include "tsnet/json_io.hpp"
#include "tsnet/lax_pair.hpp"
#include "tsnet/mesh_io.hpp"
#include "tsnet/surface.hpp"
#include "tsnet/timescale.hpp"

namespace tsnet {

using nlohmann::json;

/// Exit-code contract shared by every subcommand.
enum ExitCode : int { kExitPass = 0, kExitNumeric = 1, kExitConfig = 2, kExitIo = 3 };

struct Tolerances {
    /// Asymptotic/Chebyshev residuals and compatibility of every field.
    double exact = 1e-9;
    /// Tetrahedron vs dot-product curvature, relative.
    double cross = 1e-6;
    /// |K + 4 lambda^2| / (4 lambda^2).
    double curvature = 1e-8;
    /// Relative spread of the tors ratios.
    double tors = 1e-8;
    /// Segment length spread and tangency of each Darboux step.
    double segment = 1e-10;
    /// Row-major vs column-major propagation, relative.
    double path = 1e-10;
    /// red1 / red2 reduction identities.
    double reduction = 1e-12;
    /// Psi_lambda vs finite differences in lambda, relative.
    double lambda_fd = 1e-8;
    /// Cross-product normal vs Psi^-1 e3 Psi.
    double normal = 1e-10;
    /// sin^2 of the tangent angle below which a node is degenerate.
    double cond = kDefaultCondTol;
};

struct OutputPaths {
    std::optional<std::string> obj;
    std::optional<std::string> report;
    std::optional<std::string> fields;
};

struct PipelineConfig {
    std::optional<TimeScale> timescale1;
    std::optional<TimeScale> timescale2;
    double lambda = 1.0;
    /// Empty for the vacuum seed, otherwise a coefficient-field JSON file.
    std::optional<std::string> seed_file;
    std::vector<DarbouxParams> darboux;
    Tolerances tolerances;
    OutputPaths outputs;
};

namespace detail {

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    if (path.is_absolute() || base.empty()) return path.string();
    return (base / path).lexically_normal().string();
}

inline double positive(const json& j, const std::string& where) {
    const double v = io::detail::number(j, where);
    if (!(v > 0.0)) io::detail::fail(where, "must be positive");
    return v;
}

inline std::string text(const json& j, const std::string& where) {
    if (!j.is_string() || j.get<std::string>().empty()) io::detail::fail(where, "expected a nonempty string");
    return j.get<std::string>();
}

inline void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
            io::detail::fail(where, "unknown field '" + key + "'");
        }
    }
}

}  // namespace detail

/// Parses a pipeline config. Relative paths are resolved against base_dir.
inline PipelineConfig parse_config(const json& j, const std::filesystem::path& base_dir = {}) {
    using io::detail::fail;
    using io::detail::number;
    if (!j.is_object()) fail("config", "expected a JSON object");
    detail::reject_unknown(j, {"timescale1", "timescale2", "lambda", "seed", "darboux", "tolerances", "outputs"}, "config");
    PipelineConfig cfg;

    if (j.contains("timescale1")) cfg.timescale1 = io::parse_timescale_spec(j.at("timescale1"), "timescale1");
    if (j.contains("timescale2")) cfg.timescale2 = io::parse_timescale_spec(j.at("timescale2"), "timescale2");

    if (!j.contains("lambda")) fail("lambda", "missing field");
    cfg.lambda = number(j.at("lambda"), "lambda");
    if (cfg.lambda == 0.0) fail("lambda", "must be nonzero");

    if (j.contains("seed")) {
        const json& seed = j.at("seed");
        if (seed.is_string()) {
            if (seed.get<std::string>() != "vacuum") fail("seed", "expected \"vacuum\" or {\"file\": path}");
        } else if (seed.is_object()) {
            detail::reject_unknown(seed, {"file"}, "seed");
            cfg.seed_file = detail::resolve(base_dir, detail::text(io::detail::member(seed, "file", "seed"), "seed.file"));
        } else {
            fail("seed", "expected \"vacuum\" or {\"file\": path}");
        }
    }
    if (!cfg.seed_file && !(cfg.timescale1 && cfg.timescale2)) {
        fail("config", "timescale1 and timescale2 are required with the vacuum seed");
    }

    if (j.contains("darboux")) {
        const json& steps = j.at("darboux");
        if (!steps.is_array()) fail("darboux", "expected an array");
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const std::string at = "darboux[" + std::to_string(k) + "]";
            if (!steps[k].is_object()) fail(at, "expected an object");
            detail::reject_unknown(steps[k], {"kappa", "phases"}, at);
            DarbouxParams p = io::darboux_from_json(steps[k], at);
            if (p.kappa == 0.0) fail(at + ".kappa", "must be nonzero");
            for (const auto& prev : cfg.darboux) {
                if (prev.kappa == p.kappa) fail(at + ".kappa", "must differ from every earlier kappa");
            }
            cfg.darboux.push_back(p);
        }
    }

    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        if (!t.is_object()) fail("tolerances", "expected an object");
        detail::reject_unknown(t, {"exact", "cross", "curvature", "tors", "segment", "path", "reduction", "lambda_fd", "normal", "cond"},
                               "tolerances");
        auto opt = [&](const char* key, double& slot) {
            if (t.contains(key)) slot = detail::positive(t.at(key), std::string("tolerances.") + key);
        };
        Tolerances& tol = cfg.tolerances;
        opt("exact", tol.exact); opt("cross", tol.cross); opt("curvature", tol.curvature);
        opt("tors", tol.tors); opt("segment", tol.segment); opt("path", tol.path);
        opt("reduction", tol.reduction); opt("lambda_fd", tol.lambda_fd); opt("normal", tol.normal);
        opt("cond", tol.cond);
    }

    if (j.contains("outputs")) {
        const json& o = j.at("outputs");
        if (!o.is_object()) fail("outputs", "expected an object");
        detail::reject_unknown(o, {"obj", "report", "fields"}, "outputs");
        auto path = [&](const char* key, std::optional<std::string>& slot) {
            if (o.contains(key)) slot = detail::resolve(base_dir, detail::text(o.at(key), std::string("outputs.") + key));
        };
        path("obj", cfg.outputs.obj);
        path("report", cfg.outputs.report);
        path("fields", cfg.outputs.fields);
    }
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    return parse_config(io::read_json_file(path), std::filesystem::path(path).parent_path());
}

enum class Mode {
    /// Chain, verification and every configured export.
    Full,
    /// Chain and verification; no mesh or field export.
    VerifyOnly,
    /// Chain and mesh/field export; no verification.
    ExportOnly,
};

struct RunOptions {
    Mode mode = Mode::Full;
    /// Upper bound on worker threads; 0 means all available cores.
    unsigned threads = 0;
};

struct PipelineResult {
    int exit_code = kExitPass;
    json report;
    std::optional<io::ObjStats> obj;
};

namespace detail {

/// Runs tasks[k] for every k on at most `threads` workers; results keep task order.
inline std::vector<json> run_tasks(const std::vector<std::function<json()>>& tasks, unsigned threads) {
    std::vector<json> out(tasks.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(threads, tasks.size());
    if (workers <= 1) {
        for (std::size_t k = 0; k < tasks.size(); ++k) out[k] = tasks[k]();
        return out;
    }
    std::vector<std::future<void>> pending;
    for (std::size_t w = 0; w < workers; ++w) {
        pending.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t k = w; k < tasks.size(); k += workers) out[k] = tasks[k]();
        }));
    }
    for (auto& f : pending) f.get();
    return out;
}

inline void expect(json& rec, std::vector<std::string>& failures, const std::string& tag, const char* name,
                   double value, double tol) {
    if (!(value <= tol)) {
        rec["pass"] = false;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: %s = %.3e exceeds %.1e", tag.c_str(), name, value, tol);
        failures.emplace_back(buf);
    }
}

inline json surface_record(const SurfaceNet& s, std::size_t index, std::optional<double> kappa, const Tolerances& tol) {
    const double lambda = *s.lambda;
    const double k_expected = -4.0 * lambda * lambda;
    const CurvatureMap km = gauss_curvature_dot(s, tol.cond);
    double k_min = 0, k_max = 0, abs_err = 0;
    std::size_t valid = 0;
    for (const auto& k : km.K.values()) {
        if (!k) continue;
        k_min = valid ? std::min(k_min, *k) : *k;
        k_max = valid ? std::max(k_max, *k) : *k;
        abs_err = std::max(abs_err, std::abs(*k - k_expected));
        ++valid;
    }
    const NetResiduals nr = net_residuals(s);
    const TetReport tr = tetrahedron_report(s, tol.cond);
    json rec = {{"index", index},
                {"kappa", kappa ? json(*kappa) : json(nullptr)},
                {"gated", false},
                {"valid_nodes", valid},
                {"degenerate_nodes", km.degenerate},
                {"K_min", k_min},
                {"K_max", k_max},
                {"K_max_abs_err", abs_err},
                {"K_max_rel_err", abs_err / std::abs(k_expected)},
                {"asym", {nr.asym1, nr.asym2}},
                {"cheb", {nr.cheb1, nr.cheb2}},
                {"tetrahedron",
                 {{"valid_cells", tr.valid_cells},
                  {"degenerate_cells", tr.degenerate_cells},
                  {"max_rel_vs_dot", tr.max_rel_vs_dot},
                  {"tors_spread", {tr.tors1_spread, tr.tors2_spread}},
                  {"tors_mean", {tr.tors1_mean, tr.tors2_mean}}}},
                {"pass", true},
                {"failures", json::array()}};
    return rec;
}

inline void gate_surface(json& rec, const Tolerances& tol) {
    std::vector<std::string> failures;
    const std::string tag = "surface " + std::to_string(rec["index"].get<std::size_t>());
    if (rec["valid_nodes"].get<std::size_t>() == 0) {
        rec["pass"] = false;
        failures.push_back(tag + ": no non-degenerate nodes");
    } else {
        expect(rec, failures, tag, "K_max_rel_err", rec["K_max_rel_err"], tol.curvature);
    }
    expect(rec, failures, tag, "asym1", rec["asym"][0], tol.exact);
    expect(rec, failures, tag, "asym2", rec["asym"][1], tol.exact);
    expect(rec, failures, tag, "cheb1", rec["cheb"][0], tol.exact);
    expect(rec, failures, tag, "cheb2", rec["cheb"][1], tol.exact);
    const json& tet = rec["tetrahedron"];
    if (tet["valid_cells"].get<std::size_t>() > 0) {
        expect(rec, failures, tag, "tet_vs_dot", tet["max_rel_vs_dot"], tol.cross);
        expect(rec, failures, tag, "tors1_spread", tet["tors_spread"][0], tol.tors);
        expect(rec, failures, tag, "tors2_spread", tet["tors_spread"][1], tol.tors);
    }
    rec["failures"] = failures;
}

inline json field_record(const CoefficientField& cf, const WaveField& wf, std::size_t index, double lambda,
                         const Tolerances& tol) {
    const double cc = compatibility_residual(cf, lambda).max_norm;
    const LaxReport lax = verify_lax(cf, lambda);
    const double closed = closed_form_deviation(sym_surface(wf), wf, cf);
    const NormalAlignment normals = normal_alignment(wf, cf, tol.cond);
    json rec = {{"index", index},
                {"compatibility", cc},
                {"path_independence", lax.path_independence},
                {"red1", lax.red1},
                {"red2", lax.red2},
                {"lambda_fd", lax.lambda_fd},
                {"closed_form_tangent", closed},
                {"normal_alignment", normals.max_deviation},
                {"pass", true}};
    std::vector<std::string> failures;
    const std::string tag = "field " + std::to_string(index);
    expect(rec, failures, tag, "compatibility", cc, tol.exact);
    expect(rec, failures, tag, "path_independence", lax.path_independence, tol.path);
    expect(rec, failures, tag, "red1", lax.red1, tol.reduction);
    expect(rec, failures, tag, "red2", lax.red2, tol.reduction);
    expect(rec, failures, tag, "lambda_fd", lax.lambda_fd, tol.lambda_fd);
    expect(rec, failures, tag, "closed_form_tangent", closed, tol.exact);
    expect(rec, failures, tag, "normal_alignment", normals.max_deviation, tol.normal);
    rec["failures"] = failures;
    return rec;
}

inline json backlund_record(const SurfaceNet& before, const SurfaceNet& after, const CoefficientField& cf,
                            const ProjectorField& pf, const DarbouxParams& p, std::size_t step, const Tolerances& tol) {
    const SegmentReport seg = segment_report(before, after, p.kappa);
    const double proj = projector_system_residual(cf, pf, p.kappa);
    json rec = {{"step", step},
                {"kappa", p.kappa},
                {"phases", {p.chi1, p.chi2}},
                {"expected_length", seg.expected_length},
                {"length_spread", seg.length_spread},
                {"length_error", seg.length_error},
                {"tangency", seg.tangency},
                {"projector_residual", proj},
                {"pass", true}};
    std::vector<std::string> failures;
    const std::string tag = "backlund " + std::to_string(step);
    expect(rec, failures, tag, "length_spread", seg.length_spread, tol.segment);
    expect(rec, failures, tag, "length_error", seg.length_error, tol.segment);
    expect(rec, failures, tag, "tangency", seg.tangency, tol.segment);
    expect(rec, failures, tag, "projector_residual", proj, tol.exact);
    rec["failures"] = failures;
    return rec;
}

inline json tolerances_json(const Tolerances& t) {
    return {{"exact", t.exact}, {"cross", t.cross}, {"curvature", t.curvature}, {"tors", t.tors},
            {"segment", t.segment}, {"path", t.path}, {"reduction", t.reduction}, {"lambda_fd", t.lambda_fd},
            {"normal", t.normal}, {"cond", t.cond}};
}

}  // namespace detail

/// Builds the seed field named by the config.
inline CoefficientField load_seed(const PipelineConfig& cfg) {
    if (!cfg.seed_file) return vacuum(make_domain(*cfg.timescale1, *cfg.timescale2));
    CoefficientField cf = io::coefficients_from_json(io::read_json_file(*cfg.seed_file), "seed.file");
    if (cfg.timescale1 && !(cf.domain().t1() == *cfg.timescale1)) {
        throw ConfigError("timescale1: does not match the domain of the seed file");
    }
    if (cfg.timescale2 && !(cf.domain().t2() == *cfg.timescale2)) {
        throw ConfigError("timescale2: does not match the domain of the seed file");
    }
    return cf;
}

/// construct -> seed -> propagate -> chain -> verify -> export.
///
/// Config and I/O problems surface as ConfigError / IoError. Numerical
/// breakdowns and failed checks are reported in the result (exit code 1);
/// the report is still written when a path is configured.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, const RunOptions& opts = {}) {
    PipelineResult result;
    const Tolerances& tol = cfg.tolerances;
    const double lambda = cfg.lambda;
    const CoefficientField seed = load_seed(cfg);
    const auto& d = seed.domain();

    json& rep = result.report;
    rep["lambda"] = lambda;
    rep["K_expected"] = -4.0 * lambda * lambda;
    rep["grid"] = {d.n1(), d.n2()};
    rep["dense_steps"] = {d.t1().dense_step_count(), d.t2().dense_step_count()};
    rep["darboux"] = json::array();
    for (const auto& p : cfg.darboux) rep["darboux"].push_back(io::to_json(p));
    rep["tolerances"] = detail::tolerances_json(tol);
    std::vector<std::string> failures;

    std::optional<ChainResult> chain;
    try {
        chain = darboux_chain(seed, cfg.darboux, lambda);
    } catch (const NumericalError& e) {
        failures.push_back(std::string("chain: ") + e.what());
    } catch (const DomainError& e) {
        failures.push_back(std::string("chain: ") + e.what());
    }

    const bool verify = opts.mode != Mode::ExportOnly;
    const bool do_export = opts.mode != Mode::VerifyOnly;

    rep["surfaces"] = json::array();
    rep["fields"] = json::array();
    rep["backlund"] = json::array();
    if (chain && verify) {
        const ChainResult& c = *chain;
        std::vector<std::function<json()>> tasks;
        for (std::size_t k = 0; k < c.surfaces.size(); ++k) {
            tasks.push_back([&, k] {
                json rec = k == 0 ? detail::surface_record(c.surfaces[k], k, std::nullopt, tol)
                                  : detail::surface_record(c.surfaces[k], k, cfg.darboux[k - 1].kappa, tol);
                // The seed surface is only gated when it is a genuine surface.
                rec["gated"] = k > 0 || rec["valid_nodes"].get<std::size_t>() > 0;
                if (rec["gated"].get<bool>()) detail::gate_surface(rec, tol);
                return rec;
            });
        }
        for (std::size_t k = 0; k < c.fields.size(); ++k) {
            tasks.push_back([&, k] { return detail::field_record(c.fields[k], c.waves[k], k, lambda, tol); });
        }
        for (std::size_t k = 0; k < c.projectors.size(); ++k) {
            tasks.push_back([&, k] {
                return detail::backlund_record(sym_surface(c.waves[k]), c.surfaces[k + 1], c.fields[k], c.projectors[k],
                                               cfg.darboux[k], k + 1, tol);
            });
        }
        const std::vector<json> recs = detail::run_tasks(tasks, opts.threads);
        std::size_t at = 0;
        for (std::size_t k = 0; k < c.surfaces.size(); ++k) rep["surfaces"].push_back(recs[at++]);
        for (std::size_t k = 0; k < c.fields.size(); ++k) rep["fields"].push_back(recs[at++]);
        for (std::size_t k = 0; k < c.projectors.size(); ++k) rep["backlund"].push_back(recs[at++]);
    }

    double k_abs = 0, tet = 0;
    double asym[2] = {0, 0}, cheb[2] = {0, 0};
    std::size_t degenerate = 0;
    for (const json& s : rep["surfaces"]) {
        if (!s["gated"].get<bool>()) continue;
        k_abs = std::max(k_abs, s["K_max_abs_err"].get<double>());
        tet = std::max(tet, s["tetrahedron"]["max_rel_vs_dot"].get<double>());
        degenerate += s["degenerate_nodes"].get<std::size_t>();
        for (int a = 0; a < 2; ++a) {
            asym[a] = std::max(asym[a], s["asym"][a].get<double>());
            cheb[a] = std::max(cheb[a], s["cheb"][a].get<double>());
        }
    }
    for (const char* group : {"surfaces", "fields", "backlund"}) {
        for (const json& r : rep[group]) {
            for (const json& f : r["failures"]) failures.push_back(f.get<std::string>());
        }
    }
    rep["verified"] = verify;
    rep["K_max_abs_err"] = k_abs;
    rep["asym"] = {asym[0], asym[1]};
    rep["cheb"] = {cheb[0], cheb[1]};
    rep["tet_vs_dot_max_rel"] = tet;
    rep["degenerate_nodes"] = degenerate;
    rep["failures"] = failures;
    rep["pass"] = failures.empty();
    result.exit_code = failures.empty() ? kExitPass : kExitNumeric;

    if (chain && do_export) {
        if (cfg.outputs.obj) result.obj = io::export_obj(chain->surfaces.back(), *cfg.outputs.obj, tol.cond);
        if (cfg.outputs.fields) io::write_json_file(*cfg.outputs.fields, io::to_json(chain->fields.back()));
    }
    if (cfg.outputs.report && opts.mode != Mode::ExportOnly) io::write_json_file(*cfg.outputs.report, rep);
    return result;
}

}  // namespace tsnet
