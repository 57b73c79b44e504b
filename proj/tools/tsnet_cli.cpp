// tsnet: pseudospherical nets on time scales from the command line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "tsnet/tsnet.hpp"

namespace {

using tsnet::json;

struct Globals {
    unsigned threads = 0;
    bool quiet = false;
};

void print_summary(const tsnet::PipelineResult& res, double seconds, const Globals& g) {
    if (g.quiet) return;
    const json& r = res.report;
    std::fprintf(stderr, "%s  lambda=%g  K_max_abs_err=%.3e  tet_vs_dot=%.3e  degenerate=%zu  (%.2fs)\n",
                 r["pass"].get<bool>() ? "PASS" : "FAIL", r["lambda"].get<double>(), r["K_max_abs_err"].get<double>(),
                 r["tet_vs_dot_max_rel"].get<double>(), r["degenerate_nodes"].get<std::size_t>(), seconds);
    for (const json& f : r["failures"]) std::fprintf(stderr, "  %s\n", f.get<std::string>().c_str());
    if (res.obj) {
        std::fprintf(stderr, "  mesh: %zu vertices, %zu faces, %zu cells omitted\n", res.obj->vertices, res.obj->faces,
                     res.obj->omitted_cells);
    }
}

int run_config(const tsnet::PipelineConfig& cfg, tsnet::Mode mode, const Globals& g, bool echo_report) {
    const auto t0 = std::chrono::steady_clock::now();
    const tsnet::PipelineResult res = tsnet::run_pipeline(cfg, {mode, g.threads});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (echo_report && !cfg.outputs.report && !g.quiet) std::cout << res.report.dump(2) << '\n';
    print_summary(res, seconds, g);
    return res.exit_code;
}

/// Canned pseudosphere on a Cantor grid.
json demo_config(const std::string& out_dir) {
    return {{"timescale1", {{"cantor", {{"level", 5}, {"a", -1.2}, {"b", 1.2}}}}},
            {"timescale2", {{"uniform", {{"t0", -2.0}, {"step", 0.07}, {"n", 60}}}}},
            {"lambda", 1.0},
            {"seed", "vacuum"},
            {"darboux", {{{"kappa", 1.0}, {"phases", {0.3, 1.1}}}}},
            {"outputs",
             {{"obj", (std::filesystem::path(out_dir) / "demo.obj").string()},
              {"report", (std::filesystem::path(out_dir) / "demo_report.json").string()},
              {"fields", (std::filesystem::path(out_dir) / "demo_fields.json").string()}}}};
}

/// Randomized algebra identities; returns the number of violations.
std::size_t selfcheck(std::uint64_t seed, std::size_t cases, bool quiet) {
    using namespace tsnet;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    auto quat = [&] { return Quat{g(rng), g(rng), g(rng), g(rng)}; };
    auto cquat = [&] { return CQuat::from_coeffs({g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)}); };
    std::size_t bad = 0;
    double worst_norm = 0, worst_dagger = 0, worst_proj = 0;
    for (std::size_t k = 0; k < cases; ++k) {
        const Quat a = quat(), b = quat();
        const double e = std::abs((a * b).norm() - a.norm() * b.norm()) / (a.norm() * b.norm());
        worst_norm = std::max(worst_norm, e);
        const CQuat x = cquat(), y = cquat();
        const double d = distance((x * y).dagger(), y.dagger() * x.dagger()) / (x.op_norm() * y.op_norm());
        worst_dagger = std::max(worst_dagger, d);
        const double phi = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
        const CQuat p = CQuat::embed(Quat{0.0, std::cos(phi), std::sin(phi), 0.0});
        const CQuat P = 0.5 * (CQuat::identity() + cplx(0.0, 1.0) * p);
        const double pr = std::max({distance(P * P, P), distance(P.dagger(), P), std::abs(P.trace() - 1.0)});
        worst_proj = std::max(worst_proj, pr);
        if (e > 1e-10 || d > 1e-10 || pr > 1e-10) ++bad;
    }
    if (!quiet) {
        std::printf("selfcheck seed=%llu cases=%zu  norm=%.2e  dagger=%.2e  projector=%.2e  violations=%zu\n",
                    static_cast<unsigned long long>(seed), cases, worst_norm, worst_dagger, worst_proj, bad);
    }
    return bad;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudospherical nets on time scales"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--threads", g.threads, "Worker thread cap (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_flag("--quiet", g.quiet, "Suppress summaries");

    std::string config_path;
    auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config_path, "Pipeline config JSON")->required(); };

    CLI::App* run = app.add_subcommand("run", "Build, transform, verify and export");
    add_config(run);
    CLI::App* verify = app.add_subcommand("verify", "Run the checks only");
    add_config(verify);
    CLI::App* exp = app.add_subcommand("export", "Write the mesh and fields only");
    add_config(exp);

    CLI::App* build_ts = app.add_subcommand("build-ts", "Print a time scale as a JSON array");
    std::string spec_text;
    int axis = 1;
    auto* spec_opt = build_ts->add_option("--spec", spec_text, "Time-scale spec JSON");
    auto* cfg_opt = build_ts->add_option("--config", config_path, "Take the time scale from a pipeline config");
    spec_opt->excludes(cfg_opt);
    build_ts->add_option("--axis", axis, "Axis of the config to print")->check(CLI::IsMember({1, 2}));

    CLI::App* demo = app.add_subcommand("demo", "Pseudosphere on a Cantor grid");
    std::string out_dir = "tsnet_demo";
    demo->add_option("--out", out_dir, "Output directory");

    CLI::App* self = app.add_subcommand("selfcheck", "Randomized algebra identities");
    std::uint64_t seed_rng = 1;
    std::size_t cases = 10000;
    self->add_option("--seed-rng", seed_rng, "RNG seed");
    self->add_option("--cases", cases, "Number of random cases");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return tsnet::kExitConfig;
    }

    try {
        if (run->parsed()) return run_config(tsnet::load_config(config_path), tsnet::Mode::Full, g, false);
        if (verify->parsed()) return run_config(tsnet::load_config(config_path), tsnet::Mode::VerifyOnly, g, true);
        if (exp->parsed()) return run_config(tsnet::load_config(config_path), tsnet::Mode::ExportOnly, g, false);
        if (build_ts->parsed()) {
            json ts;
            if (!spec_text.empty()) {
                json spec;
                try {
                    spec = json::parse(spec_text);
                } catch (const json::parse_error& e) {
                    throw tsnet::ConfigError(std::string("--spec is not valid JSON: ") + e.what());
                }
                ts = tsnet::io::to_json(tsnet::io::parse_timescale_spec(spec, "spec"));
            } else if (!config_path.empty()) {
                const tsnet::PipelineConfig cfg = tsnet::load_config(config_path);
                const auto& chosen = axis == 1 ? cfg.timescale1 : cfg.timescale2;
                if (!chosen) throw tsnet::ConfigError("timescale" + std::to_string(axis) + ": not set in config");
                ts = tsnet::io::to_json(*chosen);
            } else {
                throw tsnet::ConfigError("build-ts needs --spec or --config");
            }
            std::cout << ts.dump() << '\n';
            return tsnet::kExitPass;
        }
        if (demo->parsed()) {
            std::error_code ec;
            std::filesystem::create_directories(out_dir, ec);
            if (ec) throw tsnet::IoError("cannot create '" + out_dir + "': " + ec.message());
            const int code = run_config(tsnet::parse_config(demo_config(out_dir)), tsnet::Mode::Full, g, false);
            if (!g.quiet) std::fprintf(stderr, "  wrote %s\n", out_dir.c_str());
            return code;
        }
        if (self->parsed()) return selfcheck(seed_rng, cases, g.quiet) == 0 ? tsnet::kExitPass : tsnet::kExitNumeric;
    } catch (const tsnet::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return tsnet::kExitConfig;
    } catch (const tsnet::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return tsnet::kExitIo;
    } catch (const tsnet::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return tsnet::kExitNumeric;
    }
    return tsnet::kExitPass;
}
