#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "schema_check.hpp"
#include "test_support.hpp"
#include "tsnet/pipeline.hpp"

using namespace tsnet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = TSNET_SOURCE_DIR;

fs::path scratch(const std::string& name) {
    const char* env = std::getenv("TSNET_TEST_TMP");
    const fs::path base = env ? fs::path(env) : fs::temp_directory_path();
    return base / "pipeline_scratch" / name;
}

json small_config() {
    return json::parse(R"({
        "timescale1": {"cantor": {"level": 4, "a": -1.2, "b": 1.2}},
        "timescale2": {"uniform": {"t0": -1.5, "step": 0.1, "n": 31}},
        "lambda": 1.0,
        "darboux": [{"kappa": 1.0, "phases": [0.3, 1.1]}]
    })");
}

std::string config_error(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

json load_schema(const char* name) { return io::read_json_file((kSource / "docs" / name).string()); }

}  // namespace

TEST(Config, Defaults) {
    const PipelineConfig cfg = parse_config(small_config());
    EXPECT_EQ(cfg.lambda, 1.0);
    EXPECT_FALSE(cfg.seed_file);
    ASSERT_EQ(cfg.darboux.size(), 1u);
    EXPECT_EQ(cfg.tolerances.exact, 1e-9);
    EXPECT_EQ(cfg.tolerances.cross, 1e-6);
    EXPECT_EQ(cfg.timescale1->size(), 32u);
}

TEST(Config, LambdaZeroNamesTheField) {
    json j = small_config();
    j["lambda"] = 0;
    EXPECT_EQ(config_error(j), "lambda: must be nonzero");
    j.erase("lambda");
    EXPECT_NE(config_error(j).find("lambda"), std::string::npos);
}

TEST(Config, ErrorsNameTheField) {
    auto with = [](const char* key, json value) {
        json j = small_config();
        j[key] = std::move(value);
        return config_error(j);
    };
    EXPECT_NE(with("colour", "red").find("unknown field 'colour'"), std::string::npos);
    EXPECT_NE(with("seed", 3).find("seed"), std::string::npos);
    EXPECT_NE(with("seed", "random").find("seed"), std::string::npos);
    EXPECT_NE(with("darboux", json::parse(R"([{"kappa": 0}])")).find("darboux[0].kappa"), std::string::npos);
    EXPECT_NE(with("darboux", json::parse(R"([{"kappa": 1}, {"kappa": 1}])")).find("darboux[1].kappa"), std::string::npos);
    EXPECT_NE(with("darboux", json::parse(R"([{"kappa": 1, "spin": 2}])")).find("darboux[0]"), std::string::npos);
    EXPECT_NE(with("tolerances", json::parse(R"({"exact": -1})")).find("tolerances.exact"), std::string::npos);
    EXPECT_NE(with("tolerances", json::parse(R"({"loose": 1})")).find("tolerances"), std::string::npos);
    EXPECT_NE(with("outputs", json::parse(R"({"obj": ""})")).find("outputs.obj"), std::string::npos);
    EXPECT_NE(with("timescale1", json::parse(R"({"uniform": {"t0": 0, "step": -1, "n": 3}})")).find("timescale1.uniform"),
              std::string::npos);
    json no_ts = small_config();
    no_ts.erase("timescale2");
    EXPECT_NE(config_error(no_ts).find("timescale1 and timescale2"), std::string::npos);
    EXPECT_FALSE(config_error(json::array()).empty());
}

TEST(Config, RelativePathsResolveAgainstConfigDirectory) {
    json j = small_config();
    j["outputs"] = {{"obj", "out/mesh.obj"}, {"report", "/abs/report.json"}};
    j["seed"] = {{"file", "seed.json"}};
    const PipelineConfig cfg = parse_config(j, "/data/run");
    EXPECT_EQ(fs::path(*cfg.outputs.obj), fs::path("/data/run/out/mesh.obj"));
    EXPECT_EQ(*cfg.outputs.report, "/abs/report.json");
    EXPECT_EQ(fs::path(*cfg.seed_file), fs::path("/data/run/seed.json"));
}

TEST(Config, ShippedConfigsParse) {
    for (const auto& entry : fs::directory_iterator(kSource / "configs")) {
        if (entry.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    }
}

TEST(Config, ShippedConfigsMatchSchema) {
    const test::SchemaChecker checker(load_schema("config.schema.json"));
    for (const auto& entry : fs::directory_iterator(kSource / "configs")) {
        if (entry.path().extension() != ".json") continue;
        const auto errors = checker.check(io::read_json_file(entry.path().string()));
        EXPECT_TRUE(errors.empty()) << entry.path() << ": " << (errors.empty() ? "" : errors.front());
    }
}

TEST(Pipeline, DemoConfigPasses) {
    PipelineConfig cfg = load_config((kSource / "configs" / "demo_uniform.json").string());
    cfg.outputs.obj = scratch("demo/mesh.obj").string();
    cfg.outputs.report = scratch("demo/report.json").string();
    cfg.outputs.fields = scratch("demo/fields.json").string();
    const PipelineResult res = run_pipeline(cfg);
    EXPECT_EQ(res.exit_code, kExitPass) << res.report["failures"].dump();
    EXPECT_TRUE(res.report["pass"].get<bool>());
    EXPECT_LE(res.report["K_max_abs_err"].get<double>(), 4e-8);
    EXPECT_EQ(res.report["K_expected"].get<double>(), -4.0);
    ASSERT_TRUE(res.obj);
    EXPECT_EQ(res.obj->vertices, 60u * 60u);
    EXPECT_EQ(test::read_obj_file(*cfg.outputs.obj).vertices.size(), 60u * 60u);
    EXPECT_EQ(io::read_json_file(*cfg.outputs.report), res.report);
    const CoefficientField cf = io::coefficients_from_json(io::read_json_file(*cfg.outputs.fields));
    EXPECT_LE(compatibility_residual(cf, 1.0).max_norm, 1e-9);
}

TEST(Pipeline, ReportMatchesSchema) {
    json j = small_config();
    j["darboux"].push_back({{"kappa", 1.6}, {"phases", {0.0, 0.4}}});
    const PipelineResult res = run_pipeline(parse_config(j));
    EXPECT_EQ(res.exit_code, kExitPass) << res.report["failures"].dump();
    EXPECT_EQ(res.report["surfaces"].size(), 3u);
    EXPECT_EQ(res.report["fields"].size(), 3u);
    EXPECT_EQ(res.report["backlund"].size(), 2u);
    EXPECT_FALSE(res.report["surfaces"][0]["gated"].get<bool>());
    const auto errors = test::SchemaChecker(load_schema("report.schema.json")).check(res.report);
    EXPECT_TRUE(errors.empty()) << errors.front();
}

TEST(Pipeline, DeterministicAcrossThreadCounts) {
    const PipelineConfig cfg = parse_config(small_config());
    const std::string one = run_pipeline(cfg, {Mode::Full, 1}).report.dump();
    const std::string four = run_pipeline(cfg, {Mode::Full, 4}).report.dump();
    EXPECT_EQ(one, four);
}

TEST(Pipeline, EqualPhasesGiveDegenerateSurface) {
    json j = small_config();
    j["darboux"] = json::parse(R"([{"kappa": 1.0, "phases": [0.5, 0.5]}])");
    const PipelineResult res = run_pipeline(parse_config(j));
    EXPECT_EQ(res.exit_code, kExitNumeric);
    EXPECT_NE(res.report["failures"].dump().find("no non-degenerate nodes"), std::string::npos);
}

TEST(Pipeline, SingularTransferIsNumericFailure) {
    json j = small_config();
    j["timescale1"] = json::parse(R"({"explicit": [0, 1, 2]})");
    const PipelineResult res = run_pipeline(parse_config(j));
    EXPECT_EQ(res.exit_code, kExitNumeric);
    EXPECT_NE(res.report["failures"][0].get<std::string>().find("chain:"), std::string::npos);
    EXPECT_TRUE(res.report["surfaces"].empty());
}

TEST(Pipeline, TightToleranceFails) {
    json j = small_config();
    j["tolerances"] = {{"curvature", 1e-300}};
    const PipelineResult res = run_pipeline(parse_config(j));
    EXPECT_EQ(res.exit_code, kExitNumeric);
    EXPECT_NE(res.report["failures"].dump().find("K_max_rel_err"), std::string::npos);
}

TEST(Pipeline, CorruptedSeedFieldFails) {
    const PipelineConfig base = parse_config(small_config());
    json field = io::to_json(vacuum(make_domain(*base.timescale1, *base.timescale2)));
    field["h"][3][4] = 0.25;
    const fs::path seed = scratch("corrupt/seed.json");
    io::write_json_file(seed.string(), field);
    json j = {{"lambda", 1.0}, {"seed", {{"file", "seed.json"}}}};
    const PipelineResult res = run_pipeline(parse_config(j, seed.parent_path()));
    EXPECT_EQ(res.exit_code, kExitNumeric);
    EXPECT_NE(res.report["failures"].dump().find("field 0"), std::string::npos);
}

TEST(Pipeline, SeedFileMismatchAndMissing) {
    json field = io::to_json(vacuum(test::uniform_grid(5, 5)));
    const fs::path seed = scratch("mismatch/seed.json");
    io::write_json_file(seed.string(), field);
    json j = small_config();
    j["seed"] = {{"file", seed.string()}};
    EXPECT_THROW(run_pipeline(parse_config(j)), ConfigError);
    j["seed"] = {{"file", scratch("mismatch/none.json").string()}};
    EXPECT_THROW(run_pipeline(parse_config(j)), IoError);
}

TEST(Pipeline, Modes) {
    PipelineConfig cfg = parse_config(small_config());
    fs::remove_all(scratch("modes"));
    cfg.outputs.obj = scratch("modes/mesh.obj").string();
    cfg.outputs.report = scratch("modes/report.json").string();
    const PipelineResult verify = run_pipeline(cfg, {Mode::VerifyOnly, 0});
    EXPECT_FALSE(verify.obj);
    EXPECT_FALSE(fs::exists(*cfg.outputs.obj));
    EXPECT_TRUE(fs::exists(*cfg.outputs.report));
    fs::remove(*cfg.outputs.report);
    const PipelineResult exp = run_pipeline(cfg, {Mode::ExportOnly, 0});
    EXPECT_TRUE(exp.obj);
    EXPECT_TRUE(fs::exists(*cfg.outputs.obj));
    EXPECT_FALSE(fs::exists(*cfg.outputs.report));
    EXPECT_FALSE(exp.report["verified"].get<bool>());
}

TEST(Pipeline, UnwritableOutputIsIoError) {
    const fs::path blocker = scratch("blocker");
    io::ensure_parent(blocker.string());
    std::ofstream(blocker) << "x";
    PipelineConfig cfg = parse_config(small_config());
    cfg.outputs.report = (blocker / "report.json").string();
    EXPECT_THROW(run_pipeline(cfg), IoError);
}
