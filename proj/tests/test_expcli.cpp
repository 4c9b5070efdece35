#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "fracback/expcli.hpp"

using namespace fracback;
using namespace fracback::expcli;

namespace {

const fs::path kConfigs = fs::path(FRACBACK_SOURCE_DIR) / "configs";

json minimal() {
    return json::parse(R"({"operator": {"type": "dirichlet", "l": 1.0, "n_modes": 8}, "alpha": 0.5, "T": 1.0,
                          "time_points": 5, "u0": {"type": "random", "seed": 3}, "R": 2.0})");
}

std::string config_error(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

class ExpCliRun : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("fracback_expcli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    ExperimentConfig config(const json& j, const std::string& sub = "out") {
        auto c = parse_config(j, kConfigs);
        c.outputs = dir_ / sub;
        return c;
    }

    fs::path dir_;
};

}  // namespace

TEST(ParseConfig, MinimalAndDefaults) {
    const auto c = parse_config(minimal());
    EXPECT_EQ(c.op.type, "dirichlet");
    EXPECT_EQ(c.op.n_modes, 8);
    ASSERT_EQ(c.alphas.size(), 1u);
    EXPECT_FALSE(c.alpha_sweep);
    EXPECT_EQ(c.time_points, 5);
    EXPECT_EQ(c.epsilon, 1.0);
    EXPECT_EQ(c.noise.delta, 0.0);
    EXPECT_EQ(c.outputs, fs::path("out"));
}

TEST(ParseConfig, AlphaArrayIsSweep) {
    auto j = minimal();
    j["alpha"] = {0.3, 1.0};
    const auto c = parse_config(j);
    EXPECT_TRUE(c.alpha_sweep);
    EXPECT_EQ(c.alphas, (std::vector<double>{0.3, 1.0}));
}

TEST(ParseConfig, ErrorsNameTheField) {
    auto j = minimal();
    j["alpha"] = 1.5;
    EXPECT_NE(config_error(j).find("alpha"), std::string::npos);
    j = minimal();
    j["alpha"] = {0.5, 0.0};
    EXPECT_NE(config_error(j).find("alpha[1]"), std::string::npos);
    j = minimal();
    j["time_points"] = 2;
    EXPECT_NE(config_error(j).find("time_points"), std::string::npos);
    j = minimal();
    j["operator"]["n_modes"] = 0;
    EXPECT_NE(config_error(j).find("operator.n_modes"), std::string::npos);
    j = minimal();
    j["operator"]["type"] = "robin";
    EXPECT_NE(config_error(j).find("operator.type"), std::string::npos);
    j = minimal();
    j["u0"] = json::parse(R"({"type": "coefficients", "values": [1.0, "x"]})");
    EXPECT_NE(config_error(j).find("u0.values[1]"), std::string::npos);
    j = minimal();
    j["noise"] = {{"delta", -1.0}};
    EXPECT_NE(config_error(j).find("noise.delta"), std::string::npos);
    j = minimal();
    j["colour"] = "blue";
    EXPECT_NE(config_error(j).find("colour"), std::string::npos);
    j = minimal();
    j["operator"] = json::parse(R"({"type": "fracpower", "inner": {"type": "dirichlet"}})");
    EXPECT_NE(config_error(j).find("operator.s"), std::string::npos);
    j = minimal();
    j.erase("alpha");
    EXPECT_NE(config_error(j).find("alpha"), std::string::npos);
    EXPECT_THROW(parse_config(json::array()), ConfigError);
}

TEST(ParseConfig, ShippedConfigsLoad) {
    for (const auto& e : fs::directory_iterator(kConfigs)) {
        if (e.path().filename() == "swap_matrix.json") continue;
        EXPECT_NO_THROW(load_config(e.path())) << e.path();
    }
    EXPECT_THROW(load_config(kConfigs / "nope.json"), ConfigError);
}

TEST(Overrides, SeedModesAndOut) {
    auto c = parse_config(minimal());
    apply_overrides(c, {fs::path("elsewhere"), 42, 16});
    EXPECT_EQ(c.outputs, fs::path("elsewhere"));
    EXPECT_EQ(c.u0.seed, 42u);
    EXPECT_EQ(c.noise.seed, backcast::detail::splitmix64(42));
    EXPECT_EQ(c.op.n_modes, 16);

    auto j = minimal();
    j["operator"] = json::parse(R"({"type": "fracpower", "s": 0.5, "inner": {"type": "neumann", "n_modes": 4}})");
    auto f = parse_config(j);
    apply_overrides(f, {std::nullopt, std::nullopt, 9});
    EXPECT_EQ(f.op.inner->n_modes, 9);

    auto m = load_config(kConfigs / "matrix.json");
    EXPECT_THROW(apply_overrides(m, {std::nullopt, std::nullopt, 4}), ConfigError);
    EXPECT_THROW(apply_overrides(c, {std::nullopt, std::nullopt, 0}), ConfigError);
}

TEST(InitialStates, RandomDrawsAreScaledIntoTheBall) {
    auto j = minimal();
    j["u0"]["count"] = 4;
    j["u0"]["radius_fraction"] = 0.5;
    const auto c = parse_config(j);
    const auto es = build_operator(c.op, c.base_dir);
    const auto states = build_initial_states(c, es);
    ASSERT_EQ(states.size(), 4u);
    for (const auto& u : states) {
        const double size = std::max({u.norm(), u.operator_norm(), certify::admissible_norms(u, c.epsilon).strict()});
        EXPECT_NEAR(size, 0.5 * c.R, 1e-12);
    }
    const auto again = build_initial_states(c, es);
    for (std::size_t k = 0; k < states.size(); ++k) {
        EXPECT_TRUE(std::equal(states[k].coefficients().begin(), states[k].coefficients().end(),
                               again[k].coefficients().begin()));
    }
    EXPECT_NE(states[0][0], states[1][0]);
}

TEST(InitialStates, CoefficientCountMustMatch) {
    auto j = minimal();
    j["u0"] = json::parse(R"({"type": "coefficients", "values": [1.0, 2.0]})");
    const auto c = parse_config(j);
    EXPECT_THROW(build_initial_states(c, build_operator(c.op, c.base_dir)), ConfigError);
}

TEST(Classify, ExitCodes) {
    EXPECT_EQ(classify(ConfigError("x")), kConfigError);
    EXPECT_EQ(classify(DomainError("x")), kNumericError);
    EXPECT_EQ(classify(ConvergenceError("x")), kNumericError);
}

TEST_F(ExpCliRun, EvolveWritesTrajectory) {
    auto j = minimal();
    j["time_points"] = 3;
    ASSERT_EQ(run(Command::evolve, config(j)), kOk);
    const auto ls = lines(slurp(dir_ / "out" / "trajectory.csv"));
    ASSERT_EQ(ls.size(), 4u);
    EXPECT_EQ(ls[0].substr(0, 7), "t,norm,");
    const auto summary = json::parse(slurp(dir_ / "out" / "summary.json"));
    EXPECT_TRUE(summary["norms_nonincreasing"].get<bool>());
    EXPECT_EQ(summary["norms"].size(), 3u);
}

TEST_F(ExpCliRun, DemoNormsNonIncreasing) {
    auto c = load_config(kConfigs / "demo.json");
    c.outputs = dir_ / "demo";
    ASSERT_EQ(run(Command::evolve, c), kOk);
    const auto summary = json::parse(slurp(dir_ / "demo" / "summary.json"));
    const auto norms = summary["norms"].get<std::vector<double>>();
    EXPECT_EQ(norms.size(), static_cast<std::size_t>(c.time_points));
    for (std::size_t k = 1; k < norms.size(); ++k) EXPECT_LE(norms[k], norms[k - 1]);
}

TEST_F(ExpCliRun, ExactBackcastRecoversKeptModes) {
    auto j = minimal();
    j["operator"]["n_modes"] = 32;
    ASSERT_EQ(run(Command::backcast, config(j)), kOk);
    const auto r = json::parse(slurp(dir_ / "out" / "reconstruction.json"));
    ASSERT_EQ(r["runs"].size(), 1u);
    EXPECT_LE(r["runs"][0]["rel_error_kept_modes"].get<double>(), 1e-6);
    EXPECT_TRUE(r["rate_fit"].is_null());
    EXPECT_EQ(lines(slurp(dir_ / "out" / "errors.csv")).size(), 2u);
}

TEST_F(ExpCliRun, DeltaSweepEmitsRateFit) {
    auto c = load_config(kConfigs / "delta_sweep.json");
    c.outputs = dir_ / "sweep";
    ASSERT_EQ(run(Command::backcast, c), kOk);
    fs::path file = dir_ / "sweep" / "reconstruction.json";
    if (c.alpha_sweep) file = dir_ / "sweep" / "alpha_0" / "reconstruction.json";
    const auto r = json::parse(slurp(file));
    ASSERT_TRUE(r["rate_fit"].is_object());
    EXPECT_GT(r["rate_fit"]["exponent"].get<double>(), 0.0);
}

TEST_F(ExpCliRun, MissingMatrixIsConfigError) {
    auto c = load_config(fs::path(FRACBACK_SOURCE_DIR) / "tests" / "data" / "missing_matrix.json");
    c.outputs = dir_ / "m";
    try {
        run(Command::evolve, c);
        FAIL() << "expected a config error";
    } catch (const std::exception& e) {
        EXPECT_EQ(classify(e), kConfigError);
        EXPECT_NE(std::string(e.what()).find("operator.path"), std::string::npos);
    }
}

TEST_F(ExpCliRun, NeumannCertificateHasKTwo) {
    auto j = minimal();
    j["operator"]["type"] = "neumann";
    j["alpha"] = 0.5;
    ASSERT_EQ(run(Command::certify, config(j)), kOk);
    const auto cert = json::parse(slurp(dir_ / "out" / "certificate.json"));
    EXPECT_DOUBLE_EQ(cert["instances"][0]["constants"]["K"].get<double>(), 2.0);
    EXPECT_TRUE(cert["pass"].get<bool>());
}

TEST_F(ExpCliRun, ForcedFailureExitsFour) {
    auto c = load_config(kConfigs / "forced_failure.json");
    c.outputs = dir_ / "forced";
    EXPECT_EQ(run(Command::certify, c), kCertificateFailure);
}

TEST_F(ExpCliRun, SweepWritesIndex) {
    auto j = minimal();
    j["alpha"] = {0.4, 1.0};
    ASSERT_EQ(run(Command::certify, config(j)), kOk);
    const auto index = json::parse(slurp(dir_ / "out" / "index.json"));
    ASSERT_EQ(index["runs"].size(), 2u);
    EXPECT_EQ(index["runs"][1]["dir"], "alpha_1");
    EXPECT_EQ(index["exit_code"], 0);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "alpha_0" / "certificate.txt"));
    const auto classical = json::parse(slurp(dir_ / "out" / "alpha_1" / "certificate.json"));
    EXPECT_TRUE(classical["instances"][0]["constants"]["C1"].is_null());
}

TEST_F(ExpCliRun, AmplificationTable) {
    ASSERT_EQ(run(Command::amplification, config(minimal())), kOk);
    const auto ls = lines(slurp(dir_ / "out" / "amplification.csv"));
    ASSERT_EQ(ls.size(), 9u);
    EXPECT_EQ(ls[0], "n,lambda,factor_alpha,factor_1");
    EXPECT_EQ(ls[1].substr(0, 2), "1,");
}

TEST_F(ExpCliRun, IdenticalConfigGivesIdenticalBytes) {
    auto j = minimal();
    j["noise"] = {{"delta", 1e-3}, {"seed", 5u}};
    for (Command cmd : {Command::evolve, Command::backcast, Command::certify}) {
        ASSERT_EQ(run(cmd, config(j, "a")), kOk);
        ASSERT_EQ(run(cmd, config(j, "b")), kOk);
        for (const auto& e : fs::directory_iterator(dir_ / "a")) {
            EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / e.path().filename())) << e.path();
        }
    }
}

TEST_F(ExpCliRun, SeedOverrideChangesOutput) {
    auto a = config(minimal(), "a");
    auto b = config(minimal(), "b");
    apply_overrides(b, {std::nullopt, 99, std::nullopt});
    ASSERT_EQ(run(Command::evolve, a), kOk);
    ASSERT_EQ(run(Command::evolve, b), kOk);
    EXPECT_NE(slurp(dir_ / "a" / "trajectory.csv"), slurp(dir_ / "b" / "trajectory.csv"));
}
