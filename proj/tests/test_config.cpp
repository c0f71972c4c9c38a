#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "ncrs/errors.hpp"
#include "ncrs/run_config.hpp"
#include "test_support.hpp"

using namespace ncrs;

TEST(RunConfig, Defaults) {
    RunConfig c;
    EXPECT_EQ(c.resolved_lambda(), 112);
    EXPECT_EQ(c.resolved_generations(), 20000);
    EXPECT_EQ(c.resolved_total_configurations(), 3275);
    c.optimizer = Optimizer::CmaMe;
    EXPECT_EQ(c.resolved_lambda(), 128);
    EXPECT_EQ(c.resolved_generations(), 60000);
    c.dims = {7, 7};
    EXPECT_EQ(c.resolved_total_configurations(), 22099);  // C(52,3) - 1
    c.lambda = 10;
    c.generations = 3;
    EXPECT_EQ(c.resolved_lambda(), 10);
    EXPECT_EQ(c.resolved_generations(), 3);
}

TEST(RunConfig, JobsFromEnvironment) {
    RunConfig c;
    ::setenv("NCRS_JOBS", "3", 1);
    EXPECT_EQ(c.resolved_jobs(), 3);
    c.jobs = 2;
    EXPECT_EQ(c.resolved_jobs(), 2);
    ::unsetenv("NCRS_JOBS");
    c.jobs = 0;
    EXPECT_EQ(c.resolved_jobs(), 1);
}

TEST(RunConfig, ParseAndSerializeRoundTrip) {
    const auto c = parse_run_config(
        "# comment line\n"
        "task = cbt\n"
        "optimizer = cma-me   # trailing comment\n"
        "\n"
        "grid_height = 7\n"
        "grid_width = 9\n"
        "lambda = 24\n"
        "emitters = 3\n"
        "seed = 18446744073709551615\n"
        "sigma0 = 0.1\n"
        "activation = tanh\n"
        "output_dir = out/dir\n"
        "physics.dt = 0.025\n"
        "scenario.roughness = 0.3333333333333333\n");
    EXPECT_EQ(c.task, Task::CarryBallToTarget);
    EXPECT_EQ(c.optimizer, Optimizer::CmaMe);
    EXPECT_EQ(c.dims.height, 7);
    EXPECT_EQ(c.dims.width, 9);
    EXPECT_EQ(c.lambda, 24);
    EXPECT_EQ(c.emitters, 3);
    EXPECT_EQ(c.seed, 18446744073709551615ULL);
    EXPECT_EQ(c.sigma0, 0.1);
    EXPECT_EQ(c.activation, Activation::Tanh);
    EXPECT_EQ(c.output_dir, "out/dir");
    EXPECT_EQ(c.sim.physics.dt, 0.025);
    EXPECT_EQ(c.sim.scenario.roughness, 0.3333333333333333);
    EXPECT_EQ(parse_run_config(serialize_run_config(c)), c);
    RunConfig d;
    d.sim.physics.wall_friction = 1.0 / 7.0;
    d.sim.scenario.top_y = 51.123456789;
    EXPECT_EQ(parse_run_config(serialize_run_config(d)), d);
}

TEST(RunConfig, ErrorsNameTheLine) {
    const auto message = [](const std::string& text) {
        try {
            parse_run_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("task = lc\nbogus = 1\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("task = lc\n\nlambda = x\n").find("line 3"), std::string::npos);
    EXPECT_NE(message("no equals sign\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("task = mars\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("grid_height = 4\n"), "no error");
    EXPECT_NE(message("sigma0 = -1\n"), "no error");
    EXPECT_NE(message("lambda = 1\n"), "no error");
    EXPECT_EQ(message("lambda = 0\n"), "no error");
}

TEST(RunConfig, SetValueAndLoad) {
    RunConfig c;
    set_config_value(c, "generations", "42");
    set_config_value(c, "scenario.passage_modules", "4");
    EXPECT_EQ(c.generations, 42);
    EXPECT_EQ(c.sim.scenario.passage_modules, 4.0);
    EXPECT_THROW(set_config_value(c, "nope", "1"), ConfigError);
    EXPECT_THROW(set_config_value(c, "seed", "-1x"), ConfigError);

    const auto dir = support::fresh_dir("config");
    std::ofstream(dir / "run.cfg") << serialize_run_config(c);
    EXPECT_EQ(load_run_config(dir / "run.cfg"), c);
    EXPECT_THROW(load_run_config(dir / "missing.cfg"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST(RunConfig, EvalSettings) {
    RunConfig c;
    c.task = Task::LightChasingObstacle;
    c.train_episodes = 8;
    c.activation = Activation::Tanh;
    const auto s = c.eval_settings();
    EXPECT_EQ(s.task, Task::LightChasingObstacle);
    EXPECT_EQ(s.episodes, 8);
    EXPECT_EQ(s.activation, Activation::Tanh);
    EXPECT_EQ(s.sim, c.sim);
    EXPECT_EQ(parse_optimizer("cma-es"), Optimizer::CmaEs);
    EXPECT_EQ(optimizer_name(Optimizer::CmaMe), "cma-me");
    EXPECT_THROW(parse_optimizer("ga"), ConfigError);
}
