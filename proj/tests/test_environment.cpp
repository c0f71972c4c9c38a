#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ncrs/environment.hpp"
#include "test_support.hpp"

using namespace ncrs;

namespace {

// Shortest distance from p to segment s.
double segment_distance(Vec2 p, const Segment& s) {
    const Vec2 d = s.b - s.a;
    const double len2 = dot(d, d);
    const double t = len2 > 0 ? std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0) : 0.0;
    return distance(p, s.a + d * t);
}

} // namespace

TEST(SensorActivity, Values) {
    EXPECT_NEAR(sensor_activity(0.0), 1.0, 1e-12);
    EXPECT_NEAR(sensor_activity(60.0), std::exp(-1.0), 1e-12);
    EXPECT_NEAR(sensor_activity(30.0), 0.6065306597126334, 1e-12);
    EXPECT_THROW(sensor_activity(-1e-9), std::invalid_argument);
}

TEST(SensorActivity, StrictlyDecreasing) {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        double a = uniform(rng, 0.0, 200.0), b = uniform(rng, 0.0, 200.0);
        if (a == b)
            continue;
        if (a > b)
            std::swap(a, b);
        EXPECT_GT(sensor_activity(a), sensor_activity(b));
        EXPECT_LE(sensor_activity(a), 1.0);
        EXPECT_GT(sensor_activity(b), 0.0);
    }
}

TEST(Episode, DeterministicAndInBounds) {
    for (Task task : {Task::LightChasing, Task::LightChasingObstacle, Task::CarryBallToTarget})
        for (int region = 0; region < 4; ++region)
            for (std::uint64_t seed = 0; seed < 50; ++seed) {
                const auto a = make_episode(task, seed, region);
                const auto b = make_episode(task, seed, region);
                EXPECT_EQ(a.robot_position, b.robot_position);
                EXPECT_EQ(a.light, b.light);
                EXPECT_EQ(a.ball, b.ball);
                EXPECT_EQ(a.target, b.target);
                for (Vec2 p : {a.robot_position, a.light, a.ball, a.target}) {
                    EXPECT_GE(p.x, 0.0);
                    EXPECT_LE(p.x, 60.0);
                    EXPECT_GE(p.y, 0.0);
                    EXPECT_LE(p.y, 60.0);
                }
                EXPECT_EQ(a.robot_heading, 0.0);
                EXPECT_EQ(a.episode_steps, 100);
            }
}

TEST(Episode, LightChasingPlacement) {
    const Vec2 anchors[4] = {{5, 55}, {55, 55}, {5, 5}, {55, 5}};
    for (int region = 0; region < 4; ++region)
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto cfg = make_episode(Task::LightChasing, seed, region);
            EXPECT_EQ(cfg.robot_position, (Vec2{30, 30}));
            EXPECT_LE(distance(cfg.light, anchors[region]), 5.0);
        }
}

TEST(Episode, RegionsAndStrips) {
    for (int region = 0; region < 4; ++region)
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto lco = make_episode(Task::LightChasingObstacle, seed, region);
            EXPECT_GE(lco.light.x, region * 15.0);
            EXPECT_LE(lco.light.x, (region + 1) * 15.0);
            EXPECT_GE(lco.robot_position.y, 4.0);
            EXPECT_LE(lco.robot_position.y, 8.0);
            ASSERT_TRUE(lco.obstacle);
            EXPECT_DOUBLE_EQ(lco.obstacle->passage_width, 3.0);
            const auto cbt = make_episode(Task::CarryBallToTarget, seed, region);
            EXPECT_EQ(cbt.ball.y, 30.0);
            EXPECT_GE(cbt.ball.x, region * 15.0);
            EXPECT_LE(cbt.ball.x, (region + 1) * 15.0);
            EXPECT_GE(cbt.target.x, 10.0);
            EXPECT_LE(cbt.target.x, 50.0);
        }
    EXPECT_THROW(make_episode(Task::LightChasing, 0, 4), std::out_of_range);
    EXPECT_THROW(make_episode(Task::LightChasing, 0, -1), std::out_of_range);
}

TEST(Obstacle, StraightWallsWithoutRoughness) {
    Rng rng(1);
    const auto spec = generate_obstacle(rng, 3.0, 0.0);
    for (const auto* wall : {&spec.left_wall, &spec.right_wall}) {
        const Vec2 a = wall->front(), b = wall->back();
        for (const Vec2 v : *wall)
            EXPECT_NEAR(cross(b - a, v - a), 0.0, 1e-9);
    }
}

TEST(Obstacle, RejectsBadWidth) {
    Rng rng(1);
    EXPECT_THROW(generate_obstacle(rng, 60.0, 1.0), std::invalid_argument);
    EXPECT_THROW(generate_obstacle(rng, 0.0, 1.0), std::invalid_argument);
}

// Sweep a lattice of points through the vertical corridor and check nothing solid is there.
TEST(Obstacle, CorridorIsFreeAcrossThousandSeeds) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(mix_seed(seed, {42}));
        const auto spec = generate_obstacle(rng, 3.0, 1.0);
        EXPECT_GE(spec.passage_center_x, 3.0);
        EXPECT_LE(spec.passage_center_x, 57.0);
        const auto segments = spec.segments();
        ASSERT_FALSE(segments.empty());
        const double half = spec.passage_width / 2;
        for (int iy = 0; iy <= 240; ++iy) {
            const double y = iy * 0.25;
            for (int ix = 0; ix <= 10; ++ix) {
                const Vec2 p{spec.passage_center_x - half + 1e-6 + (2 * half - 2e-6) * ix / 10.0, y};
                for (const auto& s : segments)
                    ASSERT_GT(segment_distance(p, s), 0.0) << "seed " << seed;
            }
        }
        for (const auto& s : segments) {
            const bool left = std::max(s.a.x, s.b.x) <= spec.passage_center_x - half + 1e-12;
            const bool right = std::min(s.a.x, s.b.x) >= spec.passage_center_x + half - 1e-12;
            EXPECT_TRUE(left || right);
        }
    }
}

TEST(Obstacle, FunnelOpensTowardsStart) {
    Rng rng(8);
    const auto spec = generate_obstacle(rng, 3.0, 0.0);
    EXPECT_LT(spec.left_wall.front().y, spec.left_wall.back().y);
    EXPECT_LT(spec.right_wall.back().y, spec.right_wall.front().y);
    EXPECT_DOUBLE_EQ(spec.left_wall.back().y, 30.0);
}

TEST(Sensors, ReadingsFollowGeometry) {
    const auto morph = Morphology::from_text(".....\n.S.S.\n.WTW.\n..T..\n.....\n");
    PhysicsParams params;
    const auto body = RobotBody::from_morphology(morph, params);
    Rng rng(12);
    for (int k = 0; k < 200; ++k) {
        WorldState w;
        w.robot.position = {uniform(rng, 10, 50), uniform(rng, 10, 50)};
        w.robot.heading = uniform(rng, -3.2, 3.2);
        w.light = {uniform(rng, 0, 60), uniform(rng, 0, 60)};
        const auto got = read_sensors(w, body);
        // centre of mass of the six cells sits at row 11/6, col 2
        const double com_row = (1 + 1 + 2 + 2 + 2 + 3) / 6.0;
        ASSERT_EQ(got.size(), 2u);
        const Cell cells[2] = {{1, 1}, {1, 3}};
        for (int i = 0; i < 2; ++i) {
            const double bx = cells[i].col - 2.0, by = com_row - cells[i].row;
            const double c = std::cos(w.robot.heading), s = std::sin(w.robot.heading);
            const Vec2 pos{w.robot.position.x + c * bx - s * by, w.robot.position.y + s * bx + c * by};
            EXPECT_NEAR(got[static_cast<std::size_t>(i)], std::exp(-distance(pos, w.light) / 60.0), 1e-12);
        }
    }
}

TEST(Sensors, CoincidentIsOneAndOrdered) {
    const auto morph = Morphology::from_text(".....\n..S..\n.WSW.\n.....\n.....\n");
    const auto body = RobotBody::from_morphology(morph, PhysicsParams{});
    WorldState w;
    w.robot.position = {30, 30};
    w.light = module_world_position(body, w.robot, body.sensor_modules[1]);
    const auto r = read_sensors(w, body);
    EXPECT_NEAR(r[1], 1.0, 1e-12);
    EXPECT_LT(r[0], r[1]);
}

TEST(Score, PerStep) {
    WorldState w;
    w.robot.position = {10, 10};
    w.light = {10, 10};
    EXPECT_EQ(step_score(Task::LightChasing, w), 1.0);
    w.has_ball = true;
    w.ball.position = {10, 10};
    w.target = {10, 10};
    EXPECT_EQ(step_score(Task::CarryBallToTarget, w), 1.0);
    w.ball.position = {10, 40};
    EXPECT_NEAR(step_score(Task::CarryBallToTarget, w), 0.5 * (std::exp(-0.5) + std::exp(-0.5)), 1e-12);
    EXPECT_EQ(success_distance(Task::CarryBallToTarget, w), 30.0);
}

TEST(RunEpisode, StillRobotScoresItsStartingDistance) {
    const auto morph = Morphology::from_text(".....\n..S..\n.WTW.\n.....\n.....\n");
    EvalSettings settings;
    for (int region = 0; region < 4; ++region) {
        const auto cfg = make_episode(Task::LightChasing, 3, region);
        const auto r = run_episode(Genome::zeros(settings.layout()), morph, cfg, settings, true);
        const double d0 = distance(cfg.robot_position, cfg.light);
        EXPECT_GT(d0, 30.0);
        EXPECT_NEAR(r.fitness, std::exp(-d0 / 60.0), 1e-12);
        EXPECT_FALSE(r.success);
        EXPECT_EQ(r.trajectory.size(), 100u);
    }
}

TEST(RunEpisode, RobotOnTheLightScoresOne) {
    const auto morph = Morphology::from_text(".....\n..S..\n.WTW.\n.....\n.....\n");
    EvalSettings settings;
    auto cfg = make_episode(Task::LightChasing, 3, 0);
    cfg.light = cfg.robot_position;
    const auto r = run_episode(Genome::zeros(settings.layout()), morph, cfg, settings);
    EXPECT_DOUBLE_EQ(r.fitness, 1.0);
    EXPECT_TRUE(r.success);
}

TEST(RunEpisode, TrajectoryCsv) {
    const auto morph = Morphology::from_text(".....\n..S..\n.WTW.\n.....\n.....\n");
    EvalSettings settings;
    settings.task = Task::CarryBallToTarget;
    const auto cbt_morph = Morphology::from_text(".....\n..S..\n.WAW.\n.....\n.....\n");
    const auto r = run_episode(Genome::zeros(settings.layout()), cbt_morph,
                               make_episode(Task::CarryBallToTarget, 1, 2), settings, true);
    std::ostringstream os;
    write_trajectory_csv(os, Task::CarryBallToTarget, r.trajectory);
    const std::string csv = os.str();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,robot_x,robot_y,heading,ball_x,ball_y,target_x,target_y,score");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 101);
}

TEST(Evaluate, InvalidDesignIsNotSimulated) {
    EvalSettings settings;
    const auto r = evaluate_genome(Genome::zeros(settings.layout()), settings, 1);
    EXPECT_FALSE(r.valid);
    EXPECT_EQ(r.episodes, 0);
    EXPECT_EQ(r.morphology.size(), 1);
    EXPECT_FALSE(r.features);
    EXPECT_DOUBLE_EQ(r.fitness, 0.0);  // a lone tissue cell satisfies nothing
}

TEST(Evaluate, InvalidScoresAreSlotCredits) {
    EvalSettings settings;
    for (std::uint64_t s = 0; s < 300; ++s) {
        const auto r = evaluate_genome(support::random_genome(settings.layout(), s, 0.05), settings, 1);
        if (r.valid)
            continue;
        const double scaled = r.fitness * 100.0;
        EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
        EXPECT_LE(r.fitness, 0.03 + 1e-12);
    }
}

TEST(Evaluate, ValidDesignScoresInUnitInterval) {
    EvalSettings settings;
    const auto genome = support::find_valid_genome(Task::LightChasing);
    const auto a = evaluate_genome(genome, settings, 21);
    const auto b = evaluate_genome(genome, settings, 21);
    ASSERT_TRUE(a.valid);
    EXPECT_EQ(a.episodes, 12);
    EXPECT_GT(a.fitness, 0.0);
    EXPECT_LE(a.fitness, 1.0);
    EXPECT_EQ(a.fitness, b.fitness);
    EXPECT_EQ(a.success_count, b.success_count);
    ASSERT_TRUE(a.features);
    EXPECT_EQ(a.features->body_parts, a.morphology.size());
}

TEST(Episodes, TrainingAndTestingSchedules) {
    const auto train = training_episodes(Task::LightChasing, 9, 12);
    ASSERT_EQ(train.size(), 12u);
    for (int j = 0; j < 12; ++j)
        EXPECT_EQ(train[static_cast<std::size_t>(j)].region_index, j % 4);
    const auto test = testing_episodes(Task::LightChasing, 9, 100);
    int per_region[4] = {};
    for (const auto& e : test)
        ++per_region[e.region_index];
    for (int n : per_region)
        EXPECT_EQ(n, 25);
    for (const auto& t : test)
        for (const auto& e : train)
            EXPECT_NE(t.seed, e.seed);
}
