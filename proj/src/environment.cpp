#include "ncrs/environment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "ncrs/nca.hpp"

namespace ncrs {

namespace {

constexpr std::uint64_t kTestingStream = 0x7e57'0000'0000ULL;

double region_x(Rng& rng, int region, const ScenarioParams& p) {
    const double width = p.playfield / kRegions;
    return uniform(rng, region * width + p.region_margin, (region + 1) * width - p.region_margin);
}

Vec2 bottom_start(Rng& rng, const ScenarioParams& p) {
    const double x = uniform(rng, p.start_x_min, p.start_x_max);
    const double y = uniform(rng, p.bottom_y_min, p.bottom_y_max);
    return {x, y};
}

} // namespace

std::vector<Segment> ObstacleSpec::segments() const {
    std::vector<Segment> out;
    for (const auto* wall : {&left_wall, &right_wall})
        for (std::size_t i = 0; i + 1 < wall->size(); ++i)
            out.push_back({(*wall)[i], (*wall)[i + 1]});
    return out;
}

ObstacleSpec generate_obstacle(Rng& rng, double passage_width, double roughness, const ScenarioParams& params) {
    const double l = params.playfield;
    if (!(passage_width > 0) || !(passage_width < l))
        throw std::invalid_argument("passage width must lie in (0, playfield)");
    if (roughness < 0)
        throw std::invalid_argument("roughness must be non-negative");

    ObstacleSpec spec;
    spec.passage_width = passage_width;
    spec.passage_y = params.passage_y;
    spec.roughness = roughness;
    spec.passage_center_x = uniform(rng, passage_width, l - passage_width);

    const int k = std::max(1, params.wall_segments);
    const double mouth_left = spec.passage_center_x - passage_width / 2;
    const double mouth_right = spec.passage_center_x + passage_width / 2;
    const double low_y = params.passage_y - params.funnel_drop;

    // Walls rise from the arena sides towards the mouth, so a robot pushing
    // upwards against either wall slides towards the passage.
    for (int i = 0; i <= k; ++i) {
        const double t = static_cast<double>(i) / k;
        spec.left_wall.push_back({mouth_left * t, low_y + params.funnel_drop * t});
        spec.right_wall.push_back({mouth_right + (l - mouth_right) * t, params.passage_y - params.funnel_drop * t});
    }
    for (auto* wall : {&spec.left_wall, &spec.right_wall})
        for (int i = 1; i < k; ++i)
            (*wall)[static_cast<std::size_t>(i)].y += roughness * uniform(rng, -1.0, 1.0);
    return spec;
}

EpisodeConfig make_episode(Task task, std::uint64_t seed, int region_index, const ScenarioParams& params) {
    if (region_index < 0 || region_index >= kRegions)
        throw std::out_of_range("region index must be in [0, 3]");

    EpisodeConfig cfg;
    cfg.task = task;
    cfg.seed = seed;
    cfg.region_index = region_index;
    cfg.episode_steps = params.episode_steps;
    cfg.playfield = params.playfield;
    cfg.module_size = params.module_size;
    cfg.robot_heading = 0.0;

    Rng rng(mix_seed(seed, {static_cast<std::uint64_t>(task), static_cast<std::uint64_t>(region_index)}));
    const double l = params.playfield;
    switch (task) {
    case Task::LightChasing: {
        cfg.robot_position = {l / 2, l / 2};
        // Regions: 0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right.
        const double in = params.lc_corner_inset;
        const Vec2 anchor{(region_index % 2 == 0) ? in : l - in, (region_index < 2) ? l - in : in};
        const double angle = uniform(rng, 0.0, 2 * std::numbers::pi);
        const double radius = params.lc_jitter_radius * std::sqrt(uniform(rng, 0.0, 1.0));
        cfg.light = {std::clamp(anchor.x + radius * std::cos(angle), 0.0, l),
                     std::clamp(anchor.y + radius * std::sin(angle), 0.0, l)};
        break;
    }
    case Task::LightChasingObstacle:
        cfg.robot_position = bottom_start(rng, params);
        cfg.obstacle = generate_obstacle(rng, params.passage_width(), params.roughness, params);
        cfg.light = {region_x(rng, region_index, params), params.top_y};
        break;
    case Task::CarryBallToTarget:
        cfg.robot_position = bottom_start(rng, params);
        cfg.ball = {region_x(rng, region_index, params), params.ball_y};
        cfg.target = {uniform(rng, params.target_x_min, params.target_x_max), params.top_y};
        break;
    }
    return cfg;
}

double sensor_activity(double distance, double playfield) {
    if (distance < 0 || std::isnan(distance))
        throw std::invalid_argument("distance must be non-negative");
    return std::exp(-distance / playfield);
}

Scene make_scene(const EpisodeConfig& config) {
    Scene scene;
    scene.playfield = config.playfield;
    if (config.obstacle)
        scene.walls = config.obstacle->segments();
    return scene;
}

WorldState initial_world(const EpisodeConfig& config) {
    WorldState w;
    w.robot.position = config.robot_position;
    w.robot.heading = config.robot_heading;
    w.light = config.light;
    if (config.task == Task::CarryBallToTarget) {
        w.has_ball = true;
        w.ball.position = config.ball;
        w.target = config.target;
    }
    return w;
}

std::vector<double> read_sensors(const WorldState& world, const RobotBody& body, double playfield) {
    std::vector<double> out;
    out.reserve(body.sensor_modules.size());
    const Vec2 object = world.has_ball ? world.ball.position : world.light;
    for (int m : body.sensor_modules) {
        const Vec2 p = module_world_position(body, world.robot, m);
        const Vec2 goal = body.kinds[static_cast<std::size_t>(m)] == ModuleKind::TargetSensor ? world.target : object;
        out.push_back(sensor_activity(distance(p, goal), playfield));
    }
    return out;
}

std::map<Cell, double> read_sensor_map(const WorldState& world, const RobotBody& body, double playfield) {
    const auto values = read_sensors(world, body, playfield);
    std::map<Cell, double> out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out[body.cells[static_cast<std::size_t>(body.sensor_modules[i])]] = values[i];
    return out;
}

double step_score(Task task, const WorldState& world, double playfield) {
    if (task == Task::CarryBallToTarget)
        return 0.5 * (sensor_activity(distance(world.robot.position, world.ball.position), playfield) +
                      sensor_activity(distance(world.ball.position, world.target), playfield));
    return sensor_activity(distance(world.robot.position, world.light), playfield);
}

double success_distance(Task task, const WorldState& world) {
    if (task == Task::CarryBallToTarget)
        return distance(world.ball.position, world.target);
    return distance(world.robot.position, world.light);
}

EpisodeResult run_episode(const Genome& genome, const Morphology& morph, const EpisodeConfig& config,
                          const EvalSettings& settings, bool record_trajectory, const StepObserver& observer) {
    const auto& physics = settings.sim.physics;
    const RobotBody body = RobotBody::from_morphology(morph, physics, config.module_size);
    const Scene scene = make_scene(config);
    WorldState world = initial_world(config);
    Controller controller(genome, morph, settings.layout(), settings.dims, settings.activation);

    EpisodeResult result;
    result.min_distance = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (int t = 0; t < config.episode_steps; ++t) {
        const auto sensors = read_sensors(world, body, config.playfield);
        const auto& commands = controller.tick(sensors);
        world = env_step(scene, body, world, commands, physics);
        const double score = step_score(config.task, world, config.playfield);
        total += score;
        result.min_distance = std::min(result.min_distance, success_distance(config.task, world));
        if (record_trajectory) {
            const Vec2 object = world.has_ball ? world.ball.position : world.light;
            result.trajectory.push_back({world.step, world.robot, object, world.target, score});
        }
        if (observer)
            observer(world, controller.grid());
    }
    result.fitness = config.episode_steps > 0 ? total / config.episode_steps : 0.0;
    result.success = result.min_distance < settings.sim.scenario.success_radius_modules * config.module_size;
    return result;
}

EpisodeResult run_episode(const Genome& genome, const EpisodeConfig& config, const EvalSettings& settings,
                          bool record_trajectory) {
    const auto grid = develop(genome, settings.layout(), settings.dims, settings.activation);
    return run_episode(genome, extract_body(grid), config, settings, record_trajectory);
}

void write_trajectory_csv(std::ostream& os, Task task, const std::vector<TrajectoryRow>& rows) {
    const bool ball = task == Task::CarryBallToTarget;
    os << "step,robot_x,robot_y,heading," << (ball ? "ball_x,ball_y,target_x,target_y" : "light_x,light_y")
       << ",score\n";
    os << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.step << ',' << r.robot.position.x << ',' << r.robot.position.y << ',' << r.robot.heading << ','
           << r.object.x << ',' << r.object.y << ',';
        if (ball)
            os << r.target.x << ',' << r.target.y << ',';
        os << r.score << '\n';
    }
}

std::vector<EpisodeConfig> training_episodes(Task task, std::uint64_t master_seed, int count,
                                             const ScenarioParams& params) {
    std::vector<EpisodeConfig> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j)
        out.push_back(make_episode(task, mix_seed(master_seed, {static_cast<std::uint64_t>(j / kRegions)}),
                                   j % kRegions, params));
    return out;
}

std::vector<EpisodeConfig> testing_episodes(Task task, std::uint64_t seed, int count, const ScenarioParams& params) {
    std::vector<EpisodeConfig> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        out.push_back(make_episode(task, mix_seed(seed, {kTestingStream, static_cast<std::uint64_t>(k / kRegions)}),
                                   k % kRegions, params));
    return out;
}

FitnessReport evaluate_on(const Genome& genome, const EvalSettings& settings,
                          const std::vector<EpisodeConfig>& episodes) {
    FitnessReport report;
    const auto grid = develop(genome, settings.layout(), settings.dims, settings.activation);
    report.morphology = extract_body(grid);
    report.validity = validate(report.morphology, settings.task);
    report.valid = report.validity.valid;
    if (!report.valid) {
        report.fitness = invalid_score(report.validity);
        return report;
    }
    double total = 0.0;
    for (const auto& cfg : episodes) {
        const auto r = run_episode(genome, report.morphology, cfg, settings);
        total += r.fitness;
        report.success_count += r.success ? 1 : 0;
        ++report.episodes;
    }
    report.fitness = episodes.empty() ? 0.0 : total / static_cast<double>(episodes.size());
    report.features = describe(report.morphology, settings.task);
    return report;
}

FitnessReport evaluate_genome(const Genome& genome, const EvalSettings& settings, std::uint64_t master_seed) {
    return evaluate_on(genome, settings, training_episodes(settings.task, master_seed, settings.episodes,
                                                           settings.sim.scenario));
}

} // namespace ncrs
