#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ncrs/feature.hpp"
#include "ncrs/genome.hpp"
#include "ncrs/morphology.hpp"
#include "ncrs/physics.hpp"
#include "ncrs/rng.hpp"

namespace ncrs {

inline constexpr int kRegions = 4;

/// Scenario placement constants. Lengths are in module units.
struct ScenarioParams {
    double playfield = 60.0;
    double module_size = 1.0;
    int episode_steps = 100;
    double success_radius_modules = 10.0;

    double lc_corner_inset = 5.0;      // corner anchors sit this far from both walls
    double lc_jitter_radius = 5.0;

    double bottom_y_min = 4.0;         // LCO/CBT robot start strip
    double bottom_y_max = 8.0;
    double start_x_min = 10.0;
    double start_x_max = 50.0;
    double top_y = 52.0;               // LCO light / CBT target height
    double region_margin = 3.0;        // horizontal margin inside each of the four regions

    double passage_y = 30.0;
    double passage_modules = 3.0;
    double funnel_drop = 12.0;         // how far below the mouth the walls meet the arena sides
    int wall_segments = 6;             // per funnel wall
    double roughness = 1.0;

    double ball_y = 30.0;
    double target_x_min = 10.0;
    double target_x_max = 50.0;
    double target_radius = 5.0;        // drawn only; success uses the success radius

    double passage_width() const { return passage_modules * module_size; }
    double success_radius() const { return success_radius_modules * module_size; }

    bool operator==(const ScenarioParams&) const = default;
};

struct SimSettings {
    PhysicsParams physics;
    ScenarioParams scenario;
    bool operator==(const SimSettings&) const = default;
};

/// Funnel obstacle: two wall polylines meeting the passage mouth from the sides.
struct ObstacleSpec {
    std::vector<Vec2> left_wall;   // from the left arena edge to the mouth
    std::vector<Vec2> right_wall;  // from the mouth to the right arena edge
    double passage_center_x = 0.0;
    double passage_width = 0.0;
    double passage_y = 0.0;
    double roughness = 0.0;

    std::vector<Segment> segments() const;
};

struct EpisodeConfig {
    Task task = Task::LightChasing;
    std::uint64_t seed = 0;
    int region_index = 0;
    Vec2 robot_position;
    double robot_heading = 0.0;
    Vec2 light;                        // LC/LCO
    Vec2 ball;                         // CBT
    Vec2 target;                       // CBT
    std::optional<ObstacleSpec> obstacle;  // LCO
    int episode_steps = 100;
    double playfield = 60.0;
    double module_size = 1.0;
};

/// Deterministic placements from (seed, region). Throws std::out_of_range for a bad region.
EpisodeConfig make_episode(Task task, std::uint64_t seed, int region_index, const ScenarioParams& params = {});

/// Procedural funnel; the passage centre is uniform in [w, playfield - w].
/// Throws std::invalid_argument if passage_width is not in (0, playfield).
ObstacleSpec generate_obstacle(Rng& rng, double passage_width, double roughness, const ScenarioParams& params = {});

/// exp(-distance / playfield). Throws std::invalid_argument for negative distances.
double sensor_activity(double distance, double playfield = 60.0);

Scene make_scene(const EpisodeConfig& config);
WorldState initial_world(const EpisodeConfig& config);

/// Activities for each sensor module, aligned with body.sensor_modules.
std::vector<double> read_sensors(const WorldState& world, const RobotBody& body, double playfield = 60.0);

/// Same readings keyed by grid cell.
std::map<Cell, double> read_sensor_map(const WorldState& world, const RobotBody& body, double playfield = 60.0);

/// Score of one state: LC/LCO activity of the robot-light distance; CBT mean of
/// the robot-ball and ball-target activities.
double step_score(Task task, const WorldState& world, double playfield = 60.0);

/// Distance compared against the success radius.
double success_distance(Task task, const WorldState& world);

struct TrajectoryRow {
    int step = 0;
    RigidState robot;
    Vec2 object;   // light or ball
    Vec2 target;
    double score = 0.0;
};

struct EpisodeResult {
    double fitness = 0.0;
    bool success = false;
    double min_distance = 0.0;
    std::vector<TrajectoryRow> trajectory;
};

struct EvalSettings {
    Task task = Task::LightChasing;
    GridDims dims{5, 5};
    Activation activation = Activation::Relu;
    SimSettings sim;
    int episodes = 12;

    ChannelLayout layout() const { return ChannelLayout::for_task(task); }
};

/// Called after every environment step with the new world and the controller grid.
using StepObserver = std::function<void(const WorldState&, const CellGrid&)>;

/// Simulates a body already grown from `genome`.
EpisodeResult run_episode(const Genome& genome, const Morphology& morph, const EpisodeConfig& config,
                          const EvalSettings& settings, bool record_trajectory = false,
                          const StepObserver& observer = {});

/// Grows the body and simulates it. The caller is expected to have checked validity.
EpisodeResult run_episode(const Genome& genome, const EpisodeConfig& config, const EvalSettings& settings,
                          bool record_trajectory = false);

/// Writes a trajectory as CSV.
void write_trajectory_csv(std::ostream& os, Task task, const std::vector<TrajectoryRow>& rows);

struct FitnessReport {
    double fitness = 0.0;
    bool valid = false;
    int success_count = 0;
    int episodes = 0;          // simulated episodes (0 for invalid designs)
    ValidityReport validity;
    std::optional<FeatureDescriptor> features;
    Morphology morphology;
};

/// Training-time episode set: region j % 4 with seed index j / 4.
std::vector<EpisodeConfig> training_episodes(Task task, std::uint64_t master_seed, int count,
                                             const ScenarioParams& params = {});

/// Testing campaign episodes: regions cycled, seeds from an independent stream.
std::vector<EpisodeConfig> testing_episodes(Task task, std::uint64_t seed, int count,
                                            const ScenarioParams& params = {});

/// Develop, extract, validate; invalid bodies get partial credit without simulation,
/// valid ones the mean fitness over the training episodes.
FitnessReport evaluate_genome(const Genome& genome, const EvalSettings& settings, std::uint64_t master_seed);

/// Same as evaluate_genome but over an explicit episode list.
FitnessReport evaluate_on(const Genome& genome, const EvalSettings& settings,
                          const std::vector<EpisodeConfig>& episodes);

} // namespace ncrs
