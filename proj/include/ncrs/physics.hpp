#pragma once

#include <span>
#include <vector>

#include "ncrs/morphology.hpp"

namespace ncrs {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 v);
double distance(Vec2 a, Vec2 b);

/// Rotates a body-frame vector into the world frame. Heading 0 aligns body +y with world +y.
Vec2 rotate(Vec2 v, double heading);

/// Constants of the top-down rigid-body model. Lengths are in module units.
struct PhysicsParams {
    double dt = 1.0 / 30.0;        // seconds per environment step
    int substeps = 4;
    double wheel_max_speed = 8.0;  // units/s at command +-1
    double drive_gain = 3.0;       // longitudinal force per unit speed error, per wheel
    double lateral_damping = 6.0;  // lateral force per unit sideways speed, per wheel
    double module_mass = 1.0;
    double module_radius = 0.5;    // collision radius of a module
    double restitution = 0.0;
    double wall_friction = 0.3;
    double ball_radius = 1.0;
    double ball_mass = 1.0;
    double ball_damping = 0.5;     // 1/s

    bool operator==(const PhysicsParams&) const = default;
};

/// Rigid body assembled from a morphology, in the body frame centred on the centre of mass.
struct RobotBody {
    std::vector<Vec2> modules;       // offsets from the centre of mass
    std::vector<ModuleKind> kinds;
    std::vector<Cell> cells;
    std::vector<int> wheel_modules;  // aligned with Morphology::wheel_cells()
    std::vector<int> sensor_modules; // aligned with Morphology::sensor_cells()
    double mass = 0.0;
    double inertia = 0.0;

    /// Grid row 0 faces body +y; columns increase along body +x.
    static RobotBody from_morphology(const Morphology& morph, const PhysicsParams& params, double module_size = 1.0);
};

struct RigidState {
    Vec2 position;
    double heading = 0.0;
    Vec2 velocity;
    double angular_velocity = 0.0;
    bool operator==(const RigidState&) const = default;
};

struct BallState {
    Vec2 position;
    Vec2 velocity;
    bool operator==(const BallState&) const = default;
};

struct WorldState {
    RigidState robot;
    Vec2 light;                // light source (LC/LCO)
    bool has_ball = false;
    BallState ball;            // CBT
    Vec2 target;               // CBT target-area centre
    int step = 0;
    bool operator==(const WorldState&) const = default;
};

struct Segment {
    Vec2 a, b;
};

/// Static geometry: square arena walls plus optional obstacle segments.
struct Scene {
    double playfield = 60.0;
    std::vector<Segment> walls;
};

/// World position of a module of the body.
Vec2 module_world_position(const RobotBody& body, const RigidState& robot, int module);

/// Advances one environment step. `commands` is aligned with body.wheel_modules.
/// Throws std::invalid_argument for non-finite commands or a size mismatch.
WorldState env_step(const Scene& scene, const RobotBody& body, const WorldState& world,
                    std::span<const double> commands, const PhysicsParams& params);

} // namespace ncrs
