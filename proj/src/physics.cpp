#include "ncrs/physics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ncrs {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }
double distance(Vec2 a, Vec2 b) { return norm(a - b); }

Vec2 rotate(Vec2 v, double heading) {
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

RobotBody RobotBody::from_morphology(const Morphology& morph, const PhysicsParams& params, double module_size) {
    RobotBody body;
    const Cell centre = morph.dims().center();
    Vec2 com;
    for (const auto& [cell, kind] : morph.cells()) {
        body.cells.push_back(cell);
        body.kinds.push_back(kind);
        body.modules.push_back({(cell.col - centre.col) * module_size, (centre.row - cell.row) * module_size});
        com += body.modules.back();
    }
    const auto n = static_cast<double>(body.modules.size());
    if (n > 0)
        com = com * (1.0 / n);
    // Unit square about its own centre: m * (s^2 + s^2) / 12.
    const double own_inertia = params.module_mass * module_size * module_size / 6.0;
    for (std::size_t i = 0; i < body.modules.size(); ++i) {
        body.modules[i] -= com;
        body.inertia += own_inertia + params.module_mass * dot(body.modules[i], body.modules[i]);
        if (body.kinds[i] == ModuleKind::Wheel)
            body.wheel_modules.push_back(static_cast<int>(i));
        else if (body.kinds[i] == ModuleKind::LightBallSensor || body.kinds[i] == ModuleKind::TargetSensor)
            body.sensor_modules.push_back(static_cast<int>(i));
    }
    body.mass = params.module_mass * n;
    return body;
}

Vec2 module_world_position(const RobotBody& body, const RigidState& robot, int module) {
    return robot.position + rotate(body.modules[static_cast<std::size_t>(module)], robot.heading);
}

namespace {

struct Contact {
    Vec2 normal;         // points away from the obstacle
    double penetration;
    Vec2 point;
};

// Contact of a circle against the arena boundary and obstacle segments.
void circle_contacts(const Scene& scene, Vec2 centre, double radius, std::vector<Contact>& out) {
    const double l = scene.playfield;
    if (centre.x < radius) out.push_back({{1, 0}, radius - centre.x, {0, centre.y}});
    if (centre.x > l - radius) out.push_back({{-1, 0}, centre.x - (l - radius), {l, centre.y}});
    if (centre.y < radius) out.push_back({{0, 1}, radius - centre.y, {centre.x, 0}});
    if (centre.y > l - radius) out.push_back({{0, -1}, centre.y - (l - radius), {centre.x, l}});
    for (const auto& seg : scene.walls) {
        const Vec2 ab = seg.b - seg.a;
        const double len2 = dot(ab, ab);
        const double t = len2 > 0 ? std::clamp(dot(centre - seg.a, ab) / len2, 0.0, 1.0) : 0.0;
        const Vec2 q = seg.a + ab * t;
        const Vec2 d = centre - q;
        const double dist = norm(d);
        if (dist >= radius)
            continue;
        Vec2 n;
        if (dist > 1e-12) {
            n = d * (1.0 / dist);
        } else {
            const double inv = 1.0 / std::sqrt(len2);
            n = {-ab.y * inv, ab.x * inv};
        }
        out.push_back({n, radius - dist, q});
    }
}

void apply_impulse(RigidState& s, const RobotBody& body, Vec2 r, Vec2 impulse) {
    s.velocity += impulse * (1.0 / body.mass);
    s.angular_velocity += cross(r, impulse) / body.inertia;
}

Vec2 point_velocity(const RigidState& s, Vec2 r) {
    return s.velocity + Vec2{-s.angular_velocity * r.y, s.angular_velocity * r.x};
}

void resolve_robot_walls(const Scene& scene, const RobotBody& body, RigidState& s, const PhysicsParams& p) {
    std::vector<Contact> contacts;
    for (std::size_t i = 0; i < body.modules.size(); ++i)
        circle_contacts(scene, module_world_position(body, s, static_cast<int>(i)), p.module_radius, contacts);
    if (contacts.empty())
        return;

    for (int iter = 0; iter < 4; ++iter) {
        for (const auto& c : contacts) {
            const Vec2 r = c.point - s.position;
            const Vec2 v = point_velocity(s, r);
            const double vn = dot(v, c.normal);
            if (vn >= 0)
                continue;
            const double rn = cross(r, c.normal);
            const double jn = -(1.0 + p.restitution) * vn / (1.0 / body.mass + rn * rn / body.inertia);
            apply_impulse(s, body, r, c.normal * jn);

            const Vec2 t{-c.normal.y, c.normal.x};
            const double vt = dot(point_velocity(s, r), t);
            const double rt = cross(r, t);
            double jt = -vt / (1.0 / body.mass + rt * rt / body.inertia);
            jt = std::clamp(jt, -p.wall_friction * jn, p.wall_friction * jn);
            apply_impulse(s, body, r, t * jt);
        }
    }

    // Positional correction: translate out of the deepest overlap until clear.
    for (int pass = 0; pass < 8; ++pass) {
        bool moved = false;
        for (std::size_t i = 0; i < body.modules.size(); ++i) {
            contacts.clear();
            circle_contacts(scene, module_world_position(body, s, static_cast<int>(i)), p.module_radius, contacts);
            for (const auto& c : contacts) {
                s.position += c.normal * c.penetration;
                moved = true;
            }
        }
        if (!moved)
            break;
    }
}

void resolve_ball_walls(const Scene& scene, BallState& ball, const PhysicsParams& p) {
    std::vector<Contact> contacts;
    for (int pass = 0; pass < 4; ++pass) {
        contacts.clear();
        circle_contacts(scene, ball.position, p.ball_radius, contacts);
        if (contacts.empty())
            return;
        for (const auto& c : contacts) {
            const double vn = dot(ball.velocity, c.normal);
            if (vn < 0) {
                ball.velocity -= c.normal * ((1.0 + p.restitution) * vn);
                const Vec2 t{-c.normal.y, c.normal.x};
                const double vt = dot(ball.velocity, t);
                const double jt = std::clamp(-vt, p.wall_friction * (1.0 + p.restitution) * vn,
                                             -p.wall_friction * (1.0 + p.restitution) * vn);
                ball.velocity += t * jt;
            }
            ball.position += c.normal * c.penetration;
        }
    }
}

void resolve_robot_ball(const RobotBody& body, RigidState& s, BallState& ball, const PhysicsParams& p) {
    const double reach = p.module_radius + p.ball_radius;
    for (std::size_t i = 0; i < body.modules.size(); ++i) {
        const Vec2 centre = module_world_position(body, s, static_cast<int>(i));
        const Vec2 d = ball.position - centre;
        const double dist = norm(d);
        if (dist >= reach || dist < 1e-12)
            continue;
        const Vec2 n = d * (1.0 / dist);
        const Vec2 r = centre + n * p.module_radius - s.position;
        const double vn = dot(ball.velocity - point_velocity(s, r), n);
        if (vn < 0) {
            const double rn = cross(r, n);
            const double k = 1.0 / p.ball_mass + 1.0 / body.mass + rn * rn / body.inertia;
            const double j = -(1.0 + p.restitution) * vn / k;
            ball.velocity += n * (j / p.ball_mass);
            apply_impulse(s, body, r, n * -j);
        }
        const double pen = reach - dist;
        const double wb = (1.0 / p.ball_mass) / (1.0 / p.ball_mass + 1.0 / body.mass);
        ball.position += n * (pen * wb);
        s.position -= n * (pen * (1.0 - wb));
    }
}

} // namespace

WorldState env_step(const Scene& scene, const RobotBody& body, const WorldState& world,
                    std::span<const double> commands, const PhysicsParams& params) {
    if (commands.size() != body.wheel_modules.size())
        throw std::invalid_argument("wheel command count does not match the body");
    for (double c : commands)
        if (!std::isfinite(c))
            throw std::invalid_argument("non-finite wheel command");

    WorldState next = world;
    next.step = world.step + 1;
    if (body.modules.empty())
        return next;

    RigidState& s = next.robot;
    const double h = params.dt / params.substeps;
    for (int sub = 0; sub < params.substeps; ++sub) {
        const Vec2 forward = rotate({0, 1}, s.heading);
        const Vec2 lateral = rotate({1, 0}, s.heading);
        Vec2 force;
        double torque = 0.0;
        for (std::size_t w = 0; w < body.wheel_modules.size(); ++w) {
            const Vec2 r = rotate(body.modules[static_cast<std::size_t>(body.wheel_modules[w])], s.heading);
            const Vec2 v = point_velocity(s, r);
            const double v_long = dot(v, forward);
            const double v_lat = dot(v, lateral);
            const Vec2 f = forward * (params.drive_gain * (commands[w] * params.wheel_max_speed - v_long))
                         - lateral * (params.lateral_damping * v_lat);
            force += f;
            torque += cross(r, f);
        }

        // Semi-implicit Euler: velocities first, then positions with the new velocities.
        s.velocity += force * (h / body.mass);
        s.angular_velocity += torque * h / body.inertia;
        s.position += s.velocity * h;
        s.heading += s.angular_velocity * h;

        if (next.has_ball) {
            next.ball.velocity = next.ball.velocity * std::max(0.0, 1.0 - params.ball_damping * h);
            next.ball.position += next.ball.velocity * h;
            resolve_robot_ball(body, s, next.ball, params);
        }
        resolve_robot_walls(scene, body, s, params);
        if (next.has_ball)
            resolve_ball_walls(scene, next.ball, params);
    }
    return next;
}

} // namespace ncrs
