#include "ncrs/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ncrs/errors.hpp"
#include "ncrs/nca.hpp"

namespace ncrs {

namespace fs = std::filesystem;

namespace {

constexpr Rgb kBackground{245, 245, 240};
constexpr Rgb kWall{90, 60, 40};
constexpr Rgb kLight{255, 220, 0};
constexpr Rgb kLightRim{200, 140, 0};
constexpr Rgb kBall{220, 40, 40};
constexpr Rgb kTarget{170, 225, 170};
constexpr Rgb kPanelGap{128, 128, 128};

void fill_disc(Image& img, Vec2 center, double radius, Rgb color, double playfield, const FrameStyle& style) {
    const double ppu = style.pixels_per_unit;
    const auto [cx, cy] = world_to_pixel(center, playfield, style);
    const int r = static_cast<int>(std::ceil(radius * ppu));
    for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x) {
            const double dx = (x - cx) / ppu, dy = (y - cy) / ppu;
            if (dx * dx + dy * dy <= radius * radius)
                img.set(x, y, color);
        }
}

void draw_segment(Image& img, const Segment& s, double half_width, Rgb color, double playfield,
                  const FrameStyle& style) {
    const double len = distance(s.a, s.b);
    const int steps = std::max(2, static_cast<int>(len * style.pixels_per_unit * 2));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        fill_disc(img, s.a + (s.b - s.a) * t, half_width, color, playfield, style);
    }
}

// Point in world coordinates at the centre of pixel (x, y).
Vec2 pixel_center(int x, int y, double playfield, const FrameStyle& style) {
    const double ppu = style.pixels_per_unit;
    return {(x + 0.5) / ppu, playfield - (y + 0.5) / ppu};
}

void draw_module(Image& img, Vec2 center, double heading, double size, Rgb color, double playfield,
                 const FrameStyle& style) {
    const double reach = size * 0.75;
    const auto [x0, y1] = world_to_pixel(center + Vec2{-reach, -reach}, playfield, style);
    const auto [x1, y0] = world_to_pixel(center + Vec2{reach, reach}, playfield, style);
    const double half = size * 0.5;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const Vec2 local = rotate(pixel_center(x, y, playfield, style) - center, -heading);
            if (std::abs(local.x) <= half && std::abs(local.y) <= half)
                img.set(x, y, color);
        }
}

Rgb diverging(double v) {
    const double t = std::min(1.0, std::abs(v));
    const auto fade = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t)));
    if (v < 0)
        return {fade, fade, 255};
    return {255, fade, fade};
}

} // namespace

Image::Image(int w, int h, Rgb fill) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < pixels.size(); i += 3)
        std::copy(fill.begin(), fill.end(), pixels.begin() + static_cast<std::ptrdiff_t>(i));
}

Rgb Image::at(int x, int y) const {
    const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width || y >= height)
        return;
    const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[i] = c[0];
    pixels[i + 1] = c[1];
    pixels[i + 2] = c[2];
}

void write_ppm(const fs::path& path, const Image& image) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw DataError("cannot write '" + path.string() + "'");
    os << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

Image read_ppm(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    if (!(is >> magic >> w >> h >> maxval) || magic != "P6" || maxval != 255 || w <= 0 || h <= 0)
        throw DataError("'" + path.string() + "' is not an 8-bit binary PPM");
    is.get();
    Image img(w, h, {0, 0, 0});
    is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!is)
        throw DataError("'" + path.string() + "' is truncated");
    return img;
}

Rgb module_color(ModuleKind kind) {
    switch (kind) {
    case ModuleKind::Tissue: return {150, 150, 150};
    case ModuleKind::LightBallSensor: return {240, 160, 20};
    case ModuleKind::TargetSensor: return {160, 70, 200};
    case ModuleKind::Wheel: return {30, 30, 30};
    }
    return {0, 0, 0};
}

std::array<int, 2> world_to_pixel(Vec2 p, double playfield, const FrameStyle& style) {
    const double ppu = style.pixels_per_unit;
    return {static_cast<int>(std::floor(p.x * ppu)), static_cast<int>(std::floor((playfield - p.y) * ppu))};
}

Image render_frame(const Scene& scene, const WorldState& world, const RobotBody& body, Task task,
                   const SimSettings& sim, const FrameStyle& style) {
    const double L = scene.playfield;
    const int side = static_cast<int>(std::lround(L * style.pixels_per_unit));
    Image img(side, side, kBackground);

    if (task == Task::CarryBallToTarget)
        fill_disc(img, world.target, sim.scenario.target_radius, kTarget, L, style);
    for (const auto& w : scene.walls)
        draw_segment(img, w, 0.25, kWall, L, style);
    if (world.has_ball) {
        fill_disc(img, world.ball.position, sim.physics.ball_radius, kBall, L, style);
    } else {
        fill_disc(img, world.light, 1.2, kLightRim, L, style);
        fill_disc(img, world.light, 0.9, kLight, L, style);
    }
    for (std::size_t m = 0; m < body.modules.size(); ++m)
        draw_module(img, module_world_position(body, world.robot, static_cast<int>(m)), world.robot.heading,
                    sim.scenario.module_size * 0.9, module_color(body.kinds[m]), L, style);
    return img;
}

Image channel_strip(const CellGrid& grid, int cell_pixels) {
    const GridDims d = grid.dims();
    const int n = grid.channels();
    const int gap = 2;
    const int pw = d.width * cell_pixels, ph = d.height * cell_pixels;
    Image img(n * pw + (n + 1) * gap, ph + 2 * gap, kPanelGap);
    for (int c = 0; c < n; ++c) {
        const int ox = gap + c * (pw + gap);
        for (int r = 0; r < d.height; ++r)
            for (int q = 0; q < d.width; ++q) {
                const Rgb color = diverging(grid.at({r, q}, c));
                for (int y = 0; y < cell_pixels; ++y)
                    for (int x = 0; x < cell_pixels; ++x)
                        img.set(ox + q * cell_pixels + x, gap + r * cell_pixels + y, color);
            }
    }
    return img;
}

RenderSummary render_episode(const Genome& genome, const EvalSettings& settings, const EpisodeConfig& episode,
                             const fs::path& out_dir, const FrameStyle& style) {
    fs::create_directories(out_dir);
    const auto trace = develop_trace(genome, settings.layout(), settings.dims, settings.activation);
    write_ppm(out_dir / "channels_dev_start.ppm", channel_strip(trace.front()));
    write_ppm(out_dir / "channels_dev_end.ppm", channel_strip(trace.back()));

    const Morphology morph = extract_body(trace.back());
    {
        std::ofstream os(out_dir / "morphology.txt");
        os << morph.to_text();
    }
    RenderSummary summary;
    summary.valid = validate(morph, settings.task).valid;
    if (!summary.valid)
        return summary;

    const fs::path frames = out_dir / "frames";
    fs::create_directories(frames);
    const Scene scene = make_scene(episode);
    const RobotBody body = RobotBody::from_morphology(morph, settings.sim.physics, episode.module_size);
    CellGrid last;
    int frame = 0;
    const auto result = run_episode(genome, morph, episode, settings, true,
                                    [&](const WorldState& world, const CellGrid& grid) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03d.ppm", frame++);
        write_ppm(frames / name, render_frame(scene, world, body, settings.task, settings.sim, style));
        last = grid;
    });
    write_ppm(out_dir / "channels_control_end.ppm", channel_strip(last));
    {
        std::ofstream os(out_dir / "trajectory.csv");
        write_trajectory_csv(os, settings.task, result.trajectory);
    }
    summary.fitness = result.fitness;
    summary.success = result.success;
    summary.frames = frame;
    return summary;
}

} // namespace ncrs
