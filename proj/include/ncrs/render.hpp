#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ncrs/cell_grid.hpp"
#include "ncrs/environment.hpp"

namespace ncrs {

using Rgb = std::array<std::uint8_t, 3>;

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB, row 0 at the top

    Image() = default;
    Image(int w, int h, Rgb fill);
    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb c);
};

void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

Rgb module_color(ModuleKind kind);

struct FrameStyle {
    int pixels_per_unit = 8;
};

/// Pixel containing a world point (world y points up, image rows down).
std::array<int, 2> world_to_pixel(Vec2 p, double playfield, const FrameStyle& style);

/// Top-down view of one environment state.
Image render_frame(const Scene& scene, const WorldState& world, const RobotBody& body, Task task,
                   const SimSettings& sim, const FrameStyle& style = {});

/// One panel per channel, left to right, each cell a `cell_pixels` square.
/// Negative values are blue, positive red, zero white; |v| >= 1 is fully saturated.
Image channel_strip(const CellGrid& grid, int cell_pixels = 12);

struct RenderSummary {
    bool valid = false;
    double fitness = 0.0;
    bool success = false;
    int frames = 0;
};

/// Writes morphology.txt, channels_dev_start.ppm, channels_dev_end.ppm and (for
/// valid bodies) frames/frame_NNN.ppm, trajectory.csv and channels_control_end.ppm.
RenderSummary render_episode(const Genome& genome, const EvalSettings& settings, const EpisodeConfig& episode,
                             const std::filesystem::path& out_dir, const FrameStyle& style = {});

} // namespace ncrs
