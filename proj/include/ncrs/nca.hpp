#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "ncrs/cell_grid.hpp"
#include "ncrs/genome.hpp"

namespace ncrs {

class Morphology;

inline constexpr int kDevelopmentSteps = 10;
inline constexpr int kStepsPerControlTick = 2;
inline constexpr double kMatureThreshold = 0.1;

/// Which cells an update step may touch.
struct AliveMask {
    GridDims dims;
    std::vector<char> mature;     // body > 0.1
    std::vector<char> updatable;  // mature cells and their 8-neighbourhoods

    bool is_mature(Cell c) const { return mature[index(c)] != 0; }
    bool is_updatable(Cell c) const { return updatable[index(c)] != 0; }
    int updatable_count() const;
    int mature_count() const;

private:
    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row * dims.width + c.col); }
};

AliveMask alive_mask(const CellGrid& grid);

/// Values restored after every update: whole channels, plus individual (cell, channel) entries.
struct FrozenSpec {
    std::vector<int> channels;
    std::vector<std::pair<Cell, int>> entries;

    static FrozenSpec development() { return FrozenSpec{{ChannelLayout::control_flag}, {}}; }
};

/// Centre cell has body = 1; everything else, including the control flag, is 0.
/// Throws ConfigError for even-sided grids.
CellGrid seed_state(const ChannelLayout& layout, GridDims dims);

/// One synchronous update. Every updatable cell's delta is computed from the
/// pre-step grid, added, and clipped to [-5, 5]; frozen values are restored.
/// Throws std::invalid_argument if the genome does not fit the layout.
CellGrid nca_step(const CellGrid& grid, const Genome& genome, const FrozenSpec& frozen,
                  Activation activation = Activation::Relu);

/// Same as nca_step but visits updatable cells in the given order. The result
/// does not depend on the order; exposed so that property can be checked.
CellGrid nca_step_ordered(const CellGrid& grid, const Genome& genome, const FrozenSpec& frozen,
                          Activation activation, std::span<const Cell> order);

/// Ten development steps from the seed with the control flag held at 0.
CellGrid develop(const Genome& genome, const ChannelLayout& layout, GridDims dims,
                 Activation activation = Activation::Relu);

/// Development trace: element 0 is the seed, element k the grid after k steps.
std::vector<CellGrid> develop_trace(const Genome& genome, const ChannelLayout& layout, GridDims dims,
                                   Activation activation = Activation::Relu);

/// Grid at the start of the control phase: flag 1 everywhere, body and type
/// channels one-hot from the morphology, hidden and io zeroed.
CellGrid control_grid(const Morphology& morph, const ChannelLayout& layout, GridDims dims);

/// Channels and entries held fixed while controlling a morphology.
FrozenSpec control_frozen_spec(const Morphology& morph, const ChannelLayout& layout);

using CellValues = std::map<Cell, double>;

struct ControlOutput {
    CellGrid grid;
    CellValues actuators;  // wheel cell -> command in [-1, 1]
};

/// One environment tick: write sensor values into the io channel, run two
/// NCA steps, read the wheel cells' io channel and clip it to [-1, 1].
/// Throws std::invalid_argument if the sensor keys differ from the morphology's sensor cells.
ControlOutput control_tick(const CellGrid& grid, const Genome& genome, const Morphology& morph,
                           const CellValues& sensor_values, Activation activation = Activation::Relu);

/// Reusable control-phase runner that avoids rebuilding the frozen spec per tick.
class Controller {
public:
    Controller(const Genome& genome, const Morphology& morph, const ChannelLayout& layout, GridDims dims,
               Activation activation);

    /// Runs one tick; `sensors` and the returned commands are aligned with
    /// morph.sensor_cells() and morph.wheel_cells().
    const std::vector<double>& tick(std::span<const double> sensors);

    const CellGrid& grid() const { return grid_; }

private:
    const Genome& genome_;
    const ChannelLayout layout_;
    Activation activation_;
    std::vector<Cell> sensors_;
    std::vector<Cell> wheels_;
    FrozenSpec frozen_;
    std::vector<Cell> order_;
    CellGrid grid_;
    std::vector<double> commands_;
};

} // namespace ncrs
