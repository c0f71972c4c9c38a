#include "ncrs/nca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "ncrs/errors.hpp"
#include "ncrs/morphology.hpp"

namespace ncrs {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMajor>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

struct UpdateNet {
    ConstMatMap conv_w, dense1_w, dense2_w;
    ConstVecMap conv_b, dense1_b, dense2_b;
    Activation activation;

    UpdateNet(const Genome& genome, const ChannelLayout& layout, Activation act)
        : UpdateNet(genome.params.data(), GenomeLayout::of(layout), layout.n_total(), act) {}

    UpdateNet(const double* p, const GenomeLayout& g, int n, Activation act)
        : conv_w(p + g.conv_w, kConvFilters, kKernelCells * n),
          dense1_w(p + g.dense1_w, kDenseWidth, kConvFilters),
          dense2_w(p + g.dense2_w, n, kDenseWidth),
          conv_b(p + g.conv_b, kConvFilters),
          dense1_b(p + g.dense1_b, kDenseWidth),
          dense2_b(p + g.dense2_b, n),
          activation(act) {}

    void apply_activation(Eigen::VectorXd& v) const {
        if (activation == Activation::Relu)
            v = v.cwiseMax(0.0);
        else
            v = v.array().tanh().matrix().eval();
    }

    struct Workspace {
        Eigen::VectorXd patch, h1, h2, delta;
        explicit Workspace(int n) : patch(kKernelCells * n), h1(kConvFilters), h2(kDenseWidth), delta(n) {}
    };

    // Result lands in ws.delta; ws.patch must hold the cell's neighbourhood.
    void delta(Workspace& ws) const {
        ws.h1.noalias() = conv_w * ws.patch;
        ws.h1 += conv_b;
        apply_activation(ws.h1);
        ws.h2.noalias() = dense1_w * ws.h1;
        ws.h2 += dense1_b;
        apply_activation(ws.h2);
        ws.delta.noalias() = dense2_w * ws.h2;
        ws.delta += dense2_b;
    }
};

void check_genome(const Genome& genome, const ChannelLayout& layout) {
    if (genome.size() != genome_length(layout))
        throw std::invalid_argument("genome has " + std::to_string(genome.size()) + " parameters, layout needs " +
                                    std::to_string(genome_length(layout)));
}

// 3x3 neighbourhood with zero padding, ordered [dy][dx][channel].
void gather_patch(const CellGrid& grid, Cell c, Eigen::VectorXd& patch) {
    const int n = grid.channels();
    int k = 0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int r = c.row + dy;
            const int col = c.col + dx;
            if (r < 0 || r >= grid.height() || col < 0 || col >= grid.width()) {
                patch.segment(k, n).setZero();
            } else {
                patch.segment(k, n) = ConstVecMap(grid.cell_data(r, col), n);
            }
            k += n;
        }
    }
}

std::vector<Cell> updatable_cells(const AliveMask& mask) {
    std::vector<Cell> cells;
    for (int r = 0; r < mask.dims.height; ++r)
        for (int c = 0; c < mask.dims.width; ++c)
            if (mask.is_updatable({r, c}))
                cells.push_back({r, c});
    return cells;
}

void restore_frozen(const CellGrid& before, CellGrid& after, const FrozenSpec& frozen) {
    for (int ch : frozen.channels)
        for (int r = 0; r < before.height(); ++r)
            for (int c = 0; c < before.width(); ++c)
                after.at(r, c, ch) = before.at(r, c, ch);
    for (const auto& [cell, ch] : frozen.entries)
        after.at(cell, ch) = before.at(cell, ch);
}

CellGrid step_cells(const CellGrid& grid, const UpdateNet& net, const FrozenSpec& frozen, std::span<const Cell> order) {
    const int n = grid.channels();
    CellGrid next = grid;
    UpdateNet::Workspace ws(n);
    for (const Cell cell : order) {
        gather_patch(grid, cell, ws.patch);
        net.delta(ws);
        const double* old = grid.cell_data(cell.row, cell.col);
        double* out = next.cell_data(cell.row, cell.col);
        for (int ch = 0; ch < n; ++ch)
            out[ch] = std::clamp(old[ch] + ws.delta[ch], CellGrid::kMinValue, CellGrid::kMaxValue);
    }
    restore_frozen(grid, next, frozen);
    return next;
}

} // namespace

int AliveMask::updatable_count() const {
    return static_cast<int>(std::count(updatable.begin(), updatable.end(), 1));
}

int AliveMask::mature_count() const {
    return static_cast<int>(std::count(mature.begin(), mature.end(), 1));
}

AliveMask alive_mask(const CellGrid& grid) {
    AliveMask mask;
    mask.dims = grid.dims();
    const auto cells = static_cast<std::size_t>(grid.dims().area());
    mask.mature.assign(cells, 0);
    mask.updatable.assign(cells, 0);
    const int h = grid.height();
    const int w = grid.width();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!(grid.at(r, c, ChannelLayout::body) > kMatureThreshold))
                continue;
            mask.mature[static_cast<std::size_t>(r * w + c)] = 1;
            for (int rr = std::max(0, r - 1); rr <= std::min(h - 1, r + 1); ++rr)
                for (int cc = std::max(0, c - 1); cc <= std::min(w - 1, c + 1); ++cc)
                    mask.updatable[static_cast<std::size_t>(rr * w + cc)] = 1;
        }
    }
    return mask;
}

CellGrid seed_state(const ChannelLayout& layout, GridDims dims) {
    if (dims.height <= 0 || dims.width <= 0 || dims.height % 2 == 0 || dims.width % 2 == 0)
        throw ConfigError("grid must have odd, positive sides to have a centre cell (got " +
                          std::to_string(dims.height) + "x" + std::to_string(dims.width) + ")");
    CellGrid grid(dims, layout);
    grid.at(dims.center(), ChannelLayout::body) = 1.0;
    return grid;
}

CellGrid nca_step_ordered(const CellGrid& grid, const Genome& genome, const FrozenSpec& frozen, Activation activation,
                          std::span<const Cell> order) {
    check_genome(genome, grid.layout());
    const UpdateNet net(genome, grid.layout(), activation);
    return step_cells(grid, net, frozen, order);
}

CellGrid nca_step(const CellGrid& grid, const Genome& genome, const FrozenSpec& frozen, Activation activation) {
    const auto order = updatable_cells(alive_mask(grid));
    return nca_step_ordered(grid, genome, frozen, activation, order);
}

std::vector<CellGrid> develop_trace(const Genome& genome, const ChannelLayout& layout, GridDims dims,
                                   Activation activation) {
    check_genome(genome, layout);
    const UpdateNet net(genome, layout, activation);
    const auto frozen = FrozenSpec::development();
    std::vector<CellGrid> trace;
    trace.reserve(kDevelopmentSteps + 1);
    trace.push_back(seed_state(layout, dims));
    for (int t = 0; t < kDevelopmentSteps; ++t) {
        const auto order = updatable_cells(alive_mask(trace.back()));
        trace.push_back(step_cells(trace.back(), net, frozen, order));
    }
    return trace;
}

CellGrid develop(const Genome& genome, const ChannelLayout& layout, GridDims dims, Activation activation) {
    return std::move(develop_trace(genome, layout, dims, activation).back());
}

CellGrid control_grid(const Morphology& morph, const ChannelLayout& layout, GridDims dims) {
    if (morph.dims() != dims)
        throw std::invalid_argument("morphology and grid dimensions differ");
    CellGrid grid(dims, layout);
    for (int r = 0; r < dims.height; ++r)
        for (int c = 0; c < dims.width; ++c)
            grid.at(r, c, ChannelLayout::control_flag) = 1.0;
    for (const auto& [cell, kind] : morph.cells()) {
        grid.at(cell, ChannelLayout::body) = 1.0;
        grid.at(cell, ChannelLayout::first_type + type_channel_offset(kind, layout)) = 1.0;
    }
    return grid;
}

FrozenSpec control_frozen_spec(const Morphology& morph, const ChannelLayout& layout) {
    FrozenSpec frozen;
    frozen.channels.push_back(ChannelLayout::body);
    frozen.channels.push_back(ChannelLayout::control_flag);
    for (int t = 0; t < layout.n_type_channels; ++t)
        frozen.channels.push_back(ChannelLayout::first_type + t);
    for (const Cell c : morph.sensor_cells())
        frozen.entries.emplace_back(c, layout.io());
    return frozen;
}

ControlOutput control_tick(const CellGrid& grid, const Genome& genome, const Morphology& morph,
                           const CellValues& sensor_values, Activation activation) {
    const auto& layout = grid.layout();
    check_genome(genome, layout);
    const auto sensors = morph.sensor_cells();
    if (sensor_values.size() != sensors.size())
        throw std::invalid_argument("sensor values do not match the morphology's sensor cells");
    for (const Cell c : sensors)
        if (!sensor_values.contains(c))
            throw std::invalid_argument("missing sensor value for cell (" + std::to_string(c.row) + "," +
                                        std::to_string(c.col) + ")");

    const UpdateNet net(genome, layout, activation);
    const auto frozen = control_frozen_spec(morph, layout);
    const auto order = updatable_cells(alive_mask(grid));

    ControlOutput out{grid, {}};
    for (int s = 0; s < kStepsPerControlTick; ++s) {
        for (const auto& [cell, value] : sensor_values)
            out.grid.at(cell, layout.io()) = value;
        out.grid = step_cells(out.grid, net, frozen, order);
    }
    for (const Cell c : morph.wheel_cells())
        out.actuators[c] = std::clamp(out.grid.at(c, layout.io()), -1.0, 1.0);
    return out;
}

Controller::Controller(const Genome& genome, const Morphology& morph, const ChannelLayout& layout, GridDims dims,
                       Activation activation)
    : genome_(genome), layout_(layout), activation_(activation), sensors_(morph.sensor_cells()),
      wheels_(morph.wheel_cells()), frozen_(control_frozen_spec(morph, layout)),
      grid_(control_grid(morph, layout, dims)), commands_(wheels_.size(), 0.0) {
    check_genome(genome, layout);
    // Body channels are frozen during control, so the updatable set never changes.
    order_ = updatable_cells(alive_mask(grid_));
}

const std::vector<double>& Controller::tick(std::span<const double> sensors) {
    if (sensors.size() != sensors_.size())
        throw std::invalid_argument("sensor count mismatch");
    const UpdateNet net(genome_, layout_, activation_);
    for (int s = 0; s < kStepsPerControlTick; ++s) {
        for (std::size_t i = 0; i < sensors_.size(); ++i)
            grid_.at(sensors_[i], layout_.io()) = sensors[i];
        grid_ = step_cells(grid_, net, frozen_, order_);
    }
    for (std::size_t i = 0; i < wheels_.size(); ++i)
        commands_[i] = std::clamp(grid_.at(wheels_[i], layout_.io()), -1.0, 1.0);
    return commands_;
}

} // namespace ncrs
