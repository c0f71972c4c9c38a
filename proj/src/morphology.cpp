#include "ncrs/morphology.hpp"

#include <deque>
#include <sstream>
#include <stdexcept>

#include "ncrs/errors.hpp"
#include "ncrs/nca.hpp"

namespace ncrs {

char module_char(ModuleKind kind) {
    switch (kind) {
    case ModuleKind::Tissue: return 'T';
    case ModuleKind::LightBallSensor: return 'S';
    case ModuleKind::TargetSensor: return 'A';
    case ModuleKind::Wheel: return 'W';
    }
    return '?';
}

int type_channel_offset(ModuleKind kind, const ChannelLayout& layout) {
    switch (kind) {
    case ModuleKind::Tissue: return 0;
    case ModuleKind::LightBallSensor: return 1;
    case ModuleKind::TargetSensor:
        if (layout.n_type_channels < 4)
            throw std::invalid_argument("target sensor needs the four type-channel layout");
        return 2;
    case ModuleKind::Wheel: return layout.n_type_channels - 1;
    }
    return 0;
}

namespace {

ModuleKind kind_for_offset(int offset, int n_types) {
    if (offset == 0) return ModuleKind::Tissue;
    if (offset == 1) return ModuleKind::LightBallSensor;
    if (offset == n_types - 1) return ModuleKind::Wheel;
    return ModuleKind::TargetSensor;
}

} // namespace

Morphology::Morphology(GridDims dims, Cell seed, std::map<Cell, ModuleKind> cells)
    : dims_(dims), seed_(seed), cells_(std::move(cells)) {
    for (const auto& [cell, kind] : cells_) {
        if (!dims_.contains(cell))
            throw std::invalid_argument("morphology cell outside grid");
        switch (kind) {
        case ModuleKind::Tissue: ++tissue_; break;
        case ModuleKind::LightBallSensor: ++light_; break;
        case ModuleKind::TargetSensor: ++target_; break;
        case ModuleKind::Wheel: ++wheels_; break;
        }
    }
}

std::vector<Cell> Morphology::sensor_cells() const {
    std::vector<Cell> out;
    for (const auto& [cell, kind] : cells_)
        if (kind == ModuleKind::LightBallSensor || kind == ModuleKind::TargetSensor)
            out.push_back(cell);
    return out;
}

std::vector<Cell> Morphology::wheel_cells() const {
    std::vector<Cell> out;
    for (const auto& [cell, kind] : cells_)
        if (kind == ModuleKind::Wheel)
            out.push_back(cell);
    return out;
}

std::optional<ModuleKind> Morphology::kind_at(Cell c) const {
    if (auto it = cells_.find(c); it != cells_.end())
        return it->second;
    return std::nullopt;
}

std::string Morphology::to_text() const {
    std::string out;
    for (int r = 0; r < dims_.height; ++r) {
        for (int c = 0; c < dims_.width; ++c) {
            const auto k = kind_at({r, c});
            out += k ? module_char(*k) : '.';
        }
        out += '\n';
    }
    return out;
}

Morphology Morphology::from_text(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> rows;
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            rows.push_back(line);
    if (rows.empty())
        throw DataError("empty morphology text");
    GridDims dims{static_cast<int>(rows.size()), static_cast<int>(rows.front().size())};
    std::map<Cell, ModuleKind> cells;
    for (int r = 0; r < dims.height; ++r) {
        if (static_cast<int>(rows[r].size()) != dims.width)
            throw DataError("ragged morphology text");
        for (int c = 0; c < dims.width; ++c) {
            switch (rows[r][c]) {
            case '.': break;
            case 'T': cells[{r, c}] = ModuleKind::Tissue; break;
            case 'S': cells[{r, c}] = ModuleKind::LightBallSensor; break;
            case 'A': cells[{r, c}] = ModuleKind::TargetSensor; break;
            case 'W': cells[{r, c}] = ModuleKind::Wheel; break;
            default: throw DataError(std::string("unknown module character '") + rows[r][c] + "'");
            }
        }
    }
    return Morphology(dims, dims.center(), std::move(cells));
}

Morphology extract_body(const CellGrid& grid) {
    const GridDims dims = grid.dims();
    const Cell seed = dims.center();
    const int n_types = grid.layout().n_type_channels;
    auto mature = [&](Cell c) { return grid.at(c, ChannelLayout::body) > kMatureThreshold; };

    std::map<Cell, ModuleKind> cells;
    if (!mature(seed))
        return Morphology(dims, seed, {});

    std::vector<char> seen(static_cast<std::size_t>(dims.area()), 0);
    std::deque<Cell> frontier{seed};
    seen[static_cast<std::size_t>(seed.row * dims.width + seed.col)] = 1;
    while (!frontier.empty()) {
        const Cell cell = frontier.front();
        frontier.pop_front();

        int best = 0;
        for (int t = 1; t < n_types; ++t)
            if (grid.at(cell, ChannelLayout::first_type + t) > grid.at(cell, ChannelLayout::first_type + best))
                best = t;
        cells[cell] = kind_for_offset(best, n_types);

        constexpr Cell kSteps[] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        for (const Cell d : kSteps) {
            const Cell next{cell.row + d.row, cell.col + d.col};
            if (!dims.contains(next))
                continue;
            auto& flag = seen[static_cast<std::size_t>(next.row * dims.width + next.col)];
            if (flag || !mature(next))
                continue;
            flag = 1;
            frontier.push_back(next);
        }
    }
    return Morphology(dims, seed, std::move(cells));
}

ValidityReport validate(const Morphology& morph, Task task) {
    ValidityReport report;
    const int wheel_slots = std::min(morph.wheels(), 2);
    if (task == Task::CarryBallToTarget) {
        report.required_slots = 4;
        report.satisfied_slots = std::min(morph.light_sensors(), 1) + std::min(morph.target_sensors(), 1) + wheel_slots;
    } else {
        if (morph.target_sensors() > 0)
            throw std::invalid_argument("target sensors are not available in light-chasing tasks");
        report.required_slots = 3;
        report.satisfied_slots = std::min(morph.light_sensors(), 1) + wheel_slots;
    }
    report.valid = report.satisfied_slots == report.required_slots;
    return report;
}

double invalid_score(const ValidityReport& report) {
    if (report.valid)
        throw std::logic_error("invalid_score called on a valid design");
    return 0.01 * report.satisfied_slots;
}

} // namespace ncrs
