#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ncrs/cell_grid.hpp"
#include "ncrs/task.hpp"

namespace ncrs {

/// Body module types, in type-channel order.
enum class ModuleKind { Tissue, LightBallSensor, TargetSensor, Wheel };

char module_char(ModuleKind kind);  // 'T', 'S', 'A', 'W'

/// Type channel offset (relative to ChannelLayout::first_type) of a kind.
int type_channel_offset(ModuleKind kind, const ChannelLayout& layout);

/// Typed robot body grown by the NCA.
class Morphology {
public:
    Morphology() = default;
    Morphology(GridDims dims, Cell seed, std::map<Cell, ModuleKind> cells);

    GridDims dims() const { return dims_; }
    Cell seed_cell() const { return seed_; }
    const std::map<Cell, ModuleKind>& cells() const { return cells_; }
    bool empty() const { return cells_.empty(); }
    int size() const { return static_cast<int>(cells_.size()); }

    int tissue() const { return tissue_; }
    int light_sensors() const { return light_; }
    int target_sensors() const { return target_; }
    int wheels() const { return wheels_; }
    int sensors() const { return light_ + target_; }

    /// Light/ball and target sensor cells in row-major order.
    std::vector<Cell> sensor_cells() const;
    std::vector<Cell> wheel_cells() const;

    std::optional<ModuleKind> kind_at(Cell c) const;

    /// One line per grid row using '.', 'T', 'S', 'A', 'W'.
    std::string to_text() const;
    static Morphology from_text(const std::string& text);

    bool operator==(const Morphology&) const = default;

private:
    GridDims dims_;
    Cell seed_;
    std::map<Cell, ModuleKind> cells_;
    int tissue_ = 0, light_ = 0, target_ = 0, wheels_ = 0;
};

struct ValidityReport {
    bool valid = false;
    int satisfied_slots = 0;
    int required_slots = 0;
};

/// Reads the body off a developed grid: cells with body > 0.1, kind by argmax
/// over type channels (first channel wins ties), restricted to the 4-connected
/// component containing the seed (grid centre).
Morphology extract_body(const CellGrid& grid);

/// LC/LCO need one light sensor and two wheels (3 slots); CBT one ball sensor,
/// one target sensor and two wheels (4 slots).
/// Throws std::invalid_argument if the morphology uses a kind the task lacks.
ValidityReport validate(const Morphology& morph, Task task);

/// Partial credit for an invalid body: 0.01 per satisfied slot.
/// Throws std::logic_error for a valid report.
double invalid_score(const ValidityReport& report);

} // namespace ncrs
