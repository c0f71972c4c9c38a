#pragma once

#include <array>
#include <optional>

#include "ncrs/morphology.hpp"

namespace ncrs {

/// Archive cell coordinates.
using CellKey = std::array<int, 3>;

/// Morphology features used to index the elite map.
struct FeatureDescriptor {
    int sensors = 0;
    int actuators = 0;
    int body_parts = 1;

    CellKey key() const { return {sensors, actuators, body_parts}; }
    static FeatureDescriptor from_key(const CellKey& k) { return {k[0], k[1], k[2]}; }

    /// sensors + actuators <= body_parts <= area, all non-negative, body_parts >= 1.
    bool within_bounds(int grid_area) const;

    bool operator==(const FeatureDescriptor&) const = default;
};

/// Descriptor of a valid morphology; nullopt for invalid designs (which never enter the archive).
std::optional<FeatureDescriptor> describe(const Morphology& morph, Task task);

} // namespace ncrs
