#include "ncrs/feature.hpp"

namespace ncrs {

bool FeatureDescriptor::within_bounds(int grid_area) const {
    return sensors >= 0 && actuators >= 0 && body_parts >= 1 && sensors + actuators <= body_parts &&
           body_parts <= grid_area;
}

std::optional<FeatureDescriptor> describe(const Morphology& morph, Task task) {
    if (!validate(morph, task).valid)
        return std::nullopt;
    return FeatureDescriptor{morph.sensors(), morph.wheels(), morph.size()};
}

} // namespace ncrs
