#include "ncrs/task.hpp"

#include "ncrs/errors.hpp"

namespace ncrs {

std::string_view task_name(Task task) {
    switch (task) {
    case Task::LightChasing: return "lc";
    case Task::LightChasingObstacle: return "lco";
    case Task::CarryBallToTarget: return "cbt";
    }
    return "?";
}

Task parse_task(std::string_view name) {
    if (name == "lc") return Task::LightChasing;
    if (name == "lco") return Task::LightChasingObstacle;
    if (name == "cbt") return Task::CarryBallToTarget;
    throw ConfigError("unknown task '" + std::string(name) + "' (expected lc, lco or cbt)");
}

Task task_from_id(std::uint32_t id) {
    if (id > 2)
        throw DataError("unknown task id " + std::to_string(id));
    return static_cast<Task>(id);
}

} // namespace ncrs
