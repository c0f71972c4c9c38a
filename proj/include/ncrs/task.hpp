#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ncrs {

/// Benchmark tasks. Numeric values are the on-disk task ids.
enum class Task : std::uint32_t {
    LightChasing = 0,             // LC
    LightChasingObstacle = 1,     // LCO
    CarryBallToTarget = 2,        // CBT
};

std::string_view task_name(Task task);   // "lc" | "lco" | "cbt"
Task parse_task(std::string_view name);  // throws ConfigError
Task task_from_id(std::uint32_t id);     // throws DataError

/// Number of module-type channels the task's robots need.
constexpr int type_channel_count(Task task) { return task == Task::CarryBallToTarget ? 4 : 3; }

/// Channel roles of the cellular state. Indices are fixed by the layout:
/// body, control flag, module types, hidden, then the single input/output channel.
struct ChannelLayout {
    int n_type_channels = 3;
    int n_hidden = 6;

    static constexpr int body = 0;
    static constexpr int control_flag = 1;
    static constexpr int first_type = 2;

    constexpr int first_hidden() const { return first_type + n_type_channels; }
    constexpr int io() const { return first_hidden() + n_hidden; }
    constexpr int n_total() const { return 2 + n_type_channels + n_hidden + 1; }

    constexpr bool operator==(const ChannelLayout&) const = default;

    static constexpr ChannelLayout for_task(Task task) { return ChannelLayout{type_channel_count(task), 6}; }
};

} // namespace ncrs
