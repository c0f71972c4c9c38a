#include "ncrs/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "ncrs/archive.hpp"
#include "ncrs/errors.hpp"

namespace ncrs {

std::string_view optimizer_name(Optimizer o) { return o == Optimizer::CmaMe ? "cma-me" : "cma-es"; }

Optimizer parse_optimizer(std::string_view name) {
    if (name == "cma-es") return Optimizer::CmaEs;
    if (name == "cma-me") return Optimizer::CmaMe;
    throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected cma-es or cma-me)");
}

int RunConfig::resolved_lambda() const {
    if (lambda > 0) return lambda;
    return optimizer == Optimizer::CmaMe ? 128 : 112;
}

int RunConfig::resolved_generations() const {
    if (generations > 0) return generations;
    return optimizer == Optimizer::CmaMe ? 60000 : 20000;
}

long long RunConfig::resolved_total_configurations() const {
    return total_configurations > 0 ? total_configurations : feature_configurations(dims.area());
}

int RunConfig::resolved_jobs() const {
    if (jobs > 0) return jobs;
    if (const char* env = std::getenv("NCRS_JOBS")) {
        int v = 0;
        const auto* end = env + std::char_traits<char>::length(env);
        if (std::from_chars(env, end, v).ec == std::errc{} && v > 0)
            return v;
    }
    return 1;
}

EvalSettings RunConfig::eval_settings() const {
    EvalSettings s;
    s.task = task;
    s.dims = dims;
    s.activation = activation;
    s.sim = sim;
    s.episodes = train_episodes;
    return s;
}

namespace {

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

template <typename T>
T parse_number(const std::string& s) {
    T v{};
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if constexpr (std::is_floating_point_v<T>) {
        char* end = nullptr;
        v = std::strtod(first, &end);
        if (s.empty() || end != last)
            throw ConfigError("expected a number, got '" + s + "'");
    } else {
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last)
            throw ConfigError("expected an integer, got '" + s + "'");
    }
    return v;
}

struct Field {
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field number_field(std::string key, T RunConfig::*member) {
    return {key, [member](RunConfig& c, const std::string& v) { c.*member = parse_number<T>(v); },
            [member](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
                else return std::to_string(c.*member);
            }};
}

template <typename T, typename Outer>
Field nested_field(std::string key, Outer RunConfig::*outer, T Outer::*member) {
    return {key, [=](RunConfig& c, const std::string& v) { (c.*outer).*member = parse_number<T>(v); },
            [=](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return format_double((c.*outer).*member);
                else return std::to_string((c.*outer).*member);
            }};
}

template <typename T>
Field physics_field(std::string key, T PhysicsParams::*member) {
    return {key, [=](RunConfig& c, const std::string& v) { c.sim.physics.*member = parse_number<T>(v); },
            [=](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return format_double(c.sim.physics.*member);
                else return std::to_string(c.sim.physics.*member);
            }};
}

template <typename T>
Field scenario_field(std::string key, T ScenarioParams::*member) {
    return {key, [=](RunConfig& c, const std::string& v) { c.sim.scenario.*member = parse_number<T>(v); },
            [=](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return format_double(c.sim.scenario.*member);
                else return std::to_string(c.sim.scenario.*member);
            }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"task", [](RunConfig& c, const std::string& v) { c.task = parse_task(v); },
         [](const RunConfig& c) { return std::string(task_name(c.task)); }},
        {"optimizer", [](RunConfig& c, const std::string& v) { c.optimizer = parse_optimizer(v); },
         [](const RunConfig& c) { return std::string(optimizer_name(c.optimizer)); }},
        nested_field("grid_height", &RunConfig::dims, &GridDims::height),
        nested_field("grid_width", &RunConfig::dims, &GridDims::width),
        number_field("lambda", &RunConfig::lambda),
        number_field("emitters", &RunConfig::emitters),
        number_field("generations", &RunConfig::generations),
        number_field("seed", &RunConfig::seed),
        number_field("train_episodes", &RunConfig::train_episodes),
        number_field("test_episodes", &RunConfig::test_episodes),
        number_field("sigma0", &RunConfig::sigma0),
        number_field("stuck_limit", &RunConfig::stuck_limit),
        number_field("total_configurations", &RunConfig::total_configurations),
        {"activation", [](RunConfig& c, const std::string& v) { c.activation = parse_activation(v); },
         [](const RunConfig& c) { return std::string(activation_name(c.activation)); }},
        {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
         [](const RunConfig& c) { return c.output_dir; }},
        number_field("jobs", &RunConfig::jobs),
        number_field("checkpoint_every", &RunConfig::checkpoint_every),

        physics_field("physics.dt", &PhysicsParams::dt),
        physics_field("physics.substeps", &PhysicsParams::substeps),
        physics_field("physics.wheel_max_speed", &PhysicsParams::wheel_max_speed),
        physics_field("physics.drive_gain", &PhysicsParams::drive_gain),
        physics_field("physics.lateral_damping", &PhysicsParams::lateral_damping),
        physics_field("physics.module_mass", &PhysicsParams::module_mass),
        physics_field("physics.module_radius", &PhysicsParams::module_radius),
        physics_field("physics.restitution", &PhysicsParams::restitution),
        physics_field("physics.wall_friction", &PhysicsParams::wall_friction),
        physics_field("physics.ball_radius", &PhysicsParams::ball_radius),
        physics_field("physics.ball_mass", &PhysicsParams::ball_mass),
        physics_field("physics.ball_damping", &PhysicsParams::ball_damping),

        scenario_field("scenario.playfield", &ScenarioParams::playfield),
        scenario_field("scenario.module_size", &ScenarioParams::module_size),
        scenario_field("scenario.episode_steps", &ScenarioParams::episode_steps),
        scenario_field("scenario.success_radius_modules", &ScenarioParams::success_radius_modules),
        scenario_field("scenario.lc_corner_inset", &ScenarioParams::lc_corner_inset),
        scenario_field("scenario.lc_jitter_radius", &ScenarioParams::lc_jitter_radius),
        scenario_field("scenario.bottom_y_min", &ScenarioParams::bottom_y_min),
        scenario_field("scenario.bottom_y_max", &ScenarioParams::bottom_y_max),
        scenario_field("scenario.start_x_min", &ScenarioParams::start_x_min),
        scenario_field("scenario.start_x_max", &ScenarioParams::start_x_max),
        scenario_field("scenario.top_y", &ScenarioParams::top_y),
        scenario_field("scenario.region_margin", &ScenarioParams::region_margin),
        scenario_field("scenario.passage_y", &ScenarioParams::passage_y),
        scenario_field("scenario.passage_modules", &ScenarioParams::passage_modules),
        scenario_field("scenario.funnel_drop", &ScenarioParams::funnel_drop),
        scenario_field("scenario.wall_segments", &ScenarioParams::wall_segments),
        scenario_field("scenario.roughness", &ScenarioParams::roughness),
        scenario_field("scenario.ball_y", &ScenarioParams::ball_y),
        scenario_field("scenario.target_x_min", &ScenarioParams::target_x_min),
        scenario_field("scenario.target_x_max", &ScenarioParams::target_x_max),
        scenario_field("scenario.target_radius", &ScenarioParams::target_radius),
    };
    return table;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

void check(const RunConfig& c) {
    if (c.dims.height <= 0 || c.dims.width <= 0 || c.dims.height % 2 == 0 || c.dims.width % 2 == 0)
        throw ConfigError("grid dimensions must be odd and positive");
    if (c.lambda < 0 || c.lambda == 1)
        throw ConfigError("lambda must be 0 (auto) or at least 2");
    if (c.emitters < 1)
        throw ConfigError("emitters must be at least 1");
    if (c.generations < 0)
        throw ConfigError("generations must be non-negative");
    if (c.train_episodes < 1 || c.test_episodes < 1)
        throw ConfigError("episode counts must be positive");
    if (!(c.sigma0 > 0))
        throw ConfigError("sigma0 must be positive");
    if (c.sim.physics.substeps < 1 || !(c.sim.physics.dt > 0))
        throw ConfigError("physics.dt and physics.substeps must be positive");
    if (c.sim.scenario.episode_steps < 1)
        throw ConfigError("scenario.episode_steps must be positive");
}

} // namespace

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
        if (f.key == key) {
            f.set(config, value);
            return;
        }
    }
    throw ConfigError("unknown key '" + key + "'");
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        try {
            set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    check(config);
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_run_config(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string serialize_run_config(const RunConfig& config) {
    std::string out;
    for (const auto& f : fields())
        out += f.key + " = " + f.get(config) + "\n";
    return out;
}

} // namespace ncrs
