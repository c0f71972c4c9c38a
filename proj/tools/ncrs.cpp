// ncrs: train, evaluate, render and inspect neural cellular robot substrates.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ncrs/errors.hpp"
#include "ncrs/linalg.hpp"
#include "ncrs/render.hpp"
#include "ncrs/run_config.hpp"
#include "ncrs/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ncrs;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

int default_jobs() { return RunConfig{}.resolved_jobs(); }

void write_json(const std::string& path, const json& j) {
    if (path.empty())
        return;
    std::ofstream os(path);
    if (!os)
        throw DataError("cannot write '" + path + "'");
    os << j.dump(2) << '\n';
}

// Genome file plus the task the caller asked for, if any.
GenomeFile load_genome_for(const std::string& path, const std::string& task) {
    GenomeFile file = read_genome_file(path);
    if (!task.empty() && parse_task(task) != file.header.task)
        throw DataError("genome '" + path + "' was trained for task " + std::string(task_name(file.header.task))
                        + ", not " + task);
    if (file.header.layout.n_total() != ChannelLayout::for_task(file.header.task).n_total())
        throw DataError("genome '" + path + "' has a channel layout that does not fit its task");
    return file;
}

EvalSettings settings_for(const GenomeFile& file, const std::string& config_path) {
    RunConfig config;
    if (!config_path.empty())
        config = load_run_config(config_path);
    config.task = file.header.task;
    config.dims = file.header.dims;
    config.activation = file.header.activation;
    return config.eval_settings();
}

struct TrainArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string task, optimizer, output, resume, activation;
    int generations = -1, lambda = -1, emitters = -1, jobs = -1, checkpoint_every = -1;
    long long seed = -1;
    int print_every = 10;
};

int cmd_train(const TrainArgs& a) {
    std::optional<Trainer> trainer;
    if (!a.resume.empty()) {
        trainer.emplace(Trainer::resume(a.resume));
        if (a.generations >= 0)
            trainer->set_generations(a.generations);
        if (a.jobs > 0)
            trainer->set_jobs(a.jobs);
    } else {
        RunConfig config = a.config_path.empty() ? RunConfig{} : load_run_config(a.config_path);
        for (const auto& kv : a.overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--set expects key=value, got '" + kv + "'");
            set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!a.task.empty()) config.task = parse_task(a.task);
        if (!a.optimizer.empty()) config.optimizer = parse_optimizer(a.optimizer);
        if (!a.activation.empty()) config.activation = parse_activation(a.activation);
        if (!a.output.empty()) config.output_dir = a.output;
        if (a.generations >= 0) config.generations = a.generations;
        if (a.lambda >= 0) config.lambda = a.lambda;
        if (a.emitters >= 0) config.emitters = a.emitters;
        if (a.jobs >= 0) config.jobs = a.jobs;
        if (a.checkpoint_every >= 0) config.checkpoint_every = a.checkpoint_every;
        if (a.seed >= 0) config.seed = static_cast<std::uint64_t>(a.seed);
        // re-validate after overrides
        config = parse_run_config(serialize_run_config(config));
        std::error_code ec;
        fs::create_directories(config.output_dir, ec);
        if (ec || !fs::is_directory(config.output_dir))
            throw DataError("cannot create output directory '" + config.output_dir + "'");
        trainer.emplace(config);
    }
    const RunConfig& c = trainer->config();
    const int target = c.resolved_generations();
    std::cout << "training " << task_name(c.task) << " with " << optimizer_name(c.optimizer) << ", lambda "
              << c.resolved_lambda() << ", generations " << trainer->generation() << " -> " << target << ", jobs "
              << c.resolved_jobs() << '\n';
    trainer->run(target, [&](const LogRow& r) {
        if (a.print_every > 0 && (r.generation % a.print_every == 0 || r.generation == target))
            std::cout << "gen " << r.generation << "  evals " << r.evaluations << "  best " << r.best_fitness
                      << "  mean " << r.mean_fitness << "  sigma " << r.sigma << "  archive " << r.archive_size
                      << std::endl;
    });
    std::cout << "best fitness " << trainer->best_fitness() << "\noutputs in " << c.output_dir << '\n';
    return 0;
}

struct EvalArgs {
    std::string genome, task, config_path, out;
    int episodes = 100;
    long long seed = 0;
    int jobs = 0;
};

int cmd_evaluate(const EvalArgs& a) {
    const GenomeFile file = load_genome_for(a.genome, a.task);
    const EvalSettings settings = settings_for(file, a.config_path);
    if (a.episodes < 1)
        throw ConfigError("--episodes must be positive");
    const auto report = run_campaign(file.genome, settings, static_cast<std::uint64_t>(a.seed), a.episodes,
                                     a.jobs > 0 ? a.jobs : default_jobs());
    std::cout << "task " << task_name(settings.task) << '\n'
              << "valid " << (report.valid ? "yes" : "no") << " (" << report.validity.satisfied_slots << '/'
              << report.validity.required_slots << " requirements)\n"
              << "episodes " << report.episodes << '\n'
              << std::setprecision(10) << "mean_fitness " << report.mean_fitness << '\n'
              << "success_pct " << report.success_pct << '\n'
              << "morphology\n" << report.morphology.to_text();
    write_json(a.out, {{"task", task_name(settings.task)},
                       {"valid", report.valid},
                       {"satisfied_requirements", report.validity.satisfied_slots},
                       {"required_requirements", report.validity.required_slots},
                       {"episodes", report.episodes},
                       {"seed", a.seed},
                       {"mean_fitness", report.mean_fitness},
                       {"success_pct", report.success_pct},
                       {"episode_fitness", report.episode_fitness},
                       {"morphology", report.morphology.to_text()}});
    return 0;
}

struct RenderArgs {
    std::string genome, task, config_path, out = "render";
    long long seed = 0;
    int episode = 0;
    int scale = 8;
};

int cmd_render(const RenderArgs& a) {
    const GenomeFile file = load_genome_for(a.genome, a.task);
    const EvalSettings settings = settings_for(file, a.config_path);
    if (a.episode < 0 || a.scale < 1)
        throw ConfigError("--episode must be non-negative and --scale positive");
    const auto episodes = testing_episodes(settings.task, static_cast<std::uint64_t>(a.seed), a.episode + 1,
                                           settings.sim.scenario);
    const auto summary = render_episode(file.genome, settings, episodes.back(), a.out, FrameStyle{a.scale});
    if (!summary.valid) {
        std::cout << "body is not a valid robot; wrote development images only to " << a.out << '\n';
        return 0;
    }
    std::cout << "frames " << summary.frames << "\nfitness " << summary.fitness << "\nsuccess "
              << (summary.success ? "yes" : "no") << "\noutputs in " << a.out << '\n';
    return 0;
}

struct BaselineArgs {
    std::string task = "lc", config_path, out;
    int samples = 1000;
    double sigma = 0.01;
    long long seed = 0;
    int jobs = 0;
};

int cmd_baseline(const BaselineArgs& a) {
    RunConfig config = a.config_path.empty() ? RunConfig{} : load_run_config(a.config_path);
    config.task = parse_task(a.task);
    if (a.samples < 1)
        throw ConfigError("--samples must be at least 1");
    const auto r = random_baseline(config.eval_settings(), static_cast<std::uint64_t>(a.seed), a.samples, a.sigma,
                                   a.jobs > 0 ? a.jobs : default_jobs());
    std::cout << std::setprecision(10) << "samples " << r.samples << "\nmean " << r.mean << "\nstd " << r.stddev
              << "\nmax " << r.max << "\nvalid_rate " << r.valid_rate << '\n';
    write_json(a.out, {{"task", a.task}, {"samples", r.samples}, {"sigma", a.sigma}, {"seed", a.seed},
                       {"mean", r.mean}, {"std", r.stddev}, {"max", r.max}, {"valid_rate", r.valid_rate}});
    return 0;
}

int cmd_archive_stats(const std::string& dir, const std::string& out) {
    const auto loaded = read_archive_dir(dir);
    const auto& archive = loaded.archive;
    const auto m = qd_metrics(archive);
    std::map<int, int> by_size;
    for (const auto& [key, elite] : archive.elites)
        ++by_size[key[2]];
    std::cout << std::setprecision(10) << "elites " << archive.size() << "\ntotal_configurations "
              << archive.total_configurations << "\ncells_filled_pct " << m.cells_filled_pct << "\nqd_score "
              << m.qd_score << '\n';
    if (const Elite* best = archive.best())
        std::cout << "best_fitness " << best->fitness << " at (" << best->key[0] << ", " << best->key[1] << ", "
                  << best->key[2] << ")\n";
    std::cout << "elites_by_body_parts";
    for (const auto& [b, n] : by_size)
        std::cout << ' ' << b << ':' << n;
    std::cout << '\n';
    json sizes = json::object();
    for (const auto& [b, n] : by_size)
        sizes[std::to_string(b)] = n;
    write_json(out, {{"elites", archive.size()},
                     {"total_configurations", archive.total_configurations},
                     {"cells_filled_pct", m.cells_filled_pct},
                     {"qd_score", m.qd_score},
                     {"best_fitness", archive.best() ? json(archive.best()->fitness) : json(nullptr)},
                     {"elites_by_body_parts", sizes}});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    ensure_working_lapack(argv);
    CLI::App app{"Neural cellular robot substrate: grow robot bodies and controllers with one NCA"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Train an NCA with CMA-ES or CMA-ME");
    t->add_option("-c,--config", train.config_path, "Config file (key = value)");
    t->add_option("--set", train.overrides, "Override a config key: key=value");
    t->add_option("--task", train.task, "lc | lco | cbt");
    t->add_option("--optimizer", train.optimizer, "cma-es | cma-me");
    t->add_option("--activation", train.activation, "relu | tanh");
    t->add_option("--generations", train.generations, "Generation budget");
    t->add_option("--lambda", train.lambda, "Population size");
    t->add_option("--emitters", train.emitters, "CMA-ME emitter count");
    t->add_option("--seed", train.seed, "Master seed")->check(CLI::NonNegativeNumber);
    t->add_option("-o,--output", train.output, "Output directory");
    t->add_option("-j,--jobs", train.jobs, "Parallel evaluations (default: NCRS_JOBS or 1)");
    t->add_option("--checkpoint-every", train.checkpoint_every, "Checkpoint interval in generations");
    t->add_option("--resume", train.resume, "Continue the run stored in this directory");
    t->add_option("--print-every", train.print_every, "Progress line interval");

    EvalArgs eval;
    auto* e = app.add_subcommand("evaluate", "Run a testing campaign for a genome file");
    e->add_option("genome", eval.genome, "Genome file")->required();
    e->add_option("--task", eval.task, "Expected task (checked against the file)");
    e->add_option("--episodes", eval.episodes, "Number of episodes");
    e->add_option("--seed", eval.seed, "Campaign seed")->check(CLI::NonNegativeNumber);
    e->add_option("-c,--config", eval.config_path, "Config with physics and scenario constants");
    e->add_option("-j,--jobs", eval.jobs, "Parallel episodes (default: NCRS_JOBS or 1)");
    e->add_option("-o,--out", eval.out, "Write the report as JSON");

    RenderArgs render;
    auto* r = app.add_subcommand("render", "Write frames, channel strips and a trajectory for one episode");
    r->add_option("genome", render.genome, "Genome file")->required();
    r->add_option("--task", render.task, "Expected task (checked against the file)");
    r->add_option("--seed", render.seed, "Campaign seed")->check(CLI::NonNegativeNumber);
    r->add_option("--episode", render.episode, "Episode index within the campaign");
    r->add_option("-c,--config", render.config_path, "Config with physics and scenario constants");
    r->add_option("-o,--out", render.out, "Output directory");
    r->add_option("--scale", render.scale, "Pixels per unit length");

    BaselineArgs base;
    auto* b = app.add_subcommand("baseline", "Score random N(0, sigma^2) genomes");
    b->add_option("--task", base.task, "lc | lco | cbt");
    b->add_option("-n,--samples", base.samples, "Number of random genomes");
    b->add_option("--sigma", base.sigma, "Standard deviation of each parameter");
    b->add_option("--seed", base.seed, "Seed")->check(CLI::NonNegativeNumber);
    b->add_option("-c,--config", base.config_path, "Config with physics and scenario constants");
    b->add_option("-j,--jobs", base.jobs, "Parallel evaluations (default: NCRS_JOBS or 1)");
    b->add_option("-o,--out", base.out, "Write the stats as JSON");

    std::string archive_dir, archive_out;
    auto* s = app.add_subcommand("archive-stats", "Summarise an archive directory");
    s->add_option("archive", archive_dir, "Archive directory")->required();
    s->add_option("-o,--out", archive_out, "Write the summary as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kExitUsage;
    }

    try {
        if (t->parsed()) return cmd_train(train);
        if (e->parsed()) return cmd_evaluate(eval);
        if (r->parsed()) return cmd_render(render);
        if (b->parsed()) return cmd_baseline(base);
        if (s->parsed()) return cmd_archive_stats(archive_dir, archive_out);
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitData;
    } catch (const DataError& ex) {
        std::cerr << "data error: " << ex.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& ex) {
        std::cerr << "file error: " << ex.what() << '\n';
        return kExitData;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
