#include "ncrs/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ncrs/binary_io.hpp"
#include "ncrs/errors.hpp"
#include "ncrs/nca.hpp"
#include "ncrs/parallel.hpp"

namespace ncrs {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kCheckpointMagic = "NCRSCKPT";
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint64_t kEpisodeStream = 0x65706973;  // "epis"
constexpr std::uint64_t kBaselineStream = 0x62617365;

void write_row(std::ostream& os, const LogRow& r) {
    bin::write_u32(os, static_cast<std::uint32_t>(r.generation));
    bin::write_u64(os, static_cast<std::uint64_t>(r.evaluations));
    bin::write_f64(os, r.best_fitness);
    bin::write_f64(os, r.mean_fitness);
    bin::write_f64(os, r.sigma);
    bin::write_u64(os, r.archive_size);
    bin::write_f64(os, r.qd_score);
    bin::write_f64(os, r.cells_filled_pct);
    bin::write_f64(os, r.wall_time);
}

LogRow read_row(std::istream& is) {
    LogRow r;
    r.generation = static_cast<int>(bin::read_u32(is));
    r.evaluations = static_cast<long long>(bin::read_u64(is));
    r.best_fitness = bin::read_f64(is);
    r.mean_fitness = bin::read_f64(is);
    r.sigma = bin::read_f64(is);
    r.archive_size = bin::read_u64(is);
    r.qd_score = bin::read_f64(is);
    r.cells_filled_pct = bin::read_f64(is);
    r.wall_time = bin::read_f64(is);
    return r;
}

void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& body,
                      std::ios::openmode mode = std::ios::out) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, mode | std::ios::trunc);
        if (!os)
            throw DataError("cannot write '" + tmp.string() + "'");
        body(os);
        if (!os)
            throw DataError("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

} // namespace

std::uint64_t training_episode_seed(std::uint64_t run_seed) { return mix_seed(run_seed, {kEpisodeStream}); }

std::vector<FitnessReport> evaluate_batch(const std::vector<Eigen::VectorXd>& genomes, const EvalSettings& settings,
                                          std::uint64_t master_seed, int jobs) {
    const auto episodes = training_episodes(settings.task, master_seed, settings.episodes, settings.sim.scenario);
    std::vector<FitnessReport> out(genomes.size());
    parallel_for(genomes.size(), jobs, [&](std::size_t i) {
        if (!genomes[i].allFinite()) {
            out[i].fitness = 0.0;
            return;
        }
        out[i] = evaluate_on(Genome(genomes[i]), settings, episodes);
    });
    return out;
}

bool LogRow::same_progress(const LogRow& o) const {
    return generation == o.generation && evaluations == o.evaluations && best_fitness == o.best_fitness
        && mean_fitness == o.mean_fitness && sigma == o.sigma && archive_size == o.archive_size
        && qd_score == o.qd_score && cells_filled_pct == o.cells_filled_pct;
}

void write_log_csv(std::ostream& os, const std::vector<LogRow>& rows) {
    os << "generation,evaluations,best_fitness,mean_fitness,sigma,archive_size,qd_score,cells_filled_pct,wall_time\n";
    os << std::setprecision(17);
    for (const auto& r : rows)
        os << r.generation << ',' << r.evaluations << ',' << r.best_fitness << ',' << r.mean_fitness << ','
           << r.sigma << ',' << r.archive_size << ',' << r.qd_score << ',' << r.cells_filled_pct << ','
           << std::setprecision(6) << r.wall_time << std::setprecision(17) << '\n';
}

Trainer::Trainer(const RunConfig& config) : config_(config) {
    episode_seed_ = training_episode_seed(config_.seed);
    const auto dim = static_cast<int>(genome_length(config_.eval_settings().layout()));
    if (config_.optimizer == Optimizer::CmaEs) {
        CmaConfig c;
        c.dimension = dim;
        c.lambda = config_.resolved_lambda();
        c.sigma0 = config_.sigma0;
        c.seed = config_.seed;
        cma_ = std::make_unique<CmaState>(cma_init(c));
        passive_archive_.total_configurations = config_.resolved_total_configurations();
    } else {
        QdConfig q;
        q.dimension = dim;
        q.emitters = config_.emitters;
        q.lambda = config_.resolved_lambda();
        q.sigma0 = config_.sigma0;
        q.seed = config_.seed;
        q.stuck_limit = config_.stuck_limit;
        q.total_configurations = config_.resolved_total_configurations();
        cmame_ = std::make_unique<CmaMe>(q);
    }
    started_ = std::chrono::steady_clock::now();
}

Trainer::~Trainer() = default;
Trainer::Trainer(Trainer&&) noexcept = default;
Trainer& Trainer::operator=(Trainer&&) noexcept = default;

const Archive& Trainer::archive() const { return cmame_ ? cmame_->archive() : passive_archive_; }

GenomeHeader Trainer::genome_header() const {
    GenomeHeader h;
    h.layout = config_.eval_settings().layout();
    h.dims = config_.dims;
    h.task = config_.task;
    h.activation = config_.activation;
    return h;
}

std::vector<CandidateResult> Trainer::evaluate(const std::vector<Eigen::VectorXd>& genomes, double& mean_fitness) {
    const auto reports = evaluate_batch(genomes, config_.eval_settings(), episode_seed_, config_.resolved_jobs());
    std::vector<CandidateResult> out(reports.size());
    double total = 0.0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        out[i].fitness = reports[i].fitness;
        if (reports[i].features)
            out[i].key = reports[i].features->key();
        total += reports[i].fitness;
        if (reports[i].fitness > best_fitness_) {
            best_fitness_ = reports[i].fitness;
            best_genome_ = genomes[i];
        }
    }
    mean_fitness = reports.empty() ? 0.0 : total / static_cast<double>(reports.size());
    evaluations_ += static_cast<long long>(genomes.size());
    return out;
}

const LogRow& Trainer::step() {
    LogRow row;
    if (cma_) {
        const auto genomes = ask(*cma_);
        const auto results = evaluate(genomes, row.mean_fitness);
        std::vector<double> fitness(results.size());
        for (std::size_t i = 0; i < results.size(); ++i) {
            fitness[i] = results[i].fitness;
            if (results[i].key)
                archive_insert(passive_archive_, genomes[i], results[i].fitness, *results[i].key, generation_ + 1);
        }
        tell(*cma_, genomes, fitness);
        row.sigma = cma_->sigma;
    } else {
        const auto stats = cmame_->step([&](const std::vector<Eigen::VectorXd>& genomes) {
            return evaluate(genomes, row.mean_fitness);
        });
        row.sigma = stats.sigma;
    }
    ++generation_;
    const auto metrics = qd_metrics(archive());
    row.generation = generation_;
    row.evaluations = evaluations_;
    row.best_fitness = best_fitness_;
    row.archive_size = archive().size();
    row.qd_score = metrics.qd_score;
    row.cells_filled_pct = metrics.cells_filled_pct;
    row.wall_time = wall_offset_ + std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    log_.push_back(row);
    return log_.back();
}

void Trainer::run(int target, const std::function<void(const LogRow&)>& on_row) {
    const fs::path dir = config_.output_dir;
    fs::create_directories(dir);
    while (generation_ < target) {
        const auto& row = step();
        if (on_row)
            on_row(row);
        if (config_.checkpoint_every > 0 && generation_ % config_.checkpoint_every == 0 && generation_ < target)
            save_checkpoint(dir / "checkpoint.bin");
    }
    write_outputs();
}

void Trainer::write_outputs() const {
    const fs::path dir = config_.output_dir;
    fs::create_directories(dir);
    write_atomically(dir / "config.txt", [&](std::ostream& os) { os << serialize_run_config(config_); });
    write_atomically(dir / "log.csv", [&](std::ostream& os) { write_log_csv(os, log_); });
    if (best_genome_.size() > 0)
        write_genome_file(dir / "best_genome.ncrs", {genome_header(), Genome(best_genome_)});
    write_archive_dir(dir / "archive", archive(), genome_header());
    save_checkpoint(dir / "checkpoint.bin");
}

void Trainer::save_checkpoint(const fs::path& path) const {
    write_atomically(path, [&](std::ostream& os) {
        os.write(kCheckpointMagic.data(), static_cast<std::streamsize>(kCheckpointMagic.size()));
        bin::write_u32(os, kCheckpointVersion);
        bin::write_string(os, serialize_run_config(config_));
        bin::write_u32(os, static_cast<std::uint32_t>(generation_));
        bin::write_u64(os, static_cast<std::uint64_t>(evaluations_));
        bin::write_f64(os, best_fitness_);
        bin::write_vector(os, best_genome_);
        bin::write_u64(os, log_.size());
        for (const auto& r : log_)
            write_row(os, r);
        bin::write_u32(os, cma_ ? 0u : 1u);
        if (cma_) {
            save_cma(os, *cma_);
            save_archive(os, passive_archive_);
        } else {
            cmame_->save(os);
        }
    }, std::ios::binary);
}

Trainer Trainer::resume(const fs::path& dir) {
    const fs::path path = dir / "checkpoint.bin";
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw DataError("no checkpoint at '" + path.string() + "'");
    try {
        bin::expect_magic(is, kCheckpointMagic);
        if (bin::read_u32(is) != kCheckpointVersion)
            throw DataError("unsupported checkpoint version");
        Trainer t;
        t.config_ = parse_run_config(bin::read_string(is));
        t.config_.output_dir = dir.string();
        t.episode_seed_ = training_episode_seed(t.config_.seed);
        t.generation_ = static_cast<int>(bin::read_u32(is));
        t.evaluations_ = static_cast<long long>(bin::read_u64(is));
        t.best_fitness_ = bin::read_f64(is);
        t.best_genome_ = bin::read_vector(is);
        const auto rows = bin::read_u64(is);
        if (rows != static_cast<std::uint64_t>(t.generation_))
            throw DataError("checkpoint log length does not match its generation");
        for (std::uint64_t i = 0; i < rows; ++i)
            t.log_.push_back(read_row(is));
        const auto kind = bin::read_u32(is);
        if (kind == 0) {
            t.cma_ = std::make_unique<CmaState>(load_cma(is));
            t.passive_archive_ = load_archive(is);
        } else if (kind == 1) {
            t.cmame_ = std::make_unique<CmaMe>(CmaMe::load(is));
        } else {
            throw DataError("unknown optimizer id in checkpoint");
        }
        t.wall_offset_ = t.log_.empty() ? 0.0 : t.log_.back().wall_time;
        t.started_ = std::chrono::steady_clock::now();
        return t;
    } catch (const ConfigError& e) {
        throw DataError(path.string() + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

CampaignReport run_campaign(const Genome& genome, const EvalSettings& settings, std::uint64_t seed, int episodes,
                            int jobs) {
    CampaignReport report;
    const auto grid = develop(genome, settings.layout(), settings.dims, settings.activation);
    report.morphology = extract_body(grid);
    report.validity = validate(report.morphology, settings.task);
    report.valid = report.validity.valid;
    if (!report.valid) {
        report.mean_fitness = invalid_score(report.validity);
        return report;
    }
    const auto configs = testing_episodes(settings.task, seed, episodes, settings.sim.scenario);
    std::vector<EpisodeResult> results(configs.size());
    parallel_for(configs.size(), jobs, [&](std::size_t i) {
        results[i] = run_episode(genome, report.morphology, configs[i], settings);
    });
    int successes = 0;
    for (const auto& r : results) {
        report.episode_fitness.push_back(r.fitness);
        successes += r.success ? 1 : 0;
    }
    report.episodes = static_cast<int>(results.size());
    report.mean_fitness = std::accumulate(report.episode_fitness.begin(), report.episode_fitness.end(), 0.0)
                        / static_cast<double>(std::max(1, report.episodes));
    report.success_pct = 100.0 * successes / static_cast<double>(std::max(1, report.episodes));
    return report;
}

BaselineReport random_baseline(const EvalSettings& settings, std::uint64_t seed, int samples, double sigma, int jobs) {
    if (samples < 1)
        throw ConfigError("baseline needs at least one sample");
    Rng rng(mix_seed(seed, {kBaselineStream}));
    std::normal_distribution<double> normal(0.0, sigma);
    const auto n = static_cast<Eigen::Index>(genome_length(settings.layout()));
    std::vector<Eigen::VectorXd> genomes(static_cast<std::size_t>(samples));
    for (auto& g : genomes) {
        g.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            g[i] = normal(rng);
    }
    const auto reports = evaluate_batch(genomes, settings, training_episode_seed(seed), jobs);
    BaselineReport out;
    out.samples = samples;
    out.max = -std::numeric_limits<double>::infinity();
    int valid = 0;
    for (const auto& r : reports) {
        out.mean += r.fitness;
        out.max = std::max(out.max, r.fitness);
        valid += r.valid ? 1 : 0;
    }
    out.mean /= samples;
    double var = 0.0;
    for (const auto& r : reports)
        var += (r.fitness - out.mean) * (r.fitness - out.mean);
    out.stddev = std::sqrt(var / samples);
    out.valid_rate = static_cast<double>(valid) / samples;
    return out;
}

} // namespace ncrs
