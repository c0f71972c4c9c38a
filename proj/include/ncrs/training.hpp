#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "ncrs/archive.hpp"
#include "ncrs/cmaes.hpp"
#include "ncrs/cmame.hpp"
#include "ncrs/environment.hpp"
#include "ncrs/run_config.hpp"

namespace ncrs {

/// Evaluates genomes on the same episode set, in parallel; results are in input order.
std::vector<FitnessReport> evaluate_batch(const std::vector<Eigen::VectorXd>& genomes, const EvalSettings& settings,
                                          std::uint64_t master_seed, int jobs);

/// Seed of the training episode set for a run seed.
std::uint64_t training_episode_seed(std::uint64_t run_seed);

struct LogRow {
    int generation = 0;
    long long evaluations = 0;
    double best_fitness = 0.0;     // best so far
    double mean_fitness = 0.0;     // this population
    double sigma = 0.0;
    std::size_t archive_size = 0;
    double qd_score = 0.0;
    double cells_filled_pct = 0.0;
    double wall_time = 0.0;        // seconds since the run started, across resumes

    /// Equality ignoring wall time.
    bool same_progress(const LogRow& other) const;
};

void write_log_csv(std::ostream& os, const std::vector<LogRow>& rows);

/// One training run: CMA-ES (valid candidates also feed a passive elite archive)
/// or CMA-ME. Output files live in config.output_dir:
///   config.txt, log.csv, best_genome.ncrs, archive/, checkpoint.bin
class Trainer {
public:
    explicit Trainer(const RunConfig& config);
    ~Trainer();
    Trainer(Trainer&&) noexcept;
    Trainer& operator=(Trainer&&) noexcept;

    /// Restores a run from <dir>/checkpoint.bin.
    static Trainer resume(const std::filesystem::path& dir);

    /// One generation.
    const LogRow& step();

    /// Steps until `generation() == target`, checkpointing every
    /// config.checkpoint_every generations, then writes all outputs.
    void run(int target, const std::function<void(const LogRow&)>& on_row = {});

    void write_outputs() const;
    void save_checkpoint(const std::filesystem::path& path) const;

    const RunConfig& config() const { return config_; }
    int generation() const { return generation_; }
    long long evaluations() const { return evaluations_; }
    const std::vector<LogRow>& log() const { return log_; }
    const Archive& archive() const;
    double best_fitness() const { return best_fitness_; }
    const Eigen::VectorXd& best_genome() const { return best_genome_; }
    GenomeHeader genome_header() const;

    /// Overrides the generation budget after a resume.
    void set_generations(int generations) { config_.generations = generations; }
    void set_jobs(int jobs) { config_.jobs = jobs; }

private:
    Trainer() = default;
    std::vector<CandidateResult> evaluate(const std::vector<Eigen::VectorXd>& genomes, double& mean_fitness);

    RunConfig config_;
    std::uint64_t episode_seed_ = 0;
    int generation_ = 0;
    long long evaluations_ = 0;
    double best_fitness_ = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_genome_;
    std::vector<LogRow> log_;
    double wall_offset_ = 0.0;
    std::chrono::steady_clock::time_point started_;

    // exactly one of these is set
    std::unique_ptr<CmaState> cma_;
    Archive passive_archive_;
    std::unique_ptr<CmaMe> cmame_;
};

struct CampaignReport {
    double mean_fitness = 0.0;
    double success_pct = 0.0;
    int episodes = 0;
    bool valid = false;
    ValidityReport validity;
    Morphology morphology;
    std::vector<double> episode_fitness;
};

/// Testing campaign: `episodes` held-out episodes from `seed`.
CampaignReport run_campaign(const Genome& genome, const EvalSettings& settings, std::uint64_t seed, int episodes,
                            int jobs);

struct BaselineReport {
    int samples = 0;
    double mean = 0.0;
    double stddev = 0.0;     // population standard deviation
    double max = 0.0;
    double valid_rate = 0.0;
};

/// Scores `samples` genomes drawn from N(0, sigma^2) on the training episode set of `seed`.
BaselineReport random_baseline(const EvalSettings& settings, std::uint64_t seed, int samples, double sigma, int jobs);

} // namespace ncrs
