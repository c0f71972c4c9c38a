#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ncrs/archive.hpp"
#include "ncrs/cmaes.hpp"

namespace ncrs {

inline constexpr int kDefaultStuckLimit = 500;

/// An improvement emitter: a CMA-ES instance ranked by archive gains.
struct EmitterState {
    CmaState cma;
    int stuck_counter = 0;  // own tells since this emitter last added or improved an elite
    int id = 0;
    int restarts = 0;
};

/// What the evaluator reports for one candidate. Candidates without a key
/// (invalid designs) never enter the archive.
struct CandidateResult {
    double fitness = 0.0;
    std::optional<CellKey> key;
};

/// Improvement ranking: new cells first (by fitness), then improvements (by
/// gain), then everything else (by fitness). Ties keep population order.
std::vector<int> improvement_order(std::span<const double> fitnesses, std::span<const InsertOutcome> outcomes);

/// Feeds the improvement ranking to the inner CMA-ES and updates the stuck counter.
void emitter_tell(EmitterState& emitter, std::span<const Eigen::VectorXd> genomes, std::span<const double> fitnesses,
                  std::span<const InsertOutcome> outcomes);

/// Restarts the emitter from a uniformly chosen elite when the archive holds more
/// elites than there are emitters and the emitter has been stuck for more than
/// `stuck_limit` tells. Returns true if it restarted.
bool maybe_restart(EmitterState& emitter, const Archive& archive, int n_emitters, Rng& rng, double sigma0,
                   int stuck_limit = kDefaultStuckLimit);

struct QdConfig {
    int dimension = 0;
    int emitters = 15;
    int lambda = 128;
    double sigma0 = 0.01;
    std::uint64_t seed = 0;
    int stuck_limit = kDefaultStuckLimit;
    long long total_configurations = 3275;
    Eigen::VectorXd initial_mean;  // empty selects zeros
};

struct GenerationStats {
    int generation = 0;            // 1-based index of the completed generation
    int emitter = 0;
    long long evaluations = 0;     // cumulative
    double best_fitness = 0.0;     // best in this population
    double mean_fitness = 0.0;
    double sigma = 0.0;            // emitter step size after the update
    std::size_t archive_size = 0;
    QdMetrics metrics;
    int new_cells = 0;
    int improvements = 0;
    bool restarted = false;
};

/// CMA-ME with improvement emitters cycled round-robin, one emitter per generation.
class CmaMe {
public:
    using BatchEvaluator = std::function<std::vector<CandidateResult>(const std::vector<Eigen::VectorXd>&)>;

    explicit CmaMe(const QdConfig& config);

    GenerationStats step(const BatchEvaluator& evaluate);

    const Archive& archive() const { return archive_; }
    const std::vector<EmitterState>& emitters() const { return emitters_; }
    const QdConfig& config() const { return config_; }
    int generation() const { return generation_; }
    long long evaluations() const { return evaluations_; }

    void save(std::ostream& os) const;
    static CmaMe load(std::istream& is);

private:
    CmaMe() = default;
    CmaConfig emitter_config(int id, int restarts, const Eigen::VectorXd& mean) const;

    QdConfig config_;
    Archive archive_;
    std::vector<EmitterState> emitters_;
    Rng rng_;
    int generation_ = 0;
    long long evaluations_ = 0;
};

} // namespace ncrs
