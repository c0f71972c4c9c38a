#include "ncrs/cmame.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ncrs/binary_io.hpp"
#include "ncrs/errors.hpp"

namespace ncrs {

std::vector<int> improvement_order(std::span<const double> fitnesses, std::span<const InsertOutcome> outcomes) {
    if (fitnesses.size() != outcomes.size())
        throw std::invalid_argument("fitness and outcome counts differ");
    auto band = [](InsertStatus s) {
        switch (s) {
        case InsertStatus::NewCell: return 0;
        case InsertStatus::Improved: return 1;
        case InsertStatus::Rejected: return 2;
        }
        return 2;
    };
    auto value = [&](int i) {
        const auto& o = outcomes[static_cast<std::size_t>(i)];
        return o.status == InsertStatus::Improved ? o.improvement : fitnesses[static_cast<std::size_t>(i)];
    };
    std::vector<int> order(fitnesses.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const int ba = band(outcomes[static_cast<std::size_t>(a)].status);
        const int bb = band(outcomes[static_cast<std::size_t>(b)].status);
        if (ba != bb)
            return ba < bb;
        return value(a) > value(b);
    });
    return order;
}

void emitter_tell(EmitterState& emitter, std::span<const Eigen::VectorXd> genomes, std::span<const double> fitnesses,
                  std::span<const InsertOutcome> outcomes) {
    for (double f : fitnesses)
        if (std::isnan(f))
            throw std::invalid_argument("NaN fitness passed to emitter_tell");
    const auto order = improvement_order(fitnesses, outcomes);
    tell_ranked(emitter.cma, genomes, order);
    const bool progressed = std::any_of(outcomes.begin(), outcomes.end(),
                                        [](const InsertOutcome& o) { return o.status != InsertStatus::Rejected; });
    emitter.stuck_counter = progressed ? 0 : emitter.stuck_counter + 1;
}

bool maybe_restart(EmitterState& emitter, const Archive& archive, int n_emitters, Rng& rng, double sigma0,
                   int stuck_limit) {
    if (archive.size() <= static_cast<std::size_t>(n_emitters) || emitter.stuck_counter <= stuck_limit)
        return false;
    const auto pick = std::uniform_int_distribution<std::size_t>(0, archive.size() - 1)(rng);
    const auto& elite = std::next(archive.elites.begin(), static_cast<std::ptrdiff_t>(pick))->second;

    CmaConfig cfg = emitter.cma.config;
    cfg.mean = elite.genome;
    cfg.sigma0 = sigma0;
    ++emitter.restarts;
    cfg.seed = mix_seed(emitter.cma.config.seed, {static_cast<std::uint64_t>(emitter.restarts)});
    emitter.cma = cma_init(cfg);
    emitter.stuck_counter = 0;
    return true;
}

CmaMe::CmaMe(const QdConfig& config) : config_(config) {
    if (config.emitters < 1)
        throw std::invalid_argument("CMA-ME needs at least one emitter");
    archive_.total_configurations = config.total_configurations;
    rng_.seed(mix_seed(config.seed, {0x7265'7374ULL}));
    const Eigen::VectorXd mean =
        config.initial_mean.size() ? config.initial_mean : Eigen::VectorXd::Zero(config.dimension);
    for (int i = 0; i < config.emitters; ++i)
        emitters_.push_back(EmitterState{cma_init(emitter_config(i, 0, mean)), 0, i, 0});
}

CmaConfig CmaMe::emitter_config(int id, int restarts, const Eigen::VectorXd& mean) const {
    CmaConfig cfg;
    cfg.dimension = config_.dimension;
    cfg.lambda = config_.lambda;
    cfg.mean = mean;
    cfg.sigma0 = config_.sigma0;
    cfg.seed = mix_seed(config_.seed, {static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(restarts)});
    return cfg;
}

GenerationStats CmaMe::step(const BatchEvaluator& evaluate) {
    auto& emitter = emitters_[static_cast<std::size_t>(generation_ % config_.emitters)];
    const auto genomes = ask(emitter.cma);
    const auto results = evaluate(genomes);
    if (results.size() != genomes.size())
        throw std::runtime_error("evaluator returned the wrong number of results");
    ++generation_;
    evaluations_ += static_cast<long long>(genomes.size());

    GenerationStats stats;
    stats.generation = generation_;
    stats.emitter = emitter.id;
    stats.evaluations = evaluations_;

    std::vector<double> fitnesses(results.size());
    std::vector<InsertOutcome> outcomes(results.size());
    stats.best_fitness = -std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        fitnesses[i] = results[i].fitness;
        if (results[i].key)
            outcomes[i] = archive_insert(archive_, genomes[i], results[i].fitness, *results[i].key, generation_);
        stats.new_cells += outcomes[i].status == InsertStatus::NewCell;
        stats.improvements += outcomes[i].status == InsertStatus::Improved;
        stats.best_fitness = std::max(stats.best_fitness, fitnesses[i]);
        total += fitnesses[i];
    }
    stats.mean_fitness = total / static_cast<double>(results.size());

    emitter_tell(emitter, genomes, fitnesses, outcomes);
    stats.restarted = maybe_restart(emitter, archive_, config_.emitters, rng_, config_.sigma0, config_.stuck_limit);
    stats.sigma = emitter.cma.sigma;
    stats.archive_size = archive_.size();
    stats.metrics = qd_metrics(archive_);
    return stats;
}

void CmaMe::save(std::ostream& os) const {
    os.write("NCRSCME\0", 8);
    bin::write_u32(os, 1);
    bin::write_u32(os, static_cast<std::uint32_t>(config_.dimension));
    bin::write_u32(os, static_cast<std::uint32_t>(config_.emitters));
    bin::write_u32(os, static_cast<std::uint32_t>(config_.lambda));
    bin::write_f64(os, config_.sigma0);
    bin::write_u64(os, config_.seed);
    bin::write_u32(os, static_cast<std::uint32_t>(config_.stuck_limit));
    bin::write_u64(os, static_cast<std::uint64_t>(config_.total_configurations));
    bin::write_vector(os, config_.initial_mean);
    bin::write_u32(os, static_cast<std::uint32_t>(generation_));
    bin::write_u64(os, static_cast<std::uint64_t>(evaluations_));
    std::ostringstream rng;
    rng << rng_;
    bin::write_string(os, rng.str());
    save_archive(os, archive_);
    for (const auto& e : emitters_) {
        bin::write_u32(os, static_cast<std::uint32_t>(e.id));
        bin::write_u32(os, static_cast<std::uint32_t>(e.stuck_counter));
        bin::write_u32(os, static_cast<std::uint32_t>(e.restarts));
        save_cma(os, e.cma);
    }
}

CmaMe CmaMe::load(std::istream& is) {
    bin::expect_magic(is, std::string_view("NCRSCME\0", 8));
    if (bin::read_u32(is) != 1)
        throw DataError("unsupported CMA-ME state version");
    CmaMe me;
    me.config_.dimension = static_cast<int>(bin::read_u32(is));
    me.config_.emitters = static_cast<int>(bin::read_u32(is));
    me.config_.lambda = static_cast<int>(bin::read_u32(is));
    me.config_.sigma0 = bin::read_f64(is);
    me.config_.seed = bin::read_u64(is);
    me.config_.stuck_limit = static_cast<int>(bin::read_u32(is));
    me.config_.total_configurations = static_cast<long long>(bin::read_u64(is));
    me.config_.initial_mean = bin::read_vector(is);
    me.generation_ = static_cast<int>(bin::read_u32(is));
    me.evaluations_ = static_cast<long long>(bin::read_u64(is));
    std::istringstream rng(bin::read_string(is));
    rng >> me.rng_;
    me.archive_ = load_archive(is);
    if (me.config_.emitters < 1 || me.config_.emitters > 4096)
        throw DataError("corrupt CMA-ME emitter count");
    for (int i = 0; i < me.config_.emitters; ++i) {
        EmitterState e;
        e.id = static_cast<int>(bin::read_u32(is));
        e.stuck_counter = static_cast<int>(bin::read_u32(is));
        e.restarts = static_cast<int>(bin::read_u32(is));
        e.cma = load_cma(is);
        me.emitters_.push_back(std::move(e));
    }
    return me;
}

} // namespace ncrs
