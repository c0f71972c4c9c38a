#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ncrs/cmame.hpp"

using namespace ncrs;

namespace {

InsertOutcome out(InsertStatus s, double v) { return {s, v}; }

// Toy map: the first two coordinates pick one of 10x10 cells, fitness prefers the origin.
std::vector<CandidateResult> toy_eval(const std::vector<Eigen::VectorXd>& xs) {
    std::vector<CandidateResult> r;
    for (const auto& x : xs) {
        CandidateResult c;
        c.fitness = std::exp(-x.squaredNorm() / 100);
        const auto bin = [](double v) { return static_cast<int>(std::floor(std::clamp(v, -4.999, 4.999) + 5)); };
        if (std::abs(x[2]) < 3)  // a slab of "invalid designs"
            c.key = CellKey{bin(x[0]), bin(x[1]), 1};
        r.push_back(c);
    }
    return r;
}

EmitterState emitter(int n, std::uint64_t seed) {
    CmaConfig cfg;
    cfg.dimension = n;
    cfg.lambda = 6;
    cfg.sigma0 = 0.5;
    cfg.seed = seed;
    return EmitterState{cma_init(cfg), 0, 0, 0};
}

Archive filled(int count) {
    Archive a;
    for (int i = 0; i < count; ++i)
        archive_insert(a, Eigen::VectorXd::Constant(3, i + 1.0), 0.5, {0, 0, i + 1});
    return a;
}

} // namespace

TEST(ImprovementOrder, BandsThenValues) {
    const std::vector<double> fit{0.9, 0.2, 0.5, 0.3, 0.8, 0.6, 0.3};
    const std::vector<InsertOutcome> outs{
        out(InsertStatus::Rejected, 0), out(InsertStatus::NewCell, 0.2), out(InsertStatus::Improved, 0.01),
        out(InsertStatus::NewCell, 0.3), out(InsertStatus::Improved, 0.2), out(InsertStatus::Rejected, 0),
        out(InsertStatus::NewCell, 0.3)};
    EXPECT_EQ(improvement_order(fit, outs), (std::vector<int>{3, 6, 1, 4, 2, 0, 5}));
    EXPECT_THROW(improvement_order(fit, std::vector<InsertOutcome>(2)), std::invalid_argument);
}

TEST(Emitter, StuckCounter) {
    auto e = emitter(3, 1);
    for (int round = 1; round <= 4; ++round) {
        const auto pop = ask(e.cma);
        std::vector<double> fit(pop.size(), 0.1);
        emitter_tell(e, pop, fit, std::vector<InsertOutcome>(pop.size()));
        EXPECT_EQ(e.stuck_counter, round);
    }
    const auto pop = ask(e.cma);
    std::vector<double> fit(pop.size(), 0.1);
    std::vector<InsertOutcome> outs(pop.size());
    outs[3] = out(InsertStatus::Improved, 0.05);
    emitter_tell(e, pop, fit, outs);
    EXPECT_EQ(e.stuck_counter, 0);
    fit[1] = std::nan("");
    EXPECT_THROW(emitter_tell(e, ask(e.cma), fit, outs), std::invalid_argument);
}

TEST(Emitter, RestartGuards) {
    Rng rng(4);
    auto e = emitter(3, 2);
    // archive no larger than the emitter count: never restart
    e.stuck_counter = 1'000'000;
    EXPECT_FALSE(maybe_restart(e, filled(5), 5, rng, 0.01));
    EXPECT_EQ(e.stuck_counter, 1'000'000);
    // enough elites but not stuck long enough
    e.stuck_counter = 500;
    EXPECT_FALSE(maybe_restart(e, filled(6), 5, rng, 0.01));
    e.stuck_counter = 501;
    const auto archive = filled(6);
    ASSERT_TRUE(maybe_restart(e, archive, 5, rng, 0.01));
    EXPECT_EQ(e.stuck_counter, 0);
    EXPECT_EQ(e.restarts, 1);
    EXPECT_EQ(e.cma.sigma, 0.01);
    EXPECT_EQ(e.cma.generation, 0);
    bool from_elite = false;
    for (const auto& [k, el] : archive.elites)
        from_elite |= el.genome == e.cma.mean;
    EXPECT_TRUE(from_elite);
    e.stuck_counter = 11;
    EXPECT_TRUE(maybe_restart(e, archive, 5, rng, 0.02, 10));
    EXPECT_EQ(e.restarts, 2);
}

TEST(CmaMe, FillsToyMap) {
    QdConfig cfg;
    cfg.dimension = 6;
    cfg.emitters = 3;
    cfg.lambda = 16;
    cfg.sigma0 = 0.5;
    cfg.seed = 3;
    cfg.stuck_limit = 20;
    cfg.total_configurations = 100;
    CmaMe me(cfg);
    GenerationStats last;
    for (int g = 0; g < 500; ++g) {
        last = me.step(toy_eval);
        ASSERT_EQ(last.generation, g + 1);
        ASSERT_EQ(last.emitter, g % 3);
    }
    EXPECT_EQ(me.evaluations(), 500 * 16);
    EXPECT_GE(last.metrics.cells_filled_pct, 50.0);
    EXPECT_EQ(last.archive_size, me.archive().size());
    for (const auto& [k, e] : me.archive().elites) {
        EXPECT_GE(k[0], 0);
        EXPECT_LT(k[0], 10);
        EXPECT_EQ(toy_eval({e.genome})[0].fitness, e.fitness);
    }
}

TEST(CmaMe, DeterministicAndResumable) {
    QdConfig cfg;
    cfg.dimension = 5;
    cfg.emitters = 2;
    cfg.lambda = 8;
    cfg.sigma0 = 0.5;
    cfg.seed = 9;
    cfg.stuck_limit = 5;
    cfg.total_configurations = 100;
    CmaMe a(cfg), b(cfg);
    for (int g = 0; g < 60; ++g) {
        a.step(toy_eval);
        b.step(toy_eval);
    }
    std::stringstream ss;
    a.save(ss);
    CmaMe c = CmaMe::load(ss);
    for (int g = 0; g < 60; ++g) {
        const auto sa = a.step(toy_eval);
        const auto sc = c.step(toy_eval);
        b.step(toy_eval);
        ASSERT_EQ(sa.best_fitness, sc.best_fitness);
        ASSERT_EQ(sa.restarted, sc.restarted);
    }
    for (const auto* other : {&b, &c}) {
        ASSERT_EQ(a.archive().size(), other->archive().size());
        for (const auto& [k, e] : a.archive().elites)
            EXPECT_EQ(other->archive().elites.at(k).genome, e.genome);
        for (std::size_t i = 0; i < a.emitters().size(); ++i) {
            EXPECT_EQ(a.emitters()[i].cma.mean, other->emitters()[i].cma.mean);
            EXPECT_EQ(a.emitters()[i].stuck_counter, other->emitters()[i].stuck_counter);
        }
    }
}

TEST(CmaMe, RejectsBadSetup) {
    QdConfig cfg;
    cfg.dimension = 3;
    cfg.emitters = 0;
    EXPECT_THROW(CmaMe{cfg}, std::invalid_argument);
    cfg.emitters = 1;
    cfg.lambda = 4;
    CmaMe me(cfg);
    EXPECT_THROW(me.step([](const std::vector<Eigen::VectorXd>&) { return std::vector<CandidateResult>(1); }),
                 std::runtime_error);
}
