#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "ncrs/cmaes.hpp"
#include "ncrs/linalg.hpp"

using namespace ncrs;

namespace {

using Fn = double (*)(const Eigen::VectorXd&);

double neg_sphere(const Eigen::VectorXd& x) { return -x.squaredNorm(); }

double neg_rosenbrock(const Eigen::VectorXd& x) {
    double f = 0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
        f += 100 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1 - x[i], 2);
    return -f;
}

double generation(CmaState& s, Fn f) {
    const auto pop = ask(s);
    std::vector<double> fit;
    for (const auto& x : pop)
        fit.push_back(f(x));
    tell(s, pop, fit);
    return *std::max_element(fit.begin(), fit.end());
}

CmaState make(int n, int lambda, double sigma, double mean, std::uint64_t seed) {
    CmaConfig cfg;
    cfg.dimension = n;
    cfg.lambda = lambda;
    cfg.sigma0 = sigma;
    cfg.mean = Eigen::VectorXd::Constant(n, mean);
    cfg.seed = seed;
    return cma_init(cfg);
}

} // namespace

TEST(CmaParameters, MatchTextbookDefaults) {
    for (int n : {2, 10, 100, 4572})
        for (int lambda : {0, 8, 16, 112}) {
            const int lam = lambda ? lambda : 4 + static_cast<int>(std::floor(3 * std::log(n)));
            const auto p = CmaParameters::standard(n, lam);
            const int mu = lam / 2;
            ASSERT_EQ(p.mu, mu);
            std::vector<double> w(static_cast<std::size_t>(mu));
            double sum = 0, sq = 0;
            for (int i = 0; i < mu; ++i)
                sum += (w[static_cast<std::size_t>(i)] = std::log((lam + 1) / 2.0) - std::log(i + 1.0));
            for (auto& v : w) {
                v /= sum;
                sq += v * v;
            }
            const double me = 1 / sq;
            for (int i = 0; i < mu; ++i)
                EXPECT_NEAR(p.weights[i], w[static_cast<std::size_t>(i)], 1e-14);
            EXPECT_NEAR(p.weights.sum(), 1.0, 1e-12);
            EXPECT_NEAR(p.mu_eff, me, 1e-10);
            const double cs = (me + 2) / (n + me + 5);
            EXPECT_NEAR(p.c_sigma, cs, 1e-14);
            EXPECT_NEAR(p.d_sigma, 1 + 2 * std::max(0.0, std::sqrt((me - 1) / (n + 1)) - 1) + cs, 1e-14);
            EXPECT_NEAR(p.c_c, (4 + me / n) / (n + 4 + 2 * me / n), 1e-14);
            const double c1 = 2 / ((n + 1.3) * (n + 1.3) + me);
            EXPECT_NEAR(p.c_1, c1, 1e-12 * c1);
            EXPECT_NEAR(p.c_mu, std::min(1 - c1, 2 * (me - 2 + 1 / me) / ((n + 2.0) * (n + 2.0) + me)), 1e-12 * p.c_mu);
            EXPECT_GE(p.eigen_interval, 1);
        }
    CmaConfig cfg;
    cfg.dimension = 4572;
    EXPECT_EQ(cfg.resolved_lambda(), 4 + 25);
}

TEST(CmaEs, RejectsBadConfig) {
    CmaConfig cfg;
    EXPECT_THROW(cma_init(cfg), std::invalid_argument);
    cfg.dimension = 3;
    cfg.lambda = 1;
    EXPECT_THROW(cma_init(cfg), std::invalid_argument);
    cfg.lambda = 4;
    cfg.sigma0 = 0;
    EXPECT_THROW(cma_init(cfg), std::invalid_argument);
}

TEST(CmaEs, FreshState) {
    auto s = make(6, 10, 0.3, 0.5, 1);
    EXPECT_EQ(s.sigma, 0.3);
    EXPECT_TRUE(s.mean.isApproxToConstant(0.5));
    EXPECT_TRUE(covariance(s).isIdentity(0));
    EXPECT_TRUE(s.p_sigma.isZero(0));
    EXPECT_TRUE(s.p_c.isZero(0));
    EXPECT_EQ(ask(s).size(), 10u);
}

TEST(CmaEs, SolvesSphere) {
    auto s = make(10, 20, 0.5, 1.0, 7);
    double best = -1e300;
    int gens = 0;
    while (best < -1e-10 && gens < 2000) {
        best = std::max(best, generation(s, neg_sphere));
        ++gens;
    }
    EXPECT_GE(best, -1e-10) << "after " << gens << " generations";
}

TEST(CmaEs, SolvesRosenbrock) {
    auto s = make(5, 0, 0.5, 0.0, 3);
    double best = -1e300;
    for (int g = 0; g < 5000 && best < -1e-6; ++g)
        best = std::max(best, generation(s, neg_rosenbrock));
    EXPECT_GE(best, -1e-6);
    EXPECT_NEAR((s.mean - Eigen::VectorXd::Ones(5)).norm(), 0.0, 1e-2);
}

TEST(CmaEs, ImprovesOverWindows) {
    auto s = make(20, 0, 1.0, 3.0, 11);
    std::vector<double> means;
    for (int w = 0; w < 8; ++w) {
        double total = 0;
        for (int g = 0; g < 50; ++g)
            total += generation(s, neg_sphere);
        means.push_back(total / 50);
    }
    std::vector<double> gains;
    for (std::size_t i = 1; i < means.size(); ++i)
        gains.push_back(means[i] - means[i - 1]);
    std::nth_element(gains.begin(), gains.begin() + gains.size() / 2, gains.end());
    EXPECT_GT(gains[gains.size() / 2], 0.0);
}

TEST(CmaEs, Deterministic) {
    auto a = make(12, 0, 0.2, 0.1, 42);
    auto b = make(12, 0, 0.2, 0.1, 42);
    for (int g = 0; g < 150; ++g) {
        generation(a, neg_rosenbrock);
        generation(b, neg_rosenbrock);
    }
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_EQ(covariance(a), covariance(b));
    auto c = make(12, 0, 0.2, 0.1, 43);
    generation(c, neg_rosenbrock);
    auto d = make(12, 0, 0.2, 0.1, 42);
    generation(d, neg_rosenbrock);
    EXPECT_NE(c.mean, d.mean);
}

TEST(CmaEs, SamplesFollowCovariance) {
    const int n = 4;
    CmaConfig cfg;
    cfg.dimension = n;
    cfg.lambda = 1000;
    cfg.sigma0 = 2.0;
    cfg.mean = Eigen::Vector4d(1, -2, 3, 0.5);
    cfg.seed = 5;
    auto s = cma_init(cfg);
    Eigen::MatrixXd target(n, n);
    target << 4.0, 1.2, 0.0, -0.5,
              1.2, 2.0, 0.3, 0.0,
              0.0, 0.3, 1.0, 0.2,
              -0.5, 0.0, 0.2, 0.5;
    s.C = target;
    refresh_eigensystem(s);

    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(n);
    const int rounds = 100;
    for (int r = 0; r < rounds; ++r)
        for (const auto& x : ask(s)) {
            const Eigen::VectorXd y = (x - cfg.mean) / s.sigma;
            acc += y * y.transpose();
            mean_acc += y;
        }
    const double m = rounds * 1000.0;
    const Eigen::MatrixXd empirical = acc / m;
    EXPECT_LT((empirical - target).norm() / target.norm(), 0.05);
    EXPECT_LT((mean_acc / m).norm(), 0.05);
}

TEST(CmaEs, CovarianceSymmetricAndDecomposed) {
    auto s = make(30, 0, 0.3, 1.0, 9);
    for (int g = 0; g < 200; ++g) {
        generation(s, neg_rosenbrock);
        const Eigen::MatrixXd C = covariance(s);
        ASSERT_EQ(C, C.transpose());
        if (s.eigen_age == 0) {
            const Eigen::MatrixXd rebuilt = s.B * s.D.array().square().matrix().asDiagonal() * s.B.transpose();
            ASSERT_LT((rebuilt - C).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, C.cwiseAbs().maxCoeff()));
        }
    }
    refresh_eigensystem(s);
    const Eigen::MatrixXd C = covariance(s);
    const Eigen::MatrixXd rebuilt = s.B * s.D.array().square().matrix().asDiagonal() * s.B.transpose();
    EXPECT_LT((rebuilt - C).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, C.cwiseAbs().maxCoeff()));
    EXPECT_LT((s.B.transpose() * s.B - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(s.D.minCoeff(), 0.0);
}

// Under a constant objective the ranking carries no information, so the mean
// performs a random walk of typical step sigma * sqrt(n / mu_eff), scaled by
// the largest axis of C.
TEST(CmaEs, ConstantFitnessOnlyDrifts) {
    const int n = 10;
    auto s = make(n, 0, 0.5, 0.0, 13);
    const double sigma0 = s.sigma;
    for (int g = 0; g < 300; ++g) {
        const auto pop = ask(s);
        const std::vector<double> fit(pop.size(), 0.25);
        const Eigen::VectorXd before = s.mean;
        const double scale = s.sigma * s.D.maxCoeff();
        tell(s, pop, fit);
        ASSERT_LE((s.mean - before).norm(), 3 * scale * std::sqrt(n / s.params.mu_eff));
        ASSERT_TRUE(std::isfinite(s.sigma));
    }
    EXPECT_LT(s.sigma, 10 * sigma0);
    EXPECT_GT(s.sigma, sigma0 / 10);
    EXPECT_TRUE(covariance(s).allFinite());
}

TEST(CmaEs, RejectsBadTell) {
    auto s = make(3, 6, 0.5, 0.0, 1);
    const auto pop = ask(s);
    std::vector<double> fit(pop.size(), 1.0);
    fit[2] = std::nan("");
    EXPECT_THROW(tell(s, pop, fit), std::invalid_argument);
    fit.pop_back();
    EXPECT_THROW(tell(s, pop, fit), std::invalid_argument);
}

TEST(CmaEs, SaveLoadContinues) {
    auto a = make(8, 0, 0.4, 0.5, 77);
    for (int g = 0; g < 40; ++g)
        generation(a, neg_rosenbrock);
    std::stringstream ss;
    save_cma(ss, a);
    auto b = load_cma(ss);
    EXPECT_EQ(b.generation, a.generation);
    for (int g = 0; g < 40; ++g) {
        generation(a, neg_rosenbrock);
        generation(b, neg_rosenbrock);
    }
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_EQ(covariance(a), covariance(b));
    std::stringstream bad("NOTACMA");
    EXPECT_ANY_THROW(load_cma(bad));
}

TEST(CmaEs, DescendingOrderIsStable) {
    const std::vector<double> keys{1.0, 3.0, 1.0, 2.0, 3.0};
    EXPECT_EQ(descending_order(keys), (std::vector<int>{1, 4, 3, 0, 2}));
}

TEST(Linalg, LargeEigenproblem) {
    const int n = 300;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd A(n, n);
    for (auto& v : A.reshaped())
        v = normal(rng);
    const Eigen::MatrixXd S = A * A.transpose() / n + Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd V;
    Eigen::VectorXd d;
    Eigen::MatrixXd lower = S.triangularView<Eigen::Lower>();
    symmetric_eigen(lower, V, d);
    EXPECT_LT((V.transpose() * V - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((V * d.asDiagonal() * V.transpose() - S).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(d.sum(), S.trace(), 1e-8);
}
