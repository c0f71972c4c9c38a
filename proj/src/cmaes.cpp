#include "ncrs/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ncrs/binary_io.hpp"
#include "ncrs/errors.hpp"
#include "ncrs/linalg.hpp"

namespace ncrs {

int CmaConfig::resolved_lambda() const {
    if (lambda > 0)
        return lambda;
    return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

CmaParameters CmaParameters::standard(int dimension, int lambda) {
    CmaParameters p;
    const double n = dimension;
    p.dimension = dimension;
    p.lambda = lambda;
    p.mu = lambda / 2;
    p.weights.resize(p.mu);
    for (int i = 0; i < p.mu; ++i)
        p.weights[i] = std::log((lambda + 1) / 2.0) - std::log(i + 1.0);
    p.weights /= p.weights.sum();
    p.mu_eff = 1.0 / p.weights.squaredNorm();

    p.c_sigma = (p.mu_eff + 2.0) / (n + p.mu_eff + 5.0);
    p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((p.mu_eff - 1.0) / (n + 1.0)) - 1.0) + p.c_sigma;
    p.c_c = (4.0 + p.mu_eff / n) / (n + 4.0 + 2.0 * p.mu_eff / n);
    p.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + p.mu_eff);
    p.c_mu = std::min(1.0 - p.c_1, 2.0 * (p.mu_eff - 2.0 + 1.0 / p.mu_eff) / ((n + 2.0) * (n + 2.0) + p.mu_eff));
    p.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    p.eigen_interval = std::max(1, static_cast<int>(std::ceil(1.0 / (10.0 * n * (p.c_1 + p.c_mu)))));
    return p;
}

CmaState cma_init(const CmaConfig& config) {
    if (config.dimension <= 0)
        throw std::invalid_argument("CMA-ES dimension must be positive");
    if (!(config.sigma0 > 0))
        throw std::invalid_argument("CMA-ES initial step size must be positive");
    const int lambda = config.resolved_lambda();
    if (lambda < 2)
        throw std::invalid_argument("CMA-ES population must be at least 2");
    if (config.mean.size() != 0 && config.mean.size() != config.dimension)
        throw std::invalid_argument("initial mean has the wrong dimension");

    const auto n = static_cast<Eigen::Index>(config.dimension);
    CmaState s;
    s.config = config;
    s.config.lambda = lambda;
    s.params = CmaParameters::standard(config.dimension, lambda);
    s.mean = config.mean.size() ? config.mean : Eigen::VectorXd::Zero(n);
    s.sigma = config.sigma0;
    s.C = Eigen::MatrixXd::Identity(n, n);
    s.B = Eigen::MatrixXd::Identity(n, n);
    s.D = Eigen::VectorXd::Ones(n);
    s.p_sigma = Eigen::VectorXd::Zero(n);
    s.p_c = Eigen::VectorXd::Zero(n);
    s.rng.seed(config.seed);
    return s;
}

void refresh_eigensystem(CmaState& s) {
    Eigen::VectorXd eig;
    symmetric_eigen(s.C, s.B, eig);
    if (eig.minCoeff() < kEigenFloor) {
        if (s.repairs == 0)
            std::cerr << "warning: covariance lost positive definiteness; flooring eigenvalues at " << kEigenFloor
                      << "\n";
        ++s.repairs;
        eig = eig.cwiseMax(kEigenFloor);
        s.C.noalias() = s.B * eig.asDiagonal() * s.B.transpose();
    }
    s.D = eig.cwiseSqrt();
    s.eigen_age = 0;
}

Eigen::MatrixXd covariance(const CmaState& s) {
    Eigen::MatrixXd full = s.C.triangularView<Eigen::Lower>();
    full.triangularView<Eigen::StrictlyUpper>() = full.transpose();
    return full;
}

std::vector<Eigen::VectorXd> ask(CmaState& s) {
    if (s.eigen_age >= s.params.eigen_interval)
        refresh_eigensystem(s);

    const auto n = s.mean.size();
    const int lambda = s.params.lambda;
    Eigen::MatrixXd z(n, lambda);
    std::normal_distribution<double> normal;
    for (int k = 0; k < lambda; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            z(i, k) = normal(s.rng);

    const Eigen::MatrixXd y = s.B * (s.D.asDiagonal() * z);
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(lambda));
    for (int k = 0; k < lambda; ++k)
        out.emplace_back(s.mean + s.sigma * y.col(k));
    return out;
}

std::vector<int> descending_order(std::span<const double> keys) {
    std::vector<int> order(keys.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return keys[a] > keys[b]; });
    return order;
}

void tell(CmaState& s, std::span<const Eigen::VectorXd> genomes, std::span<const double> fitnesses) {
    if (fitnesses.size() != genomes.size())
        throw std::invalid_argument("genome and fitness counts differ");
    for (double f : fitnesses)
        if (std::isnan(f))
            throw std::invalid_argument("NaN fitness passed to tell");
    const auto order = descending_order(fitnesses);
    tell_ranked(s, genomes, order);
}

void tell_ranked(CmaState& s, std::span<const Eigen::VectorXd> genomes, std::span<const int> order) {
    const auto& p = s.params;
    if (static_cast<int>(genomes.size()) != p.lambda || static_cast<int>(order.size()) != p.lambda)
        throw std::invalid_argument("tell expects exactly lambda candidates");
    const auto n = s.mean.size();
    for (const auto& g : genomes)
        if (g.size() != n)
            throw std::invalid_argument("candidate has the wrong dimension");

    Eigen::MatrixXd Y(n, p.mu);
    for (int i = 0; i < p.mu; ++i)
        Y.col(i) = (genomes[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] - s.mean) / s.sigma;
    const Eigen::VectorXd y_w = Y * p.weights;

    // C^{-1/2} y_w through the cached eigensystem.
    const Eigen::VectorXd inv_sqrt_c_yw = s.B * ((s.B.transpose() * y_w).cwiseQuotient(s.D));
    s.p_sigma = (1.0 - p.c_sigma) * s.p_sigma + std::sqrt(p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff) * inv_sqrt_c_yw;

    const double ps_norm = s.p_sigma.norm();
    const double decay = 1.0 - std::pow(1.0 - p.c_sigma, 2.0 * (s.generation + 1));
    const bool h_sigma = ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (n + 1.0)) * p.chi_n;
    s.p_c = (1.0 - p.c_c) * s.p_c;
    if (h_sigma)
        s.p_c += std::sqrt(p.c_c * (2.0 - p.c_c) * p.mu_eff) * y_w;

    const double old_weight =
        1.0 - p.c_1 - p.c_mu + (h_sigma ? 0.0 : p.c_1 * p.c_c * (2.0 - p.c_c));
    // Rank-one and rank-mu terms as one low-rank product M M^T, lower triangle only.
    Eigen::MatrixXd M(n, p.mu + 1);
    M.col(0) = std::sqrt(p.c_1) * s.p_c;
    for (int i = 0; i < p.mu; ++i)
        M.col(i + 1) = std::sqrt(p.c_mu * p.weights[i]) * Y.col(i);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index len = n - j;
        s.C.col(j).tail(len) *= old_weight;
        s.C.col(j).tail(len).noalias() += M.bottomRows(len) * M.row(j).transpose();
    }

    s.mean += s.sigma * y_w;
    s.sigma *= std::exp(std::min(1.0, (p.c_sigma / p.d_sigma) * (ps_norm / p.chi_n - 1.0)));
    ++s.generation;
    ++s.eigen_age;
}

namespace {
constexpr std::uint32_t kCmaVersion = 1;
}

void save_cma(std::ostream& os, const CmaState& s) {
    os.write("NCRSCMA\0", 8);
    bin::write_u32(os, kCmaVersion);
    bin::write_u32(os, static_cast<std::uint32_t>(s.config.dimension));
    bin::write_u32(os, static_cast<std::uint32_t>(s.config.lambda));
    bin::write_f64(os, s.config.sigma0);
    bin::write_u64(os, s.config.seed);
    bin::write_vector(os, s.config.mean);
    bin::write_vector(os, s.mean);
    bin::write_f64(os, s.sigma);
    bin::write_matrix(os, s.C);
    bin::write_matrix(os, s.B);
    bin::write_vector(os, s.D);
    bin::write_vector(os, s.p_sigma);
    bin::write_vector(os, s.p_c);
    bin::write_u32(os, static_cast<std::uint32_t>(s.generation));
    bin::write_u32(os, static_cast<std::uint32_t>(s.eigen_age));
    bin::write_u32(os, static_cast<std::uint32_t>(s.repairs));
    std::ostringstream rng;
    rng << s.rng;
    bin::write_string(os, rng.str());
}

CmaState load_cma(std::istream& is) {
    bin::expect_magic(is, std::string_view("NCRSCMA\0", 8));
    if (const auto v = bin::read_u32(is); v != kCmaVersion)
        throw DataError("unsupported CMA state version " + std::to_string(v));
    CmaState s;
    s.config.dimension = static_cast<int>(bin::read_u32(is));
    s.config.lambda = static_cast<int>(bin::read_u32(is));
    s.config.sigma0 = bin::read_f64(is);
    s.config.seed = bin::read_u64(is);
    s.config.mean = bin::read_vector(is);
    if (s.config.dimension <= 0 || s.config.lambda < 2)
        throw DataError("corrupt CMA state header");
    s.params = CmaParameters::standard(s.config.dimension, s.config.lambda);
    s.mean = bin::read_vector(is);
    s.sigma = bin::read_f64(is);
    s.C = bin::read_matrix(is);
    s.B = bin::read_matrix(is);
    s.D = bin::read_vector(is);
    s.p_sigma = bin::read_vector(is);
    s.p_c = bin::read_vector(is);
    s.generation = static_cast<int>(bin::read_u32(is));
    s.eigen_age = static_cast<int>(bin::read_u32(is));
    s.repairs = static_cast<int>(bin::read_u32(is));
    std::istringstream rng(bin::read_string(is));
    rng >> s.rng;
    const auto n = s.config.dimension;
    if (s.mean.size() != n || s.C.rows() != n || s.C.cols() != n || s.B.rows() != n || s.D.size() != n ||
        s.p_sigma.size() != n || s.p_c.size() != n || !rng)
        throw DataError("corrupt CMA state payload");
    return s;
}

} // namespace ncrs
