#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ncrs/rng.hpp"

namespace ncrs {

/// User-facing settings of a CMA-ES run (maximisation).
struct CmaConfig {
    int dimension = 0;
    int lambda = 0;            // 0 selects 4 + floor(3 ln n)
    Eigen::VectorXd mean;      // empty selects the zero vector
    double sigma0 = 0.01;
    std::uint64_t seed = 0;

    int resolved_lambda() const;
};

/// Strategy constants derived from (dimension, lambda) with the standard default
/// parameterisation:
///   mu = floor(lambda/2), w_i ∝ ln((lambda+1)/2) - ln(i), mu_eff = 1 / sum w_i^2
///   c_sigma = (mu_eff+2)/(n+mu_eff+5)
///   d_sigma = 1 + 2 max(0, sqrt((mu_eff-1)/(n+1)) - 1) + c_sigma
///   c_c = (4+mu_eff/n)/(n+4+2 mu_eff/n)
///   c_1 = 2/((n+1.3)^2+mu_eff)
///   c_mu = min(1-c_1, 2(mu_eff-2+1/mu_eff)/((n+2)^2+mu_eff))
/// The eigendecomposition is refreshed every ceil(1/(10 n (c_1+c_mu))) generations.
struct CmaParameters {
    int dimension = 0;
    int lambda = 0;
    int mu = 0;
    Eigen::VectorXd weights;
    double mu_eff = 0.0;
    double c_sigma = 0.0;
    double d_sigma = 0.0;
    double c_c = 0.0;
    double c_1 = 0.0;
    double c_mu = 0.0;
    double chi_n = 0.0;
    int eigen_interval = 1;

    static CmaParameters standard(int dimension, int lambda);
};

struct CmaState {
    CmaConfig config;
    CmaParameters params;
    Eigen::VectorXd mean;
    double sigma = 0.0;
    Eigen::MatrixXd C;   // only the lower triangle is maintained; see covariance()
    Eigen::MatrixXd B;   // eigenvectors of C at the last refresh (columns)
    Eigen::VectorXd D;   // square roots of the eigenvalues
    Eigen::VectorXd p_sigma;
    Eigen::VectorXd p_c;
    int generation = 0;
    int eigen_age = 0;   // generations since B, D were computed
    int repairs = 0;     // eigenvalue floorings applied
    Rng rng;
};

inline constexpr double kEigenFloor = 1e-20;

/// Fresh state: mean from the config, sigma = sigma0, C = I, zero paths.
/// Throws std::invalid_argument for a non-positive dimension, lambda < 2 or sigma0 <= 0.
CmaState cma_init(const CmaConfig& config);

/// Recomputes B and D from C now, flooring eigenvalues at kEigenFloor.
void refresh_eigensystem(CmaState& state);

/// Full symmetric covariance matrix built from the lower triangle of state.C.
Eigen::MatrixXd covariance(const CmaState& state);

/// Samples lambda candidates mean + sigma * B * D * z.
std::vector<Eigen::VectorXd> ask(CmaState& state);

/// Updates the distribution from an evaluated population (higher fitness is better).
/// Throws std::invalid_argument on size mismatch or NaN fitness.
void tell(CmaState& state, std::span<const Eigen::VectorXd> genomes, std::span<const double> fitnesses);

/// Same update with an explicit ranking: order[0] is the best candidate.
void tell_ranked(CmaState& state, std::span<const Eigen::VectorXd> genomes, std::span<const int> order);

/// Indices sorted by descending key, stable for ties.
std::vector<int> descending_order(std::span<const double> keys);

void save_cma(std::ostream& os, const CmaState& state);
CmaState load_cma(std::istream& is);

} // namespace ncrs
